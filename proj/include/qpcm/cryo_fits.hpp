#pragma once

#include <Eigen/Dense>
#include <string>

namespace qpcm {

enum class TraceKind { T1, RAMSEY, RB };

const char* to_string(TraceKind k);

// One time-domain measurement: delay sweep (T1, Ramsey) or Clifford sequence
// length sweep (RB), with a normalized signal.
struct DecayTrace {
  TraceKind kind = TraceKind::T1;
  std::string qubit_id;
  Eigen::VectorXd x;  // seconds (T1/RAMSEY) or sequence length (RB)
  Eigen::VectorXd y;
};

struct CoherenceResult {
  TraceKind kind = TraceKind::T1;
  // T1 [s], T2* [s], or RB decay parameter p, with its standard error.
  double value = 0.0;
  double value_se = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  // Ramsey only.
  double detuning_hz = 0.0;
  double phase_rad = 0.0;
  bool overdamped = false;
  // RB only: average gate fidelity F = 1 - (1 - p)/2.
  double fidelity = 0.0;
  double fidelity_se = 0.0;
  double r_squared = 0.0;
};

// y = a exp(-t/T1) + c
CoherenceResult fit_t1(const DecayTrace& trace);

// y = a exp(-t/T2*) cos(2 pi df t + phi) + c. Traces without a resolvable
// oscillation are fitted with df fixed to 0 and flagged overdamped.
CoherenceResult fit_ramsey(const DecayTrace& trace);

// y = a p^m + c over Clifford count m; single-qubit depolarizing convention.
CoherenceResult fit_rb(const DecayTrace& trace);

}  // namespace qpcm
