#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qpcm {

enum class Layer { BE, TE };
enum class ShortStatus { OK, OPEN, SHORTED_FAIL, OUT_OF_RANGE };
enum class JunctionStatus { OK, OPEN, SHORTED_FAIL };
enum class Filter { NONE, IQR_1_5 };

const char* to_string(Layer l);
const char* to_string(ShortStatus s);
const char* to_string(JunctionStatus s);
const char* to_string(Filter f);

// Die grid geometry. Row/col indices map to physical die-center coordinates;
// the grid is centered on the wafer. rows/cols = 0 means "derive from data".
struct WaferGeometry {
  double pitch_x_mm = 10.0;
  double pitch_y_mm = 7.0;
  int rows = 0;
  int cols = 0;
  double wafer_radius_mm = 100.0;
};

struct DieSite {
  int row = 0;
  int col = 0;
  double x_mm = 0.0;
  double y_mm = 0.0;
  // False for edge dies whose outline crosses the wafer edge. Such dies are
  // kept, never silently dropped.
  bool on_wafer = true;

  double radius_mm() const { return std::hypot(x_mm, y_mm); }
};

// Computes physical coordinates for a grid index. Throws UnitError if the die
// center lies outside the wafer.
DieSite make_die_site(const WaferGeometry& g, int row, int col);

struct ShortRecord {
  std::string wafer_id;
  DieSite site;
  std::string structure_id;
  Layer layer = Layer::BE;
  double design_width_nm = 0.0;
  double design_length_um = 0.0;
  double resistance_ohm = 0.0;
  ShortStatus status = ShortStatus::OK;
};

struct SheetSample {
  std::string wafer_id;
  int site_index = 0;  // 1..49 in the standard pattern
  double x_mm = 0.0;
  double y_mm = 0.0;
  Layer layer = Layer::BE;
  double sheet_resistance_ohm_sq = 0.0;
};

struct JunctionRecord {
  std::string wafer_id;
  DieSite site;
  std::string junction_id;
  double design_area_um2 = 0.0;
  double design_width_be_nm = 0.0;
  double design_width_te_nm = 0.0;
  double resistance_ohm = 0.0;
  JunctionStatus status = JunctionStatus::OK;
};

// Resistance window for a working junction; bounds are strict.
struct SpecLimits {
  double r_min_ohm = 100.0;
  double r_max_ohm = 50e3;

  bool valid() const { return r_min_ohm > 0.0 && r_min_ohm < r_max_ohm; }
  bool passes(double r_ohm) const {
    return r_ohm > r_min_ohm && r_ohm < r_max_ohm;
  }
};

struct StatSummary {
  std::int64_t n = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, n-1 denominator
  double rsd = 0.0;  // std / mean
  std::int64_t n_excluded = 0;
  Filter filter = Filter::NONE;
};

struct IVPoint {
  double voltage_v = 0.0;
  double current_a = 0.0;
};

struct IVTrace {
  std::string wafer_id;
  int die_row = 0;
  int die_col = 0;
  std::string junction_id;
  double area_um2 = 0.0;
  double compliance_a = 0.0;
  std::vector<IVPoint> points;  // strictly increasing voltage
};

struct CryoRecord {
  std::string chip_id;
  std::string qubit_id;
  double rn_ohm = 0.0;
  double f01_hz = 0.0;
  std::optional<double> t1_s;
  std::optional<double> t2star_s;
};

// Four-point resistance of a test short during cooldown, descending in T.
struct TransitionTrace {
  std::vector<std::pair<double, double>> points;  // (temperature_k, resistance_ohm)
};

struct Histogram {
  std::vector<double> edges;        // size counts.size() + 1
  std::vector<std::int64_t> counts;
};

// All measurement records for one wafer. Immutable after ingest; analyses are
// pure functions of this container.
struct WaferDataset {
  std::string wafer_id;
  WaferGeometry geometry;
  std::vector<ShortRecord> shorts;
  std::vector<SheetSample> sheets;
  std::vector<JunctionRecord> junctions;
  std::vector<IVTrace> iv_traces;
  std::vector<CryoRecord> cryo;
  std::optional<TransitionTrace> transition;
};

}  // namespace qpcm
