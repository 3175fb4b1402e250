#include "qpcm/synth.hpp"

#include <algorithm>
#include <cmath>

#include "qpcm/errors.hpp"
#include "qpcm/frequency_model.hpp"

namespace qpcm {

namespace {

// Stream tags; part of the deterministic output contract.
enum Tag : std::uint64_t {
  TAG_SHEET_DIE = 1,
  TAG_WIDTH = 2,
  TAG_RA = 3,
  TAG_VBT = 4,
  TAG_EXPONENT = 5,
  TAG_IV_NOISE = 6,
  TAG_FAILURES = 7,
  TAG_SHEET_MAP = 8,
  TAG_CRYO = 9,
};

double radial_factor(double gradient, double r_mm, double wafer_radius_mm) {
  return 1.0 + gradient * (r_mm / wafer_radius_mm);
}

// Positive multiplicative-noise draw; nonpositive values are redrawn.
double draw_positive(double nominal, double rsd, RngStream& rng,
                     std::int64_t& resamples) {
  if (rsd == 0.0) return nominal;
  for (int k = 0; k < 64; ++k) {
    const double v = nominal * (1.0 + rsd * rng.gaussian());
    if (v > 0.0) return v;
    ++resamples;
  }
  fail(Errc::InvalidModel, "synth: noise level leaves no positive support");
}

std::uint64_t die_key(const DieSite& s) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.row)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.col));
}

void check_quantity(const QuantityModel& q, const char* name) {
  if (!(q.mean > 0.0) || !(q.rsd >= 0.0))
    fail(Errc::InvalidModel, std::string("synth: ") + name +
                                 " needs mean > 0 and rsd >= 0");
}

}  // namespace

WaferLayout standard_layout() {
  WaferLayout l;
  l.geometry = WaferGeometry{10.0, 7.0, 27, 19, 100.0};
  for (Layer layer : {Layer::BE, Layer::TE}) {
    for (double w : {350.0, 400.0, 500.0, 600.0, 700.0, 800.0, 900.0, 1000.0})
      l.shorts_per_die.push_back({layer, w, 200.0});
  }
  // 16 test junctions with distinct areas spanning 0.1225-1.0 um^2; the
  // first entry is the qubit-size junction (0.35 x 0.5 um).
  l.junctions_per_die.push_back({350.0, 500.0});
  l.junctions_per_die.push_back({500.0, 700.0});
  for (double w : {350.0, 400.0, 450.0, 500.0, 550.0, 600.0, 650.0, 700.0,
                   750.0, 800.0, 850.0, 900.0, 950.0, 1000.0})
    l.junctions_per_die.push_back({w, w});
  return l;
}

std::vector<std::pair<double, double>> sheet_sites_49(double radius_mm) {
  std::vector<std::pair<double, double>> sites;
  sites.emplace_back(0.0, 0.0);
  const struct {
    int count;
    double frac;
  } rings[] = {{8, 0.34}, {16, 0.67}, {24, 1.0}};
  for (const auto& ring : rings) {
    for (int k = 0; k < ring.count; ++k) {
      const double phi = 2.0 * M_PI * k / ring.count;
      sites.emplace_back(radius_mm * ring.frac * std::cos(phi),
                         radius_mm * ring.frac * std::sin(phi));
    }
  }
  return sites;
}

IVTrace generate_iv(double r_jj_ohm, double m, double v_bt_v,
                    double grid_step_v, double knee_v, double compliance_a,
                    double current_noise_rsd, std::uint64_t noise_seed) {
  if (!(r_jj_ohm > 0.0) || !(m > 2.0) || !(grid_step_v > 0.0) ||
      !(knee_v > 0.0) || !(v_bt_v > knee_v) || !(compliance_a > 0.0))
    fail(Errc::InvalidParams,
         "generate_iv: need r_jj > 0, m > 2, grid > 0, v_bt > knee > 0, "
         "compliance > 0");

  const double post_margin = std::max(4.0 * grid_step_v, 0.04);
  const auto n_steps =
      static_cast<int>(std::ceil((v_bt_v + post_margin) / grid_step_v));
  constexpr double post_bt_resistance = 10.0;  // near-short after breakthrough

  RngStream rng = RngStream::keyed(noise_seed, TAG_IV_NOISE);

  IVTrace t;
  t.compliance_a = compliance_a;
  t.points.reserve(static_cast<std::size_t>(n_steps) + 1);
  for (int k = 0; k <= n_steps; ++k) {
    const double v = k * grid_step_v;
    double i;
    if (v <= knee_v) {
      i = v / r_jj_ohm;
    } else if (v <= v_bt_v) {
      i = (knee_v / r_jj_ohm) * std::pow(v / knee_v, m);
    } else {
      i = v / post_bt_resistance;
    }
    if (current_noise_rsd > 0.0 && i > 0.0)
      i *= (1.0 + current_noise_rsd * rng.gaussian());
    i = std::clamp(i, -compliance_a, compliance_a);
    t.points.push_back({v, i});
  }
  return t;
}

TransitionTrace generate_transition(double r_normal_ohm, double t_onset_k,
                                    double t_zero_k, double t_max_k,
                                    double t_min_k, double step_k) {
  if (!(r_normal_ohm > 0.0) || !(t_zero_k < t_onset_k) ||
      !(t_onset_k < t_max_k) || !(t_min_k < t_zero_k) || !(step_k > 0.0))
    fail(Errc::InvalidParams,
         "generate_transition: need t_min < t_zero < t_onset < t_max");

  // Sharp drop to half the plateau right below the onset, then a tail that
  // collapses over the last few percent of the transition window.
  const double knee = t_onset_k - 0.01;
  TransitionTrace t;
  for (double temp = t_max_k; temp >= t_min_k - 1e-12; temp -= step_k) {
    double r;
    if (temp >= t_onset_k) {
      r = r_normal_ohm * (1.0 + 0.002 * (temp - t_onset_k));
    } else if (temp >= knee) {
      const double f = (temp - knee) / (t_onset_k - knee);
      r = r_normal_ohm * (0.5 + 0.5 * f);
    } else if (temp > t_zero_k) {
      const double f = (temp - t_zero_k) / (knee - t_zero_k);
      r = 0.5 * r_normal_ohm * f;
    } else {
      r = 0.0;
    }
    t.points.emplace_back(temp, r);
  }
  return t;
}

SynthResult generate(const VariationModel& model, const WaferLayout& layout) {
  check_quantity(model.sheet_be, "sheet_be");
  check_quantity(model.sheet_te, "sheet_te");
  check_quantity(model.ra_ohm_um2, "ra");
  check_quantity(model.v_bt, "v_bt");
  if (!(model.width_be.rsd >= 0.0) || !(model.width_te.rsd >= 0.0))
    fail(Errc::InvalidModel, "synth: width rsd must be >= 0");
  if (model.junction_failure_rate < 0.0 || model.junction_failure_rate > 1.0 ||
      model.short_failure_rate < 0.0 || model.short_failure_rate > 1.0)
    fail(Errc::InvalidModel, "synth: failure rates must lie in [0, 1]");
  if (layout.shorts_per_die.empty() && layout.junctions_per_die.empty())
    fail(Errc::InvalidModel, "synth: layout has no PCM structures");
  const WaferGeometry& g = layout.geometry;
  if (g.rows < 1 || g.cols < 1)
    fail(Errc::InvalidModel, "synth: layout needs explicit grid dimensions");

  SynthResult out;
  WaferDataset& ds = out.dataset;
  ds.wafer_id = "SYNTH-" + std::to_string(model.seed);
  ds.geometry = g;

  // Valid dies, row-major, optionally capped.
  std::vector<DieSite> dies;
  for (int row = 0; row < g.rows; ++row) {
    for (int col = 0; col < g.cols; ++col) {
      const double x = (col - (g.cols - 1) / 2.0) * g.pitch_x_mm;
      const double y = (row - (g.rows - 1) / 2.0) * g.pitch_y_mm;
      const double cx = std::abs(x) + g.pitch_x_mm / 2.0;
      const double cy = std::abs(y) + g.pitch_y_mm / 2.0;
      if (std::hypot(cx, cy) > g.wafer_radius_mm) continue;
      dies.push_back(DieSite{row, col, x, y, true});
      if (layout.max_dies > 0 &&
          dies.size() == static_cast<std::size_t>(layout.max_dies))
        break;
    }
    if (layout.max_dies > 0 &&
        dies.size() == static_cast<std::size_t>(layout.max_dies))
      break;
  }
  if (dies.empty()) fail(Errc::InvalidModel, "synth: no dies fit the wafer");

  const double wafer_r = g.wafer_radius_mm;

  // 49-point sheet map of the BE film.
  {
    int idx = 1;
    for (const auto& [x, y] : sheet_sites_49(0.95 * wafer_r)) {
      RngStream rng = RngStream::keyed(model.seed, TAG_SHEET_MAP,
                                       static_cast<std::uint64_t>(idx));
      const double nominal =
          model.sheet_be.mean *
          radial_factor(model.sheet_be.radial_gradient, std::hypot(x, y),
                        wafer_r);
      SheetSample s;
      s.wafer_id = ds.wafer_id;
      s.site_index = idx++;
      s.x_mm = x;
      s.y_mm = y;
      s.layer = Layer::BE;
      s.sheet_resistance_ohm_sq =
          draw_positive(nominal, model.sheet_be.rsd, rng, out.resamples);
      ds.sheets.push_back(s);
    }
  }

  // Per-die records.
  std::int64_t iv_die_counter = 0;
  for (const auto& site : dies) {
    const double r_mm = site.radius_mm();
    const std::uint64_t dk = die_key(site);

    // One local sheet value per layer per die, shared by that die's shorts.
    double sheet_local[2];
    for (Layer layer : {Layer::BE, Layer::TE}) {
      const QuantityModel& q =
          layer == Layer::BE ? model.sheet_be : model.sheet_te;
      RngStream rng = RngStream::keyed(model.seed, TAG_SHEET_DIE, dk,
                                       static_cast<std::uint64_t>(layer));
      sheet_local[static_cast<int>(layer)] =
          draw_positive(q.mean * radial_factor(q.radial_gradient, r_mm, wafer_r),
                        q.rsd, rng, out.resamples);
    }

    auto draw_width_nm = [&](const WidthModel& wm, double design_nm, Layer layer,
                             std::uint64_t elem) {
      const double nominal = (design_nm - wm.delta_w_nm) *
                             radial_factor(wm.radial_gradient, r_mm, wafer_r);
      RngStream rng = RngStream::keyed(
          model.seed, TAG_WIDTH, dk,
          (elem << 1) | static_cast<std::uint64_t>(layer));
      return draw_positive(nominal, wm.rsd, rng, out.resamples);
    };

    for (std::size_t si = 0; si < layout.shorts_per_die.size(); ++si) {
      const ShortSpec& spec = layout.shorts_per_die[si];
      const WidthModel& wm =
          spec.layer == Layer::BE ? model.width_be : model.width_te;
      const double w_nm = draw_width_nm(wm, spec.width_nm, spec.layer, si);
      ShortRecord r;
      r.wafer_id = ds.wafer_id;
      r.site = site;
      r.structure_id = std::string("S") + to_string(spec.layer) +
                       std::to_string(static_cast<int>(spec.width_nm));
      r.layer = spec.layer;
      r.design_width_nm = spec.width_nm;
      r.design_length_um = spec.length_um;
      r.resistance_ohm = sheet_local[static_cast<int>(spec.layer)] *
                         spec.length_um / (w_nm * 1e-3);
      r.status = ShortStatus::OK;
      ds.shorts.push_back(r);
    }

    for (std::size_t ji = 0; ji < layout.junctions_per_die.size(); ++ji) {
      const JunctionSpec& spec = layout.junctions_per_die[ji];
      const double wbe = draw_width_nm(model.width_be, spec.wbe_nm, Layer::BE,
                                       1000 + ji);
      const double wte = draw_width_nm(model.width_te, spec.wte_nm, Layer::TE,
                                       1000 + ji);
      RngStream rng = RngStream::keyed(model.seed, TAG_RA, dk, ji);
      const double ra =
          draw_positive(model.ra_ohm_um2.mean *
                            radial_factor(model.ra_ohm_um2.radial_gradient,
                                          r_mm, wafer_r),
                        model.ra_ohm_um2.rsd, rng, out.resamples);
      const double area_um2 = (wbe * 1e-3) * (wte * 1e-3);
      JunctionRecord j;
      j.wafer_id = ds.wafer_id;
      j.site = site;
      j.junction_id = "J" + std::to_string(ji);
      j.design_area_um2 = spec.area_um2();
      j.design_width_be_nm = spec.wbe_nm;
      j.design_width_te_nm = spec.wte_nm;
      j.resistance_ohm = ra / area_um2;
      j.status = JunctionStatus::OK;
      ds.junctions.push_back(j);
    }

    // IV sweeps for the configured junction selection.
    if (layout.iv_stride > 0 && !layout.iv_junction_indices.empty() &&
        iv_die_counter % layout.iv_stride == 0) {
      for (int ji : layout.iv_junction_indices) {
        if (ji < 0 ||
            ji >= static_cast<int>(layout.junctions_per_die.size()))
          fail(Errc::InvalidModel, "synth: iv junction index out of range");
        const std::size_t rec_idx =
            ds.junctions.size() - layout.junctions_per_die.size() +
            static_cast<std::size_t>(ji);
        const JunctionRecord& j = ds.junctions[rec_idx];

        RngStream vrng = RngStream::keyed(model.seed, TAG_VBT, dk,
                                          static_cast<std::uint64_t>(ji));
        const double vbt =
            draw_positive(model.v_bt.mean *
                              radial_factor(model.v_bt.radial_gradient, r_mm,
                                            wafer_r),
                          model.v_bt.rsd, vrng, out.resamples);
        RngStream mrng = RngStream::keyed(model.seed, TAG_EXPONENT, dk,
                                          static_cast<std::uint64_t>(ji));
        double m = model.iv_exponent_mean;
        if (model.iv_exponent_sd > 0.0) {
          do {
            m = model.iv_exponent_mean + model.iv_exponent_sd * mrng.gaussian();
          } while (m <= 2.05);
        }
        const std::uint64_t noise_seed =
            model.iv_current_noise_rsd > 0.0
                ? model.seed ^ (dk * 0x9E3779B97F4A7C15ULL + ji)
                : 0;
        IVTrace t = generate_iv(
            j.resistance_ohm, m, std::max(vbt, layout.iv_knee_v + 0.05),
            layout.iv_grid_step_v, layout.iv_knee_v, layout.iv_compliance_a,
            model.iv_current_noise_rsd, noise_seed);
        t.wafer_id = ds.wafer_id;
        t.die_row = site.row;
        t.die_col = site.col;
        t.junction_id = j.junction_id;
        t.area_um2 = j.design_area_um2;
        ds.iv_traces.push_back(std::move(t));
      }
    }
    ++iv_die_counter;
  }

  // Deterministic failure injection: exactly round(rate * n) records fail,
  // at pseudo-random positions (Fisher-Yates prefix keyed by the seed).
  auto inject = [&](auto& records, double rate, auto make_fail) {
    const auto n = static_cast<std::int64_t>(records.size());
    const auto n_fail = static_cast<std::int64_t>(std::llround(rate * n));
    if (n_fail <= 0) return;
    std::vector<std::int64_t> order(n);
    for (std::int64_t i = 0; i < n; ++i) order[i] = i;
    RngStream rng = RngStream::keyed(model.seed, TAG_FAILURES,
                                     static_cast<std::uint64_t>(n));
    for (std::int64_t i = 0; i < n_fail; ++i) {
      const auto j = i + static_cast<std::int64_t>(rng.next_u64() %
                                                   static_cast<std::uint64_t>(
                                                       n - i));
      std::swap(order[i], order[j]);
      make_fail(records[static_cast<std::size_t>(order[i])], i);
    }
  };
  inject(ds.junctions, model.junction_failure_rate,
         [](JunctionRecord& j, std::int64_t i) {
           if (i % 2 == 0) {
             j.status = JunctionStatus::OPEN;
             j.resistance_ohm = 1e9;
           } else {
             j.status = JunctionStatus::SHORTED_FAIL;
             j.resistance_ohm = 5.0;
           }
         });
  inject(ds.shorts, model.short_failure_rate,
         [](ShortRecord& s, std::int64_t i) {
           if (i % 2 == 0) {
             s.status = ShortStatus::OPEN;
             s.resistance_ohm = 1e9;
           } else {
             s.status = ShortStatus::SHORTED_FAIL;
             s.resistance_ohm = 0.5;
           }
         });

  // Cryo records: chips spread over the dies, Rn from the qubit-size junction
  // model, f01 from the Ambegaokar-Baratoff relation plus optional noise.
  if (model.cryo.n_chips > 0) {
    const AbModel ab{model.cryo.tc_k, model.cryo.cq_f,
                     ModelProvenance::ASSUMED};
    const double rn_mean = model.cryo.rn_mean_ohm > 0.0
                               ? model.cryo.rn_mean_ohm
                               : model.ra_ohm_um2.mean / 0.175;
    const double rn_rsd =
        model.cryo.rn_rsd > 0.0
            ? model.cryo.rn_rsd
            : std::sqrt(model.ra_ohm_um2.rsd * model.ra_ohm_um2.rsd +
                        model.width_be.rsd * model.width_be.rsd +
                        model.width_te.rsd * model.width_te.rsd);
    for (int chip = 0; chip < model.cryo.n_chips; ++chip) {
      const DieSite& site = dies[static_cast<std::size_t>(
          (chip * dies.size()) / model.cryo.n_chips)];
      for (int q = 0; q < model.cryo.qubits_per_chip; ++q) {
        RngStream rng = RngStream::keyed(
            model.seed, TAG_CRYO, static_cast<std::uint64_t>(chip),
            static_cast<std::uint64_t>(q));
        CryoRecord r;
        r.chip_id = "D" + std::to_string(site.row) + "_" +
                    std::to_string(site.col);
        r.qubit_id = "Q" + std::to_string(q);
        r.rn_ohm = draw_positive(rn_mean, rn_rsd, rng, out.resamples);
        double f01 = predict_f01(r.rn_ohm, ab);
        if (model.cryo.f01_noise_rsd > 0.0)
          f01 *= (1.0 + model.cryo.f01_noise_rsd * rng.gaussian());
        r.f01_hz = f01;
        ds.cryo.push_back(r);
      }
    }
  }

  return out;
}

}  // namespace qpcm
