#include "qpcm/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qpcm/errors.hpp"

namespace qpcm {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return "fnv1a64:" + out;
}

const char* to_string(FileKind k) {
  switch (k) {
    case FileKind::SHORTS: return "SHORTS";
    case FileKind::SHEET: return "SHEET";
    case FileKind::JUNCTIONS: return "JUNCTIONS";
    case FileKind::IV: return "IV";
    case FileKind::CRYO: return "CRYO";
    case FileKind::TRANSITION: return "TRANSITION";
  }
  return "?";
}

namespace {

FileKind parse_kind(const std::string& s, const std::string& where) {
  for (FileKind k : {FileKind::SHORTS, FileKind::SHEET, FileKind::JUNCTIONS,
                     FileKind::IV, FileKind::CRYO, FileKind::TRANSITION})
    if (s == to_string(k)) return k;
  fail(Errc::SchemaMismatch, where + ": unknown file kind '" + s + "'");
}

// Strict line-oriented CSV cursor; tracks 1-based row numbers (header = 1).
struct CsvReader {
  std::string_view bytes;
  std::string filename;
  std::size_t pos = 0;
  int row = 0;

  std::string where() const {
    return filename + " row " + std::to_string(row);
  }

  bool next_line(std::string_view& line) {
    while (true) {
      if (pos >= bytes.size()) return false;
      std::size_t end = bytes.find('\n', pos);
      if (end == std::string_view::npos) end = bytes.size();
      line = bytes.substr(pos, end - pos);
      pos = end + 1;
      ++row;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty() && pos >= bytes.size()) return false;  // trailing \n
      if (line.empty())
        fail(Errc::SchemaMismatch, where() + ": blank line");
      return true;
    }
  }
};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

void expect_header(CsvReader& r, std::span<const std::string_view> columns,
                   int n_optional = 0, int* n_present = nullptr) {
  std::string_view line;
  if (!r.next_line(line))
    fail(Errc::SchemaMismatch, r.filename + ": empty file, header expected");
  const auto fields = split_fields(line);
  const std::size_t required = columns.size() - static_cast<std::size_t>(n_optional);
  if (fields.size() < required || fields.size() > columns.size())
    fail(Errc::SchemaMismatch,
         r.where() + ": expected " + std::to_string(required) +
             (n_optional ? ".." + std::to_string(columns.size()) : "") +
             " columns, found " + std::to_string(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i] != columns[i])
      fail(Errc::SchemaMismatch, r.where() + ": column " +
                                     std::to_string(i + 1) + " must be '" +
                                     std::string(columns[i]) + "', found '" +
                                     std::string(fields[i]) + "'");
  }
  if (n_present) *n_present = static_cast<int>(fields.size());
}

std::vector<std::string_view> expect_row(CsvReader& r, std::string_view line,
                                         std::size_t n_columns) {
  const auto fields = split_fields(line);
  if (fields.size() != n_columns)
    fail(Errc::SchemaMismatch, r.where() + ": expected " +
                                   std::to_string(n_columns) +
                                   " fields, found " +
                                   std::to_string(fields.size()));
  return fields;
}

double parse_double(const CsvReader& r, std::string_view field,
                    std::string_view column) {
  double v{};
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    fail(Errc::SchemaMismatch, r.where() + ": '" + std::string(field) +
                                   "' is not a number (column " +
                                   std::string(column) + ")");
  return v;
}

double parse_finite(const CsvReader& r, std::string_view field,
                    std::string_view column) {
  const double v = parse_double(r, field, column);
  if (!std::isfinite(v))
    fail(Errc::UnitError, r.where() + ": non-finite value in column " +
                              std::string(column));
  return v;
}

int parse_int(const CsvReader& r, std::string_view field,
              std::string_view column) {
  int v{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    fail(Errc::SchemaMismatch, r.where() + ": '" + std::string(field) +
                                   "' is not an integer (column " +
                                   std::string(column) + ")");
  return v;
}

Layer parse_layer(const CsvReader& r, std::string_view field) {
  if (field == "BE") return Layer::BE;
  if (field == "TE") return Layer::TE;
  fail(Errc::SchemaMismatch,
       r.where() + ": layer must be BE or TE, found '" + std::string(field) +
           "'");
}

ShortStatus parse_short_status(const CsvReader& r, std::string_view field) {
  if (field == "OK") return ShortStatus::OK;
  if (field == "OPEN") return ShortStatus::OPEN;
  if (field == "SHORTED_FAIL") return ShortStatus::SHORTED_FAIL;
  if (field == "OUT_OF_RANGE") return ShortStatus::OUT_OF_RANGE;
  fail(Errc::SchemaMismatch,
       r.where() + ": unknown status '" + std::string(field) + "'");
}

JunctionStatus parse_junction_status(const CsvReader& r,
                                     std::string_view field) {
  if (field == "OK") return JunctionStatus::OK;
  if (field == "OPEN") return JunctionStatus::OPEN;
  if (field == "SHORTED_FAIL") return JunctionStatus::SHORTED_FAIL;
  fail(Errc::SchemaMismatch,
       r.where() + ": unknown status '" + std::string(field) + "'");
}

// Rows carry grid indices only; physical coordinates come from the geometry.
// With rows/cols = 0 the grid is centered on the index bounding box.
struct SiteResolver {
  WaferGeometry g;
  double center_row = 0.0;
  double center_col = 0.0;

  explicit SiteResolver(const WaferGeometry& geometry,
                        std::span<const std::pair<int, int>> indices)
      : g(geometry) {
    if (g.rows > 0 && g.cols > 0) {
      center_row = (g.rows - 1) / 2.0;
      center_col = (g.cols - 1) / 2.0;
      return;
    }
    int rmin = 0, rmax = 0, cmin = 0, cmax = 0;
    bool first = true;
    for (const auto& [row, col] : indices) {
      if (first) {
        rmin = rmax = row;
        cmin = cmax = col;
        first = false;
      } else {
        rmin = std::min(rmin, row);
        rmax = std::max(rmax, row);
        cmin = std::min(cmin, col);
        cmax = std::max(cmax, col);
      }
    }
    center_row = (rmin + rmax) / 2.0;
    center_col = (cmin + cmax) / 2.0;
  }

  DieSite resolve(int row, int col, const std::string& where) const {
    DieSite s;
    s.row = row;
    s.col = col;
    s.x_mm = (col - center_col) * g.pitch_x_mm;
    s.y_mm = (row - center_row) * g.pitch_y_mm;
    if (s.radius_mm() > g.wafer_radius_mm + 1e-9)
      fail(Errc::UnitError,
           where + ": die (" + std::to_string(row) + "," +
               std::to_string(col) + ") lies off the wafer");
    const double cx = std::abs(s.x_mm) + g.pitch_x_mm / 2.0;
    const double cy = std::abs(s.y_mm) + g.pitch_y_mm / 2.0;
    s.on_wafer = std::hypot(cx, cy) <= g.wafer_radius_mm + 1e-9;
    return s;
  }
};

std::string dtos(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<ShortRecord> parse_shorts_csv(std::string_view bytes,
                                          const WaferGeometry& geometry,
                                          const std::string& filename) {
  static constexpr std::string_view kCols[] = {
      "wafer_id",        "die_row",          "die_col",
      "structure_id",    "layer",            "design_width_nm",
      "design_length_um", "resistance_ohm",  "status"};
  CsvReader r{bytes, filename};
  expect_header(r, kCols);

  struct Row {
    int file_row;
    std::string wafer_id, structure_id;
    int die_row, die_col;
    Layer layer;
    double width, length, resistance;
    ShortStatus status;
  };
  std::vector<Row> rows;
  std::set<std::tuple<int, int, std::string>> seen;
  std::string_view line;
  while (r.next_line(line)) {
    const auto f = expect_row(r, line, std::size(kCols));
    Row row;
    row.file_row = r.row;
    row.wafer_id = std::string(f[0]);
    row.die_row = parse_int(r, f[1], "die_row");
    row.die_col = parse_int(r, f[2], "die_col");
    row.structure_id = std::string(f[3]);
    row.layer = parse_layer(r, f[4]);
    row.width = parse_finite(r, f[5], "design_width_nm");
    row.length = parse_finite(r, f[6], "design_length_um");
    row.resistance = parse_finite(r, f[7], "resistance_ohm");
    row.status = parse_short_status(r, f[8]);

    if (row.width < 350.0 || row.width > 1000.0)
      fail(Errc::UnitError, r.where() + ": design_width_nm " + dtos(row.width) +
                                " outside the PCM range [350, 1000]");
    if (!(row.length > 0.0))
      fail(Errc::UnitError, r.where() + ": design_length_um must be positive");
    if (row.status == ShortStatus::OK && !(row.resistance > 0.0))
      fail(Errc::UnitError,
           r.where() + ": resistance_ohm " + dtos(row.resistance) +
               " must be positive for status OK");
    if (!seen.emplace(row.die_row, row.die_col, row.structure_id).second)
      fail(Errc::DuplicateRecord,
           r.where() + ": second record for die (" +
               std::to_string(row.die_row) + "," +
               std::to_string(row.die_col) + ") structure " +
               row.structure_id);
    rows.push_back(std::move(row));
  }

  std::vector<std::pair<int, int>> indices;
  indices.reserve(rows.size());
  for (const auto& row : rows) indices.emplace_back(row.die_row, row.die_col);
  const SiteResolver resolver(geometry, indices);

  std::vector<ShortRecord> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    ShortRecord rec;
    rec.wafer_id = row.wafer_id;
    rec.site = resolver.resolve(row.die_row, row.die_col,
                                filename + " row " +
                                    std::to_string(row.file_row));
    rec.structure_id = row.structure_id;
    rec.layer = row.layer;
    rec.design_width_nm = row.width;
    rec.design_length_um = row.length;
    rec.resistance_ohm = row.resistance;
    rec.status = row.status;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<SheetSample> parse_sheet_csv(std::string_view bytes,
                                         const std::string& filename) {
  static constexpr std::string_view kCols[] = {
      "wafer_id", "site_index", "x_mm", "y_mm", "layer",
      "sheet_resistance_ohm_sq"};
  CsvReader r{bytes, filename};
  expect_header(r, kCols);

  std::vector<SheetSample> out;
  std::set<std::pair<int, int>> seen;
  std::string_view line;
  while (r.next_line(line)) {
    const auto f = expect_row(r, line, std::size(kCols));
    SheetSample s;
    s.wafer_id = std::string(f[0]);
    s.site_index = parse_int(r, f[1], "site_index");
    s.x_mm = parse_finite(r, f[2], "x_mm");
    s.y_mm = parse_finite(r, f[3], "y_mm");
    s.layer = parse_layer(r, f[4]);
    s.sheet_resistance_ohm_sq =
        parse_finite(r, f[5], "sheet_resistance_ohm_sq");

    if (s.site_index < 1 || s.site_index > 49)
      fail(Errc::UnitError, r.where() + ": site_index " +
                                std::to_string(s.site_index) +
                                " outside the 49-point pattern [1, 49]");
    if (!(s.sheet_resistance_ohm_sq > 0.0))
      fail(Errc::UnitError,
           r.where() + ": sheet_resistance_ohm_sq must be positive");
    if (std::hypot(s.x_mm, s.y_mm) > 100.0 + 1e-9)
      fail(Errc::UnitError, r.where() + ": site lies off the wafer");
    if (!seen.emplace(s.site_index, static_cast<int>(s.layer)).second)
      fail(Errc::DuplicateRecord,
           r.where() + ": second sample for site " +
               std::to_string(s.site_index) + " layer " + to_string(s.layer));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<JunctionRecord> parse_junctions_csv(std::string_view bytes,
                                                const WaferGeometry& geometry,
                                                const std::string& filename) {
  static constexpr std::string_view kCols[] = {
      "wafer_id",           "die_row",
      "die_col",            "junction_id",
      "design_area_um2",    "design_width_be_nm",
      "design_width_te_nm", "resistance_ohm",
      "status"};
  CsvReader r{bytes, filename};
  expect_header(r, kCols);

  struct Row {
    int file_row;
    std::string wafer_id, junction_id;
    int die_row, die_col;
    double area, wbe, wte, resistance;
    JunctionStatus status;
  };
  std::vector<Row> rows;
  std::set<std::tuple<int, int, std::string>> seen;
  std::string_view line;
  while (r.next_line(line)) {
    const auto f = expect_row(r, line, std::size(kCols));
    Row row;
    row.file_row = r.row;
    row.wafer_id = std::string(f[0]);
    row.die_row = parse_int(r, f[1], "die_row");
    row.die_col = parse_int(r, f[2], "die_col");
    row.junction_id = std::string(f[3]);
    row.area = parse_finite(r, f[4], "design_area_um2");
    row.wbe = parse_finite(r, f[5], "design_width_be_nm");
    row.wte = parse_finite(r, f[6], "design_width_te_nm");
    row.resistance = parse_finite(r, f[7], "resistance_ohm");
    row.status = parse_junction_status(r, f[8]);

    if (row.area < 0.1225 - 1e-12 || row.area > 1.0 + 1e-12)
      fail(Errc::UnitError, r.where() + ": design_area_um2 " + dtos(row.area) +
                                " outside the PCM range [0.1225, 1.0]");
    if (!(row.wbe > 0.0) || !(row.wte > 0.0))
      fail(Errc::UnitError, r.where() + ": electrode widths must be positive");
    if (row.status == JunctionStatus::OK && !(row.resistance > 0.0))
      fail(Errc::UnitError,
           r.where() + ": resistance_ohm must be positive for status OK");
    if (!seen.emplace(row.die_row, row.die_col, row.junction_id).second)
      fail(Errc::DuplicateRecord,
           r.where() + ": second record for die (" +
               std::to_string(row.die_row) + "," +
               std::to_string(row.die_col) + ") junction " + row.junction_id);
    rows.push_back(std::move(row));
  }

  std::vector<std::pair<int, int>> indices;
  indices.reserve(rows.size());
  for (const auto& row : rows) indices.emplace_back(row.die_row, row.die_col);
  const SiteResolver resolver(geometry, indices);

  std::vector<JunctionRecord> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    JunctionRecord rec;
    rec.wafer_id = row.wafer_id;
    rec.site = resolver.resolve(row.die_row, row.die_col,
                                filename + " row " +
                                    std::to_string(row.file_row));
    rec.junction_id = row.junction_id;
    rec.design_area_um2 = row.area;
    rec.design_width_be_nm = row.wbe;
    rec.design_width_te_nm = row.wte;
    rec.resistance_ohm = row.resistance;
    rec.status = row.status;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<CryoRecord> parse_cryo_csv(std::string_view bytes,
                                       const std::string& filename) {
  static constexpr std::string_view kCols[] = {"chip_id", "qubit_id", "rn_ohm",
                                               "f01_hz", "t1_s", "t2star_s"};
  CsvReader r{bytes, filename};
  int n_cols = 0;
  expect_header(r, kCols, 2, &n_cols);

  std::vector<CryoRecord> out;
  std::set<std::pair<std::string, std::string>> seen;
  std::string_view line;
  while (r.next_line(line)) {
    const auto f = expect_row(r, line, static_cast<std::size_t>(n_cols));
    CryoRecord c;
    c.chip_id = std::string(f[0]);
    c.qubit_id = std::string(f[1]);
    c.rn_ohm = parse_finite(r, f[2], "rn_ohm");
    c.f01_hz = parse_finite(r, f[3], "f01_hz");
    if (!(c.rn_ohm > 0.0))
      fail(Errc::UnitError, r.where() + ": rn_ohm must be positive");
    if (!(c.f01_hz > 0.0))
      fail(Errc::UnitError, r.where() + ": f01_hz must be positive");
    for (int k = 4; k < n_cols; ++k) {
      if (f[static_cast<std::size_t>(k)].empty()) continue;
      const double v = parse_finite(r, f[static_cast<std::size_t>(k)],
                                    kCols[static_cast<std::size_t>(k)]);
      if (!(v > 0.0))
        fail(Errc::UnitError, r.where() + ": " +
                                  std::string(kCols[static_cast<std::size_t>(k)]) +
                                  " must be positive when present");
      (k == 4 ? c.t1_s : c.t2star_s) = v;
    }
    if (!seen.emplace(c.chip_id, c.qubit_id).second)
      fail(Errc::DuplicateRecord, r.where() + ": second record for " +
                                      c.chip_id + "/" + c.qubit_id);
    out.push_back(std::move(c));
  }
  return out;
}

TransitionTrace parse_transition_csv(std::string_view bytes,
                                     const std::string& filename) {
  static constexpr std::string_view kCols[] = {"temperature_k",
                                               "resistance_ohm"};
  CsvReader r{bytes, filename};
  expect_header(r, kCols);

  TransitionTrace t;
  std::string_view line;
  while (r.next_line(line)) {
    const auto f = expect_row(r, line, std::size(kCols));
    const double temp = parse_finite(r, f[0], "temperature_k");
    const double res = parse_finite(r, f[1], "resistance_ohm");
    if (!(temp > 0.0))
      fail(Errc::UnitError, r.where() + ": temperature_k must be positive");
    if (res < 0.0)
      fail(Errc::UnitError, r.where() + ": resistance_ohm must be >= 0");
    t.points.emplace_back(temp, res);
  }
  if (t.points.size() < 4)
    fail(Errc::TooFewPoints,
         filename + ": transition trace needs >= 4 points");

  const bool descending = t.points[0].first > t.points[1].first;
  for (std::size_t i = 1; i < t.points.size(); ++i) {
    const bool step_desc = t.points[i - 1].first > t.points[i].first;
    if (step_desc != descending || t.points[i - 1].first == t.points[i].first)
      fail(Errc::SchemaMismatch,
           filename + " row " + std::to_string(i + 2) +
               ": temperature_k must be strictly monotone");
  }
  if (!descending) std::reverse(t.points.begin(), t.points.end());
  return t;
}

IVTrace parse_iv_json(std::string_view bytes, const std::string& filename) {
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    fail(Errc::SchemaMismatch, filename + ": " + e.what());
  }
  if (!j.is_object())
    fail(Errc::SchemaMismatch, filename + ": top level must be an object");

  static const std::set<std::string> kKeys = {"wafer_id", "die", "junction_id",
                                              "area_um2", "compliance_a",
                                              "points"};
  for (const auto& [key, _] : j.items())
    if (!kKeys.count(key))
      fail(Errc::SchemaMismatch, filename + ": unknown key '" + key + "'");
  for (const auto& key : kKeys)
    if (!j.contains(key))
      fail(Errc::SchemaMismatch, filename + ": missing key '" + key + "'");

  IVTrace t;
  try {
    t.wafer_id = j.at("wafer_id").get<std::string>();
    t.die_row = j.at("die").at("row").get<int>();
    t.die_col = j.at("die").at("col").get<int>();
    t.junction_id = j.at("junction_id").get<std::string>();
    t.area_um2 = j.at("area_um2").get<double>();
    t.compliance_a = j.at("compliance_a").get<double>();
    for (const auto& p : j.at("points")) {
      if (!p.is_array() || p.size() != 2)
        fail(Errc::SchemaMismatch,
             filename + ": points must be [voltage_v, current_a] pairs");
      t.points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
  } catch (const json::exception& e) {
    fail(Errc::SchemaMismatch, filename + ": " + e.what());
  }

  if (!(t.area_um2 >= 0.1225 - 1e-12 && t.area_um2 <= 1.0 + 1e-12))
    fail(Errc::UnitError, filename + ": area_um2 " + dtos(t.area_um2) +
                              " outside the PCM range [0.1225, 1.0]");
  if (!(t.compliance_a > 0.0))
    fail(Errc::UnitError, filename + ": compliance_a must be positive");
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    const auto& p = t.points[i];
    if (!std::isfinite(p.voltage_v) || !std::isfinite(p.current_a))
      fail(Errc::UnitError, filename + ": point " + std::to_string(i) +
                                " is not finite");
    if (std::abs(p.current_a) > t.compliance_a * (1.0 + 1e-9))
      fail(Errc::UnitError, filename + ": point " + std::to_string(i) +
                                " exceeds compliance_a");
  }

  std::stable_sort(t.points.begin(), t.points.end(),
                   [](const IVPoint& a, const IVPoint& b) {
                     return a.voltage_v < b.voltage_v;
                   });
  std::vector<IVPoint> dedup;
  dedup.reserve(t.points.size());
  for (const auto& p : t.points) {
    if (!dedup.empty() && dedup.back().voltage_v == p.voltage_v) {
      if (dedup.back().current_a != p.current_a)
        fail(Errc::NonMonotonicAfterDedup,
             filename + ": duplicate voltage " + dtos(p.voltage_v) +
                 " V with conflicting currents");
      continue;
    }
    dedup.push_back(p);
  }
  t.points = std::move(dedup);
  if (t.points.size() < 8)
    fail(Errc::TooFewPoints, filename + ": " +
                                 std::to_string(t.points.size()) +
                                 " points after dedup (need >= 8)");
  return t;
}

DecayTrace parse_decay_csv(std::string_view bytes,
                           const std::string& filename) {
  CsvReader r{bytes, filename};
  std::string_view header;
  if (!r.next_line(header))
    fail(Errc::SchemaMismatch, filename + ": empty file, header expected");
  const auto hcols = split_fields(header);
  if (hcols.size() != 3 || hcols[0] != "kind" || hcols[2] != "signal" ||
      (hcols[1] != "delay_s" && hcols[1] != "clifford_count"))
    fail(Errc::SchemaMismatch,
         r.where() + ": header must be kind,delay_s,signal or "
                     "kind,clifford_count,signal");
  const bool is_delay = hcols[1] == "delay_s";

  DecayTrace t;
  std::vector<double> xs, ys;
  bool first = true;
  std::string_view line;
  while (r.next_line(line)) {
    const auto f = expect_row(r, line, 3);
    TraceKind kind;
    if (f[0] == "T1")
      kind = TraceKind::T1;
    else if (f[0] == "RAMSEY")
      kind = TraceKind::RAMSEY;
    else if (f[0] == "RB")
      kind = TraceKind::RB;
    else
      fail(Errc::SchemaMismatch,
           r.where() + ": kind must be T1, RAMSEY or RB");
    if ((kind == TraceKind::RB) == is_delay)
      fail(Errc::SchemaMismatch,
           r.where() + ": kind does not match the x column of the header");
    if (first) {
      t.kind = kind;
      first = false;
    } else if (kind != t.kind) {
      fail(Errc::SchemaMismatch, r.where() + ": kind changes mid-file");
    }
    xs.push_back(parse_finite(r, f[1], hcols[1]));
    ys.push_back(parse_finite(r, f[2], "signal"));
  }
  if (xs.size() < 4)
    fail(Errc::TooFewPoints, filename + ": trace needs >= 4 points");
  t.x = Eigen::Map<const Eigen::VectorXd>(xs.data(),
                                          static_cast<Eigen::Index>(xs.size()));
  t.y = Eigen::Map<const Eigen::VectorXd>(ys.data(),
                                          static_cast<Eigen::Index>(ys.size()));
  for (Eigen::Index i = 1; i < t.x.size(); ++i)
    if (!(t.x(i) > t.x(i - 1)))
      fail(Errc::SchemaMismatch,
           filename + ": x values must be strictly increasing");
  return t;
}

namespace {

void append_csv(std::string& out, std::initializer_list<std::string> fields) {
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out += ',';
    out += f;
    first = false;
  }
  out += '\n';
}

}  // namespace

std::string serialize_shorts_csv(std::span<const ShortRecord> records) {
  std::string out =
      "wafer_id,die_row,die_col,structure_id,layer,design_width_nm,"
      "design_length_um,resistance_ohm,status\n";
  for (const auto& r : records) {
    append_csv(out, {r.wafer_id, std::to_string(r.site.row),
                     std::to_string(r.site.col), r.structure_id,
                     to_string(r.layer), dtos(r.design_width_nm),
                     dtos(r.design_length_um), dtos(r.resistance_ohm),
                     to_string(r.status)});
  }
  return out;
}

std::string serialize_sheet_csv(std::span<const SheetSample> samples) {
  std::string out =
      "wafer_id,site_index,x_mm,y_mm,layer,sheet_resistance_ohm_sq\n";
  for (const auto& s : samples) {
    append_csv(out, {s.wafer_id, std::to_string(s.site_index), dtos(s.x_mm),
                     dtos(s.y_mm), to_string(s.layer),
                     dtos(s.sheet_resistance_ohm_sq)});
  }
  return out;
}

std::string serialize_junctions_csv(std::span<const JunctionRecord> records) {
  std::string out =
      "wafer_id,die_row,die_col,junction_id,design_area_um2,"
      "design_width_be_nm,design_width_te_nm,resistance_ohm,status\n";
  for (const auto& r : records) {
    append_csv(out, {r.wafer_id, std::to_string(r.site.row),
                     std::to_string(r.site.col), r.junction_id,
                     dtos(r.design_area_um2), dtos(r.design_width_be_nm),
                     dtos(r.design_width_te_nm), dtos(r.resistance_ohm),
                     to_string(r.status)});
  }
  return out;
}

std::string serialize_cryo_csv(std::span<const CryoRecord> records) {
  bool any_optional = false;
  for (const auto& r : records)
    if (r.t1_s || r.t2star_s) any_optional = true;
  std::string out = any_optional
                        ? "chip_id,qubit_id,rn_ohm,f01_hz,t1_s,t2star_s\n"
                        : "chip_id,qubit_id,rn_ohm,f01_hz\n";
  for (const auto& r : records) {
    if (any_optional) {
      append_csv(out, {r.chip_id, r.qubit_id, dtos(r.rn_ohm), dtos(r.f01_hz),
                       r.t1_s ? dtos(*r.t1_s) : "",
                       r.t2star_s ? dtos(*r.t2star_s) : ""});
    } else {
      append_csv(out, {r.chip_id, r.qubit_id, dtos(r.rn_ohm), dtos(r.f01_hz)});
    }
  }
  return out;
}

std::string serialize_transition_csv(const TransitionTrace& trace) {
  std::string out = "temperature_k,resistance_ohm\n";
  for (const auto& [t, r] : trace.points)
    append_csv(out, {dtos(t), dtos(r)});
  return out;
}

std::string serialize_iv_json(const IVTrace& trace) {
  json j;
  j["wafer_id"] = trace.wafer_id;
  j["die"] = {{"row", trace.die_row}, {"col", trace.die_col}};
  j["junction_id"] = trace.junction_id;
  j["area_um2"] = trace.area_um2;
  j["compliance_a"] = trace.compliance_a;
  json pts = json::array();
  for (const auto& p : trace.points)
    pts.push_back(json::array({p.voltage_v, p.current_a}));
  j["points"] = std::move(pts);
  return j.dump(1) + "\n";
}

FileManifest parse_manifest_json(std::string_view bytes,
                                 const std::string& base_dir,
                                 const std::string& filename) {
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    fail(Errc::SchemaMismatch, filename + ": " + e.what());
  }

  FileManifest m;
  m.base_dir = base_dir;
  try {
    if (j.at("schema_version").get<std::string>() != "qpcm-manifest/1")
      fail(Errc::SchemaMismatch,
           filename + ": unsupported schema_version (want qpcm-manifest/1)");
    m.wafer_id = j.at("wafer_id").get<std::string>();
    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      m.geometry.pitch_x_mm = g.value("pitch_x_mm", 10.0);
      m.geometry.pitch_y_mm = g.value("pitch_y_mm", 7.0);
      m.geometry.rows = g.value("rows", 0);
      m.geometry.cols = g.value("cols", 0);
      m.geometry.wafer_radius_mm = g.value("wafer_radius_mm", 100.0);
    }
    for (const auto& f : j.at("files")) {
      ManifestFile mf;
      mf.kind = parse_kind(f.at("kind").get<std::string>(), filename);
      mf.path = f.at("path").get<std::string>();
      if (f.contains("checksum"))
        mf.checksum = f.at("checksum").get<std::string>();
      m.files.push_back(std::move(mf));
    }
  } catch (const json::exception& e) {
    fail(Errc::SchemaMismatch, filename + ": " + e.what());
  }
  return m;
}

FileManifest load_manifest(const std::string& path) {
  const std::string bytes = read_file(path);
  const fs::path p(path);
  return parse_manifest_json(bytes, p.parent_path().string(),
                             p.filename().string());
}

WaferDataset load_wafer(const FileManifest& manifest) {
  WaferDataset ds;
  ds.wafer_id = manifest.wafer_id;
  ds.geometry = manifest.geometry;

  auto check_wafer_id = [&](const std::string& id, const std::string& file) {
    if (id != manifest.wafer_id)
      fail(Errc::SchemaMismatch, file + ": wafer_id '" + id +
                                     "' does not match manifest '" +
                                     manifest.wafer_id + "'");
  };

  for (const auto& mf : manifest.files) {
    const fs::path path = fs::path(manifest.base_dir) / mf.path;
    const std::string bytes = read_file(path.string());
    if (mf.checksum && *mf.checksum != fnv1a64_hex(bytes))
      fail(Errc::IoError, mf.path + ": checksum mismatch (manifest says " +
                              *mf.checksum + ", file hashes to " +
                              fnv1a64_hex(bytes) + ")");
    switch (mf.kind) {
      case FileKind::SHORTS: {
        auto records = parse_shorts_csv(bytes, manifest.geometry, mf.path);
        for (auto& r : records) check_wafer_id(r.wafer_id, mf.path);
        ds.shorts.insert(ds.shorts.end(),
                         std::make_move_iterator(records.begin()),
                         std::make_move_iterator(records.end()));
        break;
      }
      case FileKind::SHEET: {
        auto samples = parse_sheet_csv(bytes, mf.path);
        for (auto& s : samples) check_wafer_id(s.wafer_id, mf.path);
        ds.sheets.insert(ds.sheets.end(),
                         std::make_move_iterator(samples.begin()),
                         std::make_move_iterator(samples.end()));
        break;
      }
      case FileKind::JUNCTIONS: {
        auto records = parse_junctions_csv(bytes, manifest.geometry, mf.path);
        for (auto& r : records) check_wafer_id(r.wafer_id, mf.path);
        ds.junctions.insert(ds.junctions.end(),
                            std::make_move_iterator(records.begin()),
                            std::make_move_iterator(records.end()));
        break;
      }
      case FileKind::IV: {
        IVTrace t = parse_iv_json(bytes, mf.path);
        check_wafer_id(t.wafer_id, mf.path);
        ds.iv_traces.push_back(std::move(t));
        break;
      }
      case FileKind::CRYO: {
        auto records = parse_cryo_csv(bytes, mf.path);
        ds.cryo.insert(ds.cryo.end(), std::make_move_iterator(records.begin()),
                       std::make_move_iterator(records.end()));
        break;
      }
      case FileKind::TRANSITION: {
        if (ds.transition)
          fail(Errc::DuplicateRecord,
               mf.path + ": second transition trace in the manifest");
        ds.transition = parse_transition_csv(bytes, mf.path);
        break;
      }
    }
  }

  // Cross-file duplicate checks (each parser already rejects within a file).
  std::set<std::tuple<int, int, std::string>> short_keys, junction_keys,
      iv_keys;
  for (const auto& r : ds.shorts)
    if (!short_keys.emplace(r.site.row, r.site.col, r.structure_id).second)
      fail(Errc::DuplicateRecord,
           "duplicate short record across files: die (" +
               std::to_string(r.site.row) + "," + std::to_string(r.site.col) +
               ") structure " + r.structure_id);
  for (const auto& r : ds.junctions)
    if (!junction_keys.emplace(r.site.row, r.site.col, r.junction_id).second)
      fail(Errc::DuplicateRecord,
           "duplicate junction record across files: die (" +
               std::to_string(r.site.row) + "," + std::to_string(r.site.col) +
               ") junction " + r.junction_id);
  for (const auto& t : ds.iv_traces)
    if (!iv_keys.emplace(t.die_row, t.die_col, t.junction_id).second)
      fail(Errc::DuplicateRecord,
           "duplicate IV trace across files: die (" +
               std::to_string(t.die_row) + "," + std::to_string(t.die_col) +
               ") junction " + t.junction_id);
  return ds;
}

WaferDataset load_wafer(const std::string& manifest_path) {
  return load_wafer(load_manifest(manifest_path));
}

std::string write_dataset(const WaferDataset& dataset,
                          const std::string& dir) {
  fs::create_directories(dir);

  json manifest;
  manifest["schema_version"] = "qpcm-manifest/1";
  manifest["wafer_id"] = dataset.wafer_id;
  manifest["geometry"] = {{"pitch_x_mm", dataset.geometry.pitch_x_mm},
                          {"pitch_y_mm", dataset.geometry.pitch_y_mm},
                          {"rows", dataset.geometry.rows},
                          {"cols", dataset.geometry.cols},
                          {"wafer_radius_mm", dataset.geometry.wafer_radius_mm}};
  json files = json::array();

  auto emit = [&](FileKind kind, const std::string& name,
                  const std::string& content) {
    write_file((fs::path(dir) / name).string(), content);
    files.push_back({{"kind", to_string(kind)},
                     {"path", name},
                     {"checksum", fnv1a64_hex(content)}});
  };

  if (!dataset.shorts.empty())
    emit(FileKind::SHORTS, "shorts.csv", serialize_shorts_csv(dataset.shorts));
  if (!dataset.sheets.empty())
    emit(FileKind::SHEET, "sheet.csv", serialize_sheet_csv(dataset.sheets));
  if (!dataset.junctions.empty())
    emit(FileKind::JUNCTIONS, "junctions.csv",
         serialize_junctions_csv(dataset.junctions));
  if (!dataset.iv_traces.empty()) {
    fs::create_directories(fs::path(dir) / "iv");
    char name[32];
    for (std::size_t i = 0; i < dataset.iv_traces.size(); ++i) {
      std::snprintf(name, sizeof(name), "iv/iv_%04zu.json", i);
      emit(FileKind::IV, name, serialize_iv_json(dataset.iv_traces[i]));
    }
  }
  if (!dataset.cryo.empty())
    emit(FileKind::CRYO, "cryo.csv", serialize_cryo_csv(dataset.cryo));
  if (dataset.transition)
    emit(FileKind::TRANSITION, "transition.csv",
         serialize_transition_csv(*dataset.transition));

  manifest["files"] = std::move(files);
  const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  write_file(manifest_path, manifest.dump(1) + "\n");
  return manifest_path;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(Errc::IoError, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    fail(Errc::IoError, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out)
    fail(Errc::IoError, "failed writing '" + path + "'");
}

}  // namespace qpcm
