#include <doctest.h>

#include <filesystem>
#include <string>

#include "oracles.hpp"
#include "qpcm/errors.hpp"
#include "qpcm/ingest.hpp"

using namespace qpcm;

namespace {

constexpr const char* kShortsHeader =
    "wafer_id,die_row,die_col,structure_id,layer,design_width_nm,"
    "design_length_um,resistance_ohm,status\n";

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::logic_error("expected a qpcm::Error");
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("shorts row parses to a record") {
  const std::string csv =
      std::string(kShortsHeader) + "W1,3,5,S350,BE,350,10,94.7,OK\n";
  WaferGeometry g;
  g.rows = 7;
  g.cols = 11;
  const auto records = parse_shorts_csv(csv, g);
  REQUIRE(records.size() == 1);
  const ShortRecord& r = records.front();
  CHECK(r.wafer_id == "W1");
  CHECK(r.layer == Layer::BE);
  CHECK(r.design_width_nm == 350.0);
  CHECK(r.design_length_um == 10.0);
  CHECK(r.resistance_ohm == 94.7);
  CHECK(r.status == ShortStatus::OK);
  CHECK(r.site.row == 3);
  CHECK(r.site.col == 5);
  CHECK(r.site.x_mm == doctest::Approx(0.0));
  CHECK(r.site.y_mm == doctest::Approx(0.0));
}

TEST_CASE("shorts schema violations carry the row number") {
  SUBCASE("bad layer enum") {
    const std::string csv =
        std::string(kShortsHeader) + "W1,0,0,S1,BE,350,10,94.7,OK\n" +
        "W1,0,1,S1,XX,350,10,94.7,OK\n";
    try {
      parse_shorts_csv(csv);
      FAIL("expected SchemaMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::SchemaMismatch);
      CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
  }
  SUBCASE("duplicate site + structure") {
    const std::string csv = std::string(kShortsHeader) +
                            "W1,0,0,S1,BE,350,10,94.7,OK\n"
                            "W1,0,0,S1,BE,350,10,95.1,OK\n";
    CHECK(code_of([&] { parse_shorts_csv(csv); }) == Errc::DuplicateRecord);
  }
  SUBCASE("negative resistance with status OK") {
    const std::string csv =
        std::string(kShortsHeader) + "W1,0,0,S1,BE,350,10,-4.0,OK\n";
    CHECK(code_of([&] { parse_shorts_csv(csv); }) == Errc::UnitError);
  }
  SUBCASE("failed structures keep out-of-family values") {
    const std::string csv =
        std::string(kShortsHeader) + "W1,0,0,S1,BE,350,10,1e9,OPEN\n";
    const auto records = parse_shorts_csv(csv);
    CHECK(records.front().status == ShortStatus::OPEN);
  }
  SUBCASE("wrong column count") {
    const std::string csv =
        std::string(kShortsHeader) + "W1,0,0,S1,BE,350,10,94.7\n";
    CHECK(code_of([&] { parse_shorts_csv(csv); }) == Errc::SchemaMismatch);
  }
  SUBCASE("width outside the PCM range") {
    const std::string csv =
        std::string(kShortsHeader) + "W1,0,0,S1,BE,2000,10,94.7,OK\n";
    CHECK(code_of([&] { parse_shorts_csv(csv); }) == Errc::UnitError);
  }
}

TEST_CASE("IV JSON parsing") {
  SUBCASE("a 10 mV sweep to 1.3 V gives a full-length trace") {
    IVTrace t;
    t.wafer_id = "W1";
    t.die_row = 2;
    t.die_col = 3;
    t.junction_id = "J0";
    t.area_um2 = 0.175;
    t.compliance_a = 0.1;
    for (int k = 0; k <= 130; ++k)
      t.points.push_back({0.010 * k, 0.010 * k / 7100.0});
    const IVTrace back = parse_iv_json(serialize_iv_json(t));
    CHECK(back.points.size() == 131);
    CHECK(back.points[13].voltage_v == doctest::Approx(0.13));
    CHECK(back.junction_id == "J0");
  }
  SUBCASE("too few points") {
    const std::string j = R"({"wafer_id":"W1","die":{"row":0,"col":0},
      "junction_id":"J0","area_um2":0.175,"compliance_a":0.1,
      "points":[[0,0],[0.01,1e-6],[0.02,2e-6]]})";
    CHECK(code_of([&] { parse_iv_json(j); }) == Errc::TooFewPoints);
  }
  SUBCASE("unordered points match the pre-sorted trace") {
    const std::string sorted = R"({"wafer_id":"W1","die":{"row":0,"col":0},
      "junction_id":"J0","area_um2":0.175,"compliance_a":0.1,
      "points":[[0.01,1e-6],[0.02,2e-6],[0.03,3e-6],[0.04,4e-6],
                [0.05,5e-6],[0.06,6e-6],[0.07,7e-6],[0.08,8e-6]]})";
    const std::string shuffled = R"({"wafer_id":"W1","die":{"row":0,"col":0},
      "junction_id":"J0","area_um2":0.175,"compliance_a":0.1,
      "points":[[0.05,5e-6],[0.01,1e-6],[0.08,8e-6],[0.03,3e-6],
                [0.02,2e-6],[0.07,7e-6],[0.04,4e-6],[0.06,6e-6]]})";
    CHECK(serialize_iv_json(parse_iv_json(sorted)) ==
          serialize_iv_json(parse_iv_json(shuffled)));
  }
  SUBCASE("conflicting duplicate voltages") {
    const std::string j = R"({"wafer_id":"W1","die":{"row":0,"col":0},
      "junction_id":"J0","area_um2":0.175,"compliance_a":0.1,
      "points":[[0.01,1e-6],[0.02,2e-6],[0.02,9e-6],[0.03,3e-6],
                [0.04,4e-6],[0.05,5e-6],[0.06,6e-6],[0.07,7e-6],[0.08,8e-6]]})";
    CHECK(code_of([&] { parse_iv_json(j); }) ==
          Errc::NonMonotonicAfterDedup);
  }
  SUBCASE("exact duplicate points collapse") {
    const std::string j = R"({"wafer_id":"W1","die":{"row":0,"col":0},
      "junction_id":"J0","area_um2":0.175,"compliance_a":0.1,
      "points":[[0.01,1e-6],[0.02,2e-6],[0.02,2e-6],[0.03,3e-6],
                [0.04,4e-6],[0.05,5e-6],[0.06,6e-6],[0.07,7e-6],[0.08,8e-6]]})";
    CHECK(parse_iv_json(j).points.size() == 8);
  }
  SUBCASE("unknown and missing keys") {
    const std::string extra = R"({"wafer_id":"W1","die":{"row":0,"col":0},
      "junction_id":"J0","area_um2":0.175,"compliance_a":0.1,"foo":1,
      "points":[]})";
    CHECK(code_of([&] { parse_iv_json(extra); }) == Errc::SchemaMismatch);
    const std::string missing = R"({"wafer_id":"W1","die":{"row":0,"col":0},
      "junction_id":"J0","area_um2":0.175,"points":[]})";
    CHECK(code_of([&] { parse_iv_json(missing); }) == Errc::SchemaMismatch);
  }
  SUBCASE("currents beyond compliance are rejected") {
    const std::string j = R"({"wafer_id":"W1","die":{"row":0,"col":0},
      "junction_id":"J0","area_um2":0.175,"compliance_a":1e-6,
      "points":[[0.01,1e-6],[0.02,2e-6],[0.03,3e-6],[0.04,4e-6],
                [0.05,5e-6],[0.06,6e-6],[0.07,7e-6],[0.08,8e-6]]})";
    CHECK(code_of([&] { parse_iv_json(j); }) == Errc::UnitError);
  }
}

TEST_CASE("cryo CSV parses values verbatim") {
  const std::string csv =
      "chip_id,qubit_id,rn_ohm,f01_hz\n"
      "C7,Q2,7100,4.33e9\n";
  const auto records = parse_cryo_csv(csv);
  REQUIRE(records.size() == 1);
  CHECK(records[0].chip_id == "C7");
  CHECK(records[0].qubit_id == "Q2");
  CHECK(records[0].rn_ohm == 7100.0);
  CHECK(records[0].f01_hz == 4.33e9);
  CHECK_FALSE(records[0].t1_s.has_value());

  const std::string with_times =
      "chip_id,qubit_id,rn_ohm,f01_hz,t1_s,t2star_s\n"
      "C7,Q2,7100,4.33e9,8e-05,\n";
  const auto r2 = parse_cryo_csv(with_times);
  CHECK(r2[0].t1_s == 8e-05);
  CHECK_FALSE(r2[0].t2star_s.has_value());
}

TEST_CASE("transition CSV accepts either direction, stores descending") {
  std::string desc = "temperature_k,resistance_ohm\n";
  std::string asc = "temperature_k,resistance_ohm\n";
  for (int i = 0; i <= 20; ++i) {
    const double t = 1.6 - 0.05 * i;
    const double r = t > 1.2 ? 12.0 : 0.0;
    desc += std::to_string(t) + "," + std::to_string(r) + "\n";
  }
  for (int i = 20; i >= 0; --i) {
    const double t = 1.6 - 0.05 * i;
    const double r = t > 1.2 ? 12.0 : 0.0;
    asc += std::to_string(t) + "," + std::to_string(r) + "\n";
  }
  const TransitionTrace a = parse_transition_csv(desc);
  const TransitionTrace b = parse_transition_csv(asc);
  REQUIRE(a.points.size() == b.points.size());
  CHECK(a.points.front().first > a.points.back().first);
  CHECK(a.points == b.points);

  const std::string wobble =
      "temperature_k,resistance_ohm\n1.6,12\n1.4,12\n1.5,12\n1.2,12\n";
  CHECK(code_of([&] { parse_transition_csv(wobble); }) ==
        Errc::SchemaMismatch);
}

TEST_CASE("sheet CSV validation") {
  const std::string good =
      "wafer_id,site_index,x_mm,y_mm,layer,sheet_resistance_ohm_sq\n"
      "W1,1,0,0,BE,0.202\n"
      "W1,2,32,0,BE,0.204\n";
  CHECK(parse_sheet_csv(good).size() == 2);

  const std::string bad_idx =
      "wafer_id,site_index,x_mm,y_mm,layer,sheet_resistance_ohm_sq\n"
      "W1,0,0,0,BE,0.202\n";
  CHECK(code_of([&] { parse_sheet_csv(bad_idx); }) == Errc::UnitError);

  const std::string nonpos =
      "wafer_id,site_index,x_mm,y_mm,layer,sheet_resistance_ohm_sq\n"
      "W1,1,0,0,BE,-0.2\n";
  CHECK(code_of([&] { parse_sheet_csv(nonpos); }) == Errc::UnitError);
}

TEST_CASE("decay trace CSV") {
  const std::string t1 =
      "kind,delay_s,signal\nT1,0,1.0\nT1,1e-05,0.8\nT1,2e-05,0.66\n"
      "T1,3e-05,0.55\nT1,4e-05,0.45\nT1,5e-05,0.37\n";
  const DecayTrace t = parse_decay_csv(t1);
  CHECK(t.kind == TraceKind::T1);
  CHECK(t.x.size() == 6);

  const std::string rb_mismatch =
      "kind,delay_s,signal\nRB,1,0.99\nRB,2,0.98\nRB,4,0.97\nRB,8,0.95\n";
  CHECK(code_of([&] { parse_decay_csv(rb_mismatch); }) ==
        Errc::SchemaMismatch);

  const std::string rb =
      "kind,clifford_count,signal\nRB,1,0.99\nRB,2,0.98\nRB,4,0.97\nRB,8,0.95\n";
  CHECK(parse_decay_csv(rb).kind == TraceKind::RB);
}

TEST_CASE("manifest round trip with checksums") {
  WaferDataset ds;
  ds.wafer_id = "WRT";
  ds.geometry = {10.0, 7.0, 3, 3, 100.0};
  for (int i = 0; i < 3; ++i) {
    ShortRecord r;
    r.wafer_id = "WRT";
    r.site = make_die_site(ds.geometry, 1, i);
    r.structure_id = "S" + std::to_string(i);
    r.layer = Layer::BE;
    r.design_width_nm = 350.0;
    r.design_length_um = 200.0;
    r.resistance_ohm = 94.0 + i;
    r.status = ShortStatus::OK;
    ds.shorts.push_back(r);
  }
  const auto dir = std::filesystem::temp_directory_path() / "qpcm_manifest_rt";
  std::filesystem::remove_all(dir);
  const std::string manifest = write_dataset(ds, dir.string());
  const WaferDataset back = load_wafer(manifest);
  CHECK(back.shorts.size() == 3);

  // Corrupt the file: the checksum must catch it.
  const auto shorts_path = dir / "shorts.csv";
  std::string bytes = read_file(shorts_path.string());
  bytes[bytes.size() - 2] = 'X';
  write_file(shorts_path.string(), bytes);
  CHECK(code_of([&] { load_wafer(manifest); }) == Errc::IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("wafer_id mismatch across files is rejected") {
  WaferDataset ds;
  ds.wafer_id = "WA";
  ds.geometry = {10.0, 7.0, 3, 3, 100.0};
  ShortRecord r;
  r.wafer_id = "OTHER";
  r.site = make_die_site(ds.geometry, 1, 1);
  r.structure_id = "S0";
  r.layer = Layer::BE;
  r.design_width_nm = 350.0;
  r.design_length_um = 200.0;
  r.resistance_ohm = 94.0;
  r.status = ShortStatus::OK;
  ds.shorts.push_back(r);
  const auto dir = std::filesystem::temp_directory_path() / "qpcm_wid";
  std::filesystem::remove_all(dir);
  const std::string manifest = write_dataset(ds, dir.string());
  CHECK(code_of([&] { load_wafer(manifest); }) == Errc::SchemaMismatch);
  std::filesystem::remove_all(dir);
}

TEST_CASE("empty file and blank lines are schema errors") {
  CHECK(code_of([&] { parse_shorts_csv(""); }) == Errc::SchemaMismatch);
  const std::string blank =
      std::string(kShortsHeader) + "\nW1,0,0,S1,BE,350,10,94.7,OK\n";
  CHECK(code_of([&] { parse_shorts_csv(blank); }) == Errc::SchemaMismatch);
}

TEST_CASE("off-wafer die indices are rejected") {
  WaferGeometry g;
  g.rows = 3;
  g.cols = 3;
  const std::string csv =
      std::string(kShortsHeader) + "W1,0,40,S1,BE,350,10,94.7,OK\n";
  CHECK(code_of([&] { parse_shorts_csv(csv, g); }) == Errc::UnitError);
}

TEST_CASE("fnv1a64 vector") {
  // Reference value for the empty string and a known sample.
  CHECK(fnv1a64("") == 14695981039346656037ULL);
  CHECK(fnv1a64_hex("hello") == "fnv1a64:a430d84680aabd0b");
}

}  // TEST_SUITE
