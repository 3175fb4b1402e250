#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qpcm/cryo_fits.hpp"
#include "qpcm/types.hpp"

namespace qpcm {

// FNV-1a 64-bit; used as the provenance fingerprint for input files.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

enum class FileKind { SHORTS, SHEET, JUNCTIONS, IV, CRYO, TRANSITION };
const char* to_string(FileKind k);

struct ManifestFile {
  FileKind kind = FileKind::SHORTS;
  std::string path;  // relative to the manifest directory
  std::optional<std::string> checksum;  // "fnv1a64:<16 hex digits>"
};

struct FileManifest {
  std::string wafer_id;
  WaferGeometry geometry;
  std::vector<ManifestFile> files;
  std::string base_dir;
};

FileManifest parse_manifest_json(std::string_view bytes,
                                 const std::string& base_dir,
                                 const std::string& filename = "manifest.json");
FileManifest load_manifest(const std::string& path);

// CSV dialect: comma separator, '.' decimal, UTF-8, mandatory header row,
// no quoting. Every rejection names the file, the row and the reason.
std::vector<ShortRecord> parse_shorts_csv(
    std::string_view bytes, const WaferGeometry& geometry = {},
    const std::string& filename = "shorts.csv");
std::vector<SheetSample> parse_sheet_csv(
    std::string_view bytes, const std::string& filename = "sheet.csv");
std::vector<JunctionRecord> parse_junctions_csv(
    std::string_view bytes, const WaferGeometry& geometry = {},
    const std::string& filename = "junctions.csv");
std::vector<CryoRecord> parse_cryo_csv(
    std::string_view bytes, const std::string& filename = "cryo.csv");
TransitionTrace parse_transition_csv(
    std::string_view bytes, const std::string& filename = "transition.csv");
IVTrace parse_iv_json(std::string_view bytes,
                      const std::string& filename = "iv.json");

// Time-domain trace CSV: header "kind,delay_s,signal" (T1/RAMSEY) or
// "kind,clifford_count,signal" (RB); the kind column is constant.
DecayTrace parse_decay_csv(std::string_view bytes,
                           const std::string& filename = "trace.csv");

std::string serialize_shorts_csv(std::span<const ShortRecord> records);
std::string serialize_sheet_csv(std::span<const SheetSample> samples);
std::string serialize_junctions_csv(std::span<const JunctionRecord> records);
std::string serialize_cryo_csv(std::span<const CryoRecord> records);
std::string serialize_transition_csv(const TransitionTrace& trace);
std::string serialize_iv_json(const IVTrace& trace);

// Parses and validates every file in a manifest into one dataset.
WaferDataset load_wafer(const FileManifest& manifest);
WaferDataset load_wafer(const std::string& manifest_path);

// Writes a dataset in the exact on-disk formats plus a manifest with
// checksums. Returns the manifest path. Deterministic.
std::string write_dataset(const WaferDataset& dataset, const std::string& dir);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace qpcm
