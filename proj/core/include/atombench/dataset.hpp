#pragma once

// Dataset ingestion. Three on-disk layouts are understood:
//
//  generic     the toolkit's canonical JSON (schema version 1): an array
//              (or {"records": [...]}) of {"id", "formula", "tc_k",
//              "lattice_abc", "lattice_angles", "species", "frac_coords"}.
//  jarvis      JARVIS-DFT style: array of {"jid", "Tc", "atoms": {
//              "lattice_mat", "coords", "elements", "cartesian"}}.
//  alexandria  pymatgen entries: an array (or {"entries": [...]}) of
//              ComputedStructureEntry / Structure dicts, Tc under "data".
//
// Field-name fallbacks for each layout are listed in docs/datasets.md.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "atombench/xtal.hpp"

namespace atombench {

inline constexpr int kDatasetSchemaVersion = 1;

struct DatasetRecord {
  std::string id;
  std::string formula;  // reduced formula
  double tc = 0;        // K
  Crystal structure;
};

enum class DatasetSchema { jarvis, alexandria, generic };

DatasetSchema parse_schema_name(std::string_view name);
const char* schema_name(DatasetSchema s);

struct Reject {
  std::size_t index = 0;  // position in the raw input array
  std::string id;         // empty when the id itself could not be read
  // "schema": missing or ill-typed field; "validation": well-formed but
  // inconsistent (formula/site mismatch, negative Tc, duplicate id, ...).
  std::string kind;
  std::string reason;
};

struct LoadResult {
  std::vector<DatasetRecord> records;
  std::vector<Reject> rejects;
  std::size_t raw_count = 0;

  bool has_schema_errors() const;
};

// Parses a whole dataset document. Throws SchemaError only when the
// document itself is unusable (invalid JSON, wrong top-level shape);
// per-record problems become rejects, so
// records.size() + rejects.size() == raw_count always holds.
LoadResult parse_dataset(std::string_view json_text, DatasetSchema schema,
                         std::string_view source = {});

// Reads path and parses it. Throws IoError if it cannot be read.
LoadResult load_dataset(const std::filesystem::path& path, DatasetSchema schema);

// Canonical document {"schema_version", "config", "records"}; config_json
// (a JSON object or empty) is echoed as "config".
std::string records_to_json(const std::vector<DatasetRecord>& records,
                            std::string_view config_json = {});
std::string rejects_to_json(const std::vector<Reject>& rejects, std::string_view config_json = {});

}  // namespace atombench
