#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "grom/force_trace.hpp"

namespace grom::pipeline {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kDefaultSamples = 128;
/// Angular speed mapped to a nondimensional speed of 1.
inline constexpr double kReferenceOmega = 0.2;

/// "flat", "c_leg", ... ; L-family designs carry their foot fraction, e.g. "l_leg@0.333333".
std::string design_key(const TraceMetadata& meta);
/// True when `query` names the record's design, either exactly or by morphology alone.
bool design_matches(const std::string& query, const TraceMetadata& meta);

struct ScenarioRecord {
  ForceTrace trace;  ///< carries design, speed and source in its metadata
  std::string file;  ///< origin, for diagnostics

  const TraceMetadata& meta() const { return trace.meta; }
  bool is_experiment() const { return trace.meta.source == "experiment"; }
};

struct DatasetManifest {
  std::vector<double> theta_grid;
  std::vector<ScenarioRecord> records;
  std::vector<std::string> warnings;

  /// Simulation records of one design sorted by speed.
  std::vector<const ScenarioRecord*> simulations(const std::string& design) const;
  /// Distinct design keys among simulation records, sorted.
  std::vector<std::string> designs() const;
};

/// Uniform grid over the default sweep [-3 pi/4, 3 pi/4].
std::vector<double> default_theta_grid(std::size_t samples = kDefaultSamples);

/// Read every `*.csv` trace in `dir` (sorted by name) with its `.json`
/// metadata sidecar. Simulation traces are resampled onto the uniform grid;
/// experiment traces keep their own samples. Duplicate (design, speed,
/// source) entries are rejected.
DatasetManifest ingest(const std::filesystem::path& dir, std::size_t samples = kDefaultSamples);

/// Add a record, enforcing the manifest invariants.
void add_record(DatasetManifest& m, ScenarioRecord record);

nlohmann::json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const DatasetManifest& m, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Write `<stem>.csv` and its `<stem>.json` metadata sidecar.
void write_trace_with_sidecar(const ForceTrace& trace, const std::filesystem::path& csv_path,
                              const nlohmann::json& extra = nlohmann::json::object());

/// Parse a JSON file, reporting the path on failure.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace grom::pipeline
