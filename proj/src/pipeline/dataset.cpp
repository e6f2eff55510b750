#include "grom/pipeline/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "grom/error.hpp"

namespace grom::pipeline {

namespace {

bool l_family(const std::string& morphology) {
  return morphology == "l_leg" || morphology == "reversed_l";
}

}  // namespace

std::string design_key(const TraceMetadata& meta) {
  if (!l_family(meta.morphology)) return meta.morphology;
  char buf[32];
  std::snprintf(buf, sizeof buf, "@%g", meta.foot_fraction);
  return meta.morphology + buf;
}

bool design_matches(const std::string& query, const TraceMetadata& meta) {
  return query == design_key(meta) || query == meta.morphology;
}

std::vector<const ScenarioRecord*> DatasetManifest::simulations(const std::string& design) const {
  std::vector<const ScenarioRecord*> out;
  for (const auto& r : records) {
    if (!r.is_experiment() && design_matches(design, r.meta())) out.push_back(&r);
  }
  std::set<std::string> keys;
  for (const auto* r : out) keys.insert(design_key(r->meta()));
  if (keys.size() > 1) {
    throw ValidationError("design '" + design + "' is ambiguous; use one of the full keys such as '" +
                          *keys.begin() + "'");
  }
  std::stable_sort(out.begin(), out.end(), [](const ScenarioRecord* a, const ScenarioRecord* b) {
    return a->meta().omega < b->meta().omega;
  });
  return out;
}

std::vector<std::string> DatasetManifest::designs() const {
  std::set<std::string> keys;
  for (const auto& r : records)
    if (!r.is_experiment()) keys.insert(design_key(r.meta()));
  return {keys.begin(), keys.end()};
}

std::vector<double> default_theta_grid(std::size_t samples) {
  if (samples < 2) throw ValidationError("theta grid needs at least two samples");
  return uniform_grid(-0.75 * std::numbers::pi, 0.75 * std::numbers::pi, samples);
}

void add_record(DatasetManifest& m, ScenarioRecord record) {
  record.trace.validate();
  const auto& meta = record.meta();
  if (meta.source != "simulation" && meta.source != "experiment") {
    throw ValidationError(record.file + ": source must be 'simulation' or 'experiment'");
  }
  if (!std::isfinite(meta.omega) || meta.omega < 0.0) {
    throw ValidationError(record.file + ": omega must be finite and non-negative");
  }
  for (const auto& r : m.records) {
    if (design_key(r.meta()) == design_key(meta) && r.meta().omega == meta.omega &&
        r.meta().source == meta.source) {
      std::ostringstream msg;
      msg << record.file << ": duplicate " << meta.source << " record for design "
          << design_key(meta) << " at omega " << meta.omega << " (first seen in " << r.file << ")";
      throw ValidationError(msg.str());
    }
  }
  m.records.push_back(std::move(record));
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

DatasetManifest ingest(const std::filesystem::path& dir, std::size_t samples) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("not a directory: " + dir.string());
  DatasetManifest m;
  m.theta_grid = default_theta_grid(samples);
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& csv : files) {
    auto sidecar = csv;
    sidecar.replace_extension(".json");
    if (!std::filesystem::exists(sidecar)) {
      throw ValidationError(csv.string() + ": missing metadata sidecar " + sidecar.string());
    }
    ScenarioRecord rec;
    rec.file = csv.string();
    rec.trace = read_trace_csv(csv);
    try {
      rec.trace.meta = metadata_from_json(read_json_file(sidecar));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(sidecar.string() + ": malformed metadata (" + e.what() + ")");
    }
    if (rec.trace.size() == 0) throw ValidationError(csv.string() + ": trace has no samples");
    if (!rec.is_experiment()) {
      if (rec.trace.size() < 2) throw ValidationError(csv.string() + ": simulation trace needs two samples");
      rec.trace = resample(rec.trace, m.theta_grid);
    }
    add_record(m, std::move(rec));
  }
  if (m.records.empty()) m.warnings.push_back("no traces found in " + dir.string());
  return m;
}

namespace {

nlohmann::json trace_json(const ForceTrace& t) {
  return {{"theta", t.theta}, {"fx", t.fx}, {"fz", t.fz}, {"meta", to_json(t.meta)}};
}

ForceTrace trace_from(const nlohmann::json& j) {
  ForceTrace t;
  t.theta = j.at("theta").get<std::vector<double>>();
  t.fx = j.at("fx").get<std::vector<double>>();
  t.fz = j.at("fz").get<std::vector<double>>();
  t.meta = metadata_from_json(j.at("meta"));
  t.validate();
  return t;
}

}  // namespace

nlohmann::json to_json(const DatasetManifest& m) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : m.records) {
    records.push_back({{"design", design_key(r.meta())}, {"file", r.file}, {"trace", trace_json(r.trace)}});
  }
  return {{"schema_version", kSchemaVersion},
          {"behaviors", {"fx", "fz"}},
          {"theta_grid", m.theta_grid},
          {"records", records},
          {"warnings", m.warnings}};
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
  try {
    if (j.value("schema_version", 0) != kSchemaVersion) {
      throw ValidationError("manifest schema_version must be " + std::to_string(kSchemaVersion));
    }
    DatasetManifest m;
    m.theta_grid = j.at("theta_grid").get<std::vector<double>>();
    m.warnings = j.value("warnings", std::vector<std::string>{});
    for (const auto& r : j.at("records")) {
      ScenarioRecord rec;
      rec.file = r.value("file", std::string());
      rec.trace = trace_from(r.at("trace"));
      if (!rec.is_experiment() && rec.trace.theta != m.theta_grid) {
        throw ValidationError("manifest record " + rec.file + " is not on the manifest grid");
      }
      add_record(m, std::move(rec));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
}

void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  write_file_atomic(path, to_json(m).dump(1) + "\n");
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  return manifest_from_json(read_json_file(path));
}

void write_trace_with_sidecar(const ForceTrace& trace, const std::filesystem::path& csv_path,
                              const nlohmann::json& extra) {
  write_trace_csv(trace, csv_path);
  nlohmann::json meta = to_json(trace.meta);
  meta["schema_version"] = kSchemaVersion;
  for (const auto& [k, v] : extra.items()) meta[k] = v;
  auto sidecar = csv_path;
  sidecar.replace_extension(".json");
  write_file_atomic(sidecar, meta.dump(1) + "\n");
}

}  // namespace grom::pipeline
