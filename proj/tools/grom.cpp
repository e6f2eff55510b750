#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "grom/error.hpp"
#include "grom/pipeline/dataset.hpp"
#include "grom/pipeline/evaluation.hpp"
#include "grom/pipeline/model.hpp"
#include "grom/sph/scenario.hpp"

namespace {

using namespace grom;
using nlohmann::json;

struct Globals {
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool verbose = false;
};

Globals g;

void log(const std::string& msg) {
  if (g.verbose) std::cerr << "[grom] " << msg << "\n";
}

template <typename T, std::size_t N>
std::array<T, N> parse_list(const std::string& s, const char* what) {
  std::array<T, N> out{};
  std::stringstream in(s);
  std::string item;
  std::size_t k = 0;
  while (std::getline(in, item, ',')) {
    if (k == N) break;
    try {
      std::size_t used = 0;
      if constexpr (std::is_integral_v<T>) {
        out[k] = static_cast<T>(std::stoi(item, &used));
      } else {
        out[k] = static_cast<T>(std::stod(item, &used));
      }
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(std::string(what) + ": cannot parse '" + item + "'");
    }
    ++k;
  }
  if (k != N || std::getline(in, item)) {
    throw ValidationError(std::string(what) + " needs exactly " + std::to_string(N) + " comma-separated values");
  }
  return out;
}

pipeline::TrainOptions train_options(const std::string& thresholds, const std::string& order, bool per_behavior) {
  pipeline::TrainOptions o;
  o.thresholds = parse_list<double, 3>(thresholds, "--thresholds");
  o.mode_order = parse_list<int, 3>(order, "--mode-order");
  o.per_behavior = per_behavior;
  o.gp.seed = g.seed.value_or(0);
  return o;
}

std::filesystem::path sibling(const std::filesystem::path& p, const std::string& suffix) {
  return p.parent_path() / (p.stem().string() + suffix);
}

void write_json(const json& j, const std::filesystem::path& path) {
  write_file_atomic(path, j.dump(1) + "\n");
}

int cmd_simulate(const std::string& config_path, const std::string& out_arg) {
  const json raw = pipeline::read_json_file(config_path);
  sph::ScenarioConfig cfg;
  try {
    cfg = sph::scenario_from_json(raw);
  } catch (const json::exception& e) {
    throw ValidationError(config_path + ": " + e.what());
  }
  if (g.seed) cfg.bed.seed = *g.seed;
  const std::string out = !out_arg.empty() ? out_arg : (!cfg.output.empty() ? cfg.output : "trace.csv");
  const json canonical = sph::to_json(cfg);
  const std::string digest = sph::config_digest(canonical);

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<json> diag;
  auto sink = [&](const sph::Diagnostics& d) {
    diag.push_back({{"step", d.step}, {"time", d.time}, {"kinetic_energy", d.kinetic_energy},
                    {"max_speed", d.max_speed}, {"min_density", d.min_density},
                    {"max_density", d.max_density}, {"clamped_pressure", d.clamped_pressure}});
    log("t=" + std::to_string(d.time) + " KE=" + std::to_string(d.kinetic_energy));
  };
  log("settling bed for " + std::to_string(cfg.schedule.pause_duration) + " s");
  const sph::SettledBed bed =
      sph::settle_bed(cfg.bed, cfg.material, cfg.sph, cfg.schedule.pause_duration, sink, 2000);
  log("rotating " + sph::to_string(cfg.leg.morphology) + " at omega " + std::to_string(cfg.schedule.omega));
  sph::RotationOptions ro;
  ro.samples = cfg.samples;
  ro.sample_stride = cfg.sample_stride;
  ro.diagnostics = sink;
  sph::RotationResult r = sph::run_leg_rotation(bed, cfg.leg, cfg.schedule, ro);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.trace.meta.config_digest = digest;

  json extra = {{"config", canonical},
                {"particles", bed.particles.size()},
                {"settled_surface_m", bed.surface},
                {"rotation_steps", r.steps},
                {"contact_start_rad", r.contact_start},
                {"contact_end_rad", r.contact_end},
                {"wall_time_s", wall},
                {"diagnostics", diag}};
  pipeline::write_trace_with_sidecar(r.trace, out, extra);
  std::cout << out << " (" << r.steps << " steps, " << wall << " s, digest " << digest << ")\n";
  return 0;
}

int cmd_ingest(const std::string& dir, const std::string& out, std::size_t samples) {
  const auto m = pipeline::ingest(dir, samples);
  for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
  pipeline::write_manifest(m, out);
  std::cout << m.records.size() << " records, designs:";
  for (const auto& d : m.designs()) std::cout << " " << d;
  std::cout << "\n";
  return 0;
}

int cmd_train(const std::string& manifest, const std::string& design, const pipeline::TrainOptions& o,
              const std::string& out) {
  const auto m = pipeline::read_manifest(manifest);
  const auto model = pipeline::train(m, design, o);
  pipeline::write_model(model, out);
  std::cout << model.design << ": " << model.conditions.size() << " conditions, "
            << model.coefficient_count() << " coefficient models\n";
  return 0;
}

int cmd_predict(const std::string& model_path, double omega, const std::string& out) {
  const auto model = pipeline::read_model(model_path);
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = pipeline::predict(model, omega);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (p.extrapolated) {
    std::cerr << "warning: omega " << omega << " is outside twice the training range; extrapolating\n";
  }
  const std::filesystem::path out_path(out);
  pipeline::write_trace_with_sidecar(p.trace, out_path,
                                     {{"extrapolated", p.extrapolated},
                                      {"nondimensional_speed", omega / pipeline::kReferenceOmega},
                                      {"bands_file", sibling(out_path, "_bands.csv").filename().string()},
                                      {"predict_ms", ms}});
  std::ostringstream bands;
  bands.precision(17);
  bands << "theta_rad,fx_lower,fx_upper,fz_lower,fz_upper\n";
  for (std::size_t t = 0; t < p.trace.size(); ++t) {
    bands << p.trace.theta[t] << "," << p.lower.fx[t] << "," << p.upper.fx[t] << "," << p.lower.fz[t] << ","
          << p.upper.fz[t] << "\n";
  }
  write_file_atomic(sibling(out_path, "_bands.csv"), bands.str());
  log("predict took " + std::to_string(ms) + " ms");
  std::cout << out << "\n";
  return 0;
}

int cmd_crossval(const std::string& manifest, const std::string& design, const pipeline::TrainOptions& o,
                 const std::string& report) {
  const auto m = pipeline::read_manifest(manifest);
  const auto r = pipeline::crossval_loo(m, design, o);
  write_json(pipeline::to_json(r), report);
  std::printf("%zu folds, mean error %.4f (interior %.4f, edge %.4f)\n", r.folds.size(), r.mean_error,
              r.interior_mean_error, r.edge_mean_error);
  return 0;
}

int cmd_assimilate(const std::string& model_path, double omega, const std::string& obs_path,
                   long particles, const std::vector<double>& noise, const std::string& out) {
  const auto model = pipeline::read_model(model_path);
  const auto obs = pf::read_observations_csv(obs_path);
  pipeline::AssimilationSetup setup;
  setup.seed = g.seed.value_or(0);
  setup.n_particles = particles;
  if (!noise.empty()) {
    if (noise.size() != 2) throw ValidationError("--noise-std takes two values: fx,fz");
    setup.measurement_noise_std = std::array<double, 2>{noise[0], noise[1]};
  }
  const auto a = pipeline::assimilate_scenario(model, omega, obs, setup);
  json extra = pf::to_json(a.result);
  extra["observations"] = obs.size();
  extra["measurement_noise_std"] = a.measurement_noise_std;
  extra["seed"] = setup.seed;
  pipeline::write_trace_with_sidecar(a.result.updated_trace, out, {{"assimilation", extra}});
  std::cout << out << " (" << obs.size() << " observations, " << a.result.resample_count << " resamples)\n";
  return 0;
}

int cmd_scaling(const std::string& manifest, const std::string& report) {
  const auto r = pipeline::scaling_analysis(pipeline::read_manifest(manifest));
  for (const auto& f : r.flags) std::cerr << "warning: " << f << "\n";
  write_json(pipeline::to_json(r), report);
  for (const auto& s : r.speeds) {
    std::printf("omega %g: drag CV %.3f -> %.3f, lift CV %.3f -> %.3f\n", s.omega, s.cv_drag_raw,
                s.cv_drag_scaled, s.cv_lift_raw, s.cv_lift_scaled);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Granular leg force simulation and reduced-order surrogate"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", g.verbose, "Log progress to stderr");

  std::string config, out, dir, manifest, design = "flat", model, obs, report;
  std::string thresholds = "0.95,1.0,0.95", order = "1,2,3";
  bool per_behavior = false;
  std::size_t samples = pipeline::kDefaultSamples;
  double omega = 0.0;
  long particles = 1000;
  std::vector<double> noise_std;

  auto* sim = app.add_subcommand("simulate", "Run one SPH leg-rotation scenario");
  sim->add_option("--config", config, "Scenario JSON")->required();
  sim->add_option("--out", out, "Trace CSV (overrides the config)");

  auto* ing = app.add_subcommand("ingest", "Index trace CSVs and sidecars into a manifest");
  ing->add_option("--dir", dir)->required();
  ing->add_option("--out", out)->required();
  ing->add_option("--samples", samples, "Theta grid size")->check(CLI::Range(2, 100000));

  auto add_train_opts = [&](CLI::App* c) {
    c->add_option("--manifest", manifest)->required();
    c->add_option("--design", design, "Design key, e.g. flat or l_leg@0.333333");
    c->add_option("--thresholds", thresholds, "Energy thresholds per mode");
    c->add_option("--mode-order", order, "Truncation order");
    c->add_flag("--per-behavior", per_behavior, "Decompose fx and fz separately");
  };
  auto* trn = app.add_subcommand("train", "Fit the reduced-order surrogate for one design");
  add_train_opts(trn);
  trn->add_option("--out", out)->required();

  auto* prd = app.add_subcommand("predict", "Predict a trace and 95% bands");
  prd->add_option("--model", model)->required();
  prd->add_option("--omega", omega)->required();
  prd->add_option("--out", out)->required();

  auto* cv = app.add_subcommand("crossval", "Leave-one-out cross-validation");
  add_train_opts(cv);
  cv->add_option("--report", report)->required();

  auto* asm_ = app.add_subcommand("assimilate", "Update a prediction with sparse observations");
  asm_->add_option("--model", model)->required();
  asm_->add_option("--omega", omega)->required();
  asm_->add_option("--obs", obs)->required();
  asm_->add_option("--particles", particles)->check(CLI::PositiveNumber);
  asm_->add_option("--noise-std", noise_std, "Measurement noise sd for fx,fz (estimated when omitted)")
      ->delimiter(',');
  asm_->add_option("--out", out)->required();

  auto* scl = app.add_subcommand("scaling", "Cross-morphology scaling of peak forces");
  scl->add_option("--manifest", manifest)->required();
  scl->add_option("--report", report)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (app.count("--seed")) g.seed = seed;
  if (g.threads > 1) log("--threads > 1 requested; running sequentially");

  try {
    if (*sim) return cmd_simulate(config, out);
    if (*ing) return cmd_ingest(dir, out, samples);
    if (*trn) return cmd_train(manifest, design, train_options(thresholds, order, per_behavior), out);
    if (*prd) return cmd_predict(model, omega, out);
    if (*cv) return cmd_crossval(manifest, design, train_options(thresholds, order, per_behavior), report);
    if (*asm_) return cmd_assimilate(model, omega, obs, particles, noise_std, out);
    if (*scl) return cmd_scaling(manifest, report);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
