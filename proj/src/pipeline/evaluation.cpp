#include "grom/pipeline/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "grom/error.hpp"
#include "grom/sph/leg.hpp"

namespace grom::pipeline {

std::array<double, kBehaviorCount> relative_absolute_error(const ForceTrace& pred, const ForceTrace& ref) {
  if (pred.size() != ref.size() || ref.size() == 0) {
    throw ValidationError("error metric needs traces on a common, non-empty grid");
  }
  for (std::size_t t = 0; t < ref.size(); ++t) {
    if (std::abs(pred.theta[t] - ref.theta[t]) > 1e-9) {
      throw ValidationError("error metric needs traces on a common grid");
    }
  }
  std::array<double, kBehaviorCount> out{};
  for (int b = 0; b < kBehaviorCount; ++b) {
    const auto& p = pred.values(static_cast<Behavior>(b));
    const auto& r = ref.values(static_cast<Behavior>(b));
    double peak = 0.0, sum = 0.0;
    for (std::size_t t = 0; t < r.size(); ++t) {
      peak = std::max(peak, std::abs(r[t]));
      sum += std::abs(p[t] - r[t]);
    }
    if (!(peak > 0.0)) {
      throw ValidationError("reference " + to_string(static_cast<Behavior>(b)) + " trace is all zero");
    }
    out[static_cast<std::size_t>(b)] = sum / static_cast<double>(r.size()) / peak;
  }
  return out;
}

CrossValReport crossval_loo(const std::vector<ForceTrace>& traces_in, const std::string& design,
                            const TrainOptions& options) {
  if (traces_in.size() < 4) {
    throw ValidationError("cross-validation needs at least 4 conditions, got " +
                          std::to_string(traces_in.size()));
  }
  std::vector<ForceTrace> traces = traces_in;
  std::stable_sort(traces.begin(), traces.end(),
                   [](const ForceTrace& a, const ForceTrace& b) { return a.meta.omega < b.meta.omega; });
  CrossValReport report;
  report.design = design;
  const std::size_t n = traces.size();
  for (std::size_t held = 0; held < n; ++held) {
    std::vector<ForceTrace> train_set;
    for (std::size_t i = 0; i < n; ++i)
      if (i != held) train_set.push_back(traces[i]);
    const TrainedModel model = train(train_set, design, options);
    const Prediction p = predict(model, traces[held].meta.omega);
    Fold f;
    f.omega = traces[held].meta.omega;
    f.edge = held == 0 || held + 1 == n;
    f.error = relative_absolute_error(p.trace, traces[held]);
    report.folds.push_back(f);
  }
  double all = 0.0, edge = 0.0, interior = 0.0;
  std::size_t n_edge = 0, n_interior = 0;
  for (const auto& f : report.folds) {
    all += f.mean_error();
    if (f.edge) {
      edge += f.mean_error();
      ++n_edge;
    } else {
      interior += f.mean_error();
      ++n_interior;
    }
  }
  report.mean_error = all / static_cast<double>(n);
  report.edge_mean_error = edge / static_cast<double>(n_edge);
  report.interior_mean_error = interior / static_cast<double>(n_interior);
  return report;
}

CrossValReport crossval_loo(const DatasetManifest& manifest, const std::string& design,
                            const TrainOptions& options) {
  std::vector<ForceTrace> traces;
  for (const auto* r : manifest.simulations(design)) traces.push_back(r->trace);
  if (traces.empty()) throw ValidationError("no simulation traces for design '" + design + "'");
  return crossval_loo(traces, design_key(traces.front().meta), options);
}

nlohmann::json to_json(const CrossValReport& r) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"omega", f.omega},
                     {"nondimensional_speed", f.omega / kReferenceOmega},
                     {"edge", f.edge},
                     {"error_fx", f.error[0]},
                     {"error_fz", f.error[1]},
                     {"error_mean", f.mean_error()}});
  }
  return {{"schema_version", kSchemaVersion},
          {"design", r.design},
          {"metric", "peak-normalized mean absolute error: mean_theta |pred - ref| / max_theta |ref|"},
          {"folds", folds},
          {"mean_error", r.mean_error},
          {"interior_mean_error", r.interior_mean_error},
          {"edge_mean_error", r.edge_mean_error}};
}

ScenarioAssimilation assimilate_scenario(const TrainedModel& model, double omega,
                                         std::vector<pf::Observation> observations,
                                         const AssimilationSetup& setup) {
  if (!(setup.process_fraction >= 0.0) || !(setup.noise_fallback_fraction > 0.0)) {
    throw ValidationError("assimilation noise fractions must be non-negative (fallback positive)");
  }
  if (setup.measurement_noise_std) {
    for (double sd : *setup.measurement_noise_std)
      if (!(sd > 0.0) || !std::isfinite(sd)) throw ValidationError("measurement noise sd must be positive");
  }
  ScenarioAssimilation out;
  out.prior = predict(model, omega);
  std::stable_sort(observations.begin(), observations.end(),
                   [](const pf::Observation& a, const pf::Observation& b) { return a.theta < b.theta; });

  pf::MeasurementModel m;
  m.theta_grid = model.theta_grid;
  for (int b = 0; b < kBehaviorCount; ++b) m.basis.push_back(model.basis(static_cast<Behavior>(b)));

  pf::Prior prior;
  prior.mean = out.prior.coefficient_mean;
  prior.std = out.prior.coefficient_variance.cwiseMax(0.0).cwiseSqrt();
  m.process_noise_std = setup.process_fraction * prior.std;

  for (int b = 0; b < kBehaviorCount; ++b) {
    if (setup.measurement_noise_std) {
      m.measurement_noise_std.push_back((*setup.measurement_noise_std)[static_cast<std::size_t>(b)]);
      continue;
    }
    std::vector<pf::Observation> own;
    for (const auto& o : observations)
      if (o.behavior == static_cast<Behavior>(b)) own.push_back(o);
    const double fallback = setup.noise_fallback_fraction * model.scale[static_cast<std::size_t>(b)];
    double sd = pf::estimate_measurement_noise(own, fallback)[static_cast<std::size_t>(b)];
    if (!(sd > 0.0)) sd = fallback;
    m.measurement_noise_std.push_back(sd);
  }
  out.measurement_noise_std = m.measurement_noise_std;

  pf::AssimilationOptions opts;
  opts.n_particles = setup.n_particles;
  opts.seed = setup.seed;
  out.result = pf::assimilate(prior, observations, m, opts);
  out.result.updated_trace.meta = out.prior.trace.meta;
  out.result.updated_trace.meta.source = "assimilation";
  return out;
}

double friction_factor(const std::string& morphology) {
  return sph::is_reversed(sph::parse_morphology(morphology))
             ? std::tan(kDynamicFrictionAngleDeg * std::numbers::pi / 180.0)
             : 1.0;
}

double coefficient_of_variation(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  return mean != 0.0 ? std::sqrt(var) / std::abs(mean) : 0.0;
}

namespace {

sph::LegGeometry geometry_of(const TraceMetadata& meta) {
  sph::LegGeometry g;
  g.morphology = sph::parse_morphology(meta.morphology);
  if (g.morphology == sph::Morphology::l_leg || g.morphology == sph::Morphology::reversed_l) {
    g.foot_fraction = meta.foot_fraction;
  }
  return g;
}

}  // namespace

ScalingReport scaling_analysis(const std::vector<ForceTrace>& traces) {
  ScalingReport r;
  std::set<std::string> designs;
  std::set<double> speeds;
  std::map<std::string, TraceMetadata> meta_of;
  for (const auto& t : traces) {
    if (t.meta.source == "experiment") continue;
    const std::string key = design_key(t.meta);
    designs.insert(key);
    speeds.insert(t.meta.omega);
    meta_of.emplace(key, t.meta);
  }
  if (designs.size() < 2) throw ValidationError("scaling analysis needs at least two morphologies");
  if (!designs.contains("flat")) throw ValidationError("scaling analysis needs flat-leg traces as the reference");

  const double flat_area = sph::compute_lift_area(geometry_of(meta_of.at("flat")));
  for (const auto& d : designs) {
    const double area = sph::compute_lift_area(geometry_of(meta_of.at(d)));
    r.lift_area[d] = area;
    r.alpha[d] = area / flat_area;
    r.mu[d] = friction_factor(meta_of.at(d).morphology);
  }

  std::map<std::string, std::size_t> speed_count;
  for (const auto& t : traces) {
    if (t.meta.source == "experiment") continue;
    ScalingEntry e;
    e.design = design_key(t.meta);
    e.omega = t.meta.omega;
    for (double v : t.fx) e.max_drag = std::max(e.max_drag, std::abs(v));
    for (double v : t.fz) e.max_lift = std::max(e.max_lift, std::abs(v));
    if (!(e.max_drag > 0.0) || !(e.max_lift > 0.0)) {
      r.flags.push_back(e.design + " at omega " + std::to_string(e.omega) + ": missing maximum (flat trace)");
    }
    e.mu = r.mu.at(e.design);
    e.alpha = r.alpha.at(e.design);
    e.scaled_drag = e.max_drag / e.mu;
    e.scaled_lift = e.max_lift / e.alpha;
    ++speed_count[e.design];
    r.entries.push_back(e);
  }
  std::sort(r.entries.begin(), r.entries.end(), [](const ScalingEntry& a, const ScalingEntry& b) {
    return a.omega != b.omega ? a.omega < b.omega : a.design < b.design;
  });
  for (const auto& [d, n] : speed_count) {
    if (n < 3) r.flags.push_back(d + ": fewer than three speeds");
  }

  for (double w : speeds) {
    std::vector<double> dr, ds, lr, ls;
    for (const auto& e : r.entries) {
      if (e.omega != w) continue;
      dr.push_back(e.max_drag);
      ds.push_back(e.scaled_drag);
      lr.push_back(e.max_lift);
      ls.push_back(e.scaled_lift);
    }
    ScalingSpeed s;
    s.omega = w;
    s.nondimensional = w / kReferenceOmega;
    s.designs = dr.size();
    s.cv_drag_raw = coefficient_of_variation(dr);
    s.cv_drag_scaled = coefficient_of_variation(ds);
    s.cv_lift_raw = coefficient_of_variation(lr);
    s.cv_lift_scaled = coefficient_of_variation(ls);
    if (s.designs < 2) r.flags.push_back("omega " + std::to_string(w) + ": only one design");
    r.speeds.push_back(s);
  }
  return r;
}

ScalingReport scaling_analysis(const DatasetManifest& manifest) {
  std::vector<ForceTrace> traces;
  for (const auto& rec : manifest.records) traces.push_back(rec.trace);
  return scaling_analysis(traces);
}

nlohmann::json to_json(const ScalingReport& r) {
  nlohmann::json designs = nlohmann::json::object();
  for (const auto& [d, a] : r.lift_area) {
    designs[d] = {{"lift_area_m2", a}, {"alpha", r.alpha.at(d)}, {"mu", r.mu.at(d)}};
  }
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"design", e.design},
                       {"omega", e.omega},
                       {"max_drag", e.max_drag},
                       {"max_lift", e.max_lift},
                       {"scaled_drag", e.scaled_drag},
                       {"scaled_lift", e.scaled_lift}});
  }
  nlohmann::json speeds = nlohmann::json::array();
  for (const auto& s : r.speeds) {
    speeds.push_back({{"omega", s.omega},
                      {"nondimensional_speed", s.nondimensional},
                      {"designs", s.designs},
                      {"cv_drag_raw", s.cv_drag_raw},
                      {"cv_drag_scaled", s.cv_drag_scaled},
                      {"cv_lift_raw", s.cv_lift_raw},
                      {"cv_lift_scaled", s.cv_lift_scaled},
                      {"collapsed", s.collapsed()}});
  }
  return {{"schema_version", kSchemaVersion},
          {"designs", designs},
          {"entries", entries},
          {"speeds", speeds},
          {"flags", r.flags}};
}

}  // namespace grom::pipeline
