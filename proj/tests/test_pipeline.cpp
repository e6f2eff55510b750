#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>

#include "grom/error.hpp"
#include "grom/pipeline/dataset.hpp"
#include "grom/pipeline/evaluation.hpp"
#include "grom/pipeline/model.hpp"
#include "grom/sph/leg.hpp"

using namespace grom;
using namespace grom::pipeline;
namespace fs = std::filesystem;

namespace {

using Field = std::function<double(double omega, double theta)>;

ForceTrace make_trace(double omega, const Field& fx, const Field& fz, const std::vector<double>& grid,
                      const std::string& morphology = "flat", double fl = 0.0) {
  ForceTrace t;
  t.theta = grid;
  for (double th : grid) {
    t.fx.push_back(fx(omega, th));
    t.fz.push_back(fz(omega, th));
  }
  t.meta.morphology = morphology;
  t.meta.foot_fraction = fl;
  t.meta.omega = omega;
  return t;
}

std::vector<ForceTrace> family(const std::vector<double>& omegas, const Field& fx, const Field& fz,
                               std::size_t samples = 64) {
  std::vector<ForceTrace> out;
  const auto grid = default_theta_grid(samples);
  for (double w : omegas) out.push_back(make_trace(w, fx, fz, grid));
  return out;
}

std::vector<double> speeds(int n, double lo = 1.0, double step = 1.0) {
  std::vector<double> w;
  for (int i = 0; i < n; ++i) w.push_back(lo + step * i);
  return w;
}

TrainOptions noiseless() {
  TrainOptions o;
  o.gp.fixed_noise = 0.0;
  return o;
}

double peak(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double rmse(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

// Independent linear interpolation oracle.
double lerp_oracle(const std::vector<double>& x, const std::vector<double>& y, double at) {
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    if (at >= x[k] && at <= x[k + 1]) return y[k] + (y[k + 1] - y[k]) * (at - x[k]) / (x[k + 1] - x[k]);
  }
  return at < x.front() ? y.front() : y.back();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const Field kSinX = [](double w, double th) { return w * std::sin(th); };
const Field kCosZ = [](double w, double th) { return (1.0 + 0.2 * w) * std::cos(th) + 0.1 * w; };

}  // namespace

TEST_CASE("ingest: empty directory yields an empty manifest with a warning") {
  TempDir d("grom_ingest_empty");
  const auto m = ingest(d.path);
  CHECK(m.records.empty());
  CHECK(m.warnings.size() == 1);
  CHECK(m.theta_grid.size() == kDefaultSamples);
  CHECK_THROWS_AS(ingest(d.path / "missing"), ValidationError);
}

TEST_CASE("ingest: on-grid traces are unchanged and finer traces match interpolation") {
  TempDir d("grom_ingest_grid");
  const auto grid = default_theta_grid();
  const Field wavy = [](double, double th) { return std::sin(3.0 * th) + 0.2 * th * th; };
  write_trace_with_sidecar(make_trace(2.0, wavy, kCosZ, grid), d.path / "a.csv");
  const auto fine_grid = default_theta_grid(2 * kDefaultSamples - 1);
  const auto fine = make_trace(3.0, wavy, kCosZ, fine_grid);
  write_trace_with_sidecar(fine, d.path / "b.csv");
  // Irregular samples exercise interpolation between unequal spacings.
  std::vector<double> odd;
  for (int k = 0; k <= 40; ++k) odd.push_back(-0.75 * std::numbers::pi + 1.5 * std::numbers::pi * std::pow(k / 40.0, 1.3));
  const auto irregular = make_trace(4.0, wavy, kCosZ, odd);
  write_trace_with_sidecar(irregular, d.path / "c.csv");

  const auto m = ingest(d.path);
  REQUIRE(m.records.size() == 3);
  const auto& a = m.records[0].trace;
  for (std::size_t t = 0; t < grid.size(); ++t) {
    CHECK(a.theta[t] == grid[t]);
    CHECK(std::abs(a.fx[t] - wavy(2.0, grid[t])) <= 1e-12);
  }
  for (const auto* rec : {&m.records[1], &m.records[2]}) {
    const auto& src = rec == &m.records[1] ? fine : irregular;
    for (std::size_t t = 0; t < grid.size(); ++t) {
      // CSV output carries 17 significant digits.
      CHECK(std::abs(rec->trace.fx[t] - lerp_oracle(src.theta, src.fx, grid[t])) <= 1e-12);
      CHECK(std::abs(rec->trace.fz[t] - lerp_oracle(src.theta, src.fz, grid[t])) <= 1e-12);
    }
  }
}

TEST_CASE("ingest: experiment traces stay sparse") {
  TempDir d("grom_ingest_exp");
  auto t = make_trace(0.2, kSinX, kCosZ, {-1.0, 0.0, 0.5});
  t.meta.source = "experiment";
  write_trace_with_sidecar(t, d.path / "exp.csv");
  const auto m = ingest(d.path);
  REQUIRE(m.records.size() == 1);
  CHECK(m.records[0].is_experiment());
  CHECK(m.records[0].trace.theta == std::vector<double>{-1.0, 0.0, 0.5});
  CHECK(m.designs().empty());
}

TEST_CASE("ingest rejects duplicates, non-monotone angles and malformed files") {
  const auto grid = default_theta_grid(16);
  {
    TempDir d("grom_ingest_dup");
    write_trace_with_sidecar(make_trace(2.0, kSinX, kCosZ, grid), d.path / "a.csv");
    write_trace_with_sidecar(make_trace(2.0, kSinX, kCosZ, grid), d.path / "b.csv");
    CHECK_THROWS_AS(ingest(d.path), ValidationError);
  }
  {
    TempDir d("grom_ingest_mono");
    std::ofstream(d.path / "a.csv") << "theta_rad,fx_N_per_m,fz_N_per_m\n0.0,1,2\n0.5,1,2\n0.4,1,2\n";
    std::ofstream(d.path / "a.json") << R"({"morphology":"flat","omega":1.0,"source":"simulation"})";
    try {
      ingest(d.path);
      FAIL("expected rejection");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("a.csv") != std::string::npos);
    }
  }
  {
    TempDir d("grom_ingest_bad");
    std::ofstream(d.path / "a.csv") << "theta_rad,fx_N_per_m,fz_N_per_m\n0.0,1\n";
    std::ofstream(d.path / "a.json") << R"({"morphology":"flat","omega":1.0})";
    CHECK_THROWS_AS(ingest(d.path), ValidationError);
  }
  {
    TempDir d("grom_ingest_header");
    std::ofstream(d.path / "a.csv") << "angle,fx,fz\n0.0,1,2\n1.0,1,2\n";
    std::ofstream(d.path / "a.json") << R"({"morphology":"flat","omega":1.0})";
    CHECK_THROWS_AS(ingest(d.path), ValidationError);
  }
  {
    TempDir d("grom_ingest_sidecar");
    write_trace_csv(make_trace(2.0, kSinX, kCosZ, grid), d.path / "a.csv");
    CHECK_THROWS_AS(ingest(d.path), ValidationError);
  }
}

TEST_CASE("manifest write/read is lossless") {
  TempDir d("grom_manifest");
  DatasetManifest m;
  m.theta_grid = default_theta_grid(32);
  for (double w : {1.0, 2.5, 3.0}) add_record(m, {make_trace(w, kSinX, kCosZ, m.theta_grid), "mem"});
  add_record(m, {make_trace(1.0, kSinX, kCosZ, m.theta_grid, "l_leg", 1.0 / 3.0), "mem"});
  auto exp = make_trace(0.2, kSinX, kCosZ, {0.1, 0.2});
  exp.meta.source = "experiment";
  add_record(m, {exp, "mem"});
  m.warnings.push_back("note");
  write_manifest(m, d.path / "m.json");
  const auto back = read_manifest(d.path / "m.json");
  REQUIRE(back.records.size() == m.records.size());
  CHECK(back.theta_grid == m.theta_grid);
  CHECK(back.warnings == m.warnings);
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    CHECK(back.records[i].trace.theta == m.records[i].trace.theta);
    CHECK(back.records[i].trace.fx == m.records[i].trace.fx);
    CHECK(back.records[i].trace.fz == m.records[i].trace.fz);
    CHECK(design_key(back.records[i].meta()) == design_key(m.records[i].meta()));
    CHECK(back.records[i].meta().source == m.records[i].meta().source);
  }
  CHECK(back.designs() == std::vector<std::string>{"flat", "l_leg@0.333333"});
  CHECK(back.simulations("l_leg").size() == 1);
  CHECK(back.simulations("flat").size() == 3);
}

TEST_CASE("train requires three distinct conditions on a shared grid") {
  auto traces = family({1.0, 2.0}, kSinX, kCosZ);
  CHECK_THROWS_AS(train(traces, "flat"), ValidationError);
  traces = family({1.0, 2.0, 2.0}, kSinX, kCosZ);
  CHECK_THROWS_AS(train(traces, "flat"), ValidationError);
  traces = family({1.0, 2.0, 3.0}, kSinX, kCosZ);
  traces[1] = resample(traces[1], default_theta_grid(40));
  CHECK_THROWS_AS(train(traces, "flat"), ValidationError);
}

TEST_CASE("rank-one data needs a single coefficient and interpolates its generator") {
  const Field fx = [](double w, double th) { return (1.0 + 0.3 * w) * std::sin(th); };
  const Field fz = [](double w, double th) { return -2.0 * (1.0 + 0.3 * w) * std::sin(th); };
  const auto traces = family(speeds(6), fx, fz);
  const auto model = train(traces, "flat", noiseless());
  CHECK(model.coefficient_count() == 1);
  const auto p = predict(model, 3.5);
  const auto truth = make_trace(3.5, fx, fz, model.theta_grid);
  CHECK(rmse(p.trace.fx, truth.fx) <= 1e-4 * peak(truth.fx));
  CHECK(rmse(p.trace.fz, truth.fz) <= 1e-4 * peak(truth.fz));
}

TEST_CASE("noiseless prediction at a training condition equals the truncated trace") {
  for (bool per_behavior : {false, true}) {
    auto opts = noiseless();
    opts.per_behavior = per_behavior;
    const Field fx = [](double w, double th) { return std::sin(th + 0.1 * w) * w + 0.3 * std::cos(2 * th); };
    const Field fz = [](double w, double th) { return std::exp(-th * th) * std::sqrt(w) - 0.2 * w * th; };
    const auto model = train(family(speeds(7, 0.5, 0.7), fx, fz), "flat", opts);
    CHECK(model.blocks.size() == (per_behavior ? 2u : 1u));
    for (std::size_t i = 0; i < model.conditions.size(); ++i) {
      const auto p = predict(model, model.conditions[i]);
      const auto ref = truncated_trace(model, i);
      CHECK_FALSE(p.extrapolated);
      for (int b = 0; b < kBehaviorCount; ++b) {
        const auto& pv = p.trace.values(static_cast<Behavior>(b));
        const auto& rv = ref.values(static_cast<Behavior>(b));
        const double scale = peak(rv);
        for (std::size_t t = 0; t < pv.size(); ++t) CHECK(std::abs(pv[t] - rv[t]) <= 1e-6 * scale);
      }
    }
  }
}

TEST_CASE("constant data gives a speed-independent prediction") {
  const Field fx = [](double, double th) { return std::sin(th); };
  const Field fz = [](double, double th) { return 1.0 + std::cos(th); };
  const auto model = train(family(speeds(5), fx, fz), "flat");
  const auto a = predict(model, 1.5);
  for (double w : {0.2, 3.3, 4.9, 12.0}) {
    const auto b = predict(model, w);
    for (std::size_t t = 0; t < a.trace.size(); ++t) {
      CHECK(b.trace.fx[t] == doctest::Approx(a.trace.fx[t]).epsilon(1e-9).scale(1.0));
      CHECK(b.trace.fz[t] == doctest::Approx(a.trace.fz[t]).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("c sin(theta) generator: held-out prediction within 2% RMS of peak") {
  const Field fz = [](double w, double th) { return w * std::cos(th); };
  std::vector<double> w = speeds(10);
  w.erase(w.begin() + 4);  // hold out 5
  const auto model = train(family(w, kSinX, fz), "flat");
  for (double c : {5.0, 2.5, 8.5}) {
    const auto p = predict(model, c);
    const auto truth = make_trace(c, kSinX, fz, model.theta_grid);
    CHECK(rmse(p.trace.fx, truth.fx) <= 0.02 * peak(truth.fx));
    CHECK(rmse(p.trace.fz, truth.fz) <= 0.02 * peak(truth.fz));
  }
}

TEST_CASE("prediction bands and extrapolation flag") {
  const auto model = train(family(speeds(5, 2.0), kSinX, kCosZ), "flat");
  const auto p = predict(model, 4.5);
  for (std::size_t t = 0; t < p.trace.size(); ++t) {
    CHECK(p.lower.fx[t] <= p.trace.fx[t]);
    CHECK(p.trace.fx[t] <= p.upper.fx[t]);
    CHECK(p.lower.fz[t] <= p.trace.fz[t]);
    CHECK(p.trace.fz[t] <= p.upper.fz[t]);
  }
  CHECK(p.trace.meta.source == "prediction");
  CHECK(p.trace.meta.omega == 4.5);
  // Training range [2, 6]; twice the range is [0, 8].
  CHECK_FALSE(predict(model, 0.5).extrapolated);
  CHECK_FALSE(predict(model, 7.9).extrapolated);
  CHECK(predict(model, 8.5).extrapolated);
}

TEST_CASE("model JSON round trip preserves predictions bit for bit") {
  TempDir d("grom_model_json");
  const auto model = train(family(speeds(6), kSinX, kCosZ), "flat");
  write_model(model, d.path / "m.json");
  const auto back = read_model(d.path / "m.json");
  const auto a = predict(model, 3.7), b = predict(back, 3.7);
  CHECK(a.trace.fx == b.trace.fx);
  CHECK(a.trace.fz == b.trace.fz);
  CHECK(a.upper.fx == b.upper.fx);
  const auto j = read_json_file(d.path / "m.json");
  CHECK(j.at("schema_version") == kSchemaVersion);
}

TEST_CASE("training is deterministic for a fixed seed") {
  const auto traces = family(speeds(6), kSinX, kCosZ);
  CHECK(to_json(train(traces, "flat")).dump() == to_json(train(traces, "flat")).dump());
}

TEST_CASE("relative absolute error formulas") {
  const auto grid = default_theta_grid(16);
  const auto ref = make_trace(1.0, kSinX, kCosZ, grid);
  const auto e0 = relative_absolute_error(ref, ref);
  CHECK(e0[0] == 0.0);
  CHECK(e0[1] == 0.0);
  auto zero = ref;
  std::fill(zero.fx.begin(), zero.fx.end(), 0.0);
  std::fill(zero.fz.begin(), zero.fz.end(), 0.0);
  const auto ez = relative_absolute_error(zero, ref);
  double mean_abs = 0.0;
  for (double v : ref.fx) mean_abs += std::abs(v) / static_cast<double>(ref.size());
  CHECK(ez[0] == doctest::Approx(mean_abs / peak(ref.fx)).epsilon(1e-14));
  auto shifted = ref;
  for (auto& v : shifted.fz) v += 0.3;
  CHECK(relative_absolute_error(shifted, ref)[1] == doctest::Approx(0.3 / peak(ref.fz)).epsilon(1e-12));
  CHECK_THROWS_AS(relative_absolute_error(ref, zero), ValidationError);
  CHECK_THROWS_AS(relative_absolute_error(resample(ref, default_theta_grid(8)), ref), ValidationError);
}

TEST_CASE("cross-validation: one fold per condition, exact on in-model data") {
  const Field fx = [](double, double th) { return std::sin(th) + 0.5; };
  const Field fz = [](double, double th) { return std::cos(th); };
  const auto r = crossval_loo(family(speeds(10), fx, fz), "flat");
  REQUIRE(r.folds.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(r.folds[i].omega == static_cast<double>(i + 1));
    CHECK(r.folds[i].edge == (i == 0 || i == 9));
    CHECK(r.folds[i].error[0] <= 1e-6);
    CHECK(r.folds[i].error[1] <= 1e-6);
  }
  CHECK_THROWS_AS(crossval_loo(family(speeds(3), fx, fz), "flat"), ValidationError);
  const auto j = to_json(r);
  CHECK(j.at("folds").size() == 10);
  CHECK(j.at("folds")[0].at("nondimensional_speed") == doctest::Approx(5.0));
}

TEST_CASE("cross-validation: edge folds err more than interior folds on smooth data") {
  double edge = 0.0, interior = 0.0;
  int edge_wins = 0;
  const int datasets = 20;
  for (int s = 0; s < datasets; ++s) {
    std::mt19937_64 rng(100 + static_cast<std::uint64_t>(s));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a1 = u(rng), a2 = u(rng), ph = u(rng), k = 0.2 + 0.1 * u(rng);
    const Field fx = [=](double w, double th) {
      return (1.0 + 0.3 * a1 * w + 0.5 * std::sin(k * w + ph)) * std::sin(th) + 0.3 * a2 * std::sin(k * w) * std::cos(2 * th);
    };
    const Field fz = [=](double w, double th) {
      return (2.0 + 0.5 * std::cos(k * w + ph)) * std::exp(-th * th) + 0.2 * a1 * w * std::cos(th);
    };
    TrainOptions o;
    o.gp.seed = static_cast<std::uint64_t>(s);
    const auto r = crossval_loo(family(speeds(10), fx, fz), "flat", o);
    edge += r.edge_mean_error / datasets;
    interior += r.interior_mean_error / datasets;
    if (r.edge_mean_error >= r.interior_mean_error) ++edge_wins;
  }
  MESSAGE("edge mean " << edge << ", interior mean " << interior << ", edge >= interior in " << edge_wins << "/20");
  CHECK(edge >= interior);
  CHECK(edge_wins >= 15);
}

TEST_CASE("assimilation: no observations reproduce the prediction") {
  const auto model = train(family(speeds(6), kSinX, kCosZ), "flat");
  const auto a = assimilate_scenario(model, 3.3, {});
  CHECK(a.result.updated_trace.fx == a.prior.trace.fx);
  CHECK(a.result.updated_trace.fz == a.prior.trace.fz);
  CHECK(a.result.updated_trace.meta.source == "assimilation");
}

TEST_CASE("assimilation: a supplied noise level replaces the estimate") {
  const auto model = train(family(speeds(6), kSinX, kCosZ), "flat");
  const auto prior = predict(model, 3.3);
  std::vector<pf::Observation> obs;
  for (std::size_t t : {10u, 60u, 100u})
    obs.push_back({prior.trace.theta[t], t == 60u ? Behavior::fz : Behavior::fx, prior.trace.values(t == 60u ? Behavior::fz : Behavior::fx)[t]});
  AssimilationSetup setup;
  setup.measurement_noise_std = std::array<double, 2>{0.03, 0.07};
  const auto a = assimilate_scenario(model, 3.3, obs, setup);
  CHECK(a.measurement_noise_std == std::vector<double>{0.03, 0.07});
  setup.measurement_noise_std = std::array<double, 2>{0.03, 0.0};
  CHECK_THROWS_AS(assimilate_scenario(model, 3.3, obs, setup), ValidationError);
}

TEST_CASE("assimilation with consistent observations does not increase the error") {
  const Field fx = [](double w, double th) { return std::sin(th + 0.05 * w * w) * (1.0 + 0.2 * w); };
  const Field fz = [](double w, double th) { return std::exp(-0.5 * th * th) * (2.0 + std::sin(w)); };
  const auto model = train(family(speeds(6), fx, fz), "flat");
  // Beyond the training speeds the GP prior is broad.
  const double omega = 8.5;
  const auto prior = predict(model, omega);
  const Eigen::Index p = prior.coefficient_mean.size();
  std::vector<double> diff;
  double mean_before = 0.0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(s));
    std::normal_distribution<double> n;
    // Truth drawn from the prior predictive distribution of the coefficients.
    Vector alpha(p);
    for (Eigen::Index k = 0; k < p; ++k)
      alpha(k) = prior.coefficient_mean(k) + std::sqrt(std::max(0.0, prior.coefficient_variance(k))) * n(rng);
    const auto truth = reconstruct_trace(model, alpha);
    std::vector<pf::Observation> obs;
    const double noise = 0.02 * model.scale[0];
    for (std::size_t t = 4; t < truth.size(); t += 12) {
      obs.push_back({truth.theta[t], Behavior::fx, truth.fx[t] + noise * n(rng)});
      obs.push_back({truth.theta[t], Behavior::fz, truth.fz[t] + 0.02 * model.scale[1] * n(rng)});
    }
    AssimilationSetup setup;
    setup.seed = static_cast<std::uint64_t>(s);
    const auto a = assimilate_scenario(model, omega, obs, setup);
    const double before = rmse(prior.trace.fx, truth.fx) + rmse(prior.trace.fz, truth.fz);
    const double after = rmse(a.result.updated_trace.fx, truth.fx) + rmse(a.result.updated_trace.fz, truth.fz);
    diff.push_back(after - before);
    mean_before += before / seeds;
  }
  double mean = 0.0, var = 0.0;
  for (double d : diff) mean += d / seeds;
  for (double d : diff) var += (d - mean) * (d - mean) / (seeds - 1);
  MESSAGE("mean prior RMSE " << mean_before << ", mean change " << mean << " (sd " << std::sqrt(var) << ")");
  CHECK(mean <= 3.0 * std::sqrt(var / seeds));
}

TEST_CASE("scaling: factors by design and collapse of proportional maxima") {
  const double tan33 = std::tan(33.0 * std::numbers::pi / 180.0);
  const auto grid = default_theta_grid(32);
  std::vector<ForceTrace> traces;
  const std::vector<std::pair<std::string, double>> designs{{"flat", 0.0}, {"reversed_c", 0.0}, {"reversed_l", 1.0 / 3.0}, {"c_leg", 0.0}};
  for (const auto& [m, fl] : designs) {
    sph::LegGeometry g;
    g.morphology = sph::parse_morphology(m);
    g.foot_fraction = fl == 0.0 ? g.foot_fraction : fl;
    const double alpha = sph::compute_lift_area(g) / sph::compute_lift_area(sph::LegGeometry{});
    const double mu = sph::is_reversed(g.morphology) ? tan33 : 1.0;
    for (double w : {1.0, 2.0, 3.0}) {
      const Field fx = [=](double om, double th) { return mu * om * std::sin(th); };
      const Field fz = [=](double om, double th) { return alpha * (1.0 + om) * std::cos(th); };
      traces.push_back(make_trace(w, fx, fz, grid, m, fl));
    }
  }
  const auto r = scaling_analysis(traces);
  CHECK(r.alpha.at("flat") == 1.0);
  CHECK(r.mu.at("flat") == 1.0);
  CHECK(r.mu.at("c_leg") == 1.0);
  CHECK(r.mu.at("reversed_c") == doctest::Approx(tan33));
  CHECK(r.mu.at("reversed_l@0.333333") == doctest::Approx(tan33));
  CHECK(r.mu.at("reversed_c") == doctest::Approx(0.6494).epsilon(1e-4));
  REQUIRE(r.speeds.size() == 3);
  for (const auto& s : r.speeds) {
    CHECK(s.designs == 4);
    CHECK(s.cv_drag_scaled <= 1e-3);
    CHECK(s.cv_lift_scaled <= 1e-3);
    CHECK(s.collapsed());
  }
  CHECK(r.flags.empty());

  // A missing flat reference and a flat (all-zero) trace are reported.
  std::vector<ForceTrace> no_flat(traces.begin() + 3, traces.end());
  CHECK_THROWS_AS(scaling_analysis(no_flat), ValidationError);
  auto flat_zero = traces;
  std::fill(flat_zero[0].fx.begin(), flat_zero[0].fx.end(), 0.0);
  CHECK_FALSE(scaling_analysis(flat_zero).flags.empty());
}

TEST_CASE("coefficient of variation") {
  CHECK(coefficient_of_variation({2.0, 2.0, 2.0}) == 0.0);
  CHECK(coefficient_of_variation({1.0, 3.0}) == doctest::Approx(0.5));
}
