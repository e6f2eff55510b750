#include "grom/ropf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "grom/error.hpp"

namespace grom::pf {

namespace {

void check_ensemble(const ParticleEnsemble& e) {
  if (e.size() < 1) throw ValidationError("particle ensemble is empty");
  if (e.weights.size() != e.size()) {
    throw ValidationError("particle ensemble weight count does not match particle count");
  }
}

Vector uniform_weights(Eigen::Index n) {
  return Vector::Constant(n, 1.0 / static_cast<double>(n));
}

}  // namespace

Vector MeasurementModel::basis_row(double theta, Behavior b) const {
  const auto bi = static_cast<std::size_t>(b);
  if (bi >= basis.size()) throw ValidationError("measurement model has no basis for " + to_string(b));
  const Matrix& m = basis[bi];
  const auto& g = theta_grid;
  if (theta <= g.front()) return m.row(0).transpose();
  if (theta >= g.back()) return m.row(m.rows() - 1).transpose();
  const auto it = std::upper_bound(g.begin(), g.end(), theta);
  const auto hi = static_cast<Eigen::Index>(it - g.begin());
  const Eigen::Index lo = hi - 1;
  const double s = (theta - g[static_cast<std::size_t>(lo)]) /
                   (g[static_cast<std::size_t>(hi)] - g[static_cast<std::size_t>(lo)]);
  return ((1.0 - s) * m.row(lo) + s * m.row(hi)).transpose();
}

double MeasurementModel::predict(const Eigen::Ref<const Vector>& alpha, double theta,
                                 Behavior b) const {
  return basis_row(theta, b).dot(alpha);
}

ForceTrace MeasurementModel::reconstruct(const Eigen::Ref<const Vector>& alpha) const {
  if (basis.size() != static_cast<std::size_t>(kBehaviorCount)) {
    throw ValidationError("trace reconstruction needs a basis for both fx and fz");
  }
  ForceTrace t;
  t.theta = theta_grid;
  const Vector fx = basis[0] * alpha;
  const Vector fz = basis[1] * alpha;
  t.fx.assign(fx.data(), fx.data() + fx.size());
  t.fz.assign(fz.data(), fz.data() + fz.size());
  return t;
}

void MeasurementModel::validate() const {
  if (theta_grid.size() < 2) throw ValidationError("measurement model needs at least two angles");
  if (basis.empty()) throw ValidationError("measurement model has no basis");
  for (const auto& b : basis) {
    if (b.rows() != static_cast<Eigen::Index>(theta_grid.size()) || b.cols() != dimension()) {
      throw ValidationError("measurement model basis shape mismatch");
    }
  }
  if (measurement_noise_std.size() != basis.size()) {
    throw ValidationError("measurement model needs one noise level per behavior");
  }
  for (double s : measurement_noise_std) {
    if (!(s > 0.0)) throw ValidationError("measurement noise std must be positive");
  }
  if (process_noise_std.size() != dimension() || (process_noise_std.array() < 0.0).any()) {
    throw ValidationError("process noise std must be non-negative, one per coefficient");
  }
}

ParticleEnsemble initialize(const Prior& prior, Eigen::Index n_particles, Rng& rng) {
  if (n_particles < 1) throw ValidationError("particle count must be at least 1");
  if (prior.mean.size() != prior.std.size()) {
    throw ValidationError("prior mean and std have different lengths");
  }
  if ((prior.std.array() < 0.0).any()) throw ValidationError("prior std must be non-negative");
  ParticleEnsemble e;
  e.particles.resize(n_particles, prior.mean.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < n_particles; ++i)
    for (Eigen::Index k = 0; k < prior.mean.size(); ++k)
      e.particles(i, k) = prior.mean(k) + prior.std(k) * normal(rng);
  e.weights = uniform_weights(n_particles);
  return e;
}

ParticleEnsemble initialize(const Prior& prior, Eigen::Index n_particles, std::uint64_t seed) {
  Rng rng(seed);
  return initialize(prior, n_particles, rng);
}

ParticleEnsemble update_weights(const ParticleEnsemble& e, const Observation& obs,
                                const MeasurementModel& m) {
  check_ensemble(e);
  const double sigma = m.measurement_noise_std.at(static_cast<std::size_t>(obs.behavior));
  if (!(sigma > 0.0)) throw ValidationError("measurement noise std must be positive");
  const Vector row = m.basis_row(obs.theta, obs.behavior);
  const Vector predicted = e.particles * row;

  const Eigen::Index n = e.size();
  Vector logw(n);
  double max_loglik = -std::numeric_limits<double>::infinity();
  double max_logw = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = (obs.value - predicted(i)) / sigma;
    const double loglik = -0.5 * r * r;
    logw(i) = e.weights(i) > 0.0 ? std::log(e.weights(i)) + loglik
                                 : -std::numeric_limits<double>::infinity();
    if (e.weights(i) > 0.0) max_loglik = std::max(max_loglik, loglik);
    max_logw = std::max(max_logw, logw(i));
  }
  // exp(-745) is the smallest positive double.
  if (!(max_loglik > -745.0) || !std::isfinite(max_logw)) {
    std::ostringstream msg;
    msg << "observation (theta=" << obs.theta << ", " << to_string(obs.behavior)
        << ", value=" << obs.value << ") has zero likelihood under every particle; "
        << "closest normalized residual " << std::sqrt(-2.0 * max_loglik);
    throw NumericalError(msg.str());
  }

  ParticleEnsemble out;
  out.particles = e.particles;
  out.weights.resize(n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.weights(i) = std::exp(logw(i) - max_logw);
    total += out.weights(i);
  }
  out.weights /= total;
  return out;
}

double effective_sample_size(const ParticleEnsemble& e) {
  check_ensemble(e);
  return 1.0 / e.weights.squaredNorm();
}

std::vector<int> systematic_counts(const Vector& w, double u) {
  const Eigen::Index n = w.size();
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  double cum = 0.0;
  Eigen::Index i = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double point = (static_cast<double>(k) + u) / static_cast<double>(n);
    while (i < n - 1 && cum + w(i) <= point) {
      cum += w(i);
      ++i;
    }
    ++counts[static_cast<std::size_t>(i)];
  }
  return counts;
}

ParticleEnsemble resample_systematic(const ParticleEnsemble& e, Rng& rng) {
  check_ensemble(e);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::vector<int> counts = systematic_counts(e.weights, unif(rng));
  ParticleEnsemble out;
  out.particles.resize(e.size(), e.dimension());
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    for (int c = 0; c < counts[static_cast<std::size_t>(i)]; ++c) {
      out.particles.row(row++) = e.particles.row(i);
    }
  }
  out.weights = uniform_weights(e.size());
  return out;
}

ParticleEnsemble resample_systematic(const ParticleEnsemble& e, std::uint64_t seed) {
  Rng rng(seed);
  return resample_systematic(e, rng);
}

AssimilationResult assimilate(const Prior& prior, const std::vector<Observation>& observations,
                              const MeasurementModel& m, const AssimilationOptions& options) {
  m.validate();
  if (prior.mean.size() != m.dimension()) {
    throw ValidationError("prior dimension does not match measurement model");
  }
  if (options.n_particles < 2) throw ValidationError("assimilation needs at least two particles");
  for (std::size_t k = 1; k < observations.size(); ++k) {
    if (observations[k].theta < observations[k - 1].theta) {
      throw ValidationError("observations must be sorted by angle");
    }
  }

  AssimilationResult result;
  if (observations.empty()) {
    result.posterior_mean = prior.mean;
    result.posterior_cov_diag = prior.std.array().square();
    result.updated_trace = m.reconstruct(prior.mean);
    return result;
  }

  Rng rng(options.seed);
  ParticleEnsemble e = initialize(prior, options.n_particles, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double threshold = options.ess_threshold_fraction * static_cast<double>(e.size());

  for (const Observation& obs : observations) {
    for (Eigen::Index i = 0; i < e.size(); ++i)
      for (Eigen::Index k = 0; k < e.dimension(); ++k)
        e.particles(i, k) += m.process_noise_std(k) * normal(rng);
    e = update_weights(e, obs, m);
    result.mean_history.push_back(e.particles.transpose() * e.weights);
    const double ess = effective_sample_size(e);
    result.ess_history.push_back(ess);
    if (ess < threshold) {
      e = resample_systematic(e, rng);
      ++result.resample_count;
    }
  }

  result.posterior_mean = e.particles.transpose() * e.weights;
  result.posterior_cov_diag.resize(e.dimension());
  for (Eigen::Index k = 0; k < e.dimension(); ++k) {
    const auto centered = e.particles.col(k).array() - result.posterior_mean(k);
    result.posterior_cov_diag(k) = (e.weights.array() * centered.square()).sum();
  }
  result.updated_trace = m.reconstruct(result.posterior_mean);
  return result;
}

std::vector<Observation> read_observations_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open observation file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ":1: empty observation file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "theta_rad,behavior,value") {
    throw ValidationError(path.string() + ":1: expected header 'theta_rad,behavior,value'");
  }
  std::vector<Observation> obs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    if (cells.size() != 3) throw ValidationError(where + "expected three columns");
    Observation o;
    try {
      std::size_t used = 0;
      o.theta = std::stod(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument(cells[0]);
      o.value = std::stod(cells[2], &used);
      if (used != cells[2].size()) throw std::invalid_argument(cells[2]);
    } catch (const std::exception&) {
      throw ValidationError(where + "malformed number");
    }
    try {
      o.behavior = parse_behavior(cells[1]);
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
    if (!std::isfinite(o.theta) || !std::isfinite(o.value)) {
      throw ValidationError(where + "non-finite value");
    }
    obs.push_back(o);
  }
  std::stable_sort(obs.begin(), obs.end(),
                   [](const Observation& a, const Observation& b) { return a.theta < b.theta; });
  return obs;
}

void write_observations_csv(const std::vector<Observation>& obs, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "theta_rad,behavior,value\n" << std::setprecision(17);
  for (const auto& o : obs) os << o.theta << ',' << to_string(o.behavior) << ',' << o.value << '\n';
  write_file_atomic(path, os.str());
}

std::vector<double> estimate_measurement_noise(const std::vector<Observation>& obs,
                                               double fallback) {
  std::vector<double> out(kBehaviorCount, fallback);
  for (int b = 0; b < kBehaviorCount; ++b) {
    std::vector<double> values;
    for (const auto& o : obs)
      if (static_cast<int>(o.behavior) == b) values.push_back(o.value);
    if (values.size() < 3) continue;
    std::vector<double> diffs;
    for (std::size_t k = 1; k < values.size(); ++k) diffs.push_back(values[k] - values[k - 1]);
    double mean = 0.0;
    for (double d : diffs) mean += d;
    mean /= static_cast<double>(diffs.size());
    double var = 0.0;
    for (double d : diffs) var += (d - mean) * (d - mean);
    var /= static_cast<double>(diffs.size() - 1);
    const double s = std::sqrt(var) / std::sqrt(2.0);
    if (s > 0.0) out[static_cast<std::size_t>(b)] = s;
  }
  return out;
}

nlohmann::json to_json(const AssimilationResult& r) {
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"posterior_mean", vec(r.posterior_mean)},
          {"posterior_cov_diag", vec(r.posterior_cov_diag)},
          {"ess_history", r.ess_history},
          {"resample_count", r.resample_count},
          {"updated_trace",
           {{"theta_rad", r.updated_trace.theta},
            {"fx_N_per_m", r.updated_trace.fx},
            {"fz_N_per_m", r.updated_trace.fz}}}};
}

}  // namespace grom::pf
