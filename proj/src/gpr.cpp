#include "grom/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include "grom/error.hpp"

namespace grom::gp {

namespace {

constexpr double kJitterStart = 1e-12;
constexpr double kJitterMax = 1e-6;

struct Cholesky {
  Matrix lower;
  double jitter = 0.0;
};

Matrix kernel_matrix(const Matrix& x, const KernelParams& p) {
  const Eigen::Index n = x.rows();
  Matrix k(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      double s = 0.0;
      for (Eigen::Index d = 0; d < x.cols(); ++d) {
        const double r = (x(a, d) - x(b, d)) / p.length_scales[static_cast<std::size_t>(d)];
        s += r * r;
      }
      k(a, b) = k(b, a) = p.signal_variance * std::exp(-0.5 * s);
    }
  }
  return k;
}

// Factor K + noise I with jitter escalated from 1e-12 to 1e-6 (relative to the
// mean diagonal); nullopt when every level fails.
std::optional<Cholesky> regularized_cholesky(const Matrix& x, const KernelParams& p) {
  const Eigen::Index n = x.rows();
  Matrix k = kernel_matrix(x, p);
  const double scale = k.trace() / static_cast<double>(n);
  for (double level = kJitterStart; level <= kJitterMax * 1.0000001; level *= 10.0) {
    const double jitter = level * scale;
    Matrix reg = k;
    reg.diagonal().array() += p.noise_variance + jitter;
    Eigen::LLT<Matrix> llt(reg);
    if (llt.info() == Eigen::Success) {
      const Matrix lower = llt.matrixL();
      if (lower.allFinite() && (lower.diagonal().array() > 0.0).all()) {
        return Cholesky{lower, jitter};
      }
    }
  }
  return std::nullopt;
}

double lml_from_factor(const Matrix& lower, const Vector& y, Vector* alpha_out) {
  const Eigen::Index n = y.size();
  const Vector z = lower.triangularView<Eigen::Lower>().solve(y);
  const Vector alpha = lower.transpose().triangularView<Eigen::Upper>().solve(z);
  if (alpha_out) *alpha_out = alpha;
  double logdet_half = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet_half += std::log(lower(i, i));
  return -0.5 * y.dot(alpha) - logdet_half -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

void validate_training_set(const Matrix& inputs, const Vector& targets) {
  if (inputs.rows() == 0) throw ValidationError("GP fit requires at least one training point");
  if (inputs.rows() != targets.size()) {
    throw ValidationError("GP fit: " + std::to_string(inputs.rows()) + " input rows but " +
                          std::to_string(targets.size()) + " targets");
  }
  if (inputs.cols() == 0) throw ValidationError("GP fit: inputs have zero dimensions");
  if (!inputs.allFinite() || !targets.allFinite()) {
    throw ValidationError("GP fit: inputs and targets must be finite");
  }
}

// Lexicographic row order on (inputs, target) so that results do not depend
// on the order in which training rows are supplied.
std::vector<Eigen::Index> canonical_order(const Matrix& x, const Vector& y) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.rows()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index d = 0; d < x.cols(); ++d) {
      if (x(a, d) != x(b, d)) return x(a, d) < x(b, d);
    }
    return y(a) < y(b);
  });
  return idx;
}

// Identical inputs with different targets cannot be interpolated exactly.
void reject_conflicting_duplicates(const Matrix& x, const Vector& y) {
  const auto idx = canonical_order(x, y);
  for (std::size_t k = 1; k < idx.size(); ++k) {
    const Eigen::Index a = idx[k - 1], b = idx[k];
    if (x.row(a) == x.row(b) && y(a) != y(b)) {
      throw ValidationError("GP fit: duplicate input rows with conflicting targets need a nonzero noise variance");
    }
  }
}

struct LogBox {
  std::vector<double> lo;
  std::vector<double> hi;
};

// Parameter vector layout: [log sf2, log l_1..l_d, (log noise)].
KernelParams unpack(const double* v, std::size_t dims, std::optional<double> fixed_noise) {
  KernelParams p;
  p.signal_variance = std::exp(v[0]);
  p.length_scales.resize(dims);
  for (std::size_t d = 0; d < dims; ++d) p.length_scales[d] = std::exp(v[1 + d]);
  p.noise_variance = fixed_noise ? *fixed_noise : std::exp(v[1 + dims]);
  return p;
}

struct Objective {
  const Matrix* x;
  const Vector* y;
  std::size_t dims;
  std::optional<double> fixed_noise;
  LogBox box;
};

double negative_lml(const gsl_vector* v, void* data) {
  const auto* obj = static_cast<const Objective*>(data);
  for (std::size_t k = 0; k < v->size; ++k) {
    const double val = gsl_vector_get(v, k);
    if (!std::isfinite(val) || val < obj->box.lo[k] || val > obj->box.hi[k]) {
      return std::numeric_limits<double>::max();
    }
  }
  const KernelParams p = unpack(v->data, obj->dims, obj->fixed_noise);
  const auto chol = regularized_cholesky(*obj->x, p);
  if (!chol) return std::numeric_limits<double>::max();
  const double lml = lml_from_factor(chol->lower, *obj->y, nullptr);
  return std::isfinite(lml) ? -lml : std::numeric_limits<double>::max();
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

}  // namespace

double se_kernel(std::span<const double> a, std::span<const double> b, const KernelParams& p) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double r = (a[d] - b[d]) / p.length_scales[d];
    s += r * r;
  }
  return p.signal_variance * std::exp(-0.5 * s);
}

GPModel GPModel::with_params(const Matrix& inputs, const Vector& targets, KernelParams params) {
  validate_training_set(inputs, targets);
  const auto dims = static_cast<std::size_t>(inputs.cols());
  if (params.length_scales.size() != dims) {
    throw ValidationError("GP: expected " + std::to_string(dims) + " length scales");
  }
  if (!(params.signal_variance > 0.0) || !(params.noise_variance >= 0.0) ||
      std::any_of(params.length_scales.begin(), params.length_scales.end(),
                  [](double l) { return !(l > 0.0); })) {
    throw ValidationError("GP: kernel parameters must be positive (noise non-negative)");
  }

  if (params.noise_variance == 0.0) reject_conflicting_duplicates(inputs, targets);

  GPModel m;
  const auto order = canonical_order(inputs, targets);
  const Eigen::Index n = inputs.rows();
  m.raw_inputs_.resize(n, inputs.cols());
  m.raw_targets_.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    m.raw_inputs_.row(r) = inputs.row(order[static_cast<std::size_t>(r)]);
    m.raw_targets_(r) = targets(order[static_cast<std::size_t>(r)]);
  }

  m.standardizer_.mean.resize(dims);
  m.standardizer_.scale.resize(dims);
  m.inputs_.resize(n, inputs.cols());
  for (std::size_t d = 0; d < dims; ++d) {
    const auto col = m.raw_inputs_.col(static_cast<Eigen::Index>(d));
    const double mean = col.mean();
    const double var = (col.array() - mean).square().mean();
    const double scale = var > 0.0 ? std::sqrt(var) : 1.0;
    m.standardizer_.mean[d] = mean;
    m.standardizer_.scale[d] = scale;
    m.inputs_.col(static_cast<Eigen::Index>(d)) = (col.array() - mean) / scale;
  }
  m.target_offset_ = m.raw_targets_.mean();
  m.targets_ = m.raw_targets_.array() - m.target_offset_;
  m.params_ = std::move(params);
  m.factorize();
  return m;
}

void GPModel::factorize() {
  const auto chol = regularized_cholesky(inputs_, params_);
  if (!chol) {
    throw NumericalError("GP: kernel matrix is not positive definite even with jitter " +
                         std::to_string(kJitterMax) + " (signal variance " +
                         std::to_string(params_.signal_variance) + ", noise " +
                         std::to_string(params_.noise_variance) + ")");
  }
  factor_ = chol->lower;
  jitter_ = chol->jitter;
  log_marginal_likelihood_ = lml_from_factor(factor_, targets_, &alpha_);
}

GPModel GPModel::fit(const Matrix& inputs, const Vector& targets, const FitOptions& options) {
  validate_training_set(inputs, targets);
  if (options.restarts < 1) throw ValidationError("GP fit: restarts must be >= 1");
  if (options.fixed_noise && !(*options.fixed_noise >= 0.0)) {
    throw ValidationError("GP fit: pinned noise variance must be non-negative");
  }
  if (options.fixed_noise && *options.fixed_noise == 0.0) reject_conflicting_duplicates(inputs, targets);

  // Standardize once with placeholder parameters to get the working data.
  const auto dims = static_cast<std::size_t>(inputs.cols());
  KernelParams placeholder{1.0, std::vector<double>(dims, 1.0), 1.0};
  const GPModel base = with_params(inputs, targets, placeholder);

  const double var_y = base.targets_.squaredNorm() / static_cast<double>(base.targets_.size());
  const double y_scale = var_y > 0.0 ? var_y : 1.0;

  Objective obj{&base.inputs_, &base.targets_, dims, options.fixed_noise, {}};
  const std::size_t nparams = 1 + dims + (options.fixed_noise ? 0 : 1);
  obj.box.lo.push_back(std::log(1e-6 * y_scale));
  obj.box.hi.push_back(std::log(1e3 * y_scale));
  for (std::size_t d = 0; d < dims; ++d) {
    obj.box.lo.push_back(std::log(0.05));
    obj.box.hi.push_back(std::log(20.0));
  }
  if (!options.fixed_noise) {
    obj.box.lo.push_back(std::log(1e-10 * y_scale));
    obj.box.hi.push_back(std::log(y_scale));
  }

  std::mt19937_64 rng(options.seed);
  std::vector<std::vector<double>> starts;
  {
    std::vector<double> s0;
    s0.push_back(std::log(y_scale));
    for (std::size_t d = 0; d < dims; ++d) s0.push_back(0.0);
    if (!options.fixed_noise) s0.push_back(std::log(1e-2 * y_scale));
    starts.push_back(s0);
  }
  while (static_cast<int>(starts.size()) < options.restarts) {
    std::vector<double> s(nparams);
    for (std::size_t k = 0; k < nparams; ++k) {
      std::uniform_real_distribution<double> u(obj.box.lo[k], obj.box.hi[k]);
      s[k] = u(rng);
    }
    starts.push_back(std::move(s));
  }

  gsl_multimin_function fn{&negative_lml, nparams, &obj};
  double best_value = std::numeric_limits<double>::max();
  std::vector<double> best_point;

  for (const auto& start : starts) {
    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> minimizer(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, nparams));
    std::unique_ptr<gsl_vector, VectorDeleter> x0(gsl_vector_alloc(nparams));
    std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(nparams));
    for (std::size_t k = 0; k < nparams; ++k) gsl_vector_set(x0.get(), k, start[k]);
    gsl_vector_set_all(step.get(), 0.5);
    if (negative_lml(x0.get(), &obj) == std::numeric_limits<double>::max()) continue;
    gsl_multimin_fminimizer_set(minimizer.get(), &fn, x0.get(), step.get());

    for (int iter = 0; iter < options.max_iterations; ++iter) {
      if (gsl_multimin_fminimizer_iterate(minimizer.get()) != GSL_SUCCESS) break;
      const double size = gsl_multimin_fminimizer_size(minimizer.get());
      if (gsl_multimin_test_size(size, std::sqrt(options.tolerance)) == GSL_SUCCESS) break;
    }
    const double value = minimizer->fval;
    if (value < best_value) {
      best_value = value;
      best_point.assign(minimizer->x->data, minimizer->x->data + nparams);
    }
  }
  if (best_point.empty()) {
    throw NumericalError("GP fit: no restart produced a positive-definite kernel matrix");
  }
  return with_params(inputs, targets, unpack(best_point.data(), dims, options.fixed_noise));
}

PredictiveDistribution GPModel::predict(std::span<const double> x_star) const {
  if (x_star.size() != dimension()) {
    throw ValidationError("GP predict: expected " + std::to_string(dimension()) +
                          "-dimensional input, got " + std::to_string(x_star.size()));
  }
  std::vector<double> xs(x_star.size());
  for (std::size_t d = 0; d < xs.size(); ++d) {
    if (!std::isfinite(x_star[d])) throw ValidationError("GP predict: input is not finite");
    xs[d] = (x_star[d] - standardizer_.mean[d]) / standardizer_.scale[d];
  }
  const Eigen::Index n = inputs_.rows();
  Vector kstar(n);
  std::vector<double> row(xs.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    for (std::size_t d = 0; d < xs.size(); ++d) row[d] = inputs_(r, static_cast<Eigen::Index>(d));
    kstar(r) = se_kernel(row, xs, params_);
  }
  const Vector v = factor_.triangularView<Eigen::Lower>().solve(kstar);
  PredictiveDistribution out;
  out.mean = target_offset_ + kstar.dot(alpha_);
  out.variance = std::max(0.0, params_.signal_variance - v.squaredNorm());
  const double half = kZ95 * std::sqrt(out.variance);
  out.lower = out.mean - half;
  out.upper = out.mean + half;
  return out;
}

std::vector<PredictiveDistribution> GPModel::predict_batch(const Matrix& x_star) const {
  std::vector<PredictiveDistribution> out;
  out.reserve(static_cast<std::size_t>(x_star.rows()));
  std::vector<double> row(static_cast<std::size_t>(x_star.cols()));
  for (Eigen::Index r = 0; r < x_star.rows(); ++r) {
    for (Eigen::Index d = 0; d < x_star.cols(); ++d) row[static_cast<std::size_t>(d)] = x_star(r, d);
    out.push_back(predict(row));
  }
  return out;
}

nlohmann::json GPModel::to_json() const {
  nlohmann::json j;
  j["standardizer"] = {{"mean", standardizer_.mean}, {"scale", standardizer_.scale}};
  j["params"] = {{"signal_variance", params_.signal_variance},
                 {"length_scales", params_.length_scales},
                 {"noise_variance", params_.noise_variance}};
  j["inputs"] = grom::to_json(raw_inputs_);
  j["targets"] = std::vector<double>(raw_targets_.data(), raw_targets_.data() + raw_targets_.size());
  j["target_offset"] = target_offset_;
  j["log_marginal_likelihood"] = log_marginal_likelihood_;
  return j;
}

GPModel GPModel::from_json(const nlohmann::json& j) {
  const Matrix inputs = matrix_from_json(j.at("inputs"));
  const auto t = j.at("targets").get<std::vector<double>>();
  const Vector targets = Eigen::Map<const Vector>(t.data(), static_cast<Eigen::Index>(t.size()));
  KernelParams p;
  p.signal_variance = j.at("params").at("signal_variance").get<double>();
  p.length_scales = j.at("params").at("length_scales").get<std::vector<double>>();
  p.noise_variance = j.at("params").at("noise_variance").get<double>();
  GPModel m = with_params(inputs, targets, std::move(p));
  if (j.contains("log_marginal_likelihood") &&
      j.at("log_marginal_likelihood").get<double>() != m.log_marginal_likelihood_) {
    throw NumericalError("GP model reload is not bit-stable (log marginal likelihood differs)");
  }
  return m;
}

}  // namespace grom::gp
