#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "grom/tensor.hpp"

namespace grom::gp {

/// Squared-exponential kernel hyperparameters. Length scales are expressed in
/// standardized input units.
struct KernelParams {
  double signal_variance = 1.0;
  std::vector<double> length_scales;
  double noise_variance = 0.0;
};

/// Per-dimension affine map x -> (x - mean) / scale.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;
};

struct PredictiveDistribution {
  double mean = 0.0;
  double variance = 0.0;
  double lower = 0.0;  ///< mean - 1.959964 sd
  double upper = 0.0;  ///< mean + 1.959964 sd
};

inline constexpr double kZ95 = 1.959964;

struct FitOptions {
  int restarts = 8;
  std::uint64_t seed = 0;
  /// Pin the noise variance instead of fitting it.
  std::optional<double> fixed_noise;
  int max_iterations = 500;
  double tolerance = 1e-9;
};

/// k(a, b) = signal_variance * exp(-1/2 sum_i (a_i - b_i)^2 / l_i^2).
double se_kernel(std::span<const double> a, std::span<const double> b, const KernelParams& p);

/// Trained scalar GP regression model. Immutable once built.
class GPModel {
 public:
  /// Maximize the log marginal likelihood over log-hyperparameters using
  /// multi-start Nelder-Mead and return the best model.
  static GPModel fit(const Matrix& inputs, const Vector& targets, const FitOptions& options = {});

  /// Build a model with given hyperparameters (no optimization).
  static GPModel with_params(const Matrix& inputs, const Vector& targets, KernelParams params);

  PredictiveDistribution predict(std::span<const double> x_star) const;
  PredictiveDistribution predict(double x_star) const { return predict(std::span(&x_star, 1)); }
  /// One prediction per row of `x_star`.
  std::vector<PredictiveDistribution> predict_batch(const Matrix& x_star) const;

  double log_marginal_likelihood() const { return log_marginal_likelihood_; }

  const KernelParams& params() const { return params_; }
  const Standardizer& standardizer() const { return standardizer_; }
  const Matrix& inputs() const { return inputs_; }
  const Vector& targets() const { return targets_; }
  double target_offset() const { return target_offset_; }
  /// Lower-triangular factor of K + (noise + jitter) I.
  const Matrix& factor() const { return factor_; }
  double jitter() const { return jitter_; }
  std::size_t dimension() const { return standardizer_.mean.size(); }

  nlohmann::json to_json() const;
  static GPModel from_json(const nlohmann::json& j);

 private:
  GPModel() = default;
  void factorize();

  Matrix inputs_;   // standardized, canonical row order
  Vector targets_;  // centered
  Matrix raw_inputs_;
  Vector raw_targets_;
  Standardizer standardizer_;
  double target_offset_ = 0.0;
  KernelParams params_;
  Matrix factor_;
  Vector alpha_;
  double jitter_ = 0.0;
  double log_marginal_likelihood_ = 0.0;
};

}  // namespace grom::gp
