#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "grom/force_trace.hpp"
#include "grom/tensor.hpp"

namespace grom::pf {

/// Weighted particles over reduced coefficient vectors (one particle per row).
struct ParticleEnsemble {
  Matrix particles;
  Vector weights;

  Eigen::Index size() const { return particles.rows(); }
  Eigen::Index dimension() const { return particles.cols(); }
};

struct Observation {
  double theta = 0.0;
  Behavior behavior = Behavior::fx;
  double value = 0.0;
};

/// Maps a coefficient vector to force predictions. For each behavior b the
/// matrix `basis[b]` (angle samples x coefficients) holds the reconstruction
/// rows on `theta_grid`; off-grid angles are interpolated linearly.
struct MeasurementModel {
  std::vector<double> theta_grid;
  std::vector<Matrix> basis;
  std::vector<double> measurement_noise_std;  ///< per behavior, > 0
  Vector process_noise_std;                   ///< per coefficient, >= 0

  Eigen::Index dimension() const { return basis.empty() ? 0 : basis.front().cols(); }
  Vector basis_row(double theta, Behavior b) const;
  double predict(const Eigen::Ref<const Vector>& alpha, double theta, Behavior b) const;
  /// Full trace on `theta_grid` for a coefficient vector (two-behavior models).
  ForceTrace reconstruct(const Eigen::Ref<const Vector>& alpha) const;
  void validate() const;
};

struct Prior {
  Vector mean;
  Vector std;
};

struct AssimilationResult {
  Vector posterior_mean;
  Vector posterior_cov_diag;
  ForceTrace updated_trace;
  std::vector<double> ess_history;
  /// Weighted mean after each observation.
  std::vector<Vector> mean_history;
  int resample_count = 0;
};

struct AssimilationOptions {
  Eigen::Index n_particles = 1000;
  double ess_threshold_fraction = 0.5;
  std::uint64_t seed = 0;
};

using Rng = std::mt19937_64;

ParticleEnsemble initialize(const Prior& prior, Eigen::Index n_particles, std::uint64_t seed);
ParticleEnsemble initialize(const Prior& prior, Eigen::Index n_particles, Rng& rng);

/// Multiply weights by the Gaussian likelihood of `obs` (log-space, max-shifted)
/// and renormalize.
ParticleEnsemble update_weights(const ParticleEnsemble& e, const Observation& obs,
                                const MeasurementModel& m);

double effective_sample_size(const ParticleEnsemble& e);

ParticleEnsemble resample_systematic(const ParticleEnsemble& e, std::uint64_t seed);
ParticleEnsemble resample_systematic(const ParticleEnsemble& e, Rng& rng);
/// Offspring counts of systematic resampling for weights `w` with offset u in [0, 1).
std::vector<int> systematic_counts(const Vector& w, double u);

/// Bootstrap filter over `observations` (sorted by angle): random-walk
/// propagation, weighting, and systematic resampling whenever the effective
/// sample size drops below the threshold fraction of N.
AssimilationResult assimilate(const Prior& prior, const std::vector<Observation>& observations,
                              const MeasurementModel& m, const AssimilationOptions& options);

/// CSV with header `theta_rad,behavior,value`.
std::vector<Observation> read_observations_csv(const std::filesystem::path& path);
void write_observations_csv(const std::vector<Observation>& obs, const std::filesystem::path& path);

/// Noise level from the high-frequency residual: sd(first differences)/sqrt(2),
/// computed per behavior over angle-sorted observations. Falls back to
/// `fallback` when fewer than three samples exist.
std::vector<double> estimate_measurement_noise(const std::vector<Observation>& obs,
                                               double fallback);

nlohmann::json to_json(const AssimilationResult& r);

}  // namespace grom::pf
