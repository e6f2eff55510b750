#pragma once

#include <array>
#include <string>
#include <vector>

#include "grom/gpr.hpp"
#include "grom/pipeline/dataset.hpp"
#include "grom/tucker.hpp"

namespace grom::pipeline {

struct TrainOptions {
  ModeThresholds thresholds = kDefaultThresholds;
  ModeOrder mode_order = kDefaultModeOrder;
  /// Decompose fx and fz separately instead of one joint tensor.
  bool per_behavior = false;
  gp::FitOptions gp;
};

/// One Tucker decomposition and its coefficient regressors. The coefficient
/// of pair (j, k) multiplies V[b, j] * W[t, k]; index j * r3 + k.
struct CoefficientBlock {
  std::vector<Behavior> behaviors;  ///< rows of V
  TuckerDecomp decomp;
  std::vector<gp::GPModel> models;

  std::size_t coefficient_count() const { return models.size(); }
};

struct TrainedModel {
  std::string design;
  std::vector<double> theta_grid;
  std::vector<double> conditions;  ///< training speeds, ascending
  /// Peak |value| of the training data per behavior; tensors are stored divided by it.
  std::array<double, kBehaviorCount> scale{1.0, 1.0};
  TrainOptions options;
  std::vector<CoefficientBlock> blocks;

  Eigen::Index coefficient_count() const;
  /// Reconstruction operator for one behavior in physical units: T x p.
  Matrix basis(Behavior b) const;
  /// Coefficients of training condition i (the truncated projection).
  Vector training_coefficients(std::size_t i) const;
};

struct Prediction {
  ForceTrace trace;
  ForceTrace lower;  ///< pointwise 95% band
  ForceTrace upper;
  Vector coefficient_mean;
  Vector coefficient_variance;
  bool extrapolated = false;
};

/// Assemble the (condition, behavior, angle) tensor of one design's
/// simulation traces and fit one GP per retained coefficient.
TrainedModel train(const DatasetManifest& manifest, const std::string& design,
                   const TrainOptions& options = {});
/// Same, from traces already on a common grid (metadata supplies speeds).
TrainedModel train(const std::vector<ForceTrace>& traces, const std::string& design,
                   const TrainOptions& options = {});

Prediction predict(const TrainedModel& model, double omega);

/// Truncated reconstruction of training condition i.
ForceTrace truncated_trace(const TrainedModel& model, std::size_t i);

/// Trace from a coefficient vector.
ForceTrace reconstruct_trace(const TrainedModel& model, const Vector& coefficients);

nlohmann::json to_json(const TrainedModel& m);
TrainedModel model_from_json(const nlohmann::json& j);
void write_model(const TrainedModel& m, const std::filesystem::path& path);
TrainedModel read_model(const std::filesystem::path& path);

}  // namespace grom::pipeline
