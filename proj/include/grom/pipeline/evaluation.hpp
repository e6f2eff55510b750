#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "grom/pipeline/model.hpp"
#include "grom/ropf.hpp"

namespace grom::pipeline {

/// Peak-normalized mean absolute error per behavior:
/// mean_t |pred - ref| / max_t |ref|.
std::array<double, kBehaviorCount> relative_absolute_error(const ForceTrace& pred, const ForceTrace& ref);

struct Fold {
  double omega = 0.0;
  bool edge = false;  ///< held-out speed is the minimum or maximum
  std::array<double, kBehaviorCount> error{};
  double mean_error() const { return 0.5 * (error[0] + error[1]); }
};

struct CrossValReport {
  std::string design;
  std::vector<Fold> folds;
  double mean_error = 0.0;
  double interior_mean_error = 0.0;
  double edge_mean_error = 0.0;
};

/// Leave-one-out over the design's speeds; each fold trains on the others
/// and scores the held-out raw trace.
CrossValReport crossval_loo(const std::vector<ForceTrace>& traces, const std::string& design,
                            const TrainOptions& options = {});
CrossValReport crossval_loo(const DatasetManifest& manifest, const std::string& design,
                            const TrainOptions& options = {});
nlohmann::json to_json(const CrossValReport& r);

struct AssimilationSetup {
  Eigen::Index n_particles = 1000;
  std::uint64_t seed = 0;
  /// Random-walk step as a fraction of the prior coefficient sd.
  double process_fraction = 0.05;
  /// Measurement noise fallback as a fraction of the behavior scale.
  double noise_fallback_fraction = 0.05;
  /// Known measurement noise sd per behavior; estimated from the observations when unset.
  std::optional<std::array<double, kBehaviorCount>> measurement_noise_std;
};

struct ScenarioAssimilation {
  Prediction prior;
  pf::AssimilationResult result;
  std::vector<double> measurement_noise_std;
};

/// Run the reduced-order filter at `omega`, starting from the GP prediction.
ScenarioAssimilation assimilate_scenario(const TrainedModel& model, double omega,
                                         std::vector<pf::Observation> observations,
                                         const AssimilationSetup& setup = {});

/// Friction-regime factor: tan(33 deg) for reversed legs, else 1.
double friction_factor(const std::string& morphology);
inline constexpr double kDynamicFrictionAngleDeg = 33.0;

struct ScalingEntry {
  std::string design;
  double omega = 0.0;
  double max_drag = 0.0;
  double max_lift = 0.0;
  double mu = 1.0;
  double alpha = 1.0;
  double scaled_drag = 0.0;
  double scaled_lift = 0.0;
};

struct ScalingSpeed {
  double omega = 0.0;
  double nondimensional = 0.0;
  std::size_t designs = 0;
  double cv_drag_raw = 0.0, cv_drag_scaled = 0.0;
  double cv_lift_raw = 0.0, cv_lift_scaled = 0.0;
  bool collapsed() const { return cv_drag_scaled < cv_drag_raw && cv_lift_scaled < cv_lift_raw; }
};

struct ScalingReport {
  std::map<std::string, double> lift_area;  ///< per design
  std::map<std::string, double> alpha;
  std::map<std::string, double> mu;
  std::vector<ScalingEntry> entries;
  std::vector<ScalingSpeed> speeds;
  std::vector<std::string> flags;
};

/// Maximum |fx| and |fz| per (design, speed), scaled by 1/mu and 1/alpha, and
/// their cross-design coefficient of variation per speed.
ScalingReport scaling_analysis(const std::vector<ForceTrace>& traces);
ScalingReport scaling_analysis(const DatasetManifest& manifest);
nlohmann::json to_json(const ScalingReport& r);

/// Population coefficient of variation sd/mean.
double coefficient_of_variation(const std::vector<double>& v);

}  // namespace grom::pipeline
