#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "grom/force_trace.hpp"
#include "grom/sph/leg.hpp"
#include "grom/sph/solver.hpp"

namespace grom::sph {

/// Rectangular bed of bulk particles on a square lattice inside a container
/// of dummy boundary particles.
struct BedSpec {
  double width = 0.20;   ///< m
  double depth = 0.05;   ///< m
  int wall_layers = 3;
  double wall_freeboard = 0.02;  ///< container wall height above the fill, m
  /// Uniform lattice perturbation amplitude as a fraction of dx (seeded).
  double jitter = 0.05;
  std::uint64_t seed = 0;

  void validate(const SphConfig& cfg) const;
};

nlohmann::json to_json(const BedSpec& b);
BedSpec bed_from_json(const nlohmann::json& j);

/// Bed lattice with hydrostatic initial densities.
ParticleSystem make_bed(const BedSpec& bed, const MaterialParams& material, const SphConfig& cfg);

struct SettledBed {
  ParticleSystem particles;
  BedSpec spec;
  MaterialParams material;
  SphConfig config;
  double surface = 0.0;  ///< free-surface height after settling
  double settle_time = 0.0;
  Diagnostics final;
};

using DiagnosticsSink = std::function<void(const Diagnostics&)>;

/// Build the bed and integrate it at rest for `duration` seconds.
SettledBed settle_bed(const BedSpec& bed, const MaterialParams& material, const SphConfig& cfg,
                      double duration, const DiagnosticsSink& sink = {}, long diag_interval = 1000);

/// Median over lattice columns of the highest bulk particle, plus dx/2.
double free_surface_height(const ParticleSystem& ps, double dx);

struct KinematicSchedule {
  double pause_duration = 2.0;  ///< s
  double hip_height = 0.02;     ///< above the settled free surface, m
  double omega = 1.0;           ///< rad/s, >= 0
  double theta_start = -0.75 * 3.14159265358979323846;
  double theta_end = 0.75 * 3.14159265358979323846;
  int direction = 1;  ///< +1 clockwise (theta increases), -1 mirrored sweep

  void validate() const;
  double duration() const { return (theta_end - theta_start) / omega; }
  /// Angle at time t after the rotation starts.
  double theta_at(double t) const;
};

nlohmann::json to_json(const KinematicSchedule& s);
KinematicSchedule schedule_from_json(const nlohmann::json& j);

/// A leg held or rotated inside a settled bed.
class LegSimulation {
 public:
  /// Places the leg at `theta` with angular rate `theta_dot`. Bulk particles
  /// closer than `carve` * dx to the leg are removed.
  LegSimulation(const SettledBed& bed, const LegGeometry& leg, Vec2 hip, int direction,
                std::function<double(double)> theta_of_t, double theta_dot, double t0 = 0.0,
                double carve = 0.75);

  void step() { sim_.step(); }
  double time() const { return sim_.time(); }
  double theta() const { return theta_of_t_(sim_.time()); }
  /// Force of the bulk on the leg during the last step, N/m.
  Vec2 leg_force() const { return sim_.last_step().leg_force; }
  std::size_t leg_pairs() const { return sim_.last_step().leg_pairs; }
  /// Lowest leg particle height.
  double leg_bottom() const;
  const Simulation& simulation() const { return sim_; }
  std::size_t leg_begin() const { return leg_begin_; }

 private:
  std::size_t leg_begin_ = 0;
  LegParticles leg_;
  std::function<double(double)> theta_of_t_;
  Simulation sim_;
};

/// Smallest distance from any leg particle at the given pose to a bulk particle.
double leg_clearance(const ParticleSystem& bed, const LegParticles& leg, const LegPose& pose);

struct RotationOptions {
  std::size_t samples = 128;
  /// Steps averaged into one raw force sample; 0 selects one grid spacing.
  long sample_stride = 0;
  long diag_interval = 2000;
  DiagnosticsSink diagnostics;
};

struct RotationResult {
  ForceTrace trace;  ///< on the uniform theta grid
  ForceTrace raw;    ///< window-averaged samples, theta increasing
  long steps = 0;
  double contact_start = 0.0;  ///< first simulated angle
  double contact_end = 0.0;    ///< last simulated angle
};

/// Rotate the leg through the schedule inside the settled bed and record the
/// net reaction force. Integration starts shortly before first contact and
/// stops once the leg has left the bed; force outside that range is zero.
RotationResult run_leg_rotation(const SettledBed& bed, const LegGeometry& leg,
                                const KinematicSchedule& schedule,
                                const RotationOptions& options = {});

/// Full scenario description as read from a JSON config.
struct ScenarioConfig {
  MaterialParams material;
  SphConfig sph;
  BedSpec bed;
  LegGeometry leg;
  KinematicSchedule schedule;
  std::size_t samples = 128;
  long sample_stride = 0;
  std::string output;
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& c);
/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_digest(const nlohmann::json& j);

}  // namespace grom::sph
