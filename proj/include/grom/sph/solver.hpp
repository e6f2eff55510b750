#pragma once

#include <functional>
#include <vector>

#include <json.hpp>

#include "grom/sph/particles.hpp"
#include "grom/sph/rheology.hpp"

namespace grom::sph {

struct SphConfig {
  double particle_spacing = 0.0025;  ///< dx, m
  double smoothing_length = 0.00325; ///< h = 1.3 dx
  double dt = 1.4e-4;                ///< s
  double sound_speed = 5.0;          ///< c0, m/s
  double delta = 0.1;                ///< density diffusion coefficient
  double av_alpha = 1.0;
  double av_beta = 2.0;
  int shepard_interval = 10;
  Vec2 gravity{0.0, -9.81};

  void validate() const;
  /// Largest stable step for a given maximum particle speed: 0.25 h / (c0 + v).
  double cfl_limit(double max_speed) const { return 0.25 * smoothing_length / (sound_speed + max_speed); }
};

nlohmann::json to_json(const SphConfig& c);
SphConfig sph_config_from_json(const nlohmann::json& j);

/// rho_i = sum_j m_j W_ij including the self term.
std::vector<double> summation_density(const ParticleSystem& ps, const NeighborList& nl);

/// Zeroth-order corrected density: sum_j m_j W_ij / sum_j (m_j / rho_j) W_ij.
std::vector<double> shepard_filter(const ParticleSystem& ps, const NeighborList& nl);

/// Continuity equation with density diffusion between bulk particles:
/// drho_i/dt = sum_j m_j (v_i - v_j) . grad_i W_ij
///           + delta h c0 sum_j 2 (rho_j - rho_i) (x_j - x_i) . grad_i W_ij / |r_ij|^2 * m_j / rho_j
std::vector<double> continuity_rate(const ParticleSystem& ps, const NeighborList& nl,
                                    const SphConfig& cfg);

/// Symmetric part of the SPH velocity gradient for bulk particles (zero for boundary).
std::vector<Sym2> strain_rates(const ParticleSystem& ps, const NeighborList& nl);

/// Equation of state P = c0^2 (rho - rho0).
inline double eos_pressure(double rho, double rho0, double c0) { return c0 * c0 * (rho - rho0); }

struct StressField {
  std::vector<Sym2> stress;
  std::vector<double> pressure;
  std::size_t clamped = 0;     ///< particles whose pressure hit the floor
  std::size_t rate_branch = 0; ///< bulk particles in the rate-dependent branch
};

/// Constitutive stress for bulk particles; boundary particles carry -P I only.
StressField stresses(const ParticleSystem& ps, const std::vector<Sym2>& strain_rate,
                     const MaterialParams& material, const SphConfig& cfg);

/// Monaghan artificial viscosity; zero unless the pair approaches.
double artificial_viscosity(const Vec2& rij, const Vec2& vij, double rho_i, double rho_j,
                            const SphConfig& cfg);

struct MomentumRates {
  std::vector<Vec2> acceleration;  ///< bulk particles; zero for boundary
  Vec2 leg_force;                  ///< net force exerted by bulk on leg particles
  Vec2 container_force;            ///< net force exerted by bulk on container particles
};

/// dv_i/dt = sum_j m_j (sigma_i/rho_i^2 + sigma_j/rho_j^2 - Pi_ij I) grad_i W_ij + g.
MomentumRates momentum_rate(const ParticleSystem& ps, const NeighborList& nl,
                            const std::vector<Sym2>& stress, const SphConfig& cfg);

/// x += dt v for bulk particles.
void drift(ParticleSystem& ps, double dt);

struct StepReport {
  Vec2 bulk_momentum_change;
  Vec2 boundary_impulse;
  Vec2 gravity_impulse;
  Vec2 leg_force;  ///< average of the two half-step evaluations
  std::size_t leg_pairs = 0;
};

struct Diagnostics {
  long step = 0;
  double time = 0.0;
  double kinetic_energy = 0.0;
  double max_speed = 0.0;
  double min_density = 0.0;
  double max_density = 0.0;
  std::size_t clamped_pressure = 0;
};

/// Sets positions and velocities of boundary particles at time t.
using BoundaryMotion = std::function<void(double t, ParticleSystem&)>;

/// Weakly compressible SPH integrator (kick-drift-kick Verlet leapfrog).
class Simulation {
 public:
  Simulation(ParticleSystem particles, MaterialParams material, SphConfig config,
             BoundaryMotion motion = {});

  /// Replace densities of bulk particles by the summation density.
  void initialize_density();

  void step();
  const StepReport& last_step() const { return report_; }

  const ParticleSystem& particles() const { return ps_; }
  ParticleSystem& mutable_particles();
  const NeighborList& neighbors() const { return nl_; }
  const MaterialParams& material() const { return material_; }
  const SphConfig& config() const { return cfg_; }
  double time() const { return time_; }
  void set_time(double t);
  long step_count() const { return steps_; }
  Diagnostics diagnostics() const;

 private:
  void evaluate();
  void check_state() const;

  ParticleSystem ps_;
  MaterialParams material_;
  SphConfig cfg_;
  BoundaryMotion motion_;
  NeighborList nl_;
  std::vector<double> drho_;
  std::vector<Sym2> strain_rate_;
  MomentumRates rates_;
  std::size_t clamped_ = 0;
  bool rates_valid_ = false;
  double time_ = 0.0;
  long steps_ = 0;
  StepReport report_;
};

}  // namespace grom::sph
