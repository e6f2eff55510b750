#pragma once

#include <json.hpp>

#include "grom/sph/vec2.hpp"

namespace grom::sph {

struct MaterialParams {
  double grain_density = 2600.0;  ///< rho_s, kg/m^3
  double bulk_density = 1560.0;   ///< rho_0, kg/m^3
  double grain_diameter = 0.003;  ///< d, m
  double mu1 = 0.42447481620960476;  ///< tan 23 deg
  double mu2 = 0.6494075931975106;   ///< tan 33 deg
  double inertial_scale = 0.279;     ///< I_0
  double cohesion = 0.0;             ///< Pa
  double inertial_switch = 0.001;    ///< rate branch above, strain branch at or below
  double pressure_floor = 1.0;       ///< P_min, Pa

  void validate() const;
};

/// Below this invariant the deviatoric stress is dropped (static state).
inline constexpr double kRateEpsilon = 1e-10;

/// mu(I) = mu1 + (mu2 - mu1) / (I0 / I + 1); mu(0) = mu1.
double friction_coefficient(double inertial_number, const MaterialParams& m);

/// I = |D| d / sqrt(max(P, P_min) / rho_s).
double inertial_number(double strain_rate_invariant, double pressure, const MaterialParams& m);

struct StressResult {
  Sym2 stress;
  double inertial_number = 0.0;
  bool pressure_clamped = false;
  bool rate_branch = false;
};

/// Granular viscoplastic stress: -P I + (mu(I) P + c) T / |T| with T the
/// deviatoric strain rate when I exceeds the switch, otherwise the deviatoric
/// accumulated strain. P is floored at P_min.
StressResult constitutive_stress(double pressure, const Sym2& strain_rate, const Sym2& strain,
                                 const MaterialParams& m);

nlohmann::json to_json(const MaterialParams& m);
MaterialParams material_from_json(const nlohmann::json& j);

}  // namespace grom::sph
