#include "grom/sph/rheology.hpp"

#include <algorithm>
#include <cmath>

#include "grom/error.hpp"

namespace grom::sph {

void MaterialParams::validate() const {
  if (!(mu1 > 0.0 && mu1 < mu2)) throw ValidationError("material requires 0 < mu1 < mu2");
  if (!(inertial_scale > 0.0)) throw ValidationError("material requires I0 > 0");
  if (!(grain_diameter > 0.0)) throw ValidationError("material requires grain diameter > 0");
  if (!(cohesion >= 0.0)) throw ValidationError("material requires cohesion >= 0");
  if (!(grain_density > 0.0 && bulk_density > 0.0)) {
    throw ValidationError("material densities must be positive");
  }
  if (!(pressure_floor > 0.0)) throw ValidationError("pressure floor must be positive");
}

double friction_coefficient(double inertial_number, const MaterialParams& m) {
  if (inertial_number <= 0.0) return m.mu1;
  return m.mu1 + (m.mu2 - m.mu1) / (m.inertial_scale / inertial_number + 1.0);
}

double inertial_number(double strain_rate_invariant, double pressure, const MaterialParams& m) {
  const double p = std::max(pressure, m.pressure_floor);
  return strain_rate_invariant * m.grain_diameter / std::sqrt(p / m.grain_density);
}

StressResult constitutive_stress(double pressure, const Sym2& strain_rate, const Sym2& strain,
                                 const MaterialParams& m) {
  StressResult out;
  out.pressure_clamped = pressure < m.pressure_floor;
  const double p = std::max(pressure, m.pressure_floor);

  const Sym2 rate_dev = strain_rate.deviatoric();
  const double rate_inv = rate_dev.second_invariant();
  out.inertial_number = inertial_number(rate_inv, p, m);
  out.rate_branch = out.inertial_number > m.inertial_switch;

  const Sym2 direction_src = out.rate_branch ? rate_dev : strain.deviatoric();
  const double inv = out.rate_branch ? rate_inv : direction_src.second_invariant();

  out.stress = -p * Sym2::identity();
  if (inv >= kRateEpsilon) {
    const double shear = friction_coefficient(out.inertial_number, m) * p + m.cohesion;
    out.stress += (shear / inv) * direction_src;
  }
  return out;
}

nlohmann::json to_json(const MaterialParams& m) {
  return {{"grain_density", m.grain_density},   {"bulk_density", m.bulk_density},
          {"grain_diameter", m.grain_diameter}, {"mu1", m.mu1},
          {"mu2", m.mu2},                       {"inertial_scale", m.inertial_scale},
          {"cohesion", m.cohesion},             {"inertial_switch", m.inertial_switch},
          {"pressure_floor", m.pressure_floor}};
}

MaterialParams material_from_json(const nlohmann::json& j) {
  MaterialParams m;
  m.grain_density = j.value("grain_density", m.grain_density);
  m.bulk_density = j.value("bulk_density", m.bulk_density);
  m.grain_diameter = j.value("grain_diameter", m.grain_diameter);
  m.mu1 = j.value("mu1", m.mu1);
  m.mu2 = j.value("mu2", m.mu2);
  m.inertial_scale = j.value("inertial_scale", m.inertial_scale);
  m.cohesion = j.value("cohesion", m.cohesion);
  m.inertial_switch = j.value("inertial_switch", m.inertial_switch);
  m.pressure_floor = j.value("pressure_floor", m.pressure_floor);
  m.validate();
  return m;
}

}  // namespace grom::sph
