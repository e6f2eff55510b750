#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "grom/sph/particles.hpp"

namespace grom::sph {

enum class Morphology { flat, c_leg, reversed_c, l_leg, reversed_l };

std::string to_string(Morphology m);
Morphology parse_morphology(const std::string& s);
/// Reversed C and reversed L are shear dominated; the others pressure dominated.
bool is_reversed(Morphology m);

// Leg-local coordinates: s runs along the reference line from the hip to the
// tip, n is the offset towards the leading side (the direction of motion).
struct LegPoint {
  double s = 0.0;
  double n = 0.0;
};

/// Rigid leg profile. Every morphology has the same hip-to-tip reference
/// length; C legs are semicircles on that chord, L legs split it into a shank
/// and a perpendicular foot of relative length `foot_fraction`. The C bulge and
/// the L corner sit on the leading side; the reversed variants trail them.
struct LegGeometry {
  Morphology morphology = Morphology::flat;
  double length = 0.045;        ///< hip-to-tip distance, m
  double foot_fraction = 1.0 / 3.0;  ///< L family only: foot / shank

  void validate() const;
  /// Midline sampled with spacing at most `spacing` along the arc, hip first.
  std::vector<LegPoint> midline(double spacing) const;
  /// Unit normal of the midline in local coordinates at each midline sample.
  std::vector<LegPoint> midline_normals(double spacing) const;
};

nlohmann::json to_json(const LegGeometry& g);
LegGeometry leg_from_json(const nlohmann::json& j);

/// Leg pose: hip position, angle from the downward vertical, and sweep sense
/// (+1 clockwise, theta increasing; -1 the mirror image, theta decreasing).
struct LegPose {
  Vec2 hip;
  double theta = 0.0;
  int direction = 1;
};

/// Unit vector from hip towards the tip.
inline Vec2 reference_direction(double theta) { return {-std::sin(theta), -std::cos(theta)}; }
/// Unit vector of motion of the reference line for increasing theta.
inline Vec2 leading_direction(double theta) { return {-std::cos(theta), std::sin(theta)}; }

Vec2 to_world(const LegPoint& p, const LegPose& pose);
/// Rigid-body velocity of the local point p when theta changes at rate theta_dot.
Vec2 rigid_velocity(const LegPoint& p, const LegPose& pose, double theta_dot);

/// Boundary particles of the leg: three layers (midline and +/- dx/2 along the
/// normal) with spacing dx/2 and mass rho0 (dx/2)^2.
struct LegParticles {
  std::vector<LegPoint> local;
  double mass = 0.0;
};
LegParticles make_leg_particles(const LegGeometry& g, double particle_spacing, double rho0);

/// Lifted area proxy: the leg posed at theta = pi/4 (reference line at 45
/// degrees, leading side up), area between the upper envelope of the profile
/// and the horizontal through its lowest point.
double compute_lift_area(const LegGeometry& g);

}  // namespace grom::sph
