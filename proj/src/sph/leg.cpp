#include "grom/sph/leg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "grom/error.hpp"

namespace grom::sph {

std::string to_string(Morphology m) {
  switch (m) {
    case Morphology::flat: return "flat";
    case Morphology::c_leg: return "c_leg";
    case Morphology::reversed_c: return "reversed_c";
    case Morphology::l_leg: return "l_leg";
    case Morphology::reversed_l: return "reversed_l";
  }
  return "flat";
}

Morphology parse_morphology(const std::string& s) {
  if (s == "flat") return Morphology::flat;
  if (s == "c_leg" || s == "c") return Morphology::c_leg;
  if (s == "reversed_c" || s == "ic") return Morphology::reversed_c;
  if (s == "l_leg" || s == "l") return Morphology::l_leg;
  if (s == "reversed_l" || s == "il") return Morphology::reversed_l;
  throw ValidationError("unknown leg morphology '" + s +
                        "' (expected flat, c_leg, reversed_c, l_leg, reversed_l)");
}

bool is_reversed(Morphology m) {
  return m == Morphology::reversed_c || m == Morphology::reversed_l;
}

void LegGeometry::validate() const {
  if (!(length > 0.0) || !std::isfinite(length)) throw ValidationError("leg length must be positive");
  const bool l_family = morphology == Morphology::l_leg || morphology == Morphology::reversed_l;
  if (l_family && !(foot_fraction > 0.0 && std::isfinite(foot_fraction))) {
    throw ValidationError("L-leg foot fraction must be positive");
  }
}

namespace {

// Polyline corners of the profile, or a dense sampling for curved legs.
std::vector<LegPoint> corners(const LegGeometry& g) {
  const double L = g.length;
  switch (g.morphology) {
    case Morphology::flat:
      return {{0.0, 0.0}, {L, 0.0}};
    case Morphology::l_leg:
    case Morphology::reversed_l: {
      const double fl = g.foot_fraction;
      const double a = L / std::sqrt(1.0 + fl * fl);
      const double beta = std::atan(fl);
      // The normal L has its corner on the leading side, like the bulge of a C leg.
      const double side = g.morphology == Morphology::l_leg ? 1.0 : -1.0;
      return {{0.0, 0.0}, {a * std::cos(beta), side * a * std::sin(beta)}, {L, 0.0}};
    }
    case Morphology::c_leg:
    case Morphology::reversed_c: {
      const double r = 0.5 * L;
      // The normal C leads with its convex side.
      const double side = g.morphology == Morphology::c_leg ? 1.0 : -1.0;
      constexpr int kArcSegments = 512;
      std::vector<LegPoint> pts;
      pts.reserve(kArcSegments + 1);
      for (int k = 0; k <= kArcSegments; ++k) {
        const double phi = std::numbers::pi * k / kArcSegments;
        pts.push_back({r - r * std::cos(phi), side * r * std::sin(phi)});
      }
      return pts;
    }
  }
  return {};
}

double dist(const LegPoint& a, const LegPoint& b) { return std::hypot(b.s - a.s, b.n - a.n); }

struct Resampled {
  std::vector<LegPoint> points;
  std::vector<LegPoint> normals;
};

// Points at equal arc-length spacing <= `spacing` along the polyline.
Resampled resample_polyline(const std::vector<LegPoint>& poly, double spacing) {
  std::vector<double> arc(poly.size(), 0.0);
  for (std::size_t k = 1; k < poly.size(); ++k) arc[k] = arc[k - 1] + dist(poly[k - 1], poly[k]);
  const double total = arc.back();
  const auto n = static_cast<std::size_t>(std::ceil(total / spacing - 1e-9));
  Resampled out;
  out.points.reserve(n + 1);
  out.normals.reserve(n + 1);
  std::size_t seg = 0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double a = total * static_cast<double>(k) / static_cast<double>(n);
    while (seg + 2 < poly.size() && arc[seg + 1] < a) ++seg;
    const double len = arc[seg + 1] - arc[seg];
    const double f = len > 0.0 ? std::clamp((a - arc[seg]) / len, 0.0, 1.0) : 0.0;
    const LegPoint& p0 = poly[seg];
    const LegPoint& p1 = poly[seg + 1];
    out.points.push_back({p0.s + f * (p1.s - p0.s), p0.n + f * (p1.n - p0.n)});
    const double ts = (p1.s - p0.s) / len;
    const double tn = (p1.n - p0.n) / len;
    out.normals.push_back({-tn, ts});
  }
  return out;
}

}  // namespace

std::vector<LegPoint> LegGeometry::midline(double spacing) const {
  validate();
  if (!(spacing > 0.0)) throw ValidationError("midline spacing must be positive");
  return resample_polyline(corners(*this), spacing).points;
}

std::vector<LegPoint> LegGeometry::midline_normals(double spacing) const {
  validate();
  if (!(spacing > 0.0)) throw ValidationError("midline spacing must be positive");
  return resample_polyline(corners(*this), spacing).normals;
}

nlohmann::json to_json(const LegGeometry& g) {
  return {{"morphology", to_string(g.morphology)},
          {"length", g.length},
          {"foot_fraction", g.foot_fraction}};
}

LegGeometry leg_from_json(const nlohmann::json& j) {
  LegGeometry g;
  g.morphology = parse_morphology(j.value("morphology", std::string("flat")));
  g.length = j.value("length", g.length);
  g.foot_fraction = j.value("foot_fraction", g.foot_fraction);
  g.validate();
  return g;
}

Vec2 to_world(const LegPoint& p, const LegPose& pose) {
  const double d = static_cast<double>(pose.direction);
  return pose.hip + p.s * reference_direction(pose.theta) + (d * p.n) * leading_direction(pose.theta);
}

Vec2 rigid_velocity(const LegPoint& p, const LegPose& pose, double theta_dot) {
  const double d = static_cast<double>(pose.direction);
  // d(s_hat)/d(theta) = m_hat and d(m_hat)/d(theta) = -s_hat.
  return theta_dot * (p.s * leading_direction(pose.theta) - (d * p.n) * reference_direction(pose.theta));
}

LegParticles make_leg_particles(const LegGeometry& g, double dx, double rho0) {
  if (!(dx > 0.0 && rho0 > 0.0)) throw ValidationError("leg particles need dx > 0 and rho0 > 0");
  const double spacing = 0.5 * dx;
  const Resampled mid = resample_polyline(corners(g), spacing);
  LegParticles out;
  out.mass = rho0 * spacing * spacing;
  for (const double off : {-0.5 * dx, 0.0, 0.5 * dx}) {
    for (std::size_t k = 0; k < mid.points.size(); ++k) {
      out.local.push_back({mid.points[k].s + off * mid.normals[k].s,
                           mid.points[k].n + off * mid.normals[k].n});
    }
  }
  return out;
}

double compute_lift_area(const LegGeometry& g) {
  g.validate();
  const auto poly = corners(g);
  const Resampled dense = resample_polyline(poly, g.length / 4000.0);
  const LegPose pose{{0.0, 0.0}, std::numbers::pi / 4.0, 1};
  std::vector<Vec2> pts;
  pts.reserve(dense.points.size());
  for (const auto& p : dense.points) pts.push_back(to_world(p, pose));

  double xmin = std::numeric_limits<double>::max(), xmax = -xmin, zmin = xmin;
  for (const auto& p : pts) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    zmin = std::min(zmin, p.z);
  }
  if (!(xmax - xmin > 0.0)) throw ValidationError("degenerate leg profile for lift area");

  constexpr int kGrid = 4000;
  std::vector<double> top(kGrid + 1, -std::numeric_limits<double>::max());
  const double step = (xmax - xmin) / kGrid;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const Vec2& a = pts[k];
    const Vec2& b = pts[k + 1];
    const double lo = std::min(a.x, b.x), hi = std::max(a.x, b.x);
    const int i0 = std::max(0, static_cast<int>(std::ceil((lo - xmin) / step - 1e-9)));
    const int i1 = std::min(kGrid, static_cast<int>(std::floor((hi - xmin) / step + 1e-9)));
    for (int i = i0; i <= i1; ++i) {
      const double x = std::clamp(xmin + i * step, lo, hi);
      const double z = hi > lo ? a.z + (b.z - a.z) * (x - a.x) / (b.x - a.x) : std::max(a.z, b.z);
      top[static_cast<std::size_t>(i)] = std::max(top[static_cast<std::size_t>(i)], z);
    }
  }
  double area = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    const double z0 = top[static_cast<std::size_t>(i)], z1 = top[static_cast<std::size_t>(i) + 1];
    area += 0.5 * step * ((z0 - zmin) + (z1 - zmin));
  }
  return area;
}

}  // namespace grom::sph
