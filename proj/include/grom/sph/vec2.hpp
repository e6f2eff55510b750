#pragma once

#include <cmath>

namespace grom::sph {

/// Planar vector in the (x, z) plane; z points up.
struct Vec2 {
  double x = 0.0;
  double z = 0.0;

  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    z += o.z;
    return *this;
  }
  Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    z -= o.z;
    return *this;
  }
  double dot(const Vec2& o) const { return x * o.x + z * o.z; }
  double norm2() const { return x * x + z * z; }
  double norm() const { return std::sqrt(norm2()); }

  friend Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend Vec2 operator-(const Vec2& a) { return {-a.x, -a.z}; }
  friend Vec2 operator*(double s, const Vec2& a) { return {s * a.x, s * a.z}; }
  friend Vec2 operator*(const Vec2& a, double s) { return {s * a.x, s * a.z}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Symmetric 2x2 tensor.
struct Sym2 {
  double xx = 0.0;
  double xz = 0.0;
  double zz = 0.0;

  static Sym2 identity() { return {1.0, 0.0, 1.0}; }

  double trace() const { return xx + zz; }
  /// T:T
  double contract() const { return xx * xx + 2.0 * xz * xz + zz * zz; }
  /// sqrt(T:T / 2)
  double second_invariant() const { return std::sqrt(0.5 * contract()); }
  Sym2 deviatoric() const {
    const double m = 0.5 * trace();
    return {xx - m, xz, zz - m};
  }
  Vec2 operator*(const Vec2& v) const { return {xx * v.x + xz * v.z, xz * v.x + zz * v.z}; }

  Sym2& operator+=(const Sym2& o) {
    xx += o.xx;
    xz += o.xz;
    zz += o.zz;
    return *this;
  }
  friend Sym2 operator+(Sym2 a, const Sym2& b) { return a += b; }
  friend Sym2 operator-(const Sym2& a, const Sym2& b) { return {a.xx - b.xx, a.xz - b.xz, a.zz - b.zz}; }
  friend Sym2 operator*(double s, const Sym2& a) { return {s * a.xx, s * a.xz, s * a.zz}; }
  friend bool operator==(const Sym2&, const Sym2&) = default;
};

}  // namespace grom::sph
