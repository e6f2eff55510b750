#include "grom/sph/particles.hpp"

#include <algorithm>
#include <cmath>

#include "grom/error.hpp"
#include "grom/sph/kernel.hpp"

namespace grom::sph {

std::size_t ParticleSystem::add(ParticleKind k, Vec2 x, double m, double rho, Vec2 v) {
  position.push_back(x);
  velocity.push_back(v);
  density.push_back(rho);
  mass.push_back(m);
  strain.push_back({});
  kind.push_back(k);
  return position.size() - 1;
}

std::vector<long> ParticleSystem::compact(const std::vector<bool>& keep) {
  std::vector<long> map(size(), -1);
  std::size_t out = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!keep[i]) continue;
    map[i] = static_cast<long>(out);
    position[out] = position[i];
    velocity[out] = velocity[i];
    density[out] = density[i];
    mass[out] = mass[i];
    strain[out] = strain[i];
    kind[out] = kind[i];
    ++out;
  }
  position.resize(out);
  velocity.resize(out);
  density.resize(out);
  mass.resize(out);
  strain.resize(out);
  kind.resize(out);
  return map;
}

double ParticleSystem::total_mass() const {
  double m = 0.0;
  for (double v : mass) m += v;
  return m;
}

Vec2 ParticleSystem::bulk_momentum() const {
  Vec2 p;
  for (std::size_t i = 0; i < size(); ++i)
    if (kind[i] == ParticleKind::bulk) p += mass[i] * velocity[i];
  return p;
}

double ParticleSystem::bulk_kinetic_energy() const {
  double e = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    if (kind[i] == ParticleKind::bulk) e += 0.5 * mass[i] * velocity[i].norm2();
  return e;
}

std::vector<std::size_t> NeighborList::neighbor_counts(std::size_t n) const {
  std::vector<std::size_t> c(n, 0);
  for (const auto& q : pairs) {
    ++c[q.i];
    ++c[q.j];
  }
  return c;
}

void NeighborList::build(const ParticleSystem& ps, double smoothing_length) {
  h = smoothing_length;
  const std::size_t n = ps.size();
  pairs.clear();
  if (n == 0) return;

  const double cell = 2.0 * h;
  const double support2 = cell * cell;
  double xmin = ps.position[0].x, xmax = xmin, zmin = ps.position[0].z, zmax = zmin;
  for (const auto& p : ps.position) {
    if (!std::isfinite(p.x) || !std::isfinite(p.z)) {
      throw NumericalError("neighbor search: non-finite particle position");
    }
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    zmin = std::min(zmin, p.z);
    zmax = std::max(zmax, p.z);
  }
  const auto nx = static_cast<long>(std::floor((xmax - xmin) / cell)) + 1;
  const auto nz = static_cast<long>(std::floor((zmax - zmin) / cell)) + 1;
  if (nx * nz > 50'000'000L) throw NumericalError("neighbor search: domain exploded");

  // Counting sort of particles by cell; within a cell, ascending index.
  std::vector<std::size_t> cell_start(static_cast<std::size_t>(nx * nz + 1), 0);
  std::vector<long> cell_id(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long cx = std::min(nx - 1, static_cast<long>((ps.position[i].x - xmin) / cell));
    const long cz = std::min(nz - 1, static_cast<long>((ps.position[i].z - zmin) / cell));
    cell_id[i] = cz * nx + cx;
    ++cell_start[static_cast<std::size_t>(cell_id[i]) + 1];
  }
  for (std::size_t c = 1; c < cell_start.size(); ++c) cell_start[c] += cell_start[c - 1];
  std::vector<std::uint32_t> sorted(n);
  {
    std::vector<std::size_t> fill(cell_start.begin(), cell_start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      sorted[fill[static_cast<std::size_t>(cell_id[i])]++] = static_cast<std::uint32_t>(i);
    }
  }

  pairs.reserve(n * 14);
  auto try_pair = [&](std::uint32_t i, std::uint32_t j) {
    if (is_boundary(ps.kind[i]) && is_boundary(ps.kind[j])) return;
    const Vec2 rij = ps.position[i] - ps.position[j];
    const double d2 = rij.norm2();
    if (d2 >= support2) return;
    const double d = std::sqrt(d2);
    pairs.push_back({i, j, rij, kernel(d, h), kernel_grad_factor(d, h)});
  };
  // Half stencil: the cell itself plus four forward neighbours.
  constexpr long kStencil[4][2] = {{1, 0}, {-1, 1}, {0, 1}, {1, 1}};
  for (long cz = 0; cz < nz; ++cz) {
    for (long cx = 0; cx < nx; ++cx) {
      const auto c = static_cast<std::size_t>(cz * nx + cx);
      for (std::size_t a = cell_start[c]; a < cell_start[c + 1]; ++a) {
        const std::uint32_t i = sorted[a];
        for (std::size_t b = a + 1; b < cell_start[c + 1]; ++b) try_pair(i, sorted[b]);
        for (const auto& st : kStencil) {
          const long x = cx + st[0], z = cz + st[1];
          if (x < 0 || x >= nx || z >= nz) continue;
          const auto d = static_cast<std::size_t>(z * nx + x);
          for (std::size_t b = cell_start[d]; b < cell_start[d + 1]; ++b) try_pair(i, sorted[b]);
        }
      }
    }
  }
}

}  // namespace grom::sph
