#pragma once

#include <cstdint>
#include <vector>

#include "grom/sph/vec2.hpp"

namespace grom::sph {

enum class ParticleKind : std::uint8_t { bulk, container, leg };

inline bool is_boundary(ParticleKind k) { return k != ParticleKind::bulk; }

/// Structure-of-arrays particle state. Masses never change after insertion.
struct ParticleSystem {
  std::vector<Vec2> position;
  std::vector<Vec2> velocity;
  std::vector<double> density;
  std::vector<double> mass;
  /// Accumulated strain (integral of the strain rate), bulk particles only.
  std::vector<Sym2> strain;
  std::vector<ParticleKind> kind;

  std::size_t size() const { return position.size(); }
  std::size_t add(ParticleKind k, Vec2 x, double m, double rho, Vec2 v = {});
  /// Drop particles whose index has keep[i] == false; returns the index map (old -> new, or -1).
  std::vector<long> compact(const std::vector<bool>& keep);
  double total_mass() const;
  /// Momentum of bulk particles.
  Vec2 bulk_momentum() const;
  double bulk_kinetic_energy() const;
};

/// Each unordered neighbor pair within the kernel support appears once, in a
/// fixed order (cell scan order, then index). Pairs between two boundary
/// particles are omitted.
struct NeighborPair {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  Vec2 r;                    ///< x_i - x_j
  double w = 0.0;            ///< W(|r|, h)
  double grad_factor = 0.0;  ///< grad_i W = grad_factor * r
};

struct NeighborList {
  std::vector<NeighborPair> pairs;
  double h = 0.0;

  std::size_t pair_count() const { return pairs.size(); }
  /// Number of pairs touching each particle.
  std::vector<std::size_t> neighbor_counts(std::size_t n) const;

  void build(const ParticleSystem& ps, double smoothing_length);
};

}  // namespace grom::sph
