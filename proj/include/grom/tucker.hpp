#pragma once

#include <array>
#include <vector>

#include "grom/svd.hpp"
#include "grom/tensor.hpp"

namespace grom {

using ModeThresholds = std::array<double, 3>;
using ModeOrder = std::array<int, 3>;

/// Default energy thresholds: truncate the condition and angle modes, keep
/// the behavior mode full.
inline constexpr ModeThresholds kDefaultThresholds{0.95, 1.0, 0.95};
inline constexpr ModeOrder kDefaultModeOrder{1, 2, 3};

/// Tucker decomposition t ≈ core ×1 U ×2 V ×3 W.
struct TuckerDecomp {
  Tensor3 core;
  /// U (conditions), V (behaviors), W (angles), each with orthonormal columns.
  std::array<FactorMatrix, 3> factors;
  /// Full singular spectrum of the unfolding processed for each mode.
  std::array<std::vector<double>, 3> spectra;

  Dims3 ranks() const { return core.dims(); }
  Dims3 original_dims() const {
    return {static_cast<std::size_t>(factors[0].rows()),
            static_cast<std::size_t>(factors[1].rows()),
            static_cast<std::size_t>(factors[2].rows())};
  }
};

/// Sequentially truncated HOSVD. Each mode in `order` is decomposed from the
/// already-contracted working tensor and truncated before the next mode.
TuckerDecomp st_hosvd(const Tensor3& t, const ModeThresholds& thresholds = kDefaultThresholds,
                      const ModeOrder& order = kDefaultModeOrder);

/// core ×1 U ×2 V ×3 W.
Tensor3 reconstruct(const TuckerDecomp& d);

/// Reduced parameters: the data projected onto the truncated angle basis,
/// A = core ×1 U ×2 V with shape (conditions, behaviors, r3).
Tensor3 project_reduced(const TuckerDecomp& d);

/// Coefficients of every condition in the (V, W) basis: core ×1 U, with shape
/// (conditions, r2, r3).
Tensor3 condition_coefficients(const TuckerDecomp& d);

nlohmann::json to_json(const TuckerDecomp& d);
TuckerDecomp tucker_from_json(const nlohmann::json& j);

}  // namespace grom
