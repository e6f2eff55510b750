#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace grom {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Extents of a rank-3 tensor: (conditions, behaviors, angle samples).
using Dims3 = std::array<std::size_t, 3>;

/// Dense rank-3 tensor stored row-major: the last index varies fastest.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Dims3 dims);
  /// Throws ValidationError when the size does not match or an entry is not finite.
  Tensor3(Dims3 dims, std::vector<double> data);

  const Dims3& dims() const { return dims_; }
  /// Extent along a 1-based mode.
  std::size_t extent(int mode) const;
  std::size_t size() const { return data_.size(); }

  double operator()(std::size_t i, std::size_t j, std::size_t t) const {
    return data_[(i * dims_[1] + j) * dims_[2] + t];
  }
  double& operator()(std::size_t i, std::size_t j, std::size_t t) {
    return data_[(i * dims_[1] + j) * dims_[2] + t];
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double frobenius_norm() const;

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  Dims3 dims_{0, 0, 0};
  std::vector<double> data_;
};

/// Mode-n unfolding. Rows follow `mode`; columns enumerate the remaining
/// modes in ascending order with the last one varying fastest.
Matrix unfold(const Tensor3& t, int mode);

/// Inverse of `unfold` for a tensor of extents `dims`.
Tensor3 fold(const Matrix& m, int mode, const Dims3& dims);

/// t ×_mode m, i.e. fold(m · unfold(t, mode)).
Tensor3 mode_product(const Tensor3& t, const Matrix& m, int mode);

nlohmann::json to_json(const Tensor3& t);
Tensor3 tensor_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace grom
