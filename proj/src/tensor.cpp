#include "grom/tensor.hpp"

#include <cmath>
#include <string>

#include "grom/error.hpp"

namespace grom {

namespace {

void check_mode(int mode) {
  if (mode < 1 || mode > 3) {
    throw ValidationError("tensor mode must be 1, 2 or 3 (got " + std::to_string(mode) + ")");
  }
}

// Row/column of entry (i, j, t) in the mode-n unfolding.
struct UnfoldIndex {
  std::size_t row;
  std::size_t col;
};

UnfoldIndex unfold_index(int mode, const Dims3& d, std::size_t i, std::size_t j, std::size_t t) {
  switch (mode) {
    case 1:
      return {i, j * d[2] + t};
    case 2:
      return {j, i * d[2] + t};
    default:
      return {t, i * d[1] + j};
  }
}

// Product of the extents other than `mode`.
std::size_t other_extents(int mode, const Dims3& d) {
  switch (mode) {
    case 1: return d[1] * d[2];
    case 2: return d[0] * d[2];
    default: return d[0] * d[1];
  }
}

}  // namespace

Tensor3::Tensor3(Dims3 dims) : dims_(dims), data_(dims[0] * dims[1] * dims[2], 0.0) {}

Tensor3::Tensor3(Dims3 dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
  if (data_.size() != dims_[0] * dims_[1] * dims_[2]) {
    throw ValidationError("tensor data length " + std::to_string(data_.size()) +
                          " does not match dims " + std::to_string(dims_[0]) + "x" +
                          std::to_string(dims_[1]) + "x" + std::to_string(dims_[2]));
  }
  for (std::size_t k = 0; k < data_.size(); ++k) {
    if (!std::isfinite(data_[k])) {
      throw ValidationError("tensor entry " + std::to_string(k) + " is not finite");
    }
  }
}

std::size_t Tensor3::extent(int mode) const {
  check_mode(mode);
  return dims_[static_cast<std::size_t>(mode - 1)];
}

double Tensor3::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

Matrix unfold(const Tensor3& t, int mode) {
  check_mode(mode);
  const Dims3& d = t.dims();
  const std::size_t rows = d[static_cast<std::size_t>(mode - 1)];
  const std::size_t cols = other_extents(mode, d);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < d[0]; ++i)
    for (std::size_t j = 0; j < d[1]; ++j)
      for (std::size_t k = 0; k < d[2]; ++k) {
        const auto [r, c] = unfold_index(mode, d, i, j, k);
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t(i, j, k);
      }
  return m;
}

Tensor3 fold(const Matrix& m, int mode, const Dims3& dims) {
  check_mode(mode);
  const std::size_t rows = dims[static_cast<std::size_t>(mode - 1)];
  const std::size_t cols = other_extents(mode, dims);
  if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols) {
    throw ValidationError("fold: matrix shape does not match target dims");
  }
  Tensor3 t(dims);
  for (std::size_t i = 0; i < dims[0]; ++i)
    for (std::size_t j = 0; j < dims[1]; ++j)
      for (std::size_t k = 0; k < dims[2]; ++k) {
        const auto [r, c] = unfold_index(mode, dims, i, j, k);
        t(i, j, k) = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
  return t;
}

Tensor3 mode_product(const Tensor3& t, const Matrix& m, int mode) {
  check_mode(mode);
  const auto idx = static_cast<std::size_t>(mode - 1);
  if (static_cast<std::size_t>(m.cols()) != t.dims()[idx]) {
    throw ValidationError("mode_product: matrix has " + std::to_string(m.cols()) +
                          " columns but tensor mode " + std::to_string(mode) + " has extent " +
                          std::to_string(t.dims()[idx]));
  }
  Dims3 out = t.dims();
  out[idx] = static_cast<std::size_t>(m.rows());
  const Matrix prod = m * unfold(t, mode);
  return fold(prod, mode, out);
}

nlohmann::json to_json(const Tensor3& t) {
  const auto& d = t.dims();
  return {{"dims", {d[0], d[1], d[2]}},
          {"order", "row-major"},
          {"data", std::vector<double>(t.data().begin(), t.data().end())}};
}

Tensor3 tensor_from_json(const nlohmann::json& j) {
  if (!j.contains("dims") || !j.contains("data")) {
    throw ValidationError("tensor JSON requires 'dims' and 'data'");
  }
  if (j.contains("order") && j.at("order") != "row-major") {
    throw ValidationError("tensor JSON order must be 'row-major'");
  }
  const auto dims = j.at("dims").get<std::vector<std::size_t>>();
  if (dims.size() != 3) throw ValidationError("tensor JSON 'dims' must have three entries");
  return Tensor3({dims[0], dims[1], dims[2]}, j.at("data").get<std::vector<double>>());
}

nlohmann::json to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"order", "row-major"}, {"data", data}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
    throw ValidationError("matrix JSON data length does not match rows*cols");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double v = data[static_cast<std::size_t>(r * cols + c)];
      if (!std::isfinite(v)) throw ValidationError("matrix JSON entry is not finite");
      m(r, c) = v;
    }
  return m;
}

}  // namespace grom
