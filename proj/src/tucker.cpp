#include "grom/tucker.hpp"

#include <algorithm>
#include <string>

#include "grom/error.hpp"

namespace grom {

TuckerDecomp st_hosvd(const Tensor3& t, const ModeThresholds& thresholds, const ModeOrder& order) {
  {
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != ModeOrder{1, 2, 3}) {
      throw ValidationError("st_hosvd: mode order must be a permutation of (1, 2, 3)");
    }
  }
  for (double th : thresholds) {
    if (!(th > 0.0 && th <= 1.0)) {
      throw ValidationError("st_hosvd: thresholds must lie in (0, 1]");
    }
  }

  TuckerDecomp d;
  Tensor3 work = t;
  for (int mode : order) {
    const auto idx = static_cast<std::size_t>(mode - 1);
    TruncatedSvd svd = truncated_svd(unfold(work, mode), thresholds[idx]);
    work = mode_product(work, svd.u.values.transpose(), mode);
    d.factors[idx] = std::move(svd.u);
    d.spectra[idx] = std::move(svd.spectrum);
  }
  d.core = std::move(work);
  return d;
}

Tensor3 reconstruct(const TuckerDecomp& d) {
  Tensor3 out = d.core;
  for (int mode = 1; mode <= 3; ++mode) {
    out = mode_product(out, d.factors[static_cast<std::size_t>(mode - 1)].values, mode);
  }
  return out;
}

Tensor3 project_reduced(const TuckerDecomp& d) {
  return mode_product(mode_product(d.core, d.factors[0].values, 1), d.factors[1].values, 2);
}

Tensor3 condition_coefficients(const TuckerDecomp& d) {
  return mode_product(d.core, d.factors[0].values, 1);
}

nlohmann::json to_json(const TuckerDecomp& d) {
  nlohmann::json factors = nlohmann::json::array();
  for (const auto& f : d.factors) factors.push_back(to_json(f.values));
  return {{"core", to_json(d.core)},
          {"factors", factors},
          {"spectra", {d.spectra[0], d.spectra[1], d.spectra[2]}}};
}

TuckerDecomp tucker_from_json(const nlohmann::json& j) {
  TuckerDecomp d;
  d.core = tensor_from_json(j.at("core"));
  const auto& factors = j.at("factors");
  const auto& spectra = j.at("spectra");
  if (factors.size() != 3 || spectra.size() != 3) {
    throw ValidationError("Tucker JSON requires three factors and three spectra");
  }
  for (std::size_t k = 0; k < 3; ++k) {
    d.factors[k].values = matrix_from_json(factors[k]);
    d.spectra[k] = spectra[k].get<std::vector<double>>();
    if (static_cast<std::size_t>(d.factors[k].cols()) != d.core.dims()[k]) {
      throw ValidationError("Tucker JSON factor " + std::to_string(k + 1) +
                            " column count does not match core extent");
    }
  }
  return d;
}

}  // namespace grom
