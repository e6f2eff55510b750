#include "grom/pipeline/model.hpp"

#include <algorithm>
#include <cmath>

#include "grom/error.hpp"

namespace grom::pipeline {

namespace {

constexpr std::size_t kMinConditions = 3;

// Row of behavior b in a block's V, or -1.
int behavior_row(const CoefficientBlock& block, Behavior b) {
  for (std::size_t r = 0; r < block.behaviors.size(); ++r)
    if (block.behaviors[r] == b) return static_cast<int>(r);
  return -1;
}

CoefficientBlock fit_block(const std::vector<ForceTrace>& traces, const std::vector<Behavior>& behaviors,
                           const std::array<double, kBehaviorCount>& scale,
                           const std::vector<double>& conditions, const TrainOptions& options,
                           std::uint64_t seed_offset) {
  const std::size_t n = traces.size();
  const std::size_t t_len = traces.front().size();
  Tensor3 tensor({n, behaviors.size(), t_len});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < behaviors.size(); ++j) {
      const auto& v = traces[i].values(behaviors[j]);
      const double s = scale[static_cast<std::size_t>(behaviors[j])];
      for (std::size_t t = 0; t < t_len; ++t) tensor(i, j, t) = v[t] / s;
    }
  }
  CoefficientBlock block;
  block.behaviors = behaviors;
  block.decomp = st_hosvd(tensor, options.thresholds, options.mode_order);
  const Tensor3 coef = condition_coefficients(block.decomp);
  const auto [ci, r2, r3] = coef.dims();
  Matrix x(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i), 0) = conditions[i];
  for (std::size_t j = 0; j < r2; ++j) {
    for (std::size_t k = 0; k < r3; ++k) {
      Vector y(static_cast<Eigen::Index>(ci));
      for (std::size_t i = 0; i < ci; ++i) y(static_cast<Eigen::Index>(i)) = coef(i, j, k);
      gp::FitOptions fo = options.gp;
      fo.seed = options.gp.seed + seed_offset + j * r3 + k;
      block.models.push_back(gp::GPModel::fit(x, y, fo));
    }
  }
  return block;
}

void check_model(const TrainedModel& m) {
  if (m.theta_grid.size() < 2) throw ValidationError("model theta grid needs at least two samples");
  for (const auto& b : m.blocks) {
    const auto r = b.decomp.ranks();
    if (b.models.size() != r[1] * r[2]) {
      throw ValidationError("model block has " + std::to_string(b.models.size()) +
                            " coefficient regressors, expected " + std::to_string(r[1] * r[2]));
    }
    if (static_cast<std::size_t>(b.decomp.factors[2].rows()) != m.theta_grid.size()) {
      throw ValidationError("model angle basis does not match its theta grid");
    }
  }
}

}  // namespace

Eigen::Index TrainedModel::coefficient_count() const {
  Eigen::Index p = 0;
  for (const auto& b : blocks) p += static_cast<Eigen::Index>(b.coefficient_count());
  return p;
}

Matrix TrainedModel::basis(Behavior b) const {
  const auto t_len = static_cast<Eigen::Index>(theta_grid.size());
  Matrix out = Matrix::Zero(t_len, coefficient_count());
  const double s = scale[static_cast<std::size_t>(b)];
  Eigen::Index col = 0;
  for (const auto& block : blocks) {
    const auto r = block.decomp.ranks();
    const int row = behavior_row(block, b);
    const Matrix& v = block.decomp.factors[1].values;
    const Matrix& w = block.decomp.factors[2].values;
    for (std::size_t j = 0; j < r[1]; ++j) {
      for (std::size_t k = 0; k < r[2]; ++k, ++col) {
        if (row < 0) continue;
        out.col(col) = (s * v(row, static_cast<Eigen::Index>(j))) * w.col(static_cast<Eigen::Index>(k));
      }
    }
  }
  return out;
}

Vector TrainedModel::training_coefficients(std::size_t i) const {
  Vector out(coefficient_count());
  Eigen::Index col = 0;
  for (const auto& block : blocks) {
    const Tensor3 coef = condition_coefficients(block.decomp);
    const auto [ci, r2, r3] = coef.dims();
    if (i >= ci) throw ValidationError("training condition index out of range");
    for (std::size_t j = 0; j < r2; ++j)
      for (std::size_t k = 0; k < r3; ++k) out(col++) = coef(i, j, k);
  }
  return out;
}

TrainedModel train(const std::vector<ForceTrace>& traces_in, const std::string& design,
                   const TrainOptions& options) {
  if (traces_in.size() < kMinConditions) {
    throw ValidationError("training design '" + design + "' needs at least " +
                          std::to_string(kMinConditions) + " conditions, got " +
                          std::to_string(traces_in.size()));
  }
  std::vector<ForceTrace> traces = traces_in;
  std::stable_sort(traces.begin(), traces.end(),
                   [](const ForceTrace& a, const ForceTrace& b) { return a.meta.omega < b.meta.omega; });
  TrainedModel m;
  m.design = design;
  m.options = options;
  m.theta_grid = traces.front().theta;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    traces[i].validate();
    if (traces[i].theta != m.theta_grid) {
      throw ValidationError("training traces must share one theta grid");
    }
    if (i > 0 && !(traces[i].meta.omega > traces[i - 1].meta.omega)) {
      throw ValidationError("training conditions must be distinct");
    }
    m.conditions.push_back(traces[i].meta.omega);
  }
  for (int b = 0; b < kBehaviorCount; ++b) {
    double peak = 0.0;
    for (const auto& t : traces)
      for (double v : t.values(static_cast<Behavior>(b))) peak = std::max(peak, std::abs(v));
    m.scale[static_cast<std::size_t>(b)] = peak > 0.0 ? peak : 1.0;
  }
  if (options.per_behavior) {
    m.blocks.push_back(fit_block(traces, {Behavior::fx}, m.scale, m.conditions, options, 0));
    m.blocks.push_back(fit_block(traces, {Behavior::fz}, m.scale, m.conditions, options, 1000));
  } else {
    m.blocks.push_back(fit_block(traces, {Behavior::fx, Behavior::fz}, m.scale, m.conditions, options, 0));
  }
  return m;
}

TrainedModel train(const DatasetManifest& manifest, const std::string& design,
                   const TrainOptions& options) {
  const auto records = manifest.simulations(design);
  std::vector<ForceTrace> traces;
  for (const auto* r : records) traces.push_back(r->trace);
  TrainedModel m = train(traces, design, options);
  if (!records.empty()) m.design = design_key(records.front()->meta());
  return m;
}

ForceTrace reconstruct_trace(const TrainedModel& model, const Vector& coefficients) {
  if (coefficients.size() != model.coefficient_count()) {
    throw ValidationError("coefficient vector has the wrong length");
  }
  ForceTrace out;
  out.theta = model.theta_grid;
  for (int b = 0; b < kBehaviorCount; ++b) {
    const Vector v = model.basis(static_cast<Behavior>(b)) * coefficients;
    out.values(static_cast<Behavior>(b)).assign(v.data(), v.data() + v.size());
  }
  return out;
}

Prediction predict(const TrainedModel& model, double omega) {
  if (!std::isfinite(omega)) throw ValidationError("prediction speed must be finite");
  check_model(model);
  Prediction p;
  const Eigen::Index n = model.coefficient_count();
  p.coefficient_mean.resize(n);
  p.coefficient_variance.resize(n);
  Eigen::Index col = 0;
  for (const auto& block : model.blocks) {
    for (const auto& gp_model : block.models) {
      const auto d = gp_model.predict(omega);
      p.coefficient_mean(col) = d.mean;
      p.coefficient_variance(col) = d.variance;
      ++col;
    }
  }
  p.trace = reconstruct_trace(model, p.coefficient_mean);
  p.lower = p.upper = p.trace;
  for (int b = 0; b < kBehaviorCount; ++b) {
    const auto beh = static_cast<Behavior>(b);
    const Matrix basis = model.basis(beh);
    // Independent coefficients: the band variance is sum_c basis^2 var_c.
    const Vector var = basis.cwiseProduct(basis) * p.coefficient_variance;
    auto& lo = p.lower.values(beh);
    auto& hi = p.upper.values(beh);
    for (Eigen::Index t = 0; t < var.size(); ++t) {
      const double half = gp::kZ95 * std::sqrt(std::max(0.0, var(t)));
      lo[static_cast<std::size_t>(t)] -= half;
      hi[static_cast<std::size_t>(t)] += half;
    }
  }
  const double lo = model.conditions.front(), hi = model.conditions.back();
  const double half_span = 0.5 * (hi - lo);
  p.extrapolated = omega < lo - half_span || omega > hi + half_span;
  for (ForceTrace* t : {&p.trace, &p.lower, &p.upper}) {
    t->meta.omega = omega;
    t->meta.source = "prediction";
    const auto at = model.design.find('@');
    t->meta.morphology = model.design.substr(0, at);
    if (at != std::string::npos) t->meta.foot_fraction = std::stod(model.design.substr(at + 1));
  }
  return p;
}

ForceTrace truncated_trace(const TrainedModel& model, std::size_t i) {
  ForceTrace t = reconstruct_trace(model, model.training_coefficients(i));
  t.meta.omega = model.conditions.at(i);
  return t;
}

nlohmann::json to_json(const TrainedModel& m) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : m.blocks) {
    nlohmann::json behaviors = nlohmann::json::array();
    for (auto beh : b.behaviors) behaviors.push_back(to_string(beh));
    nlohmann::json models = nlohmann::json::array();
    for (const auto& g : b.models) models.push_back(g.to_json());
    blocks.push_back({{"behaviors", behaviors}, {"decomposition", to_json(b.decomp)}, {"models", models}});
  }
  return {{"schema_version", kSchemaVersion},
          {"design", m.design},
          {"theta_grid", m.theta_grid},
          {"conditions", m.conditions},
          {"normalization", {{"kind", "peak_abs_per_behavior"}, {"fx", m.scale[0]}, {"fz", m.scale[1]}}},
          {"thresholds", m.options.thresholds},
          {"mode_order", m.options.mode_order},
          {"per_behavior", m.options.per_behavior},
          {"blocks", blocks}};
}

TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.value("schema_version", 0) != kSchemaVersion) {
      throw ValidationError("model schema_version must be " + std::to_string(kSchemaVersion));
    }
    TrainedModel m;
    m.design = j.at("design").get<std::string>();
    m.theta_grid = j.at("theta_grid").get<std::vector<double>>();
    m.conditions = j.at("conditions").get<std::vector<double>>();
    m.scale = {j.at("normalization").at("fx").get<double>(), j.at("normalization").at("fz").get<double>()};
    m.options.thresholds = j.at("thresholds").get<ModeThresholds>();
    m.options.mode_order = j.at("mode_order").get<ModeOrder>();
    m.options.per_behavior = j.at("per_behavior").get<bool>();
    for (const auto& bj : j.at("blocks")) {
      CoefficientBlock b;
      for (const auto& s : bj.at("behaviors")) b.behaviors.push_back(parse_behavior(s.get<std::string>()));
      b.decomp = tucker_from_json(bj.at("decomposition"));
      for (const auto& g : bj.at("models")) b.models.push_back(gp::GPModel::from_json(g));
      m.blocks.push_back(std::move(b));
    }
    if (m.conditions.empty()) throw ValidationError("model has no training conditions");
    check_model(m);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model: ") + e.what());
  }
}

void write_model(const TrainedModel& m, const std::filesystem::path& path) {
  write_file_atomic(path, to_json(m).dump() + "\n");
}

TrainedModel read_model(const std::filesystem::path& path) {
  return model_from_json(read_json_file(path));
}

}  // namespace grom::pipeline
