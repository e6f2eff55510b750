#include "grom/force_trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "grom/error.hpp"

namespace grom {

std::string to_string(Behavior b) { return b == Behavior::fx ? "fx" : "fz"; }

Behavior parse_behavior(const std::string& s) {
  if (s == "fx") return Behavior::fx;
  if (s == "fz") return Behavior::fz;
  throw ValidationError("unknown behavior '" + s + "' (expected fx or fz)");
}

void ForceTrace::validate() const {
  if (fx.size() != theta.size() || fz.size() != theta.size()) {
    throw ValidationError("force trace columns have different lengths");
  }
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (!std::isfinite(theta[k]) || !std::isfinite(fx[k]) || !std::isfinite(fz[k])) {
      throw ValidationError("force trace sample " + std::to_string(k) + " is not finite");
    }
    if (k > 0 && !(theta[k] > theta[k - 1])) {
      throw ValidationError("force trace theta is not strictly increasing at sample " +
                            std::to_string(k));
    }
  }
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t count) {
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) g[k] = lo + step * static_cast<double>(k);
  g.back() = hi;
  return g;
}

double interpolate(const std::vector<double>& x, const std::vector<double>& y, double at) {
  if (x.empty()) throw ValidationError("interpolate: empty abscissa");
  if (at <= x.front()) return y.front();
  if (at >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), at);
  const auto hi = static_cast<std::size_t>(it - x.begin());
  const std::size_t lo = hi - 1;
  if (at == x[lo]) return y[lo];
  const double s = (at - x[lo]) / (x[hi] - x[lo]);
  return y[lo] + s * (y[hi] - y[lo]);
}

ForceTrace resample(const ForceTrace& trace, const std::vector<double>& grid) {
  trace.validate();
  ForceTrace out;
  out.meta = trace.meta;
  out.theta = grid;
  out.fx.reserve(grid.size());
  out.fz.reserve(grid.size());
  for (double g : grid) {
    out.fx.push_back(interpolate(trace.theta, trace.fx, g));
    out.fz.push_back(interpolate(trace.theta, trace.fz, g));
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw ValidationError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_trace_csv(const ForceTrace& trace, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "theta_rad,fx_N_per_m,fz_N_per_m\n" << std::setprecision(17);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    os << trace.theta[k] << ',' << trace.fx[k] << ',' << trace.fz[k] << '\n';
  }
  write_file_atomic(path, os.str());
}

ForceTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trace file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ":1: empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "theta_rad,fx_N_per_m,fz_N_per_m") {
    throw ValidationError(path.string() + ":1: unexpected header '" + line + "'");
  }
  ForceTrace t;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    {
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
    }
    if (cells.size() != 3) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": expected three columns");
    }
    double v[3];
    for (int n = 0; n < 3; ++n) {
      const std::string& cell = cells[static_cast<std::size_t>(n)];
      try {
        std::size_t used = 0;
        v[n] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                              ": malformed number '" + cell + "'");
      }
    }
    if (!t.theta.empty() && !(v[0] > t.theta.back())) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": theta is not strictly increasing");
    }
    t.theta.push_back(v[0]);
    t.fx.push_back(v[1]);
    t.fz.push_back(v[2]);
  }
  t.validate();
  return t;
}

nlohmann::json to_json(const TraceMetadata& m) {
  return {{"morphology", m.morphology},
          {"foot_fraction", m.foot_fraction},
          {"omega", m.omega},
          {"config_digest", m.config_digest},
          {"source", m.source}};
}

TraceMetadata metadata_from_json(const nlohmann::json& j) {
  TraceMetadata m;
  m.morphology = j.value("morphology", m.morphology);
  m.foot_fraction = j.value("foot_fraction", m.foot_fraction);
  m.omega = j.at("omega").get<double>();
  m.config_digest = j.value("config_digest", std::string{});
  m.source = j.value("source", m.source);
  if (m.source != "simulation" && m.source != "experiment") {
    throw ValidationError("metadata source must be 'simulation' or 'experiment'");
  }
  return m;
}

}  // namespace grom
