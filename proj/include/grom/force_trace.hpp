#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace grom {

/// Behavior index inside tensors and observation records.
enum class Behavior : int { fx = 0, fz = 1 };

inline constexpr int kBehaviorCount = 2;

std::string to_string(Behavior b);
/// Accepts "fx" or "fz".
Behavior parse_behavior(const std::string& s);

struct TraceMetadata {
  std::string morphology = "flat";
  double foot_fraction = 0.0;
  double omega = 0.0;
  std::string config_digest;
  std::string source = "simulation";
};

/// Net reaction force on the leg sampled along the leg angle. Forces are per
/// unit leg width (N/m).
struct ForceTrace {
  std::vector<double> theta;
  std::vector<double> fx;
  std::vector<double> fz;
  TraceMetadata meta;

  std::size_t size() const { return theta.size(); }
  const std::vector<double>& values(Behavior b) const { return b == Behavior::fx ? fx : fz; }
  std::vector<double>& values(Behavior b) { return b == Behavior::fx ? fx : fz; }

  /// Throws ValidationError unless theta is strictly increasing and every value finite.
  void validate() const;
};

/// `count` uniform samples on [lo, hi] inclusive.
std::vector<double> uniform_grid(double lo, double hi, std::size_t count);

/// Piecewise-linear interpolation of (x, y) at `at`; constant extrapolation.
double interpolate(const std::vector<double>& x, const std::vector<double>& y, double at);

/// Resample every behavior of `trace` onto `grid` by linear interpolation.
ForceTrace resample(const ForceTrace& trace, const std::vector<double>& grid);

/// CSV with header `theta_rad,fx_N_per_m,fz_N_per_m`.
void write_trace_csv(const ForceTrace& trace, const std::filesystem::path& path);
ForceTrace read_trace_csv(const std::filesystem::path& path);

nlohmann::json to_json(const TraceMetadata& m);
TraceMetadata metadata_from_json(const nlohmann::json& j);

/// Write via a temporary sibling file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace grom
