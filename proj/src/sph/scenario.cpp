#include "grom/sph/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>

#include "grom/error.hpp"

namespace grom::sph {

void BedSpec::validate(const SphConfig& cfg) const {
  if (!(width > 4.0 * cfg.particle_spacing && depth > 4.0 * cfg.particle_spacing)) {
    throw ValidationError("bed must span at least four particle spacings each way");
  }
  if (wall_layers < 1) throw ValidationError("container needs at least one wall layer");
  if (!(jitter >= 0.0 && jitter < 0.5)) throw ValidationError("bed jitter must be in [0, 0.5)");
  if (!(wall_freeboard >= 0.0)) throw ValidationError("wall freeboard must be non-negative");
}

nlohmann::json to_json(const BedSpec& b) {
  return {{"width", b.width},   {"depth", b.depth},   {"wall_layers", b.wall_layers},
          {"wall_freeboard", b.wall_freeboard}, {"jitter", b.jitter}, {"seed", b.seed}};
}

BedSpec bed_from_json(const nlohmann::json& j) {
  BedSpec b;
  b.width = j.value("width", b.width);
  b.depth = j.value("depth", b.depth);
  b.wall_layers = j.value("wall_layers", b.wall_layers);
  b.wall_freeboard = j.value("wall_freeboard", b.wall_freeboard);
  b.jitter = j.value("jitter", b.jitter);
  b.seed = j.value("seed", b.seed);
  return b;
}

ParticleSystem make_bed(const BedSpec& bed, const MaterialParams& material, const SphConfig& cfg) {
  cfg.validate();
  material.validate();
  bed.validate(cfg);
  const double dx = cfg.particle_spacing;
  const double rho0 = material.bulk_density;
  const double c2 = cfg.sound_speed * cfg.sound_speed;
  const double g = std::abs(cfg.gravity.z);
  const double m = rho0 * dx * dx;
  const auto nx = static_cast<long>(std::lround(bed.width / dx));
  const auto nz = static_cast<long>(std::lround(bed.depth / dx));
  const double top = static_cast<double>(nz) * dx;

  ParticleSystem ps;
  std::mt19937_64 rng(bed.seed);
  std::uniform_real_distribution<double> u(-bed.jitter * dx, bed.jitter * dx);
  for (long k = 0; k < nz; ++k) {
    for (long i = 0; i < nx; ++i) {
      Vec2 x{(static_cast<double>(i) + 0.5) * dx, (static_cast<double>(k) + 0.5) * dx};
      if (bed.jitter > 0.0) {
        const double ox = u(rng);
        const double oz = u(rng);
        x += Vec2{ox, oz};
      }
      const double rho = rho0 + rho0 * g * (top - x.z) / c2;
      ps.add(ParticleKind::bulk, x, m, rho);
    }
  }

  const double width = static_cast<double>(nx) * dx;
  const long wall_rows = nz + static_cast<long>(std::ceil(bed.wall_freeboard / dx));
  for (int l = 0; l < bed.wall_layers; ++l) {
    const double off = (static_cast<double>(l) + 0.5) * dx;
    for (long i = -bed.wall_layers; i < nx + bed.wall_layers; ++i) {
      ps.add(ParticleKind::container, {(static_cast<double>(i) + 0.5) * dx, -off}, m, rho0);
    }
    for (long k = 0; k < wall_rows; ++k) {
      const double z = (static_cast<double>(k) + 0.5) * dx;
      const double rho = std::max(rho0, rho0 + rho0 * g * (top - z) / c2);
      ps.add(ParticleKind::container, {-off, z}, m, rho);
      ps.add(ParticleKind::container, {width + off, z}, m, rho);
    }
  }
  return ps;
}

double free_surface_height(const ParticleSystem& ps, double dx) {
  std::map<long, double> column_top;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps.kind[i] != ParticleKind::bulk) continue;
    const long c = static_cast<long>(std::floor(ps.position[i].x / dx));
    auto [it, inserted] = column_top.try_emplace(c, ps.position[i].z);
    if (!inserted) it->second = std::max(it->second, ps.position[i].z);
  }
  if (column_top.empty()) throw ValidationError("bed has no bulk particles");
  std::vector<double> tops;
  tops.reserve(column_top.size());
  for (const auto& [c, z] : column_top) tops.push_back(z);
  std::nth_element(tops.begin(), tops.begin() + static_cast<long>(tops.size() / 2), tops.end());
  return tops[tops.size() / 2] + 0.5 * dx;
}

SettledBed settle_bed(const BedSpec& bed, const MaterialParams& material, const SphConfig& cfg,
                      double duration, const DiagnosticsSink& sink, long diag_interval) {
  if (!(duration >= 0.0)) throw ValidationError("settling duration must be non-negative");
  Simulation sim(make_bed(bed, material, cfg), material, cfg);
  const auto steps = static_cast<long>(std::ceil(duration / cfg.dt));
  for (long n = 0; n < steps; ++n) {
    sim.step();
    if (sink && diag_interval > 0 && sim.step_count() % diag_interval == 0) sink(sim.diagnostics());
  }
  SettledBed out;
  out.particles = sim.particles();
  for (std::size_t i = 0; i < out.particles.size(); ++i) out.particles.velocity[i] = {};
  out.spec = bed;
  out.material = material;
  out.config = cfg;
  out.surface = free_surface_height(out.particles, cfg.particle_spacing);
  out.settle_time = sim.time();
  out.final = sim.diagnostics();
  return out;
}

void KinematicSchedule::validate() const {
  if (!(pause_duration >= 0.0)) throw ValidationError("pause duration must be non-negative");
  if (!(omega > 0.0) || !std::isfinite(omega)) throw ValidationError("rotation speed must be positive");
  if (!(theta_end > theta_start)) throw ValidationError("theta range must be increasing");
  if (direction != 1 && direction != -1) throw ValidationError("direction must be +1 or -1");
}

double KinematicSchedule::theta_at(double t) const {
  return direction > 0 ? theta_start + omega * t : theta_end - omega * t;
}

nlohmann::json to_json(const KinematicSchedule& s) {
  return {{"pause_duration", s.pause_duration}, {"hip_height", s.hip_height},
          {"omega", s.omega},                   {"theta_start", s.theta_start},
          {"theta_end", s.theta_end},           {"direction", s.direction}};
}

KinematicSchedule schedule_from_json(const nlohmann::json& j) {
  KinematicSchedule s;
  s.pause_duration = j.value("pause_duration", s.pause_duration);
  s.hip_height = j.value("hip_height", s.hip_height);
  s.omega = j.value("omega", s.omega);
  s.theta_start = j.value("theta_start", s.theta_start);
  s.theta_end = j.value("theta_end", s.theta_end);
  s.direction = j.value("direction", s.direction);
  s.validate();
  return s;
}

namespace {

constexpr double kResidualFraction = 0.02;

ParticleSystem with_leg(const SettledBed& bed, const LegParticles& leg, const LegPose& pose,
                        double carve, std::size_t& leg_begin) {
  ParticleSystem ps = bed.particles;
  const double dx = bed.config.particle_spacing;
  std::vector<Vec2> world;
  world.reserve(leg.local.size());
  for (const auto& p : leg.local) world.push_back(to_world(p, pose));
  if (carve > 0.0) {
    const double r2 = carve * dx * carve * dx;
    std::vector<bool> keep(ps.size(), true);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (ps.kind[i] != ParticleKind::bulk) continue;
      for (const auto& w : world) {
        if ((ps.position[i] - w).norm2() < r2) {
          keep[i] = false;
          break;
        }
      }
    }
    ps.compact(keep);
  }
  leg_begin = ps.size();
  for (const auto& w : world) ps.add(ParticleKind::leg, w, leg.mass, bed.material.bulk_density);
  return ps;
}

}  // namespace

LegSimulation::LegSimulation(const SettledBed& bed, const LegGeometry& leg, Vec2 hip, int direction,
                             std::function<double(double)> theta_of_t, double theta_dot, double t0,
                             double carve)
    : leg_(make_leg_particles(leg, bed.config.particle_spacing, bed.material.bulk_density)),
      theta_of_t_(std::move(theta_of_t)),
      sim_(with_leg(bed, leg_, LegPose{hip, theta_of_t_(t0), direction}, carve, leg_begin_),
           bed.material, bed.config,
           [this, hip, direction, theta_dot](double t, ParticleSystem& ps) {
             const LegPose pose{hip, theta_of_t_(t), direction};
             for (std::size_t k = 0; k < leg_.local.size(); ++k) {
               ps.position[leg_begin_ + k] = to_world(leg_.local[k], pose);
               ps.velocity[leg_begin_ + k] = rigid_velocity(leg_.local[k], pose, theta_dot);
             }
           }) {
  sim_.set_time(t0);
}

double LegSimulation::leg_bottom() const {
  double z = std::numeric_limits<double>::max();
  const auto& ps = sim_.particles();
  for (std::size_t i = leg_begin_; i < ps.size(); ++i) z = std::min(z, ps.position[i].z);
  return z;
}

double leg_clearance(const ParticleSystem& bed, const LegParticles& leg, const LegPose& pose) {
  double best = std::numeric_limits<double>::max();
  for (const auto& p : leg.local) {
    const Vec2 w = to_world(p, pose);
    for (std::size_t i = 0; i < bed.size(); ++i) {
      if (bed.kind[i] != ParticleKind::bulk) continue;
      best = std::min(best, (bed.position[i] - w).norm2());
    }
  }
  return std::sqrt(best);
}

RotationResult run_leg_rotation(const SettledBed& bed, const LegGeometry& leg,
                                const KinematicSchedule& schedule, const RotationOptions& options) {
  schedule.validate();
  leg.validate();
  if (options.samples < 2) throw ValidationError("trace needs at least two samples");
  const SphConfig& cfg = bed.config;
  const double dt = cfg.dt;
  const double h = cfg.smoothing_length;
  const double dx = cfg.particle_spacing;
  const Vec2 hip{0.5 * static_cast<double>(std::lround(bed.spec.width / dx)) * dx,
                 bed.surface + schedule.hip_height};
  const int dir = schedule.direction;
  const double theta_dot = dir * schedule.omega;
  const auto grid = uniform_grid(schedule.theta_start, schedule.theta_end, options.samples);

  long stride = options.sample_stride;
  if (stride <= 0) {
    const double spacing = grid[1] - grid[0];
    stride = std::max(1L, std::lround(spacing / (schedule.omega * dt)));
  }

  // Only the top rows of the bed can be touched first.
  ParticleSystem top_layer;
  for (std::size_t i = 0; i < bed.particles.size(); ++i) {
    if (bed.particles.kind[i] == ParticleKind::bulk && bed.particles.position[i].z > bed.surface - 4.0 * h)
      top_layer.add(ParticleKind::bulk, bed.particles.position[i], 0.0, 1.0);
  }
  const LegParticles parts = make_leg_particles(leg, dx, bed.material.bulk_density);
  const double total = schedule.duration();
  const auto total_steps = static_cast<long>(std::floor(total / dt));
  const double contact_gap = 2.0 * h + dx;
  const double scan = std::max(dt, 0.002 / schedule.omega);
  double t_contact = total;
  for (double t = 0.0; t <= total; t += scan) {
    const LegPose pose{hip, schedule.theta_at(t), dir};
    if (leg_clearance(top_layer, parts, pose) < contact_gap) {
      t_contact = t;
      break;
    }
  }

  RotationResult result;
  std::vector<double> th, fx, fz;
  const auto theta_of_t = [schedule](double t) { return schedule.theta_at(t); };
  if (t_contact < total) {
    const long n0 = static_cast<long>(std::floor(t_contact / dt));
    LegSimulation run(bed, leg, hip, dir, theta_of_t, theta_dot, static_cast<double>(n0) * dt, 0.0);
    result.contact_start = run.theta();
    const double exit_height = bed.surface + 2.0 * h;
    long n = n0;
    double sum_th = 0.0, sum_fx = 0.0, sum_fz = 0.0;
    long count = 0;
    double peak = 0.0, last = 0.0;
    while (n < total_steps) {
      const double th0 = run.theta();
      run.step();
      ++n;
      ++result.steps;
      sum_th += 0.5 * (th0 + run.theta());
      sum_fx += run.leg_force().x;
      sum_fz += run.leg_force().z;
      if (++count == stride) {
        th.push_back(sum_th / count);
        fx.push_back(sum_fx / count);
        fz.push_back(sum_fz / count);
        last = std::hypot(fx.back(), fz.back());
        peak = std::max(peak, last);
        sum_th = sum_fx = sum_fz = 0.0;
        count = 0;
      }
      if (options.diagnostics && options.diag_interval > 0 && result.steps % options.diag_interval == 0)
        options.diagnostics(run.simulation().diagnostics());
      const bool past_bottom = dir > 0 ? run.theta() > 0.0 : run.theta() < 0.0;
      // Out of the bed: only grains carried on the leg remain.
      if (past_bottom && count == 0 && run.leg_bottom() > exit_height &&
          (run.leg_pairs() == 0 || last < kResidualFraction * peak))
        break;
    }
    if (count > 0) {
      th.push_back(sum_th / count);
      fx.push_back(sum_fx / count);
      fz.push_back(sum_fz / count);
    }
    result.contact_end = run.theta();
  } else {
    result.contact_start = result.contact_end = schedule.theta_at(total);
  }

  // Raw samples in increasing theta with zero force outside the simulated span.
  if (dir < 0) {
    std::reverse(th.begin(), th.end());
    std::reverse(fx.begin(), fx.end());
    std::reverse(fz.begin(), fz.end());
  }
  ForceTrace raw;
  const double lo = th.empty() ? std::numeric_limits<double>::max() : th.front();
  const double hi = th.empty() ? -std::numeric_limits<double>::max() : th.back();
  const double margin = 1e-9;
  for (double g : grid) {
    if (g < lo - margin) {
      raw.theta.push_back(g);
      raw.fx.push_back(0.0);
      raw.fz.push_back(0.0);
    }
  }
  for (std::size_t k = 0; k < th.size(); ++k) {
    if (!raw.theta.empty() && th[k] <= raw.theta.back()) continue;
    raw.theta.push_back(th[k]);
    raw.fx.push_back(fx[k]);
    raw.fz.push_back(fz[k]);
  }
  for (double g : grid) {
    if (g > hi + margin && (raw.theta.empty() || g > raw.theta.back())) {
      raw.theta.push_back(g);
      raw.fx.push_back(0.0);
      raw.fz.push_back(0.0);
    }
  }
  raw.meta.morphology = to_string(leg.morphology);
  raw.meta.foot_fraction = leg.foot_fraction;
  raw.meta.omega = schedule.omega;
  raw.meta.source = "simulation";
  raw.validate();
  result.trace = resample(raw, grid);
  result.raw = std::move(raw);
  return result;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  if (j.contains("material")) c.material = material_from_json(j.at("material"));
  if (j.contains("sph")) c.sph = sph_config_from_json(j.at("sph"));
  if (j.contains("bed")) c.bed = bed_from_json(j.at("bed"));
  if (j.contains("seed")) c.bed.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("leg")) c.leg = leg_from_json(j.at("leg"));
  if (j.contains("schedule")) c.schedule = schedule_from_json(j.at("schedule"));
  c.samples = j.value("samples", c.samples);
  c.sample_stride = j.value("sample_stride", c.sample_stride);
  c.output = j.value("output", std::string());
  c.material.validate();
  c.sph.validate();
  c.bed.validate(c.sph);
  c.leg.validate();
  c.schedule.validate();
  return c;
}

nlohmann::json to_json(const ScenarioConfig& c) {
  return {{"material", to_json(c.material)}, {"sph", to_json(c.sph)},
          {"bed", to_json(c.bed)},           {"leg", to_json(c.leg)},
          {"schedule", to_json(c.schedule)}, {"samples", c.samples},
          {"sample_stride", c.sample_stride}, {"seed", c.bed.seed}};
}

std::string config_digest(const nlohmann::json& j) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : j.dump()) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace grom::sph
