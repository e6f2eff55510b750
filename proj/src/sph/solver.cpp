#include "grom/sph/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "grom/error.hpp"
#include "grom/sph/kernel.hpp"

namespace grom::sph {

void SphConfig::validate() const {
  if (!(particle_spacing > 0.0 && smoothing_length > 0.0)) {
    throw ValidationError("SPH spacing and smoothing length must be positive");
  }
  if (!(dt > 0.0)) throw ValidationError("SPH time step must be positive");
  if (!(sound_speed > 0.0)) throw ValidationError("SPH sound speed must be positive");
  if (!(delta >= 0.0 && av_alpha >= 0.0 && av_beta >= 0.0)) {
    throw ValidationError("SPH diffusion and viscosity coefficients must be non-negative");
  }
  if (shepard_interval < 0) throw ValidationError("Shepard interval must be non-negative");
  if (dt > cfl_limit(0.0)) {
    std::ostringstream msg;
    msg << "SPH time step " << dt << " exceeds the CFL limit " << cfl_limit(0.0);
    throw ValidationError(msg.str());
  }
}

nlohmann::json to_json(const SphConfig& c) {
  return {{"particle_spacing", c.particle_spacing},
          {"smoothing_length", c.smoothing_length},
          {"dt", c.dt},
          {"sound_speed", c.sound_speed},
          {"delta", c.delta},
          {"av_alpha", c.av_alpha},
          {"av_beta", c.av_beta},
          {"shepard_interval", c.shepard_interval},
          {"gravity", {c.gravity.x, c.gravity.z}}};
}

SphConfig sph_config_from_json(const nlohmann::json& j) {
  SphConfig c;
  c.particle_spacing = j.value("particle_spacing", c.particle_spacing);
  c.smoothing_length = j.value("smoothing_length", 1.3 * c.particle_spacing);
  c.sound_speed = j.value("sound_speed", c.sound_speed);
  c.dt = j.value("dt", std::min(c.dt, c.cfl_limit(0.5)));
  c.delta = j.value("delta", c.delta);
  c.av_alpha = j.value("av_alpha", c.av_alpha);
  c.av_beta = j.value("av_beta", c.av_beta);
  c.shepard_interval = j.value("shepard_interval", c.shepard_interval);
  if (j.contains("gravity")) {
    const auto g = j.at("gravity").get<std::vector<double>>();
    if (g.size() != 2) throw ValidationError("gravity must have two components");
    c.gravity = {g[0], g[1]};
  }
  c.validate();
  return c;
}

std::vector<double> summation_density(const ParticleSystem& ps, const NeighborList& nl) {
  const double w0 = kernel(0.0, nl.h);
  std::vector<double> rho(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) rho[i] = ps.mass[i] * w0;
  for (const auto& q : nl.pairs) {
    const std::uint32_t i = q.i, j = q.j;
    rho[i] += ps.mass[j] * q.w;
    rho[j] += ps.mass[i] * q.w;
  }
  return rho;
}

std::vector<double> shepard_filter(const ParticleSystem& ps, const NeighborList& nl) {
  const double w0 = kernel(0.0, nl.h);
  std::vector<double> num(ps.size()), den(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    num[i] = ps.mass[i] * w0;
    den[i] = ps.mass[i] / ps.density[i] * w0;
  }
  for (const auto& q : nl.pairs) {
    const std::uint32_t i = q.i, j = q.j;
    num[i] += ps.mass[j] * q.w;
    den[i] += ps.mass[j] / ps.density[j] * q.w;
    num[j] += ps.mass[i] * q.w;
    den[j] += ps.mass[i] / ps.density[i] * q.w;
  }
  for (std::size_t i = 0; i < ps.size(); ++i) num[i] /= den[i];
  return num;
}

std::vector<double> continuity_rate(const ParticleSystem& ps, const NeighborList& nl,
                                    const SphConfig& cfg) {
  const double diffusion = cfg.delta * nl.h * cfg.sound_speed;
  std::vector<double> rate(ps.size(), 0.0);
  for (const auto& q : nl.pairs) {
    const std::uint32_t i = q.i, j = q.j;
    const double gf = q.grad_factor;
    // (v_i - v_j) . grad_i W is symmetric in the pair.
    const double div = (ps.velocity[i] - ps.velocity[j]).dot(gf * q.r);
    rate[i] += ps.mass[j] * div;
    rate[j] += ps.mass[i] * div;
    if (diffusion > 0.0 && ps.kind[i] == ParticleKind::bulk && ps.kind[j] == ParticleKind::bulk) {
      // (x_j - x_i) . grad_i W / |r|^2 = -grad_factor for both members of the pair.
      const double drho = ps.density[j] - ps.density[i];
      rate[i] += diffusion * (-2.0 * gf * drho) * ps.mass[j] / ps.density[j];
      rate[j] += diffusion * (2.0 * gf * drho) * ps.mass[i] / ps.density[i];
    }
  }
  return rate;
}

std::vector<Sym2> strain_rates(const ParticleSystem& ps, const NeighborList& nl) {
  struct Grad {
    double xx = 0.0, xz = 0.0, zx = 0.0, zz = 0.0;
  };
  std::vector<Grad> l(ps.size());
  for (const auto& q : nl.pairs) {
    const std::uint32_t i = q.i, j = q.j;
    const Vec2 dv = ps.velocity[j] - ps.velocity[i];
    const Vec2 grad = q.grad_factor * q.r;
    // (v_j - v_i) (x) grad_i W is symmetric in the pair as well.
    const Grad g{dv.x * grad.x, dv.x * grad.z, dv.z * grad.x, dv.z * grad.z};
    if (ps.kind[i] == ParticleKind::bulk) {
      const double vol = ps.mass[j] / ps.density[j];
      l[i].xx += vol * g.xx;
      l[i].xz += vol * g.xz;
      l[i].zx += vol * g.zx;
      l[i].zz += vol * g.zz;
    }
    if (ps.kind[j] == ParticleKind::bulk) {
      const double vol = ps.mass[i] / ps.density[i];
      l[j].xx += vol * g.xx;
      l[j].xz += vol * g.xz;
      l[j].zx += vol * g.zx;
      l[j].zz += vol * g.zz;
    }
  }
  std::vector<Sym2> out(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) out[i] = {l[i].xx, 0.5 * (l[i].xz + l[i].zx), l[i].zz};
  return out;
}

StressField stresses(const ParticleSystem& ps, const std::vector<Sym2>& strain_rate,
                     const MaterialParams& material, const SphConfig& cfg) {
  StressField f;
  f.stress.resize(ps.size());
  f.pressure.resize(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double p = eos_pressure(ps.density[i], material.bulk_density, cfg.sound_speed);
    f.pressure[i] = p;
    if (ps.kind[i] == ParticleKind::bulk) {
      const StressResult s = constitutive_stress(p, strain_rate[i], ps.strain[i], material);
      f.stress[i] = s.stress;
      if (s.pressure_clamped) ++f.clamped;
      if (s.rate_branch) ++f.rate_branch;
    } else {
      f.stress[i] = -std::max(p, material.pressure_floor) * Sym2::identity();
    }
  }
  return f;
}

double artificial_viscosity(const Vec2& rij, const Vec2& vij, double rho_i, double rho_j,
                            const SphConfig& cfg) {
  const double vr = vij.dot(rij);
  if (vr >= 0.0) return 0.0;
  const double h = cfg.smoothing_length;
  const double mu = h * vr / (rij.norm2() + 0.01 * h * h);
  const double rho_bar = 0.5 * (rho_i + rho_j);
  return (-cfg.av_alpha * cfg.sound_speed * mu + cfg.av_beta * mu * mu) / rho_bar;
}

MomentumRates momentum_rate(const ParticleSystem& ps, const NeighborList& nl,
                            const std::vector<Sym2>& stress, const SphConfig& cfg) {
  MomentumRates out;
  const std::size_t n = ps.size();
  out.acceleration.assign(n, Vec2{});
  std::vector<Sym2> scaled(n);
  for (std::size_t i = 0; i < n; ++i) scaled[i] = (1.0 / (ps.density[i] * ps.density[i])) * stress[i];
  for (const auto& q : nl.pairs) {
    const std::uint32_t i = q.i, j = q.j;
    const Vec2 grad = q.grad_factor * q.r;
    const double pi_ij = artificial_viscosity(q.r, ps.velocity[i] - ps.velocity[j],
                                              ps.density[i], ps.density[j], cfg);
    // Per-unit-mass-pair interaction; i gains m_j f, j gains -m_i f.
    const Vec2 f = (scaled[i] + scaled[j]) * grad - pi_ij * grad;
    const bool bulk_i = ps.kind[i] == ParticleKind::bulk;
    const bool bulk_j = ps.kind[j] == ParticleKind::bulk;
    if (bulk_i) out.acceleration[i] += ps.mass[j] * f;
    if (bulk_j) out.acceleration[j] -= ps.mass[i] * f;
    if (bulk_i && bulk_j) continue;
    // Force exerted by the bulk member on the boundary member.
    const Vec2 on_boundary = bulk_i ? -(ps.mass[i] * ps.mass[j]) * f : (ps.mass[i] * ps.mass[j]) * f;
    const ParticleKind boundary = bulk_i ? ps.kind[j] : ps.kind[i];
    if (boundary == ParticleKind::leg) {
      out.leg_force += on_boundary;
    } else {
      out.container_force += on_boundary;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (ps.kind[i] == ParticleKind::bulk) out.acceleration[i] += cfg.gravity;
  return out;
}

void drift(ParticleSystem& ps, double dt) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps.kind[i] == ParticleKind::bulk) ps.position[i] += dt * ps.velocity[i];
  }
}

Simulation::Simulation(ParticleSystem particles, MaterialParams material, SphConfig config,
                       BoundaryMotion motion)
    : ps_(std::move(particles)),
      material_(material),
      cfg_(config),
      motion_(std::move(motion)) {
  material_.validate();
  cfg_.validate();
  if (motion_) motion_(time_, ps_);
  nl_.build(ps_, cfg_.smoothing_length);
}

ParticleSystem& Simulation::mutable_particles() {
  rates_valid_ = false;
  return ps_;
}

void Simulation::set_time(double t) {
  time_ = t;
  if (motion_) motion_(time_, ps_);
  rates_valid_ = false;
}

void Simulation::initialize_density() {
  nl_.build(ps_, cfg_.smoothing_length);
  const auto rho = summation_density(ps_, nl_);
  for (std::size_t i = 0; i < ps_.size(); ++i) {
    if (ps_.kind[i] == ParticleKind::bulk) ps_.density[i] = rho[i];
  }
  rates_valid_ = false;
}

void Simulation::evaluate() {
  nl_.build(ps_, cfg_.smoothing_length);
  drho_ = continuity_rate(ps_, nl_, cfg_);
  strain_rate_ = strain_rates(ps_, nl_);
  const StressField f = stresses(ps_, strain_rate_, material_, cfg_);
  clamped_ = f.clamped;
  rates_ = momentum_rate(ps_, nl_, f.stress, cfg_);
  rates_valid_ = true;
}

void Simulation::check_state() const {
  const double vmax_allowed = 5.0 * cfg_.sound_speed;
  for (std::size_t i = 0; i < ps_.size(); ++i) {
    const auto& x = ps_.position[i];
    const auto& v = ps_.velocity[i];
    const double rho = ps_.density[i];
    if (!std::isfinite(x.x) || !std::isfinite(x.z) || !std::isfinite(v.x) || !std::isfinite(v.z) ||
        !std::isfinite(rho) || !(rho > 0.0)) {
      std::ostringstream msg;
      msg << "SPH state became invalid at step " << steps_ << ", particle " << i
          << " (density " << rho << ")";
      throw NumericalError(msg.str());
    }
    if (v.norm() > vmax_allowed) {
      std::ostringstream msg;
      msg << "SPH blow-up at step " << steps_ << ": particle " << i << " speed " << v.norm()
          << " exceeds 5 c0 = " << vmax_allowed;
      throw NumericalError(msg.str());
    }
  }
}

void Simulation::step() {
  if (!rates_valid_) evaluate();
  const double dt = cfg_.dt;
  const double half = 0.5 * dt;
  const double rho0 = material_.bulk_density;
  const std::size_t n = ps_.size();

  Vec2 momentum_before = ps_.bulk_momentum();
  Vec2 impulse = half * (rates_.leg_force + rates_.container_force);
  const Vec2 leg_force_before = rates_.leg_force;

  for (std::size_t i = 0; i < n; ++i) {
    if (ps_.kind[i] == ParticleKind::bulk) {
      ps_.velocity[i] += half * rates_.acceleration[i];
      ps_.density[i] += half * drho_[i];
    } else {
      ps_.density[i] = std::max(rho0, ps_.density[i] + half * drho_[i]);
    }
  }
  drift(ps_, dt);
  time_ += dt;
  if (motion_) motion_(time_, ps_);

  evaluate();
  for (std::size_t i = 0; i < n; ++i) {
    if (ps_.kind[i] == ParticleKind::bulk) {
      ps_.velocity[i] += half * rates_.acceleration[i];
      ps_.density[i] += half * drho_[i];
      ps_.strain[i] += dt * strain_rate_[i].deviatoric();
    } else {
      ps_.density[i] = std::max(rho0, ps_.density[i] + half * drho_[i]);
    }
  }
  ++steps_;

  impulse += half * (rates_.leg_force + rates_.container_force);
  report_.bulk_momentum_change = ps_.bulk_momentum() - momentum_before;
  // Bulk receives the negative of what it exerts on the boundary.
  report_.boundary_impulse = -impulse;
  double bulk_mass = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (ps_.kind[i] == ParticleKind::bulk) bulk_mass += ps_.mass[i];
  report_.gravity_impulse = (dt * bulk_mass) * cfg_.gravity;
  report_.leg_force = 0.5 * (leg_force_before + rates_.leg_force);
  report_.leg_pairs = 0;
  for (const auto& q : nl_.pairs) {
    if (ps_.kind[q.i] == ParticleKind::leg || ps_.kind[q.j] == ParticleKind::leg)
      ++report_.leg_pairs;
  }

  if (cfg_.shepard_interval > 0 && steps_ % cfg_.shepard_interval == 0) {
    const auto rho = shepard_filter(ps_, nl_);
    for (std::size_t i = 0; i < n; ++i) {
      if (ps_.kind[i] == ParticleKind::bulk) ps_.density[i] = rho[i];
    }
    // Densities changed: rates for the next kick must be recomputed.
    rates_valid_ = false;
  }
  check_state();
}

Diagnostics Simulation::diagnostics() const {
  Diagnostics d;
  d.step = steps_;
  d.time = time_;
  d.kinetic_energy = ps_.bulk_kinetic_energy();
  d.min_density = std::numeric_limits<double>::max();
  d.max_density = 0.0;
  for (std::size_t i = 0; i < ps_.size(); ++i) {
    if (ps_.kind[i] != ParticleKind::bulk) continue;
    d.max_speed = std::max(d.max_speed, ps_.velocity[i].norm());
    d.min_density = std::min(d.min_density, ps_.density[i]);
    d.max_density = std::max(d.max_density, ps_.density[i]);
  }
  d.clamped_pressure = clamped_;
  return d;
}

}  // namespace grom::sph
