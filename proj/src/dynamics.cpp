#include "voxelastic/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "voxelastic/error.hpp"

namespace voxelastic {

namespace {

std::string describe(VoxelCoord c) {
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + "," + std::to_string(c.z) + ")";
}

bool finite(const Vec3& v) { return v.allFinite(); }

const Structure& validated(const Structure& structure, const MaterialParams& mat, const KernelParams& kernel,
                           const SimConfig& config) {
  kernel.validate();
  mat.validate();
  config.validate();
  return structure;
}

}  // namespace

void SimConfig::validate() const {
  if (dt < 0.0 || !std::isfinite(dt)) throw Error(ErrorCode::InvalidConfig, "dt must be positive (0 = automatic)");
  if (num_steps < 1) throw Error(ErrorCode::InvalidConfig, "num_steps must be at least 1");
  if (record_every < 1) {
    throw Error(ErrorCode::InvalidConfig, "record_every must be at least 1");
  }
  if (mass < 0.0 || !std::isfinite(mass)) throw Error(ErrorCode::InvalidConfig, "mass must be positive (0 = automatic)");
  if (mass == 0.0 && gravity_force_per_block.norm() == 0.0) {
    throw Error(ErrorCode::InvalidConfig, "mass cannot be derived from a zero block weight; set it explicitly");
  }
  if (!finite(gravity_force_per_block) || !finite(load_force)) {
    throw Error(ErrorCode::InvalidConfig, "forces must be finite");
  }
  if (ke_tolerance < 0.0) throw Error(ErrorCode::InvalidConfig, "ke_tolerance must be non-negative");
}

double SimConfig::particle_mass() const {
  return mass > 0.0 ? mass : gravity_force_per_block.norm() / kGravity;
}

double default_time_step(const MaterialParams& mat, const KernelParams& kernel, double mass) {
  const double density = mass;  // unit particle volume
  double raw = 0.25 * kernel.h / std::sqrt(mat.youngs_modulus / density);
  if (mat.damping > 0.0) raw = std::min(raw, 0.1 * density / mat.damping);
  const double decade = std::pow(10.0, std::floor(std::log10(raw)));
  // log10 can land a hair below an exact power of ten
  const double digit = std::floor(raw / decade * (1.0 + 1e-12));
  return std::max(digit, 1.0) * decade;
}

KernelCache::KernelCache(const Structure& structure, const KernelParams& params) {
  corrections_.resize(structure.size());
  for (std::size_t i = 0; i < structure.size(); ++i) {
    const auto& nbrs = structure.neighbors[i];
    if (nbrs.empty()) {
      diagnostics_.push_back("particle " + describe(structure.particles[i].coord) +
                             " has no neighbours and carries no internal force");
      continue;
    }
    std::vector<Vec3> offsets;
    offsets.reserve(nbrs.size());
    for (std::size_t j : nbrs) offsets.push_back(structure.rest_position(j) - structure.rest_position(i));
    try {
      corrections_[i] = correction_tensor(offsets, params);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularCorrection) throw;
      diagnostics_.push_back("particle " + describe(structure.particles[i].coord) +
                             " has a singular correction tensor (coplanar neighbours); its own stress is ignored");
    }
  }
  build(structure, params);
}

KernelCache::KernelCache(const Structure& structure, const KernelParams& params,
                         std::vector<std::optional<CorrectionTensor>> corrections)
    : corrections_(std::move(corrections)) {
  if (corrections_.size() != structure.size()) {
    throw Error(ErrorCode::InvalidConfig, "one correction per particle required");
  }
  build(structure, params);
}

void KernelCache::build(const Structure& structure, const KernelParams& params) {
  const std::size_t n = structure.size();
  supported_.assign(n, 0);
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    supported_[i] = corrections_[i].has_value() ? 1 : 0;
    offsets_[i + 1] = offsets_[i] + structure.neighbors[i].size();
  }
  neighbor_.resize(offsets_[n]);
  gradient_.assign(offsets_[n], Vec3::Zero());
  reverse_.assign(offsets_[n], Vec3::Zero());

  for (std::size_t i = 0; i < n; ++i) {
    std::size_t slot = offsets_[i];
    for (std::size_t j : structure.neighbors[i]) {
      neighbor_[slot] = j;
      const Vec3 R = structure.rest_position(j) - structure.rest_position(i);
      if (corrections_[i]) gradient_[slot] = corrected_gradient(R, *corrections_[i], params);
      // grad~_j W(R_ij) = A_j^-T grad W(R_ij); the odd gradient makes this the
      // negative of what j stores for its own offset R_ji.
      if (corrections_[j]) reverse_[slot] = corrected_gradient(R, *corrections_[j], params);
      ++slot;
    }
  }
}

std::vector<Vec3> internal_forces(const KernelCache& cache, std::span<const Mat3> P) {
  std::vector<Vec3> forces(cache.size(), Vec3::Zero());
  for (std::size_t i = 0; i < cache.size(); ++i) {
    Vec3 f = Vec3::Zero();
    for (std::size_t s = cache.begin(i); s < cache.end(i); ++s) {
      f += P[i] * cache.gradient(s) + P[cache.neighbor(s)] * cache.reverse_gradient(s);
    }
    forces[i] = f;
  }
  return forces;
}

std::vector<Vec3> external_forces(const Structure& structure, const SimConfig& config) {
  std::vector<Vec3> forces(structure.size(), Vec3::Zero());
  for (std::size_t i = 0; i < structure.size(); ++i) {
    if (structure.particles[i].fixed) continue;
    if (config.self_weight_enabled) forces[i] += config.gravity_force_per_block;
    forces[i] += static_cast<double>(structure.load_count[i]) * config.load_force;
  }
  return forces;
}

StressField evaluate_stress(std::span<const ParticleState> states, const KernelCache& cache,
                            const MaterialParams& mat, int step) {
  const std::size_t n = states.size();
  StressField out;
  out.F.assign(n, Mat3::Identity());
  out.P.assign(n, Mat3::Zero());
  out.von_mises.assign(n, 0.0);

  const double lambda = mat.lambda();
  const double mu = mat.mu();
  for (std::size_t i = 0; i < n; ++i) {
    if (!cache.supported(i)) continue;
    const Vec3 ui = states[i].x - states[i].X;
    const Vec3& vi = states[i].v;
    Mat3 F = Mat3::Identity();
    Mat3 F_dot = Mat3::Zero();
    for (std::size_t s = cache.begin(i); s < cache.end(i); ++s) {
      const ParticleState& pj = states[cache.neighbor(s)];
      const Vec3& g = cache.gradient(s);
      F += ((pj.x - pj.X) - ui) * g.transpose();
      F_dot += (pj.v - vi) * g.transpose();
    }
    const double J = F.determinant();
    if (!(J > 0.0)) {
      throw Error(ErrorCode::InvertedElement, "particle " + std::to_string(i) + " at step " +
                                                  std::to_string(step) + " has det F = " + std::to_string(J));
    }
    const Mat3 E = green_lagrange(F);
    const Mat3 S = lambda * E.trace() * Mat3::Identity() + 2.0 * mu * E;
    out.F[i] = F;
    out.P[i] = first_pk(F, F_dot, S, mat);
    out.von_mises[i] = von_mises(F, S);
  }
  return out;
}

StressField step(std::vector<ParticleState>& states, const KernelCache& cache, const MaterialParams& mat,
                 std::span<const Vec3> external, double dt, int step_index) {
  const double half = 0.5 * dt;
  for (auto& p : states) {
    if (p.fixed) continue;
    p.v += half * p.a;
    p.x += dt * p.v;
  }

  StressField stress = evaluate_stress(states, cache, mat, step_index);
  const std::vector<Vec3> internal = internal_forces(cache, stress.P);

  for (std::size_t i = 0; i < states.size(); ++i) {
    ParticleState& p = states[i];
    if (p.fixed) {
      p.x = p.X;
      p.v.setZero();
      p.a.setZero();
      continue;
    }
    p.a = (internal[i] + external[i]) / p.m;
    p.v += half * p.a;
    if (!finite(p.x) || !finite(p.v) || !finite(p.a)) {
      throw Error(ErrorCode::NonFinite,
                  "particle " + std::to_string(i) + " became non-finite at step " + std::to_string(step_index));
    }
  }
  return stress;
}

Simulation::Simulation(Structure structure, MaterialParams mat, KernelParams kernel, SimConfig config)
    : structure_(std::move(structure)),
      mat_(mat),
      kernel_(kernel),
      config_(std::move(config)),
      cache_(validated(structure_, mat_, kernel_, config_), kernel_) {
  if (structure_.size() == 0) throw Error(ErrorCode::EmptyStructure, "structure has no particles");

  const double m = config_.particle_mass();
  dt_ = config_.dt > 0.0 ? config_.dt : default_time_step(mat_, kernel_, m);
  diagnostics_ = cache_.diagnostics();

  if (config_.special_block) {
    tracked_ = structure_.index_of(*config_.special_block);
    if (tracked_ >= structure_.size()) {
      throw Error(ErrorCode::SpecialBlockNotFound,
                  "special block " + describe(*config_.special_block) + " is not part of the structure");
    }
    track_com_ = false;
  }

  states_.resize(structure_.size());
  for (std::size_t i = 0; i < structure_.size(); ++i) {
    auto& s = states_[i];
    s.X = structure_.rest_position(i);
    s.x = s.X;
    s.m = m;
    s.fixed = structure_.particles[i].fixed;
  }
  external_ = external_forces(structure_, config_);

  // Bootstrap a_0 from the forces in the rest configuration.
  stress_ = evaluate_stress(states_, cache_, mat_, 0);
  const auto internal = internal_forces(cache_, stress_.P);
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (!states_[i].fixed) states_[i].a = (internal[i] + external_[i]) / m;
  }
  record();
}

bool Simulation::finished() const { return step_index_ >= config_.num_steps || quiet_steps_ >= 100; }

void Simulation::step() {
  stress_ = voxelastic::step(states_, cache_, mat_, external_, dt_, step_index_ + 1);
  ++step_index_;

  const double ke = kinetic_energy();
  peak_ke_ = std::max(peak_ke_, ke);
  if (config_.ke_tolerance > 0.0 && peak_ke_ > 0.0 && ke < config_.ke_tolerance * peak_ke_) {
    ++quiet_steps_;
  } else {
    quiet_steps_ = 0;
  }
  record();
}

void Simulation::run_to_end(const std::function<void(const Simulation&)>& on_sample) {
  if (on_sample && step_index_ == 0) on_sample(*this);
  while (!finished()) {
    step();
    if (on_sample && step_index_ % config_.record_every == 0) on_sample(*this);
  }
}

double Simulation::max_von_mises() const {
  double m = 0.0;
  for (double v : stress_.von_mises) m = std::max(m, v);
  return m;
}

double Simulation::kinetic_energy() const {
  double ke = 0.0;
  for (const auto& p : states_) ke += 0.5 * p.m * p.v.squaredNorm();
  return ke;
}

Vec3 Simulation::tracked_displacement() const {
  if (!track_com_) return states_[tracked_].x - states_[tracked_].X;
  Vec3 sum = Vec3::Zero();
  for (const auto& p : states_) sum += p.x - p.X;
  return sum / static_cast<double>(states_.size());
}

double Simulation::tracked_von_mises() const {
  return track_com_ ? max_von_mises() : stress_.von_mises[tracked_];
}

void Simulation::record() {
  if (step_index_ % config_.record_every != 0) return;
  series_.push_back({step_index_, time(), tracked_displacement(), tracked_von_mises(), kinetic_energy()});
}

SimulationResult Simulation::result() const {
  SimulationResult r;
  const std::size_t n = states_.size();
  r.coords.reserve(n);
  r.fixed.reserve(n);
  r.displacements.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.coords.push_back(structure_.particles[i].coord);
    r.fixed.push_back(states_[i].fixed);
    r.displacements.push_back(states_[i].x - states_[i].X);
  }
  r.von_mises = stress_.von_mises;
  r.max_von_mises = max_von_mises();
  r.tracked_deflection = tracked_displacement();
  if (!track_com_) r.tracked_block = structure_.particles[tracked_].coord;
  r.time_series = series_;
  r.peak_kinetic_energy = peak_ke_;
  r.final_kinetic_energy = kinetic_energy();
  r.steps_taken = step_index_;
  r.dt = dt_;
  r.diagnostics = diagnostics_;
  return r;
}

SimulationResult run(const World& world, VoxelCoord seed, int radius, const MaterialParams& mat,
                     const KernelParams& kernel, const SimConfig& config,
                     const std::function<void(const Simulation&)>& on_sample) {
  kernel.validate();
  Structure structure = discover_structure(world, seed, radius, kernel.h);
  Simulation sim(std::move(structure), mat, kernel, config);
  sim.run_to_end(on_sample);
  return sim.result();
}

}  // namespace voxelastic
