#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voxelastic/continuum.hpp"
#include "voxelastic/math.hpp"
#include "voxelastic/sph_kernel.hpp"
#include "voxelastic/voxel_world.hpp"

namespace voxelastic {

inline constexpr double kGravity = 9.81;  // m/s^2

struct ParticleState {
  Vec3 X = Vec3::Zero();  // rest position
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  double m = 1.0;
  bool fixed = false;
};

struct SimConfig {
  /// Time step in seconds; 0 selects default_time_step().
  double dt = 0.0;
  int num_steps = 5000;
  Vec3 gravity_force_per_block = Vec3(0.0, -900.0, 0.0);
  Vec3 load_force = Vec3(0.0, -900.0, 0.0);
  int record_every = 10;
  std::optional<VoxelCoord> special_block;
  bool self_weight_enabled = true;
  /// Particle mass in kg; 0 derives it from |gravity_force_per_block| / g.
  double mass = 0.0;
  /// Stop once kinetic energy stays below this fraction of its peak for 100
  /// consecutive steps. 0 disables early exit.
  double ke_tolerance = 0.0;

  void validate() const;
  double particle_mass() const;
};

/// 0.25 h / c with c = sqrt(E / rho), rho = m / 1 m^3, capped by the viscous
/// limit 0.1 rho (1 m)^2 / eta when damping is on, then rounded down to one
/// significant digit.
double default_time_step(const MaterialParams& mat, const KernelParams& kernel, double mass);

/// Rest-configuration kernel data for every neighbour pair, stored flat in
/// the order of Structure::neighbors. Particles whose correction tensor is
/// singular keep zero gradients, so they carry no stress of their own.
class KernelCache {
 public:
  KernelCache(const Structure& structure, const KernelParams& params);
  /// Uses caller-supplied corrections; nullopt marks an unsupported particle.
  KernelCache(const Structure& structure, const KernelParams& params,
              std::vector<std::optional<CorrectionTensor>> corrections);

  std::size_t size() const { return supported_.size(); }
  bool supported(std::size_t i) const { return supported_[i] != 0; }
  const std::optional<CorrectionTensor>& correction(std::size_t i) const { return corrections_[i]; }

  std::size_t begin(std::size_t i) const { return offsets_[i]; }
  std::size_t end(std::size_t i) const { return offsets_[i + 1]; }
  std::size_t neighbor(std::size_t slot) const { return neighbor_[slot]; }
  /// grad~_i W(R_ij) for the pair stored at `slot` of particle i.
  const Vec3& gradient(std::size_t slot) const { return gradient_[slot]; }
  /// grad~_j W(R_ji) for the same pair, read from j's side.
  const Vec3& reverse_gradient(std::size_t slot) const { return reverse_[slot]; }

  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  void build(const Structure& structure, const KernelParams& params);

  std::vector<std::optional<CorrectionTensor>> corrections_;
  std::vector<char> supported_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> neighbor_;
  std::vector<Vec3> gradient_;
  std::vector<Vec3> reverse_;
  std::vector<std::string> diagnostics_;
};

/// F_int,i = sum_j (P_i grad~_i W(R_ij) + P_j grad~_j W(R_ij)).
std::vector<Vec3> internal_forces(const KernelCache& cache, std::span<const Mat3> P);

/// Self weight (when enabled) plus attached load blocks for every free
/// particle; zero on fixed particles.
std::vector<Vec3> external_forces(const Structure& structure, const SimConfig& config);

struct StressField {
  std::vector<Mat3> F;
  std::vector<Mat3> P;
  std::vector<double> von_mises;
};

/// Deformation gradient, its rate and both stresses for every supported
/// particle. `step` only labels diagnostics.
StressField evaluate_stress(std::span<const ParticleState> states, const KernelCache& cache,
                            const MaterialParams& mat, int step);

/// One leapfrog update (half kick, drift, force evaluation, half kick)
/// followed by the fixed-particle reset. Returns the stress at the new state.
StressField step(std::vector<ParticleState>& states, const KernelCache& cache, const MaterialParams& mat,
                 std::span<const Vec3> external, double dt, int step_index);

struct Sample {
  int step = 0;
  double time = 0.0;
  Vec3 u = Vec3::Zero();
  double von_mises = 0.0;
  double kinetic_energy = 0.0;
};

struct SimulationResult {
  std::vector<VoxelCoord> coords;
  std::vector<bool> fixed;
  std::vector<Vec3> displacements;
  std::vector<double> von_mises;
  double max_von_mises = 0.0;
  /// Centre-of-mass displacement, or the special block's when one is set.
  Vec3 tracked_deflection = Vec3::Zero();
  std::optional<VoxelCoord> tracked_block;
  std::vector<Sample> time_series;
  double peak_kinetic_energy = 0.0;
  double final_kinetic_energy = 0.0;
  int steps_taken = 0;
  double dt = 0.0;
  std::vector<std::string> diagnostics;
};

class Simulation {
 public:
  Simulation(Structure structure, MaterialParams mat, KernelParams kernel, SimConfig config);

  void step();
  /// Steps until num_steps, or until the early-exit rule fires.
  void run_to_end(const std::function<void(const Simulation&)>& on_sample = {});

  int step_index() const { return step_index_; }
  double time() const { return step_index_ * dt_; }
  double dt() const { return dt_; }
  bool finished() const;

  const Structure& structure() const { return structure_; }
  const SimConfig& config() const { return config_; }
  const KernelCache& cache() const { return cache_; }
  const std::vector<ParticleState>& states() const { return states_; }
  const std::vector<double>& von_mises() const { return stress_.von_mises; }
  double max_von_mises() const;
  double kinetic_energy() const;
  Vec3 tracked_displacement() const;
  double tracked_von_mises() const;

  SimulationResult result() const;

 private:
  void record();

  Structure structure_;
  MaterialParams mat_;
  KernelParams kernel_;
  SimConfig config_;
  KernelCache cache_;
  double dt_ = 0.0;
  std::size_t tracked_ = 0;
  bool track_com_ = true;
  std::vector<ParticleState> states_;
  std::vector<Vec3> external_;
  StressField stress_;
  int step_index_ = 0;
  int quiet_steps_ = 0;
  double peak_ke_ = 0.0;
  std::vector<Sample> series_;
  std::vector<std::string> diagnostics_;
};

/// Structure discovery, state initialisation, time integration and result
/// assembly in one call.
SimulationResult run(const World& world, VoxelCoord seed, int radius, const MaterialParams& mat,
                     const KernelParams& kernel, const SimConfig& config,
                     const std::function<void(const Simulation&)>& on_sample = {});

}  // namespace voxelastic
