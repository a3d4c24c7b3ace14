#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "voxelastic/math.hpp"

namespace voxelastic {

/// Integer lattice cell. One unit is one meter; the particle sits at the cell
/// coordinate itself, so rest positions are the integer triple as doubles.
struct VoxelCoord {
  int x = 0;
  int y = 0;
  int z = 0;

  auto operator<=>(const VoxelCoord&) const = default;

  Vec3 position() const { return Vec3(x, y, z); }
};

enum class BlockKind { Structural, Load, FixedAnchor };

std::string_view to_string(BlockKind kind);
/// Accepts the world-file spellings "structural", "load" and "fixed".
BlockKind block_kind_from_string(std::string_view name);

class World {
 public:
  explicit World(int ground_level = 0) : ground_level_(ground_level) {}

  int ground_level() const { return ground_level_; }
  const std::map<VoxelCoord, BlockKind>& blocks() const { return blocks_; }
  bool empty() const { return blocks_.empty(); }
  std::size_t size() const { return blocks_.size(); }

  /// Throws InvalidWorld for duplicates or blocks below ground level.
  void add(VoxelCoord coord, BlockKind kind);
  /// Overwrites whatever occupies the cell. Still rejects below-ground cells.
  void set(VoxelCoord coord, BlockKind kind);
  bool erase(VoxelCoord coord);
  const BlockKind* find(VoxelCoord coord) const;

  bool operator==(const World&) const = default;

 private:
  int ground_level_;
  std::map<VoxelCoord, BlockKind> blocks_;
};

struct Particle {
  VoxelCoord coord;
  BlockKind kind = BlockKind::Structural;
  bool fixed = false;
};

struct Structure {
  std::vector<Particle> particles;
  /// Ascending indices j with 0 < |X_j - X_i| < h.
  std::vector<std::vector<std::size_t>> neighbors;
  /// Number of load blocks carried by each particle. The force per load block
  /// comes from the simulation config.
  std::vector<int> load_count;
  double h = 2.0;

  std::size_t size() const { return particles.size(); }
  Vec3 rest_position(std::size_t i) const { return particles[i].coord.position(); }
  std::vector<Vec3> rest_positions() const;
  /// Index of the particle at `coord`, or size() when absent.
  std::size_t index_of(VoxelCoord coord) const;
};

/// Cell-hashed fixed-radius search. Returns, for each point, the ascending
/// indices of every other point strictly closer than h.
std::vector<std::vector<std::size_t>> neighbor_lists(std::span<const Vec3> positions, double h);

/// Flood-fills the 6-connected component of Structural/FixedAnchor blocks
/// reachable from the Structural block nearest to `seed`, limited to the
/// Chebyshev box of `radius` around the seed, then attaches load blocks and
/// assigns fixed flags.
Structure discover_structure(const World& world, VoxelCoord seed, int radius, double h = 2.0);

}  // namespace voxelastic
