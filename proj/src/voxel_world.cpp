#include "voxelastic/voxel_world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <string>
#include <unordered_map>

#include "voxelastic/error.hpp"

namespace voxelastic {

namespace {

constexpr std::array<VoxelCoord, 6> kFaceOffsets{{
    {-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1},
}};

VoxelCoord operator+(VoxelCoord a, VoxelCoord b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }

int chebyshev(VoxelCoord a, VoxelCoord b) {
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

std::string describe(VoxelCoord c) {
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + "," + std::to_string(c.z) + ")";
}

bool is_solid(BlockKind kind) { return kind == BlockKind::Structural || kind == BlockKind::FixedAnchor; }

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    // Large primes from the classic spatial-hashing scheme.
    return static_cast<std::size_t>((k.x * 73856093) ^ (k.y * 19349663) ^ (k.z * 83492791));
  }
};

CellKey cell_of(const Vec3& p, double cell) {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell)),
          static_cast<std::int64_t>(std::floor(p.y() / cell)),
          static_cast<std::int64_t>(std::floor(p.z() / cell))};
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoStructureFound: return "NoStructureFound";
    case ErrorCode::EmptyStructure: return "EmptyStructure";
    case ErrorCode::DanglingLoad: return "DanglingLoad";
    case ErrorCode::InvalidWorld: return "InvalidWorld";
    case ErrorCode::DegenerateOffset: return "DegenerateOffset";
    case ErrorCode::SingularCorrection: return "SingularCorrection";
    case ErrorCode::InvertedElement: return "InvertedElement";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SpecialBlockNotFound: return "SpecialBlockNotFound";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnknownProperty: return "UnknownProperty";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Cancelled: return "Cancelled";
  }
  return "Unknown";
}

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::Structural: return "structural";
    case BlockKind::Load: return "load";
    case BlockKind::FixedAnchor: return "fixed";
  }
  return "structural";
}

BlockKind block_kind_from_string(std::string_view name) {
  if (name == "structural") return BlockKind::Structural;
  if (name == "load") return BlockKind::Load;
  if (name == "fixed") return BlockKind::FixedAnchor;
  throw Error(ErrorCode::InvalidWorld, "unknown block kind '" + std::string(name) + "'");
}

void World::add(VoxelCoord coord, BlockKind kind) {
  if (blocks_.contains(coord)) {
    throw Error(ErrorCode::InvalidWorld, "duplicate block at " + describe(coord));
  }
  set(coord, kind);
}

void World::set(VoxelCoord coord, BlockKind kind) {
  if (coord.y < ground_level_) {
    throw Error(ErrorCode::InvalidWorld, "block at " + describe(coord) + " is below ground level " +
                                             std::to_string(ground_level_));
  }
  blocks_[coord] = kind;
}

bool World::erase(VoxelCoord coord) { return blocks_.erase(coord) > 0; }

const BlockKind* World::find(VoxelCoord coord) const {
  auto it = blocks_.find(coord);
  return it == blocks_.end() ? nullptr : &it->second;
}

std::vector<Vec3> Structure::rest_positions() const {
  std::vector<Vec3> out;
  out.reserve(particles.size());
  for (const auto& p : particles) out.push_back(p.coord.position());
  return out;
}

std::size_t Structure::index_of(VoxelCoord coord) const {
  // particles are sorted by coordinate
  auto it = std::lower_bound(particles.begin(), particles.end(), coord,
                             [](const Particle& p, VoxelCoord c) { return p.coord < c; });
  if (it != particles.end() && it->coord == coord) return static_cast<std::size_t>(it - particles.begin());
  return particles.size();
}

std::vector<std::vector<std::size_t>> neighbor_lists(std::span<const Vec3> positions, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidConfig, "neighbor cutoff h must be positive");

  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> grid;
  grid.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) grid[cell_of(positions[i], h)].push_back(i);

  const double h2 = h * h;
  std::vector<std::vector<std::size_t>> out(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const CellKey c = cell_of(positions[i], h);
    auto& list = out[i];
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = grid.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == grid.end()) continue;
          for (std::size_t j : it->second) {
            if (j == i) continue;
            if ((positions[j] - positions[i]).squaredNorm() < h2) list.push_back(j);
          }
        }
      }
    }
    std::sort(list.begin(), list.end());
  }
  return out;
}

Structure discover_structure(const World& world, VoxelCoord seed, int radius, double h) {
  if (radius < 0) throw Error(ErrorCode::InvalidConfig, "radius must be non-negative");
  if (world.empty()) throw Error(ErrorCode::EmptyStructure, "world has no blocks");

  auto in_range = [&](VoxelCoord c) { return chebyshev(c, seed) <= radius; };

  // Nearest Structural block; ties go to the smallest coordinate because the
  // map iterates in order and only a strictly closer block replaces the pick.
  const VoxelCoord* start = nullptr;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (const auto& [coord, kind] : world.blocks()) {
    if (kind != BlockKind::Structural || !in_range(coord)) continue;
    const std::int64_t dx = coord.x - seed.x, dy = coord.y - seed.y, dz = coord.z - seed.z;
    const std::int64_t d2 = dx * dx + dy * dy + dz * dz;
    if (d2 < best) {
      best = d2;
      start = &coord;
    }
  }
  if (start == nullptr) {
    throw Error(ErrorCode::NoStructureFound,
                "no structural block within radius " + std::to_string(radius) + " of " + describe(seed));
  }

  std::set<VoxelCoord> members;
  std::deque<VoxelCoord> frontier{*start};
  members.insert(*start);
  while (!frontier.empty()) {
    const VoxelCoord c = frontier.front();
    frontier.pop_front();
    for (const auto& off : kFaceOffsets) {
      const VoxelCoord n = c + off;
      if (!in_range(n) || members.contains(n)) continue;
      const BlockKind* kind = world.find(n);
      if (kind == nullptr || !is_solid(*kind)) continue;
      members.insert(n);
      frontier.push_back(n);
    }
  }

  Structure s;
  s.h = h;
  s.particles.reserve(members.size());
  for (const VoxelCoord& c : members) {
    const BlockKind kind = *world.find(c);
    const bool fixed = kind == BlockKind::FixedAnchor || c.y == world.ground_level();
    s.particles.push_back({c, kind, fixed});
  }
  s.load_count.assign(s.particles.size(), 0);

  for (const auto& [coord, kind] : world.blocks()) {
    if (kind != BlockKind::Load || !in_range(coord)) continue;

    // A stack of load blocks bears on whatever sits under its lowest member.
    VoxelCoord base = coord;
    while (true) {
      const BlockKind* below = world.find({base.x, base.y - 1, base.z});
      if (below == nullptr || *below != BlockKind::Load) break;
      base.y -= 1;
    }
    const VoxelCoord under{base.x, base.y - 1, base.z};
    const BlockKind* under_kind = world.find(under);
    if (under_kind != nullptr && is_solid(*under_kind)) {
      const std::size_t idx = s.index_of(under);
      if (idx < s.size()) ++s.load_count[idx];
      continue;  // supported, possibly by a different structure
    }

    std::size_t carrier = s.size();
    bool supported_elsewhere = false;
    for (const auto& off : kFaceOffsets) {
      const VoxelCoord n = coord + off;
      const BlockKind* nk = world.find(n);
      if (nk == nullptr || !is_solid(*nk)) continue;
      const std::size_t idx = s.index_of(n);
      if (idx < s.size()) {
        carrier = std::min(carrier, idx);
      } else {
        supported_elsewhere = true;
      }
    }
    if (carrier < s.size()) {
      ++s.load_count[carrier];
    } else if (!supported_elsewhere) {
      throw Error(ErrorCode::DanglingLoad, "load block at " + describe(coord) + " rests on no structural block");
    }
  }

  const auto positions = s.rest_positions();
  s.neighbors = neighbor_lists(positions, h);
  return s;
}

}  // namespace voxelastic
