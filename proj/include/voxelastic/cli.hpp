#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "voxelastic/scenario_io.hpp"
#include "voxelastic/voxel_world.hpp"

namespace voxelastic::cli {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kSessionEnv = "VOXELASTIC_SESSION";
inline constexpr const char* kDefaultSessionFile = ".voxelastic_session.json";

/// State carried between invocations, standing in for the in-game session.
struct Session {
  std::optional<std::string> world;
  std::optional<VoxelCoord> special_block;
  /// Only the properties the user set explicitly.
  json properties = json::object();
  std::optional<std::string> last_result;
  std::optional<std::string> last_csv;

  json to_json() const;
  static Session from_json(const json& j);
};

Session load_session(const std::filesystem::path& path);
void save_session(const Session& session, const std::filesystem::path& path);

/// --session flag, then $VOXELASTIC_SESSION, then ./.voxelastic_session.json.
std::filesystem::path session_path(const std::optional<std::string>& flag);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Returns 0 on success, 2 on usage errors, 1 otherwise.
int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace voxelastic::cli
