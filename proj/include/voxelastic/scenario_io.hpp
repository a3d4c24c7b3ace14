#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "voxelastic/continuum.hpp"
#include "voxelastic/dynamics.hpp"
#include "voxelastic/sph_kernel.hpp"
#include "voxelastic/voxel_world.hpp"

namespace voxelastic {

using nlohmann::json;

struct PropertySpec {
  std::string_view name;
  std::string_view unit;
  double default_value;
  double min;
  double max;
  bool min_inclusive;
  bool max_inclusive;
  bool integral;
  std::string_view description;
};

/// Named simulation parameters with units, defaults and validation ranges.
/// Iteration order is the fixed declaration order of the table.
class PropertyRegistry {
 public:
  PropertyRegistry();

  static const std::vector<PropertySpec>& specs();
  static const PropertySpec& spec(std::string_view name);

  double get(std::string_view name) const;
  /// Throws UnknownProperty or OutOfRange; the registry is unchanged on error.
  void set(std::string_view name, double value);
  void reset(std::string_view name);
  bool is_default(std::string_view name) const;

  /// {"name": value, ...} for every property.
  json to_json() const;
  /// Applies every key of `j` on top of the current values.
  void apply(const json& j);
  static PropertyRegistry from_json(const json& j);

  MaterialParams material() const;
  KernelParams kernel() const;
  SimConfig sim_config(std::optional<VoxelCoord> special_block = std::nullopt) const;
  double ult_stress() const { return get("ult_stress"); }
  double effective_dt() const;

  bool operator==(const PropertyRegistry&) const = default;

 private:
  std::map<std::string, double, std::less<>> values_;
};

enum class HeatMode { Stress, Position };

std::string_view to_string(HeatMode mode);
/// Throws InvalidConfig for anything other than "stress" or "position".
HeatMode heat_mode_from_string(std::string_view name);

inline constexpr int kHeatBins = 16;

/// White through yellow and orange to dark red, one entry per bin. The editor
/// fetches the same table from the service.
extern const std::array<std::string_view, kHeatBins> kHeatPalette;

struct HeatMap {
  HeatMode mode = HeatMode::Stress;
  std::vector<int> bins;
  double scale_max = 0.0;
  std::vector<bool> exceeds_ultimate;
};

/// min(15, floor(16 value / scale_max)); 0 when scale_max is 0.
int heat_bin(double value, double scale_max);
HeatMap colorize(const SimulationResult& result, HeatMode mode, double ult_stress);
/// Bins for an arbitrary per-particle field, normalised by its own maximum.
std::vector<int> bin_field(const std::vector<double>& values);

struct RunSpec {
  std::string name;
  HeatMode mode = HeatMode::Stress;
  VoxelCoord seed;
  int radius = 1;
  std::optional<VoxelCoord> special_block;
};

/// A world plus the property overrides and run presets that make it
/// self-contained.
struct Scenario {
  std::string name;
  std::string description;
  World world;
  json property_overrides = json::object();
  std::vector<RunSpec> runs;

  PropertyRegistry properties() const;
  const RunSpec& run(std::string_view name) const;
};

json world_to_json(const World& world);
World world_from_json(const json& j);
/// Parses and validates a world document; rethrows JSON errors as ParseError
/// with the offending line or field.
World parse_world(std::string_view text);
/// Canonical serialisation: sorted keys, blocks in coordinate order.
std::string canonical_world(const World& world);

json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const json& j);
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

json result_to_json(const SimulationResult& result, const HeatMap& heat, double ult_stress);
void save_result(const SimulationResult& result, const HeatMap& heat, double ult_stress,
                 const std::filesystem::path& path);

/// step,time,ux,uy,uz,von_mises with 9 significant digits and LF endings.
void write_time_series_csv(const SimulationResult& result, std::ostream& out);
std::string time_series_csv(const SimulationResult& result);

/// Everything a front end reports after a run.
struct RunOutcome {
  SimulationResult result;
  HeatMap heat;
  double ult_stress = 0.0;
  json document;
  std::string csv;
};

/// Discovers the structure and builds the solver. All precondition failures
/// (no structure, bad properties, unknown special block) surface here, before
/// any time stepping.
Simulation prepare_run(const World& world, const PropertyRegistry& properties, const RunSpec& spec);
RunOutcome finish_run(const Simulation& sim, const PropertyRegistry& properties, HeatMode mode);
/// prepare_run, run_to_end and finish_run in sequence.
RunOutcome execute_run(const World& world, const PropertyRegistry& properties, const RunSpec& spec,
                       const std::function<void(const Simulation&)>& on_sample = {});

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace voxelastic
