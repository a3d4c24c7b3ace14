#include "voxelastic/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "voxelastic/error.hpp"

namespace voxelastic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

json coord_json(VoxelCoord c) { return json::array({c.x, c.y, c.z}); }
json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

int int_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw Error(ErrorCode::ParseError, where + "." + key + ": missing");
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw Error(ErrorCode::ParseError, where + "." + key + ": expected an integer");
  return v.get<int>();
}

VoxelCoord coord_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3 || !std::all_of(j.begin(), j.end(), [](const json& e) {
        return e.is_number_integer();
      })) {
    throw Error(ErrorCode::ParseError, where + ": expected [x, y, z] integers");
  }
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

}  // namespace

// ---------------------------------------------------------------------------
// Properties

const std::vector<PropertySpec>& PropertyRegistry::specs() {
  static const std::vector<PropertySpec> table{
      {"youngs_modulus", "Pa", 1e9, 0.0, kInf, false, false, false, "Young's modulus E"},
      {"poisson", "", 0.4, -1.0, 0.5, false, false, false, "Poisson ratio nu"},
      {"eta", "Pa*s", 1e6, 0.0, kInf, true, false, false, "viscous damping"},
      {"mass", "kg", 0.0, 0.0, kInf, true, false, false, "particle mass (0 = |block_weight| / 9.81)"},
      {"h", "m", 2.0, 1.0, 100.0, false, true, false, "kernel support radius"},
      {"dt", "s", 0.0, 0.0, 1.0, true, true, false, "time step (0 = automatic)"},
      {"num_steps", "", 5000, 1.0, 1e8, true, true, true, "number of time steps"},
      {"record_every", "", 10, 1.0, 1e8, true, true, true, "time-series sampling stride"},
      {"ult_stress", "Pa", 15000.0, 0.0, kInf, false, false, false, "ultimate stress for pass/fail"},
      {"block_weight", "N", -900.0, -1e12, 0.0, true, true, false, "vertical weight of one block"},
      {"load_weight", "N", -900.0, -1e12, 1e12, true, true, false, "vertical force of one load block"},
      {"gravity_toggle", "", 1.0, 0.0, 1.0, true, true, true, "self weight on (1) or off (0)"},
      {"ke_tolerance", "", 0.0, 0.0, 1.0, true, false, false,
       "early exit when kinetic energy < tol * peak (0 = off)"},
      {"viscous_literal_f_inv", "", 0.0, 0.0, 1.0, true, true, true,
       "pull viscous stress back with F^-1 (1) instead of F^-T (0)"},
  };
  return table;
}

const PropertySpec& PropertyRegistry::spec(std::string_view name) {
  for (const auto& s : specs()) {
    if (s.name == name) return s;
  }
  throw Error(ErrorCode::UnknownProperty, "unknown property '" + std::string(name) + "'");
}

PropertyRegistry::PropertyRegistry() {
  for (const auto& s : specs()) values_.emplace(std::string(s.name), s.default_value);
}

double PropertyRegistry::get(std::string_view name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw Error(ErrorCode::UnknownProperty, "unknown property '" + std::string(name) + "'");
  return it->second;
}

void PropertyRegistry::set(std::string_view name, double value) {
  const PropertySpec& s = spec(name);
  const bool low_ok = s.min_inclusive ? value >= s.min : value > s.min;
  const bool high_ok = s.max_inclusive ? value <= s.max : value < s.max;
  if (!std::isfinite(value) || !low_ok || !high_ok) {
    throw Error(ErrorCode::OutOfRange, std::string(name) + " = " + fmt_double(value) + " outside " +
                                           (s.min_inclusive ? "[" : "(") + fmt_double(s.min) + ", " +
                                           fmt_double(s.max) + (s.max_inclusive ? "]" : ")"));
  }
  if (s.integral && value != std::floor(value)) {
    throw Error(ErrorCode::OutOfRange, std::string(name) + " must be an integer");
  }
  values_.find(name)->second = value;
}

void PropertyRegistry::reset(std::string_view name) { values_.find(spec(name).name)->second = spec(name).default_value; }

bool PropertyRegistry::is_default(std::string_view name) const { return get(name) == spec(name).default_value; }

json PropertyRegistry::to_json() const {
  json j = json::object();
  for (const auto& s : specs()) j[std::string(s.name)] = get(s.name);
  return j;
}

void PropertyRegistry::apply(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "properties: expected an object");
  PropertyRegistry next = *this;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw Error(ErrorCode::ParseError, "properties." + key + ": expected a number");
    next.set(key, value.get<double>());
  }
  *this = std::move(next);
}

PropertyRegistry PropertyRegistry::from_json(const json& j) {
  PropertyRegistry r;
  r.apply(j);
  return r;
}

MaterialParams PropertyRegistry::material() const {
  MaterialParams m;
  m.youngs_modulus = get("youngs_modulus");
  m.poisson_ratio = get("poisson");
  m.damping = get("eta");
  m.viscous_literal_f_inv = get("viscous_literal_f_inv") != 0.0;
  return m;
}

KernelParams PropertyRegistry::kernel() const { return KernelParams{get("h")}; }

SimConfig PropertyRegistry::sim_config(std::optional<VoxelCoord> special_block) const {
  SimConfig c;
  c.dt = get("dt");
  c.num_steps = static_cast<int>(get("num_steps"));
  c.record_every = static_cast<int>(get("record_every"));
  c.gravity_force_per_block = Vec3(0.0, get("block_weight"), 0.0);
  c.load_force = Vec3(0.0, get("load_weight"), 0.0);
  c.self_weight_enabled = get("gravity_toggle") != 0.0;
  c.mass = get("mass");
  c.ke_tolerance = get("ke_tolerance");
  c.special_block = special_block;
  return c;
}

double PropertyRegistry::effective_dt() const {
  const SimConfig c = sim_config();
  if (c.dt > 0.0) return c.dt;
  return default_time_step(material(), kernel(), c.particle_mass());
}

// ---------------------------------------------------------------------------
// Heat maps

const std::array<std::string_view, kHeatBins> kHeatPalette{
    "#ffffff", "#ffffcc", "#ffff99", "#ffff66", "#ffff33", "#ffff00", "#ffe600", "#ffcc00",
    "#ffb300", "#ff9900", "#ff8000", "#ff6600", "#ff4d00", "#ff3300", "#e60000", "#b30000",
};

std::string_view to_string(HeatMode mode) { return mode == HeatMode::Stress ? "stress" : "position"; }

HeatMode heat_mode_from_string(std::string_view name) {
  if (name == "stress") return HeatMode::Stress;
  if (name == "position") return HeatMode::Position;
  throw Error(ErrorCode::InvalidConfig, "mode must be 'stress' or 'position', got '" + std::string(name) + "'");
}

int heat_bin(double value, double scale_max) {
  if (!(scale_max > 0.0) || !(value > 0.0)) return 0;
  const double b = std::floor(kHeatBins * value / scale_max);
  return static_cast<int>(std::min<double>(kHeatBins - 1, b));
}

std::vector<int> bin_field(const std::vector<double>& values) {
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, v);
  std::vector<int> bins;
  bins.reserve(values.size());
  for (double v : values) bins.push_back(heat_bin(v, scale));
  return bins;
}

HeatMap colorize(const SimulationResult& result, HeatMode mode, double ult_stress) {
  HeatMap map;
  map.mode = mode;
  std::vector<double> field;
  field.reserve(result.von_mises.size());
  if (mode == HeatMode::Stress) {
    field = result.von_mises;
  } else {
    for (const Vec3& u : result.displacements) field.push_back(u.norm());
  }
  for (double v : field) map.scale_max = std::max(map.scale_max, v);
  map.bins = bin_field(field);
  map.exceeds_ultimate.reserve(result.von_mises.size());
  for (double vm : result.von_mises) map.exceeds_ultimate.push_back(vm > ult_stress);
  return map;
}

// ---------------------------------------------------------------------------
// Worlds and scenarios

json world_to_json(const World& world) {
  json blocks = json::array();
  for (const auto& [c, kind] : world.blocks()) {
    blocks.push_back({{"x", c.x}, {"y", c.y}, {"z", c.z}, {"kind", std::string(to_string(kind))}});
  }
  return {{"ground_level", world.ground_level()}, {"blocks", std::move(blocks)}};
}

World world_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "world: expected a JSON object");
  World world(int_field(j, "ground_level", "world"));
  if (!j.contains("blocks") || !j.at("blocks").is_array()) {
    throw Error(ErrorCode::ParseError, "world.blocks: expected an array");
  }
  const json& blocks = j.at("blocks");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::string where = "blocks[" + std::to_string(i) + "]";
    const json& b = blocks[i];
    if (!b.is_object()) throw Error(ErrorCode::ParseError, where + ": expected an object");
    const VoxelCoord c{int_field(b, "x", where), int_field(b, "y", where), int_field(b, "z", where)};
    if (!b.contains("kind") || !b.at("kind").is_string()) {
      throw Error(ErrorCode::ParseError, where + ".kind: expected a string");
    }
    try {
      world.add(c, block_kind_from_string(b.at("kind").get<std::string>()));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.what());
    }
  }
  return world;
}

World parse_world(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return world_from_json(j);
}

std::string canonical_world(const World& world) { return world_to_json(world).dump(); }

PropertyRegistry Scenario::properties() const { return PropertyRegistry::from_json(property_overrides); }

const RunSpec& Scenario::run(std::string_view run_name) const {
  for (const auto& r : runs) {
    if (r.name == run_name) return r;
  }
  throw Error(ErrorCode::InvalidConfig, "scenario '" + name + "' has no run named '" + std::string(run_name) + "'");
}

json scenario_to_json(const Scenario& scenario) {
  json j = world_to_json(scenario.world);
  j["name"] = scenario.name;
  j["description"] = scenario.description;
  j["properties"] = scenario.property_overrides;
  json runs = json::array();
  for (const auto& r : scenario.runs) {
    json rj{{"name", r.name},
            {"mode", std::string(to_string(r.mode))},
            {"seed", coord_json(r.seed)},
            {"radius", r.radius}};
    if (r.special_block) rj["special_block"] = coord_json(*r.special_block);
    runs.push_back(std::move(rj));
  }
  j["runs"] = std::move(runs);
  return j;
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.world = world_from_json(j);
  s.name = j.value("name", "");
  s.description = j.value("description", "");
  if (j.contains("properties")) {
    // validates every override up front
    (void)PropertyRegistry::from_json(j.at("properties"));
    s.property_overrides = j.at("properties");
  }
  if (j.contains("runs")) {
    const json& runs = j.at("runs");
    if (!runs.is_array()) throw Error(ErrorCode::ParseError, "runs: expected an array");
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const std::string where = "runs[" + std::to_string(i) + "]";
      const json& rj = runs[i];
      if (!rj.is_object()) throw Error(ErrorCode::ParseError, where + ": expected an object");
      RunSpec r;
      r.name = rj.value("name", "run" + std::to_string(i));
      try {
        r.mode = heat_mode_from_string(rj.value("mode", "stress"));
      } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, where + ".mode: " + e.what());
      }
      if (!rj.contains("seed")) throw Error(ErrorCode::ParseError, where + ".seed: missing");
      r.seed = coord_from_json(rj.at("seed"), where + ".seed");
      r.radius = int_field(rj, "radius", where);
      if (r.radius < 1) throw Error(ErrorCode::ParseError, where + ".radius: must be >= 1");
      if (rj.contains("special_block") && !rj.at("special_block").is_null()) {
        r.special_block = coord_from_json(rj.at("special_block"), where + ".special_block");
      }
      s.runs.push_back(std::move(r));
    }
  }
  return s;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

Scenario load_scenario(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  try {
    Scenario s = scenario_from_json(j);
    if (s.name.empty()) s.name = path.stem().string();
    return s;
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  write_text_file(path, scenario_to_json(scenario).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Results

json result_to_json(const SimulationResult& result, const HeatMap& heat, double ult_stress) {
  json coords = json::array(), disp = json::array(), fixed = json::array();
  for (std::size_t i = 0; i < result.coords.size(); ++i) {
    coords.push_back(coord_json(result.coords[i]));
    disp.push_back(vec_json(result.displacements[i]));
    fixed.push_back(static_cast<bool>(result.fixed[i]));
  }
  json exceeds = json::array();
  for (bool e : heat.exceeds_ultimate) exceeds.push_back(e);
  return {
      {"coords", std::move(coords)},
      {"fixed", std::move(fixed)},
      {"displacements", std::move(disp)},
      {"von_mises", result.von_mises},
      {"bins", heat.bins},
      {"mode", std::string(to_string(heat.mode))},
      {"scale_max", heat.scale_max},
      {"max_von_mises", result.max_von_mises},
      {"ult_stress", ult_stress},
      {"exceeds_ultimate", std::move(exceeds)},
      {"tracked_deflection", vec_json(result.tracked_deflection)},
      {"tracked_block", result.tracked_block ? coord_json(*result.tracked_block) : json(nullptr)},
      {"dt", result.dt},
      {"steps", result.steps_taken},
      {"peak_kinetic_energy", result.peak_kinetic_energy},
      {"final_kinetic_energy", result.final_kinetic_energy},
      {"diagnostics", result.diagnostics},
  };
}

void save_result(const SimulationResult& result, const HeatMap& heat, double ult_stress,
                 const std::filesystem::path& path) {
  write_text_file(path, result_to_json(result, heat, ult_stress).dump(2) + "\n");
}

void write_time_series_csv(const SimulationResult& result, std::ostream& out) {
  out << "step,time,ux,uy,uz,von_mises\n";
  for (const Sample& s : result.time_series) {
    out << s.step << ',' << fmt_double(s.time) << ',' << fmt_double(s.u.x()) << ',' << fmt_double(s.u.y()) << ','
        << fmt_double(s.u.z()) << ',' << fmt_double(s.von_mises) << '\n';
  }
}

std::string time_series_csv(const SimulationResult& result) {
  std::ostringstream out;
  write_time_series_csv(result, out);
  return out.str();
}

// ---------------------------------------------------------------------------
// Shared run pipeline

Simulation prepare_run(const World& world, const PropertyRegistry& properties, const RunSpec& spec) {
  if (spec.radius < 1) throw Error(ErrorCode::InvalidConfig, "radius must be >= 1");
  const KernelParams kernel = properties.kernel();
  kernel.validate();
  Structure structure = discover_structure(world, spec.seed, spec.radius, kernel.h);
  return Simulation(std::move(structure), properties.material(), kernel, properties.sim_config(spec.special_block));
}

RunOutcome finish_run(const Simulation& sim, const PropertyRegistry& properties, HeatMode mode) {
  RunOutcome out;
  out.result = sim.result();
  out.ult_stress = properties.ult_stress();
  out.heat = colorize(out.result, mode, out.ult_stress);
  out.document = result_to_json(out.result, out.heat, out.ult_stress);
  out.csv = time_series_csv(out.result);
  return out;
}

RunOutcome execute_run(const World& world, const PropertyRegistry& properties, const RunSpec& spec,
                       const std::function<void(const Simulation&)>& on_sample) {
  Simulation sim = prepare_run(world, properties, spec);
  sim.run_to_end(on_sample);
  return finish_run(sim, properties, spec.mode);
}

}  // namespace voxelastic
