#include "voxelastic/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "voxelastic/error.hpp"

namespace voxelastic::cli {

namespace {

namespace fs = std::filesystem;

constexpr int kUsageError = 2;
constexpr int kFailure = 1;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string coord_text(VoxelCoord c) {
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + "," + std::to_string(c.z) + ")";
}

std::optional<VoxelCoord> parse_coord(const std::vector<std::string>& parts) {
  std::vector<std::string> fields;
  for (const auto& p : parts) {
    std::stringstream ss(p);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) fields.push_back(item);
    }
  }
  if (fields.size() != 3) return std::nullopt;
  int v[3];
  for (int k = 0; k < 3; ++k) {
    std::size_t used = 0;
    try {
      v[k] = std::stoi(fields[k], &used);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (used != fields[k].size()) return std::nullopt;
  }
  return VoxelCoord{v[0], v[1], v[2]};
}

std::optional<double> parse_number(const std::string& text) {
  std::size_t used = 0;
  try {
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

json coord_json(VoxelCoord c) { return json::array({c.x, c.y, c.z}); }

/// Defaults, then the scenario's embedded overrides, then the session's.
PropertyRegistry effective_properties(const Session& session, const Scenario* scenario) {
  PropertyRegistry props = scenario ? scenario->properties() : PropertyRegistry{};
  props.apply(session.properties);
  return props;
}

void print_properties(const PropertyRegistry& props, std::ostream& out) {
  std::size_t width = 0;
  for (const auto& s : PropertyRegistry::specs()) width = std::max(width, s.name.size());
  for (const auto& s : PropertyRegistry::specs()) {
    out << "  " << std::left << std::setw(static_cast<int>(width)) << s.name << " = " << num(props.get(s.name));
    if (!s.unit.empty()) out << ' ' << s.unit;
    out << "  # " << s.description << '\n';
  }
}

struct Context {
  fs::path session_file;
  Session session;
  std::ostream& out;
  std::ostream& err;

  std::optional<Scenario> scenario() const {
    if (!session.world) return std::nullopt;
    return load_scenario(*session.world);
  }
};

int cmd_info(Context& ctx) {
  auto& out = ctx.out;
  out << "voxelastic " << kVersion << '\n';
  out << "Mesh-free elasticity for voxel structures: total-Lagrangian SPH with corrected kernel gradients,\n"
         "St. Venant-Kirchhoff material with viscous damping, explicit leapfrog time integration.\n";
  out << "world: " << (ctx.session.world ? *ctx.session.world : std::string("none")) << '\n';
  out << "special block: "
      << (ctx.session.special_block ? coord_text(*ctx.session.special_block) : std::string("none (centre of mass)"))
      << '\n';
  const auto scenario = ctx.scenario();
  const PropertyRegistry props = effective_properties(ctx.session, scenario ? &*scenario : nullptr);
  out << "properties:\n";
  print_properties(props, out);
  out << "time step in use: " << num(props.effective_dt()) << " s\n";
  return 0;
}

struct RunArgs {
  std::string mode;
  int radius = 0;
  std::string seed;
  std::string out_dir = ".";
  std::string csv;
  std::string preset;
};

int cmd_run(Context& ctx, const RunArgs& args) {
  if (!ctx.session.world) {
    ctx.err << "error: no world loaded; pass --world <file>\n";
    return kUsageError;
  }
  const Scenario scenario = *ctx.scenario();
  const PropertyRegistry props = effective_properties(ctx.session, &scenario);

  const RunSpec* preset = nullptr;
  if (!args.preset.empty()) {
    preset = &scenario.run(args.preset);
  } else if (!scenario.runs.empty()) {
    preset = &scenario.runs.front();
  }

  RunSpec spec;
  if (preset) spec = *preset;
  if (!args.mode.empty()) {
    spec.mode = heat_mode_from_string(args.mode);
  } else if (!preset) {
    ctx.err << "error: mode required (stress or position)\n";
    return kUsageError;
  }
  if (args.radius > 0) {
    spec.radius = args.radius;
  } else if (!preset) {
    ctx.err << "error: radius required\n";
    return kUsageError;
  }
  if (!args.seed.empty()) {
    spec.seed = *parse_coord({args.seed});
    // a preset's tracked block belongs to the preset's own seed
    spec.special_block.reset();
  } else if (!preset) {
    spec.seed = VoxelCoord{0, 0, 0};
  }
  if (ctx.session.special_block) spec.special_block = ctx.session.special_block;

  const RunOutcome outcome = execute_run(scenario.world, props, spec);
  const SimulationResult& r = outcome.result;

  const fs::path out_dir(args.out_dir);
  const fs::path result_path = out_dir / "result.json";
  const fs::path csv_path = args.csv.empty() ? out_dir / "timeseries.csv" : fs::path(args.csv);
  write_text_file(result_path, outcome.document.dump(2) + "\n");
  write_text_file(csv_path, outcome.csv);

  std::size_t fixed = std::count(r.fixed.begin(), r.fixed.end(), true);
  auto& out = ctx.out;
  out << "structure: " << r.coords.size() << " particles, " << fixed << " fixed\n";
  out << "time step: " << num(r.dt) << " s x " << r.steps_taken << " steps\n";
  out << "tracking: " << (r.tracked_block ? "block " + coord_text(*r.tracked_block) : std::string("centre of mass"))
      << '\n';
  const Vec3& u = r.tracked_deflection;
  out << "deflection: (" << num(u.x()) << ", " << num(u.y()) << ", " << num(u.z()) << ")\n";
  out << "max von Mises: " << num(r.max_von_mises) << " Pa\n";
  const auto over = std::count(outcome.heat.exceeds_ultimate.begin(), outcome.heat.exceeds_ultimate.end(), true);
  if (over > 0) {
    out << "ultimate stress " << num(outcome.ult_stress) << " Pa exceeded at " << over << " blocks\n";
  } else {
    out << "all blocks within ultimate stress " << num(outcome.ult_stress) << " Pa\n";
  }
  out << "heat map: " << to_string(outcome.heat.mode) << ", scale " << num(outcome.heat.scale_max)
      << (outcome.heat.mode == HeatMode::Stress ? " Pa" : " m") << '\n';
  for (const auto& d : r.diagnostics) out << "warning: " << d << '\n';
  out << "result: " << result_path.string() << '\n';
  out << "time series: " << csv_path.string() << '\n';

  ctx.session.last_result = fs::absolute(result_path).string();
  ctx.session.last_csv = fs::absolute(csv_path).string();
  return 0;
}

int cmd_properties(Context& ctx, const std::vector<std::string>& args) {
  const auto scenario = ctx.scenario();
  PropertyRegistry props = effective_properties(ctx.session, scenario ? &*scenario : nullptr);
  if (args.empty()) {
    print_properties(props, ctx.out);
    return 0;
  }
  const PropertySpec& spec = PropertyRegistry::spec(args[0]);
  if (args.size() == 2) {
    const auto value = parse_number(args[1]);
    if (!value) {
      ctx.err << "error: '" << args[1] << "' is not a number\n";
      return kUsageError;
    }
    props.set(spec.name, *value);
    ctx.session.properties[std::string(spec.name)] = *value;
  }
  ctx.out << spec.name << " = " << num(props.get(spec.name));
  if (!spec.unit.empty()) ctx.out << ' ' << spec.unit;
  ctx.out << '\n';
  return 0;
}

int cmd_reset(Context& ctx) {
  ctx.session.last_result.reset();
  ctx.session.last_csv.reset();
  ctx.out << "reset: heat map cleared\n";
  return 0;
}

int cmd_special(Context& ctx, const std::vector<std::string>& args) {
  if (args.size() == 1 && args[0] == "none") {
    ctx.session.special_block.reset();
    ctx.out << "special block: none (centre of mass)\n";
    return 0;
  }
  const auto coord = parse_coord(args);
  if (!coord) {
    ctx.err << "error: expected CoordX CoordY CoordZ integers or 'none'\n";
    return kUsageError;
  }
  if (!ctx.session.world) {
    ctx.err << "error: no world loaded; pass --world <file>\n";
    return kUsageError;
  }
  const Scenario scenario = *ctx.scenario();
  const BlockKind* kind = scenario.world.find(*coord);
  if (kind == nullptr || *kind == BlockKind::Load) {
    throw Error(ErrorCode::SpecialBlockNotFound, "no structural block at " + coord_text(*coord));
  }
  ctx.session.special_block = coord;
  ctx.out << "special block: " << coord_text(*coord) << '\n';
  return 0;
}

}  // namespace

json Session::to_json() const {
  json j = json::object();
  j["world"] = world ? json(*world) : json(nullptr);
  j["special_block"] = special_block ? coord_json(*special_block) : json(nullptr);
  j["properties"] = properties;
  j["last_result"] = last_result ? json(*last_result) : json(nullptr);
  j["last_csv"] = last_csv ? json(*last_csv) : json(nullptr);
  return j;
}

Session Session::from_json(const json& j) {
  Session s;
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "session: expected an object");
  if (j.contains("world") && j["world"].is_string()) s.world = j["world"].get<std::string>();
  if (j.contains("special_block") && j["special_block"].is_array()) {
    const json& c = j["special_block"];
    s.special_block = VoxelCoord{c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>()};
  }
  if (j.contains("properties")) {
    (void)PropertyRegistry::from_json(j["properties"]);
    s.properties = j["properties"];
  }
  if (j.contains("last_result") && j["last_result"].is_string()) s.last_result = j["last_result"].get<std::string>();
  if (j.contains("last_csv") && j["last_csv"].is_string()) s.last_csv = j["last_csv"].get<std::string>();
  return s;
}

Session load_session(const fs::path& path) {
  if (!fs::exists(path)) return {};
  return Session::from_json(read_json_file(path));
}

void save_session(const Session& session, const fs::path& path) {
  write_text_file(path, session.to_json().dump(2) + "\n");
}

fs::path session_path(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kSessionEnv); env != nullptr && *env != '\0') return env;
  return kDefaultSessionFile;
}

int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Elasticity solver for voxel structures", "voxelastic"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string session_flag;
  std::string world_flag;
  app.add_option("--session", session_flag, "Session file (default $VOXELASTIC_SESSION or ./" +
                                                 std::string(kDefaultSessionFile) + ")");
  app.add_option("--world", world_flag, "World or scenario JSON file; remembered in the session");

  auto* info = app.add_subcommand("info", "Print version, session state and properties");
  info->alias("SPHinfo");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Discover the structure around the seed and run the solver");
  run->alias("RunSPH");
  run->add_option("mode,--mode", run_args.mode, "Heat-map coloring: stress or position")
      ->check(CLI::IsMember({"stress", "position"}));
  run->add_option("radius,--radius", run_args.radius, "Search radius in blocks (Chebyshev)")
      ->check(CLI::PositiveNumber);
  run->add_option("--seed", run_args.seed, "Search centre x,y,z")->check([](const std::string& s) {
    return parse_coord({s}) ? std::string() : std::string("seed must be x,y,z integers");
  });
  run->add_option("--out", run_args.out_dir, "Directory for result.json and timeseries.csv");
  run->add_option("--csv", run_args.csv, "Time-series CSV path (default <out>/timeseries.csv)");
  run->add_option("--preset", run_args.preset, "Named run preset from the scenario file");

  std::vector<std::string> prop_args;
  auto* props = app.add_subcommand("properties", "List properties, or set one: properties <name> <value>");
  props->alias("SPHproperties");
  props->add_option("args", prop_args, "name [value]")->expected(0, 2);

  auto* reset = app.add_subcommand("reset", "Clear the last result and heat map");
  reset->alias("resetblocks");

  std::vector<std::string> special_args;
  auto* special = app.add_subcommand("set-special-block", "Track the block at x y z instead of the centre of mass");
  special->alias("setSpecialBlock");
  special->add_option("coords", special_args, "CoordX CoordY CoordZ, or 'none'")->expected(1, 3)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n\n";
    const auto chosen = app.get_subcommands();
    err << (chosen.empty() ? app.help() : chosen.front()->help());
    return kUsageError;
  }

  Context ctx{session_path(session_flag.empty() ? std::nullopt : std::optional(session_flag)), {}, out, err};
  try {
    ctx.session = load_session(ctx.session_file);
    if (!world_flag.empty()) {
      (void)load_scenario(world_flag);  // fail early on a bad file
      ctx.session.world = fs::absolute(world_flag).string();
    }

    int status = 0;
    if (info->parsed()) {
      status = cmd_info(ctx);
    } else if (run->parsed()) {
      status = cmd_run(ctx, run_args);
    } else if (props->parsed()) {
      status = cmd_properties(ctx, prop_args);
    } else if (reset->parsed()) {
      status = cmd_reset(ctx);
    } else if (special->parsed()) {
      status = cmd_special(ctx, special_args);
    }
    if (status == 0) save_session(ctx.session, ctx.session_file);
    return status;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace voxelastic::cli
