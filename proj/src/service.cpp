#include "voxelastic/service.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "voxelastic/error.hpp"
#include "voxelastic/scenario_io.hpp"

// after Eigen: the resolver headers pulled in by httplib define a macro Eigen uses as a name
#include <httplib.h>

namespace voxelastic::service {

namespace {

enum class RunStatus { Pending, Running, Done, Failed };

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Pending: return "Pending";
    case RunStatus::Running: return "Running";
    case RunStatus::Done: return "Done";
    case RunStatus::Failed: return "Failed";
  }
  return "unknown";
}

bool active(RunStatus s) { return s == RunStatus::Pending || s == RunStatus::Running; }

struct Frame {
  int step = 0;
  double time = 0.0;
  std::vector<Vec3> positions;
  std::vector<int> bins;
};

struct RunRecord {
  std::string id;
  std::string session;
  HeatMode mode = HeatMode::Stress;
  PropertyRegistry properties;
  int num_steps = 0;
  int record_every = 1;
  std::vector<VoxelCoord> coords;

  bool record_frames = false;

  std::atomic<RunStatus> status{RunStatus::Pending};
  std::atomic<int> step{0};
  std::atomic<bool> cancel{false};

  std::mutex mu;
  std::vector<Frame> frames;
  std::optional<RunOutcome> outcome;
  std::optional<Error> error;
  std::thread worker;
};

struct SessionState {
  std::optional<World> world;
  json overrides = json::object();
  std::optional<VoxelCoord> special_block;
  std::shared_ptr<RunRecord> last_run;
};

double quantize(double v) { return std::round(v * 1000.0) / 1000.0; }

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return 400;
    case ErrorCode::IoError: return 500;
    default: return 422;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
  send_json(res, status, json{{"error", code}, {"message", message}});
}

void send_error(httplib::Response& res, const Error& e) {
  send_error(res, http_status(e.code()), to_string(e.code()), e.what());
}

json properties_json(const PropertyRegistry& props) {
  json out = json::object();
  for (const auto& s : PropertyRegistry::specs()) {
    out[std::string(s.name)] = {{"value", props.get(s.name)},
                                {"unit", s.unit},
                                {"default", s.default_value},
                                {"integral", s.integral},
                                {"description", s.description}};
  }
  return out;
}

json coord_json(VoxelCoord c) { return json::array({c.x, c.y, c.z}); }

VoxelCoord coord_from(const json& j, std::string_view field) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number_integer() || !j[1].is_number_integer() ||
      !j[2].is_number_integer()) {
    throw Error(ErrorCode::ParseError, std::string(field) + ": expected [x, y, z] integers");
  }
  return VoxelCoord{j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("request body: ") + e.what());
  }
}

}  // namespace

struct Server::Impl {
  httplib::Server http;
  std::mutex mu;
  std::map<std::string, SessionState> sessions;
  std::map<std::string, std::shared_ptr<RunRecord>> runs;
  std::uint64_t next_id = 1;

  Impl() { routes(); }

  static std::string session_key(const httplib::Request& req) {
    const std::string s = req.get_header_value("X-Session");
    return s.empty() ? "default" : s;
  }

  std::shared_ptr<RunRecord> find_run(const httplib::Request& req) {
    std::lock_guard lock(mu);
    auto it = runs.find(req.matches[1].str());
    if (it == runs.end() || it->second->session != session_key(req)) return nullptr;
    return it->second;
  }

  /// Wraps a handler so library errors become JSON error responses.
  template <class F>
  static httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const std::exception& e) {
        send_error(res, 500, "Internal", e.what());
      }
    };
  }

  void routes() {
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, PUT, PATCH, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type, X-Session"}});
    http.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    http.Put("/world", guarded([this](const httplib::Request& req, httplib::Response& res) {
               World world = world_from_json(parse_body(req));
               std::lock_guard lock(mu);
               sessions[session_key(req)].world = std::move(world);
               res.status = 204;
             }));

    http.Get("/world", guarded([this](const httplib::Request& req, httplib::Response& res) {
               std::lock_guard lock(mu);
               const auto& s = sessions[session_key(req)];
               if (!s.world) return send_error(res, 404, "NoWorld", "no world loaded");
               res.set_content(canonical_world(*s.world), "application/json");
             }));

    http.Put("/special-block", guarded([this](const httplib::Request& req, httplib::Response& res) {
               const json body = parse_body(req);
               std::optional<VoxelCoord> c;
               if (!body.is_null()) c = coord_from(body, "special_block");
               std::lock_guard lock(mu);
               sessions[session_key(req)].special_block = c;
               res.status = 204;
             }));

    http.Get("/properties", guarded([this](const httplib::Request& req, httplib::Response& res) {
               std::lock_guard lock(mu);
               PropertyRegistry props;
               props.apply(sessions[session_key(req)].overrides);
               send_json(res, 200, properties_json(props));
             }));

    http.Patch("/properties", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const json body = parse_body(req);
                 if (!body.is_object()) throw Error(ErrorCode::ParseError, "expected an object");
                 std::lock_guard lock(mu);
                 auto& s = sessions[session_key(req)];
                 json overrides = s.overrides;
                 for (const auto& [name, value] : body.items()) {
                   (void)PropertyRegistry::spec(name);
                   if (value.is_null()) {
                     overrides.erase(name);
                   } else {
                     overrides[name] = value;
                   }
                 }
                 PropertyRegistry props;
                 props.apply(overrides);  // all or nothing
                 s.overrides = std::move(overrides);
                 send_json(res, 200, properties_json(props));
               }));

    http.Post("/runs", guarded([this](const httplib::Request& req, httplib::Response& res) { start_run(req, res); }));

    http.Get(R"(/runs/([A-Za-z0-9]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto run = find_run(req);
               if (!run) return send_error(res, 404, "NotFound", "no such run");
               send_json(res, 200, run_json(*run));
             }));

    http.Get(R"(/runs/([A-Za-z0-9]+)/frames)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto run = find_run(req);
               if (!run) return send_error(res, 404, "NotFound", "no such run");
               if (!run->record_frames) return send_error(res, 404, "NoFrames", "frames were not requested");
               std::size_t since = 0;
               if (req.has_param("since")) since = std::stoul(req.get_param_value("since"));
               json frames = json::array();
               std::lock_guard lock(run->mu);
               for (std::size_t k = since; k < run->frames.size(); ++k) {
                 const Frame& f = run->frames[k];
                 json pos = json::array();
                 for (const Vec3& p : f.positions) pos.push_back({quantize(p.x()), quantize(p.y()), quantize(p.z())});
                 frames.push_back({{"step", f.step}, {"time", f.time}, {"positions", std::move(pos)}, {"bins", f.bins}});
               }
               json coords = json::array();
               for (const auto& c : run->coords) coords.push_back(coord_json(c));
               send_json(res, 200,
                         {{"record_every", run->record_every},
                          {"count", run->frames.size()},
                          {"coords", std::move(coords)},
                          {"frames", std::move(frames)}});
             }));

    http.Get(R"(/runs/([A-Za-z0-9]+)/timeseries\.csv)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto run = find_run(req);
               if (!run) return send_error(res, 404, "NotFound", "no such run");
               std::lock_guard lock(run->mu);
               if (!run->outcome) return send_error(res, 409, "NotFinished", "run has not finished");
               res.set_content(run->outcome->csv, "text/csv");
             }));

    http.Post("/reset", guarded([this](const httplib::Request& req, httplib::Response& res) {
                std::lock_guard lock(mu);
                auto& s = sessions[session_key(req)];
                if (s.last_run) s.last_run->cancel = true;
                s.last_run.reset();
                res.status = 204;
              }));

    http.Get("/palette", [](const httplib::Request&, httplib::Response& res) {
      json colors = json::array();
      for (auto c : kHeatPalette) colors.push_back(c);
      send_json(res, 200, {{"bins", kHeatBins}, {"colors", std::move(colors)}});
    });
  }

  static json run_json(RunRecord& run) {
    const RunStatus status = run.status.load();
    const int step = run.step.load();
    json out{{"id", run.id},
             {"status", to_string(status)},
             {"mode", to_string(run.mode)},
             {"step", step},
             {"num_steps", run.num_steps},
             {"progress", run.num_steps > 0 ? static_cast<double>(step) / run.num_steps : 0.0}};
    std::lock_guard lock(run.mu);
    if (run.outcome) {
      out["progress"] = 1.0;
      out["result"] = run.outcome->document;
    }
    if (run.error) out["error"] = {{"code", to_string(run.error->code())}, {"message", run.error->what()}};
    return out;
  }

  void start_run(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.is_object()) throw Error(ErrorCode::ParseError, "expected an object");
    RunSpec spec;
    spec.mode = heat_mode_from_string(body.value("mode", "stress"));
    if (!body.contains("seed")) throw Error(ErrorCode::ParseError, "seed: missing");
    spec.seed = coord_from(body["seed"], "seed");
    if (!body.contains("radius") || !body["radius"].is_number_integer()) {
      throw Error(ErrorCode::ParseError, "radius: expected an integer");
    }
    spec.radius = body["radius"].get<int>();
    const bool record_frames = body.value("record_frames", false);

    std::unique_lock lock(mu);
    const std::string key = session_key(req);
    auto& session = sessions[key];
    if (session.last_run && active(session.last_run->status.load())) {
      return send_error(res, 409, "Busy", "a run is already active in this session");
    }
    if (!session.world) return send_error(res, 422, "NoWorld", "no world loaded");
    spec.special_block = session.special_block;
    if (body.contains("special_block") && !body["special_block"].is_null()) {
      spec.special_block = coord_from(body["special_block"], "special_block");
    }
    PropertyRegistry props;
    props.apply(session.overrides);

    Simulation sim = prepare_run(*session.world, props, spec);

    auto run = std::make_shared<RunRecord>();
    run->id = std::to_string(next_id++);
    run->session = key;
    run->mode = spec.mode;
    run->record_frames = record_frames;
    run->properties = props;
    run->num_steps = sim.config().num_steps;
    run->record_every = sim.config().record_every;
    for (const auto& p : sim.structure().particles) run->coords.push_back(p.coord);
    runs[run->id] = run;
    session.last_run = run;
    run->worker = std::thread([run, sim = std::move(sim)]() mutable { work(*run, sim); });
    lock.unlock();

    res.set_header("Location", "/runs/" + run->id);
    send_json(res, 202, {{"id", run->id}, {"status", to_string(RunStatus::Pending)}});
  }

  static void record_frame(RunRecord& run, const Simulation& sim) {
    if (!run.record_frames) return;
    Frame f;
    f.step = sim.step_index();
    f.time = sim.time();
    std::vector<double> field;
    for (const auto& p : sim.states()) {
      f.positions.push_back(p.x);
      if (run.mode == HeatMode::Position) field.push_back((p.x - p.X).norm());
    }
    f.bins = bin_field(run.mode == HeatMode::Stress ? sim.von_mises() : field);
    std::lock_guard lock(run.mu);
    run.frames.push_back(std::move(f));
  }

  static void work(RunRecord& run, Simulation& sim) {
    run.status = RunStatus::Running;
    try {
      record_frame(run, sim);
      while (!sim.finished()) {
        if (run.cancel) throw Error(ErrorCode::Cancelled, "run cancelled");
        sim.step();
        run.step = sim.step_index();
        if (sim.step_index() % run.record_every == 0) record_frame(run, sim);
      }
      RunOutcome outcome = finish_run(sim, run.properties, run.mode);
      {
        std::lock_guard lock(run.mu);
        run.outcome = std::move(outcome);
      }
      run.status = RunStatus::Done;
    } catch (const Error& e) {
      {
        std::lock_guard lock(run.mu);
        run.error = e;
      }
      run.status = RunStatus::Failed;
    }
  }

  void shutdown() {
    http.stop();
    std::vector<std::shared_ptr<RunRecord>> all;
    {
      std::lock_guard lock(mu);
      for (auto& [id, run] : runs) all.push_back(run);
    }
    for (auto& run : all) {
      run->cancel = true;
      if (run->worker.joinable()) run->worker.join();
    }
  }
};

Server::Server() : impl_(std::make_unique<Impl>()) {}

Server::~Server() { impl_->shutdown(); }

bool Server::listen(const std::string& host, int port) { return impl_->http.listen(host, port); }

int Server::bind_to_any_port(const std::string& host) { return impl_->http.bind_to_any_port(host); }

bool Server::listen_after_bind() { return impl_->http.listen_after_bind(); }

void Server::stop() { impl_->shutdown(); }

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace voxelastic::service
