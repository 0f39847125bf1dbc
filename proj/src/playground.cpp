#include "lumiswarm/playground.hpp"

#include <cstring>
#include <sstream>

#include "lumiswarm/error.hpp"

namespace lumiswarm {

using nlohmann::json;

namespace {

std::string_view statusName(Status s) {
  switch (s) {
    case Status::Idle: return "idle";
    case Status::Computing: return "computing";
    case Status::Moving: return "moving";
    case Status::Terminated: return "terminated";
  }
  return "idle";
}

void hashBytes(std::uint64_t& h, const void* data, std::size_t size) {
  h = fnv1a(std::string_view(static_cast<const char*>(data), size), h);
}

}  // namespace

std::string configurationHash(const Configuration& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < config.robots.size(); ++i) {
    const Point2 p = config.currentPosition(i);
    unsigned char buf[18];
    std::memcpy(buf, &p.x, 8);
    std::memcpy(buf + 8, &p.y, 8);
    buf[16] = static_cast<unsigned char>(config.robots[i].light);
    buf[17] = static_cast<unsigned char>(config.robots[i].status);
    hashBytes(h, buf, sizeof buf);
  }
  return hex64(h);
}

PlaygroundSession::PlaygroundSession(std::string id, const json& config)
    : id_(std::move(id)), config_(parseRunConfig(config)), rawConfig_(config) {
  if (config_.adversary.scripted())
    throw Error(ErrorCode::ConfigInvalid, "interactive sessions take their decisions from the client, not a script");
  experiment_ = std::make_unique<Experiment>(config_, adversary_, true);
}

json PlaygroundSession::message(const std::string& type) { return {{"type", type}, {"session", id_}, {"seq", seq_++}}; }

json PlaygroundSession::error(const std::string& code, const std::string& text) {
  json m = message("error");
  m["code"] = code;
  m["message"] = text;
  return m;
}

json PlaygroundSession::stateUpdate() {
  const Configuration& c = experiment_->engine().configuration();
  json m = message("stateUpdate");
  m["time"] = c.time;
  m["steps"] = experiment_->engine().steps();
  const std::vector<Point2> pts = c.currentPositions();
  json robots = json::array();
  for (std::size_t i = 0; i < c.robots.size(); ++i)
    robots.push_back({{"id", c.robots[i].id},
                      {"pos", {pts[i].x, pts[i].y}},
                      {"light", toString(c.robots[i].light)},
                      {"status", statusName(c.robots[i].status)}});
  m["robots"] = robots;
  try {
    Hull h = convexHull(pts, config_.tolerances.epsGeom);
    json boundary = json::array(), ids = json::array();
    for (std::size_t b = 0; b < h.size(); ++b) {
      boundary.push_back({h.boundary[b].x, h.boundary[b].y});
      ids.push_back(h.source[b]);
    }
    m["hull"] = {{"boundary", boundary}, {"robots", ids}, {"vertexFlags", h.vertexFlags}, {"isSegment", h.isSegment}};
  } catch (const Error&) {
    m["hull"] = nullptr;
  }
  const double epsVis = config_.tolerances.epsVis * experiment_->initialDiameter();
  json visible = json::array(), blocked = json::array();
  std::vector<Point2> others;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      others.clear();
      for (std::size_t k = 0; k < pts.size(); ++k)
        if (k != i && k != j) others.push_back(pts[k]);
      (isVisible(pts[i], pts[j], others, epsVis) ? visible : blocked).push_back({i, j});
    }
  m["visibility"] = {{"visible", visible}, {"blocked", blocked}};
  m["hash"] = configurationHash(c);
  return m;
}

json PlaygroundSession::decisionRequest() {
  json m = message("decisionRequest");
  pendingSeq_ = m["seq"].get<long>();
  const bool asynch = config_.scheduler == SchedulerKind::ASynch;
  m["kind"] = asynch ? "plans" : "round";
  m["scheduler"] = toString(config_.scheduler);
  m["robots"] = experiment_->pendingRobots();
  if (config_.rigidity.kind == RigidityModel::Kind::NonRigid) {
    double delta = config_.rigidity.delta ? *config_.rigidity.delta
                                          : config_.rigidity.deltaFraction.value_or(0.0) * experiment_->initialDiameter();
    m["delta"] = delta;
  }
  return m;
}

json PlaygroundSession::replayConfig() const {
  RunConfig c = config_;
  c.adversary.script.clear();
  c.adversary.asynchScript.clear();
  c.adversary.cyclicPlans.clear();
  c.adversary.fallbackToPolicy = false;
  for (const auto& d : decisions_) {
    if (config_.scheduler == SchedulerKind::ASynch) c.adversary.asynchScript.push_back(planSetFromJson(d));
    else c.adversary.script.push_back(roundDecisionFromJson(d));
  }
  return toJson(c);
}

json PlaygroundSession::traceExport() {
  json m = message("traceExport");
  json lines = json::array();
  std::istringstream in(experiment_->traceText());
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  m["trace"] = lines;
  m["decisions"] = decisions_;
  m["config"] = replayConfig();
  return m;
}

std::vector<json> PlaygroundSession::open() {
  json hello = message("hello");
  hello["protocol"] = config_.protocol;
  hello["scheduler"] = toString(config_.scheduler);
  hello["n"] = config_.n;
  json palette = json::array();
  for (Light l : experiment_->protocol().palette) palette.push_back(toString(l));
  hello["palette"] = palette;
  hello["initialDiameter"] = experiment_->initialDiameter();
  std::vector<json> out{hello, stateUpdate()};
  if (!experiment_->finished()) out.push_back(decisionRequest());
  return out;
}

std::vector<json> PlaygroundSession::submit(const json& d) {
  if (experiment_->finished()) return {error("IllegalDecision", "the run has finished")};
  if (!d.contains("seq") || !d["seq"].is_number_integer() || d["seq"].get<long>() != pendingSeq_)
    return {error("StaleDecision", "decision does not answer the pending request " + std::to_string(pendingSeq_))};

  const bool asynch = config_.scheduler == SchedulerKind::ASynch;
  json recorded;
  try {
    if (asynch) {
      if (!d.contains("plans")) return {error("IllegalDecision", "ASYNCH decisions carry plans")};
      PlanSet plans = planSetFromJson(d["plans"]);
      for (const auto& [id, p] : plans)
        if (!(p.fraction >= 0.0 && p.fraction <= 1.0)) return {error("IllegalDecision", "fractions lie in [0, 1]")};
      recorded = toJson(plans);
      adversary_.pushPlans(std::move(plans));
    } else {
      RoundDecision rd = roundDecisionFromJson(d);
      for (const auto& [id, f] : rd.fractions)
        if (!(f >= 0.0 && f <= 1.0)) return {error("IllegalDecision", "fractions lie in [0, 1]")};
      recorded = toJson(rd);
      adversary_.pushRound(std::move(rd));
    }
  } catch (const json::exception& e) {
    return {error("IllegalDecision", e.what())};
  } catch (const std::invalid_argument&) {
    return {error("IllegalDecision", "robot ids used as keys must be integers")};
  }

  json events = json::array();
  std::vector<std::string> warnings;
  try {
    Experiment::Progress p;
    do {
      p = experiment_->advance();
      for (const auto& e : experiment_->lastEvents()) events.push_back(toJson(e));
    } while (p == Experiment::Progress::Advanced);
  } catch (const Error& e) {
    pendingSeq_ = -1;
    return {error("IllegalDecision", e.what()), decisionRequest()};
  }
  decisions_.push_back(recorded);
  for (auto& w : experiment_->takeWarnings()) warnings.push_back(w);

  std::vector<json> out{stateUpdate()};
  if (experiment_->finished()) {
    const Verdict& v = experiment_->verdict();
    if (v.violation) {
      json m = message("violation");
      m["kind"] = v.violation->kind;
      m["time"] = v.violation->time;
      m["robots"] = v.violation->robots;
      m["detail"] = v.violation->detail;
      out.push_back(m);
    }
  }
  json result = message("stepResult");
  result["answers"] = pendingSeq_;
  result["events"] = events;
  result["warnings"] = warnings;
  if (experiment_->finished()) result["verdict"] = experiment_->verdict().toJson();
  out.push_back(result);
  pendingSeq_ = -1;
  if (!experiment_->finished()) out.push_back(decisionRequest());
  return out;
}

std::vector<json> PlaygroundSession::handle(const json& m) {
  const std::string type = m.value("type", "");
  if (m.contains("session") && m["session"] != id_) return {error("IllegalDecision", "message for another session")};
  if (type == "decision") return submit(m);
  if (type == "traceExport") return {traceExport()};
  return {error("IllegalDecision", "unexpected message type '" + type + "'")};
}

std::string SessionRegistry::claim(const std::string& requested) {
  std::lock_guard lock(mutex_);
  if (!requested.empty() && !live_.count(requested)) {
    live_.insert(requested);
    return requested;
  }
  std::string id;
  do id = "s" + std::to_string(++counter_);
  while (live_.count(id));
  live_.insert(id);
  return id;
}

void SessionRegistry::release(const std::string& id) {
  std::lock_guard lock(mutex_);
  live_.erase(id);
}

PlaygroundConnection::~PlaygroundConnection() {
  if (session_) registry_.release(session_->id());
}

std::vector<json> PlaygroundConnection::receive(const std::string& text) {
  auto fail = [](const std::string& code, const std::string& what) {
    return std::vector<json>{{{"type", "error"}, {"code", code}, {"message", what}}};
  };
  json m;
  try {
    m = json::parse(text);
  } catch (const json::exception& e) {
    return fail("IllegalDecision", std::string("malformed JSON: ") + e.what());
  }
  if (!m.is_object()) return fail("IllegalDecision", "messages are JSON objects");
  if (m.value("type", "") == "hello") {
    if (session_) return fail("IllegalDecision", "this connection already has a session");
    std::string requested = m.contains("session") && m["session"].is_string() ? m["session"].get<std::string>() : "";
    std::string id = registry_.claim(requested);
    try {
      session_ = std::make_unique<PlaygroundSession>(id, m.value("config", json::object()));
    } catch (const Error& e) {
      registry_.release(id);
      return fail("ConfigInvalid", e.what());
    }
    return session_->open();
  }
  if (!session_) return fail("IllegalDecision", "send a hello with a run config first");
  return session_->handle(m);
}

}  // namespace lumiswarm
