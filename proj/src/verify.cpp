#include "lumiswarm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "lumiswarm/error.hpp"

namespace lumiswarm {

using nlohmann::json;

std::string_view toString(Outcome o) {
  switch (o) {
    case Outcome::Solved: return "Solved";
    case Outcome::InvariantViolation: return "InvariantViolation";
    case Outcome::CapExceeded: return "CapExceeded";
  }
  return "CapExceeded";
}

json RunStats::summary() const {
  auto last = [](const auto& v) { return v.empty() ? json(nullptr) : json(v.back()); };
  json j = {{"steps", steps},
            {"hullArea", last(hullArea)},
            {"hullDiameter", last(hullDiameter)},
            {"vertexCount", last(vertexCount)},
            {"shortestInteriorEdge", last(shortestInteriorEdge)},
            {"nearMisses", nearMisses}};
  if (!hullArea.empty()) {
    j["minHullArea"] = *std::min_element(hullArea.begin(), hullArea.end());
    j["maxVertexCount"] = *std::max_element(vertexCount.begin(), vertexCount.end());
  }
  return j;
}

json Verdict::toJson() const {
  json j = {{"outcome", toString(outcome)}};
  if (violation) {
    j["kind"] = violation->kind;
    j["time"] = violation->time;
    j["robots"] = violation->robots;
  }
  if (outcome == Outcome::CapExceeded) j["reason"] = reason;
  return j;
}

// ---------------------------------------------------------------------------
// Steps

StepBuilder::StepBuilder(const std::vector<Point2>& initial, const std::vector<Light>& lights) : lightsAtStart_(lights) {
  for (std::size_t i = 0; i < initial.size(); ++i) {
    RobotState r;
    r.id = static_cast<int>(i);
    r.position = initial[i];
    r.light = lights.at(i);
    state_.robots.push_back(r);
  }
}

std::optional<Step> StepBuilder::close(double t) {
  if (t < state_.time) throw Error(ErrorCode::TraceInvalid, "event times run backwards");
  if (t == state_.time) return std::nullopt;
  const std::size_t n = state_.robots.size();
  Step s;
  s.t0 = state_.time;
  s.t1 = t;
  s.lightsBefore = lightsAtStart_;
  for (std::size_t i = 0; i < n; ++i) {
    s.p0.push_back(state_.positionAt(i, s.t0));
    s.p1.push_back(state_.positionAt(i, t));
    s.lights.push_back(state_.robots[i].light);
    s.terminated.push_back(state_.robots[i].status == Status::Terminated);
    s.moving.push_back(!(s.p0[i] == s.p1[i]));
  }
  state_.time = t;
  lightsAtStart_ = s.lights;
  return s;
}

std::optional<Step> StepBuilder::advanceTo(double t) { return close(t); }

std::optional<Step> StepBuilder::feed(const TraceEvent& e) {
  std::optional<Step> closed = close(e.t);
  if (e.robot < 0 || e.robot >= static_cast<int>(state_.robots.size())) {
    if (e.kind == EventKind::Round || e.kind == EventKind::Violation) return closed;
    throw Error(ErrorCode::TraceInvalid, "event for an unknown robot");
  }
  RobotState& r = state_.robots[e.robot];
  switch (e.kind) {
    case EventKind::Light:
      r.light = e.light;
      break;
    case EventKind::Terminate:
      r.status = Status::Terminated;
      break;
    case EventKind::MoveStart:
      r.position = e.pos;
      r.moveTo = e.dest;
      r.moveStart = e.t;
      r.moveEnd = e.tEnd;
      r.status = e.tEnd > e.t ? Status::Moving : Status::Idle;
      if (e.tEnd <= e.t) r.position = e.dest;
      break;
    case EventKind::MoveEnd:
      r.position = e.pos;
      if (r.status != Status::Terminated) r.status = Status::Idle;
      break;
    default:
      break;
  }
  return closed;
}

// ---------------------------------------------------------------------------
// Monitors

namespace {

std::optional<Hull> tryHull(const std::vector<Point2>& pts, double epsGeom) {
  try {
    return convexHull(pts, epsGeom);
  } catch (const Error&) {
    return std::nullopt;
  }
}

class CollisionMonitor : public Monitor {
 public:
  explicit CollisionMonitor(double epsColl) : eps_(epsColl) {}
  std::string name() const override { return "collision"; }
  long warnings() const override { return nearMisses_; }

  std::optional<Violation> check(const Step& s) override {
    const std::size_t n = s.p0.size();
    std::optional<Violation> worst;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!s.moving[i] && !s.moving[j]) continue;
        double d = minTrajectoryDistance(s.p0[i], s.p1[i], s.p0[j], s.p1[j]);
        if (d <= eps_) {
          if (d < best) {
            best = d;
            Point2 w0 = s.p0[i] - s.p0[j];
            Point2 v = (s.p1[i] - s.p0[i]) - (s.p1[j] - s.p0[j]);
            double u = norm2(v) > 0.0 ? std::clamp(-dot(w0, v) / norm2(v), 0.0, 1.0) : 0.0;
            char detail[64];
            std::snprintf(detail, sizeof detail, "closest approach %.3g, limit %.3g", d, eps_);
            worst = Violation{"collision", s.t0 + u * (s.t1 - s.t0), {static_cast<int>(i), static_cast<int>(j)}, detail};
          }
        } else if (d <= 10.0 * eps_) {
          ++nearMisses_;
        }
      }
    return worst;
  }

 private:
  double eps_;
  long nearMisses_ = 0;
};

class HullMonotoneMonitor : public Monitor {
 public:
  explicit HullMonotoneMonitor(double epsGeom) : eps_(epsGeom) {}
  std::string name() const override { return "hullMonotone"; }

  std::optional<Violation> check(const Step& s) override {
    auto h0 = tryHull(s.p0, eps_);
    if (!h0) return std::nullopt;
    if (!armed_ && !h0->isSegment && h0->size() >= 3) armed_ = true;
    if (!armed_) return std::nullopt;
    const double slack = 1e-9 * h0->diameter();
    std::vector<int> out;
    for (std::size_t i = 0; i < s.p1.size(); ++i)
      if (s.moving[i] && !h0->contains(s.p1[i], slack)) out.push_back(static_cast<int>(i));
    if (out.empty()) return std::nullopt;
    return Violation{"hullMonotone", s.t1, out, "robot left the previous hull"};
  }

 private:
  double eps_;
  bool armed_ = false;
};

class VertexPersistenceMonitor : public Monitor {
 public:
  explicit VertexPersistenceMonitor(double epsGeom) : eps_(epsGeom) {}
  std::string name() const override { return "vertexPersistence"; }

  std::optional<Violation> check(const Step& s) override {
    if (std::none_of(s.moving.begin(), s.moving.end(), [](bool b) { return b; })) return std::nullopt;
    auto h0 = tryHull(s.p0, eps_);
    if (!h0 || h0->isSegment) return std::nullopt;
    auto h1 = tryHull(s.p1, eps_);
    if (!h1) return std::nullopt;
    std::vector<int> out;
    for (std::size_t i = 0; i < s.p0.size(); ++i) {
      if (!s.moving[i]) continue;
      int b0 = h0->boundaryIndexOfInput(i);
      if (b0 < 0 || !h0->vertexFlags[b0]) continue;
      int b1 = h1->boundaryIndexOfInput(i);
      if (h1->isSegment || b1 < 0 || !h1->vertexFlags[b1]) out.push_back(static_cast<int>(i));
    }
    if (out.empty()) return std::nullopt;
    return Violation{"vertexPersistence", s.t1, out, "vertex robot stopped being a vertex"};
  }

 private:
  double eps_;
};

class DepletionHullFixedMonitor : public Monitor {
 public:
  DepletionHullFixedMonitor(double epsGeom, bool collinearStart) : eps_(epsGeom), off_(collinearStart) {}
  std::string name() const override { return "depletionHullFixed"; }

  std::optional<Violation> check(const Step& s) override {
    if (off_) return std::nullopt;
    auto h0 = tryHull(s.p0, eps_);
    if (!h0 || h0->isSegment) return std::nullopt;
    bool anyInternal = false;
    for (std::size_t i = 0; i < s.p0.size() && !anyInternal; ++i) anyInternal = h0->boundaryIndexOfInput(i) < 0;
    if (!anyInternal) return std::nullopt;
    auto h1 = tryHull(s.p1, eps_);
    const double tol = eps_ * std::max(h0->scale, 1e-300);
    std::map<std::size_t, Point2> v0, v1;
    for (std::size_t b = 0; b < h0->size(); ++b)
      if (h0->vertexFlags[b]) v0[h0->source[b]] = h0->boundary[b];
    if (h1)
      for (std::size_t b = 0; b < h1->size(); ++b)
        if (h1->vertexFlags[b]) v1[h1->source[b]] = h1->boundary[b];
    std::vector<int> out;
    for (const auto& [id, p] : v0) {
      auto it = v1.find(id);
      if (it == v1.end() || distance(it->second, p) > tol) out.push_back(static_cast<int>(id));
    }
    for (const auto& [id, p] : v1)
      if (!v0.count(id)) out.push_back(static_cast<int>(id));
    if (out.empty()) return std::nullopt;
    std::sort(out.begin(), out.end());
    return Violation{"depletionHullFixed", s.t1, out, "hull changed while internal robots remain"};
  }

 private:
  double eps_;
  bool off_;
};

class SecDriftMonitor : public Monitor {
 public:
  SecDriftMonitor(Light color, double tol) : color_(color), tol_(tol) {}
  std::string name() const override { return "secDrift"; }

  std::optional<Violation> check(const Step& s) override {
    if (!std::all_of(s.lightsBefore.begin(), s.lightsBefore.end(), [&](Light l) { return l == color_; }))
      return std::nullopt;
    Circle c0 = smallestEnclosingCircle(s.p0), c1 = smallestEnclosingCircle(s.p1);
    if (distance(c0.center, c1.center) <= tol_ && std::abs(c0.radius - c1.radius) <= tol_) return std::nullopt;
    std::vector<int> movers;
    for (std::size_t i = 0; i < s.moving.size(); ++i)
      if (s.moving[i]) movers.push_back(static_cast<int>(i));
    return Violation{"secDrift", s.t1, movers, "smallest enclosing circle moved during the circle phase"};
  }

 private:
  Light color_;
  double tol_;
};

}  // namespace

std::unique_ptr<Monitor> makeMonitor(const std::string& name, const MonitorContext& ctx) {
  if (name == "collision") return std::make_unique<CollisionMonitor>(ctx.epsColl);
  if (name == "hullMonotone") return std::make_unique<HullMonotoneMonitor>(ctx.epsGeom);
  if (name == "vertexPersistence") return std::make_unique<VertexPersistenceMonitor>(ctx.epsGeom);
  if (name == "depletionHullFixed") return std::make_unique<DepletionHullFixedMonitor>(ctx.epsGeom, ctx.collinearStart);
  if (name == "secDrift") return std::make_unique<SecDriftMonitor>(ctx.circleColor, ctx.secTolerance);
  throw Error(ErrorCode::ConfigInvalid, "unknown monitor '" + name + "'");
}

namespace {

template <class F>
void forEachStep(const TraceView& trace, F&& f) {
  StepBuilder b(trace.initial, trace.lights);
  for (const auto& e : trace.events)
    if (auto s = b.feed(e); s && f(*s)) return;
}

bool isCollinearSet(const std::vector<Point2>& pts, double epsGeom) {
  auto h = tryHull(pts, epsGeom);
  return !h || h->isSegment;
}

}  // namespace

std::optional<Violation> runMonitor(Monitor& monitor, const TraceView& trace) {
  std::optional<Violation> found;
  forEachStep(trace, [&](const Step& s) {
    found = monitor.check(s);
    return found.has_value();
  });
  return found;
}

std::optional<Violation> monitorNoCollision(const TraceView& trace, double epsColl) {
  CollisionMonitor m(epsColl);
  return runMonitor(m, trace);
}

std::optional<Violation> monitorHullMonotone(const TraceView& trace, double epsGeom) {
  HullMonotoneMonitor m(epsGeom);
  return runMonitor(m, trace);
}

std::optional<Violation> monitorVertexPersistence(const TraceView& trace, double epsGeom) {
  VertexPersistenceMonitor m(epsGeom);
  return runMonitor(m, trace);
}

std::optional<Violation> monitorDepletionHullFixed(const TraceView& trace, double epsGeom) {
  DepletionHullFixedMonitor m(epsGeom, isCollinearSet(trace.initial, epsGeom));
  return runMonitor(m, trace);
}

std::optional<Violation> monitorSecDrift(const TraceView& trace, Light circleColor, double tolerance) {
  SecDriftMonitor m(circleColor, tolerance);
  return runMonitor(m, trace);
}

// ---------------------------------------------------------------------------
// Judges

bool judgeMutualVisibility(const Configuration& config, double epsGeom) {
  for (const auto& r : config.robots)
    if (r.status != Status::Terminated)
      throw Error(ErrorCode::NotAllTerminated, "robot " + std::to_string(r.id) + " has not terminated");
  return inGeneralPosition(config.currentPositions(), epsGeom);
}

bool judgeCircle(const Configuration& config, double tolerance) {
  const std::vector<Point2> pts = config.currentPositions();
  if (pts.size() < 3) return true;
  Circle c = smallestEnclosingCircle(pts);
  return std::all_of(pts.begin(), pts.end(), [&](Point2 p) { return std::abs(distance(p, c.center) - c.radius) <= tolerance; });
}

namespace {

double maxPairDistance(const std::vector<Point2>& pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, distance(pts[i], pts[j]));
  return d;
}

}  // namespace

bool judgeNearGathering(const TraceView& trace, double epsNG, double epsColl, std::optional<int> faulty) {
  CollisionMonitor collisions(epsColl);
  bool gathered = false, collided = false;
  auto ok = [&](const std::vector<Point2>& pts) {
    if (maxPairDistance(pts) >= epsNG) return false;
    if (!faulty) return true;
    return std::all_of(pts.begin(), pts.end(), [&](Point2 p) { return distance(p, pts[*faulty]) < epsNG; });
  };
  gathered = ok(trace.initial);
  forEachStep(trace, [&](const Step& s) {
    if (collisions.check(s)) {
      collided = true;
      return true;
    }
    gathered = gathered || ok(s.p1);
    return false;
  });
  return gathered && !collided;
}

// ---------------------------------------------------------------------------
// Pipeline

double initialDiameter(const std::vector<Point2>& initial) {
  double d = maxPairDistance(initial);
  return d > 0.0 ? d : 1.0;
}

PipelineSetup makePipelineSetup(const RunConfig& config, const std::vector<Point2>& initial) {
  Protocol proto = makeProtocol(config.protocol, config.params);
  PipelineSetup s;
  s.initial = initial;
  s.lights.assign(initial.size(), proto.initialLight);
  s.scheduler = config.scheduler;
  s.initialDiameter = initialDiameter(initial);
  s.epsGeom = config.tolerances.epsGeom;
  s.epsVis = config.tolerances.epsVis * s.initialDiameter;
  s.epsColl = config.tolerances.epsColl * s.initialDiameter;
  s.goal = effectiveGoal(config);
  s.monitors = effectiveMonitors(config);
  // Breaking a collinear start leaves chains whose turns sit at the hull
  // tolerance, so Contain's vertex set is only watched from a proper polygon.
  if (!config.monitors && config.protocol.rfind("contain", 0) == 0 && isCollinearSet(initial, s.epsGeom))
    std::erase(s.monitors, std::string("vertexPersistence"));
  s.circleColor = config.protocol == "contain-circle" ? Light::Done : Light::Vertex;
  return s;
}

Pipeline::Pipeline(PipelineSetup setup)
    : setup_(std::move(setup)), builder_(setup_.initial, setup_.lights), moved_(setup_.initial.size(), false) {
  MonitorContext ctx;
  ctx.epsGeom = setup_.epsGeom;
  ctx.epsColl = setup_.epsColl;
  ctx.collinearStart = isCollinearSet(setup_.initial, setup_.epsGeom);
  ctx.circleColor = setup_.circleColor;
  for (const auto& name : setup_.monitors) monitors_.push_back(makeMonitor(name, ctx));
}

Verdict Pipeline::makeVerdict(Outcome outcome, std::optional<Violation> violation, std::string reason) const {
  Verdict v;
  v.outcome = outcome;
  v.violation = std::move(violation);
  v.reason = std::move(reason);
  v.stats = stats_;
  v.stats.nearMisses = 0;
  for (const auto& m : monitors_) v.stats.nearMisses += m->warnings();
  return v;
}

void Pipeline::conclude(Outcome outcome, std::optional<Violation> violation, std::string reason) {
  if (!verdict_) verdict_ = makeVerdict(outcome, std::move(violation), std::move(reason));
}

void Pipeline::feed(const TraceEvent& e) {
  if (verdict_) return;
  const bool counts = setup_.scheduler == SchedulerKind::ASynch
                          ? (e.kind == EventKind::Look || e.kind == EventKind::ComputeEnd || e.kind == EventKind::MoveEnd)
                          : e.kind == EventKind::Round;
  if (auto s = builder_.feed(e)) onStep(*s);
  if (verdict_) return;
  if (counts) ++stats_.steps;
  if (e.kind == EventKind::Violation)
    conclude(Outcome::InvariantViolation, Violation{e.note, e.t, e.robots, "reported by the engine"});
}

void Pipeline::advanceTo(double t) {
  if (verdict_) return;
  if (auto s = builder_.advanceTo(t)) onStep(*s);
}

std::optional<Verdict> Pipeline::goalOnState(const std::vector<Point2>& pts, bool allTerminated, double t) const {
  const GoalSpec& g = setup_.goal;
  auto finalState = [&](std::string detail) {
    return makeVerdict(Outcome::InvariantViolation, Violation{"finalState", t, {}, std::move(detail)});
  };
  switch (g.kind) {
    case GoalKind::MutualVisibility:
    case GoalKind::SequentialVisibility:
      if (!allTerminated) return std::nullopt;
      if (inGeneralPosition(pts, setup_.epsGeom)) return makeVerdict(Outcome::Solved, std::nullopt);
      return finalState("robots not in mutual visibility");
    case GoalKind::Circle:
      if (!allTerminated) return std::nullopt;
      {
        Configuration c;
        for (Point2 p : pts) c.robots.push_back({0, p});
        if (judgeCircle(c)) return makeVerdict(Outcome::Solved, std::nullopt);
      }
      return finalState("robots not on one circle");
    case GoalKind::NearGathering:
      if (maxPairDistance(pts) < g.epsNG * setup_.initialDiameter) return makeVerdict(Outcome::Solved, std::nullopt);
      if (allTerminated) return finalState("terminated before gathering");
      return std::nullopt;
  }
  return std::nullopt;
}

void Pipeline::onStep(const Step& s) {
  for (auto& m : monitors_) {
    if (auto v = m->check(s)) {
      conclude(Outcome::InvariantViolation, v);
      return;
    }
  }

  if (auto h = tryHull(s.p1, setup_.epsGeom)) {
    stats_.hullArea.push_back(h->area());
    stats_.hullDiameter.push_back(h->diameter());
    stats_.vertexCount.push_back(static_cast<int>(h->vertexCount()));
    std::vector<Point2> inner;
    for (std::size_t i = 0; i < s.p1.size(); ++i)
      if (h->boundaryIndexOfInput(i) < 0) inner.push_back(s.p1[i]);
    double shortest = 0.0;
    if (inner.size() >= 2) {
      if (auto hi = tryHull(inner, setup_.epsGeom)) {
        shortest = std::numeric_limits<double>::infinity();
        for (const auto& e : hi->edges()) shortest = std::min(shortest, distance(e.a, e.b));
      }
    }
    stats_.shortestInteriorEdge.push_back(shortest);
  }

  const bool allTerminated = std::all_of(s.terminated.begin(), s.terminated.end(), [](bool b) { return b; });
  if (setup_.goal.kind == GoalKind::SequentialVisibility && !allTerminated) {
    for (std::size_t i = 0; i < s.moving.size(); ++i) moved_[i] = moved_[i] || s.moving[i];
    if (std::all_of(moved_.begin(), moved_.end(), [](bool b) { return b; })) {
      std::vector<Point2> blockers;
      for (std::size_t i = 0; i < s.p1.size(); ++i)
        for (std::size_t j = i + 1; j < s.p1.size(); ++j) {
          blockers.clear();
          for (std::size_t k = 0; k < s.p1.size(); ++k)
            if (k != i && k != j) blockers.push_back(s.p1[k]);
          if (!isVisible(s.p1[i], s.p1[j], blockers, setup_.epsVis)) {
            conclude(Outcome::InvariantViolation,
                     Violation{"visibility", s.t1, {static_cast<int>(i), static_cast<int>(j)}, "pair not mutually visible"});
            return;
          }
        }
      if (++roundsAfterAllMoved_ >= setup_.goal.extraRounds) {
        conclude(Outcome::Solved, std::nullopt);
        return;
      }
    }
    return;
  }
  if (auto v = goalOnState(s.p1, allTerminated, s.t1)) verdict_ = *v;
}

std::optional<Verdict> Pipeline::preview() const {
  if (verdict_) return verdict_;
  const Configuration& c = builder_.state();
  bool allTerminated = std::all_of(c.robots.begin(), c.robots.end(), [](const RobotState& r) { return r.status == Status::Terminated; });
  return goalOnState(c.currentPositions(), allTerminated, c.time);
}

void Pipeline::finish() {
  if (verdict_) return;
  if (auto v = preview()) verdict_ = *v;
}

// ---------------------------------------------------------------------------
// Experiment

namespace {

EngineOptions engineOptions(const RunConfig& c, const Protocol& proto, double d0) {
  EngineOptions o;
  o.kind = c.scheduler;
  o.rigidity.kind = c.rigidity.kind;
  double delta = 0.0;
  if (c.rigidity.delta) delta = *c.rigidity.delta;
  if (c.rigidity.deltaFraction) delta = *c.rigidity.deltaFraction * d0;
  o.rigidity.delta = delta;
  if (c.knowledge.n.value_or(proto.needsN)) o.knowledge.n = c.n;
  if (c.knowledge.delta.value_or(proto.needsDelta) && delta > 0.0) o.knowledge.delta = delta;
  o.knowledge.axis = c.knowledge.axis.value_or(proto.needsAxis);
  o.epsVis = c.tolerances.epsVis * d0;
  o.epsColl = c.tolerances.epsColl * d0;
  o.faulty.insert(c.faults.begin(), c.faults.end());
  o.window = c.adversary.window;
  return o;
}

ProtocolParams protocolParams(const RunConfig& c) {
  ProtocolParams p = c.params;
  p.epsGeom = c.tolerances.epsGeom;
  p.epsNudgeFraction = c.tolerances.epsNudge;
  return p;
}

std::vector<int> closestPair(const Configuration& c) {
  std::vector<Point2> pts = c.currentPositions();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (distance(pts[i], pts[j]) < best) {
        best = distance(pts[i], pts[j]);
        out = {static_cast<int>(i), static_cast<int>(j)};
      }
  return out;
}

}  // namespace

json traceHeader(const RunConfig& config, const std::vector<Point2>& initial) {
  json cfg = toJson(config, false);
  json pts = json::array();
  for (Point2 p : initial) pts.push_back({p.x, p.y});
  return {{"format", kTraceFormat},
          {"version", kTraceVersion},
          {"configHash", hex64(fnv1a(cfg.dump()))},
          {"config", cfg},
          {"initial", pts}};
}

Experiment::Experiment(RunConfig config) : Experiment(std::move(config), nullptr, false) {}

Experiment::Experiment(RunConfig config, Adversary& adversary, bool interactive)
    : Experiment(std::move(config), &adversary, interactive) {}

Experiment::Experiment(RunConfig config, Adversary* adversary, bool interactive)
    : config_(std::move(config)),
      protocol_(makeProtocol(config_.protocol, protocolParams(config_))),
      initial_(initialPositions(config_)),
      d0_(lumiswarm::initialDiameter(initial_)),
      adversary_(adversary),
      interactive_(interactive),
      pipeline_(makePipelineSetup(config_, initial_)) {
  if (!adversary_) {
    owned_ = makeAdversary(config_);
    adversary_ = owned_.get();
  }
  init();
}

void Experiment::init() {
  if (static_cast<int>(initial_.size()) != config_.n) throw Error(ErrorCode::ConfigInvalid, "wrong number of points");
  try {
    convexHull(initial_, config_.tolerances.epsGeom);
  } catch (const Error&) {
    throw Error(ErrorCode::ConfigInvalid, "initial positions must be pairwise distinct");
  }
  Configuration c;
  for (std::size_t i = 0; i < initial_.size(); ++i) {
    RobotState r;
    r.id = static_cast<int>(i);
    r.position = initial_[i];
    r.light = protocol_.initialLight;
    c.robots.push_back(r);
  }
  engine_ = makeEngine(c, protocol_, engineOptions(config_, protocol_, d0_));
  trace_.setHeader(traceHeader(config_, initial_));
}

json Experiment::footerFor(const Verdict& v) const {
  return {{"verdict", v.toJson()}, {"stats", v.stats.summary()}, {"tEnd", pipeline_.builder().time()}};
}

void Experiment::seal() {
  if (footerWritten_ || !pipeline_.concluded()) return;
  const Verdict& v = *pipeline_.verdict();
  if (v.violation && v.violation->kind != "finalState") {
    const bool alreadyLogged = !trace_.events().empty() && trace_.events().back().kind == EventKind::Violation;
    if (!alreadyLogged) {
      TraceEvent ev{v.violation->time, EventKind::Violation};
      ev.robot = v.violation->robots.empty() ? -1 : v.violation->robots.front();
      ev.note = v.violation->kind;
      ev.robots = v.violation->robots;
      // Keep the log time-ordered even when the violation lies inside the last step.
      ev.t = std::max(ev.t, pipeline_.builder().time());
      trace_.add(ev);
    }
  }
  trace_.setFooter(footerFor(v));
  footerWritten_ = true;
}

std::vector<int> Experiment::pendingRobots() const {
  if (auto* a = dynamic_cast<const AsynchEngine*>(engine_.get())) return a->needPlans();
  if (auto* s = dynamic_cast<const SyncEngine*>(engine_.get())) return s->eligible();
  return {};
}

Experiment::Progress Experiment::advance() {
  if (pipeline_.concluded()) {
    seal();
    return Progress::Finished;
  }
  const bool asynch = config_.scheduler == SchedulerKind::ASynch;
  auto capped = [&](const char* reason) {
    pipeline_.finish();
    pipeline_.conclude(Outcome::CapExceeded, std::nullopt, reason);
    seal();
    return Progress::Finished;
  };
  if (!asynch && engine_->steps() >= config_.caps.maxRounds) return capped("maxRounds");
  if (asynch && engine_->steps() >= config_.caps.maxEvents) return capped("maxEvents");
  if (asynch && engine_->nextTime() > config_.caps.maxTime) return capped("maxTime");

  lastEvents_.clear();
  StepStatus st;
  try {
    st = engine_->step(*adversary_, lastEvents_);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::FairnessViolation:
      case ErrorCode::IllegalDecision:
      case ErrorCode::EmptyActivationRejected:
      case ErrorCode::ConfigInvalid:
        throw;
      case ErrorCode::CollisionPresent: {
        const Configuration& c = engine_->configuration();
        pipeline_.advanceTo(c.time);
        pipeline_.conclude(Outcome::InvariantViolation, Violation{"collision", c.time, closestPair(c), e.what()});
        seal();
        return Progress::Finished;
      }
      default: {
        const Configuration& c = engine_->configuration();
        pipeline_.advanceTo(c.time);
        pipeline_.conclude(Outcome::InvariantViolation, Violation{std::string(toString(e.code())), c.time, {}, e.what()});
        seal();
        return Progress::Finished;
      }
    }
  }
  for (const auto& ev : lastEvents_) {
    trace_.add(ev);
    pipeline_.feed(ev);
  }
  for (auto& w : engine_->takeWarnings()) warnings_.push_back(std::move(w));

  if (st == StepStatus::NoDecision) {
    if (interactive_ && !pipeline_.concluded()) return Progress::AwaitingDecision;
    return capped("decisionsExhausted");
  }
  if (st == StepStatus::Done) {
    pipeline_.finish();
    if (!pipeline_.concluded()) return capped("noProgress");
  } else {
    pipeline_.advanceTo(engine_->nextTime());
  }
  if (pipeline_.concluded()) {
    seal();
    return Progress::Finished;
  }
  return Progress::Advanced;
}

Experiment::Progress Experiment::runToEnd() {
  Progress p;
  do p = advance();
  while (p == Progress::Advanced);
  return p;
}

std::string Experiment::traceText() const {
  if (footerWritten_) return trace_.text();
  Verdict v = pipeline_.makeVerdict(Outcome::CapExceeded, std::nullopt, "decisionsExhausted");
  if (auto pv = pipeline_.preview()) v = *pv;
  return trace_.withFooter(footerFor(v)).text();
}

RunResult runExperiment(const RunConfig& config) {
  Experiment ex(config);
  ex.runToEnd();
  return {ex.trace(), ex.verdict()};
}

// ---------------------------------------------------------------------------
// Replay

ReplayResult replayTrace(std::string_view text) {
  ParsedTrace parsed = parseTrace(text);
  ReplayResult out;
  out.checksumOk = parsed.checksumOk;
  RunConfig config;
  std::vector<Point2> initial;
  try {
    config = parseRunConfig(parsed.header.at("config"));
    for (const auto& p : parsed.header.at("initial")) initial.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  } catch (const std::exception& e) {
    throw Error(ErrorCode::TraceInvalid, std::string("bad trace header: ") + e.what());
  }
  if (parsed.header.value("configHash", "") != hex64(fnv1a(toJson(config, false).dump())))
    out.message = "config hash mismatch; ";

  Pipeline pipeline(makePipelineSetup(config, initial));
  for (const auto& e : parsed.events) pipeline.feed(e);
  const json& footer = parsed.footer;
  if (footer.contains("tEnd")) pipeline.advanceTo(footer["tEnd"].get<double>());
  pipeline.finish();
  if (!pipeline.concluded()) {
    std::string reason = "unknown";
    if (footer.contains("verdict")) reason = footer["verdict"].value("reason", "unknown");
    pipeline.conclude(Outcome::CapExceeded, std::nullopt, reason);
  }
  out.verdict = *pipeline.verdict();

  json recomputed = {{"verdict", out.verdict.toJson()},
                     {"stats", out.verdict.stats.summary()},
                     {"tEnd", pipeline.builder().time()}};
  json recorded = footer;
  recorded.erase("checksum");
  out.matches = recomputed == recorded;
  if (!out.checksumOk) out.message += "checksum mismatch; ";
  if (!out.matches) out.message += "recomputed verdict differs from the recorded footer; ";
  if (out.message.empty()) out.message = "ok";
  return out;
}

}  // namespace lumiswarm
