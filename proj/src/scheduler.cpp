#include "lumiswarm/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "lumiswarm/error.hpp"

namespace lumiswarm {

std::string_view toString(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::FSynch: return "fsynch";
    case SchedulerKind::SSynch: return "ssynch";
    case SchedulerKind::Sequential: return "sequential";
    case SchedulerKind::ASynch: return "asynch";
  }
  return "ssynch";
}

SchedulerKind schedulerFromString(std::string_view s) {
  for (SchedulerKind k : {SchedulerKind::FSynch, SchedulerKind::SSynch, SchedulerKind::Sequential, SchedulerKind::ASynch})
    if (toString(k) == s) return k;
  throw Error(ErrorCode::ConfigInvalid, "unknown scheduler '" + std::string(s) + "'");
}

double RigidityModel::realize(double requested, double fraction) const {
  if (kind == Kind::Rigid || requested <= delta || fraction >= 1.0) return requested;
  return std::max(std::max(fraction, 0.0) * requested, delta);
}

// ---------------------------------------------------------------------------
// Adversaries

PolicyAdversary::PolicyAdversary(ActivationPolicy activation, FramePolicy frames, TruncationPolicy truncation,
                                 TimingPolicy timing, bool singleton)
    : activation_(activation),
      frames_(frames),
      truncation_(truncation),
      timing_(timing),
      singleton_(singleton),
      activationRng_(activation.seed),
      frameRng_(frames.seed),
      truncationRng_(truncation.seed),
      timingRng_(timing.seed) {}

FrameSpec PolicyAdversary::drawFrame() {
  if (frames_.kind == FramePolicy::Kind::Identity) return {};
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi), logScale(std::log(0.1), std::log(10.0));
  std::bernoulli_distribution coin(0.5);
  FrameSpec f;
  f.rotation = angle(frameRng_);
  f.reflect = coin(frameRng_);
  f.scale = std::exp(logScale(frameRng_));
  return f;
}

double PolicyAdversary::drawFraction() {
  switch (truncation_.kind) {
    case TruncationPolicy::Kind::None: return 1.0;
    case TruncationPolicy::Kind::Worst: return 0.0;
    case TruncationPolicy::Kind::RandomFair: {
      std::bernoulli_distribution full(0.5);
      if (full(truncationRng_)) return 1.0;
      return std::uniform_real_distribution<double>(0.0, 1.0)(truncationRng_);
    }
  }
  return 1.0;
}

std::optional<RoundDecision> PolicyAdversary::nextRound(const Configuration& config, const std::vector<int>& eligible,
                                                        long round) {
  RoundDecision d;
  if (eligible.empty()) return d;
  const int window = activation_.window > 0 ? activation_.window : 2 * static_cast<int>(config.robots.size());
  auto since = [&](int id) {
    auto it = lastActive_.find(id);
    return it == lastActive_.end() ? round + 1 : round - it->second;
  };
  // Robots that must run now to keep the fairness window. A singleton
  // scheduler serves one robot per round, so it starts on the longest-waiting
  // robot early enough to reach everybody in time.
  const int lead = singleton_ ? static_cast<int>(eligible.size()) : 0;
  std::vector<int> due;
  for (int id : eligible)
    if (since(id) >= std::max(1, window - lead)) due.push_back(id);
  auto longestWaiting = [&] {
    int pick = due.front();
    for (int id : due)
      if (since(id) > since(pick)) pick = id;
    return pick;
  };

  switch (activation_.kind) {
    case ActivationPolicy::Kind::Full:
      d.activate = eligible;
      break;
    case ActivationPolicy::Kind::RoundRobin: {
      cursor_ %= eligible.size();
      d.activate = {eligible[cursor_]};
      cursor_ = (cursor_ + 1) % eligible.size();
      break;
    }
    case ActivationPolicy::Kind::RandomFair: {
      if (singleton_) {
        if (!due.empty()) {
          d.activate = {longestWaiting()};
        } else {
          std::uniform_int_distribution<std::size_t> any(0, eligible.size() - 1);
          d.activate = {eligible[any(activationRng_)]};
        }
        break;
      }
      std::bernoulli_distribution coin(activation_.probability);
      for (int id : eligible)
        if (coin(activationRng_) || std::find(due.begin(), due.end(), id) != due.end()) d.activate.push_back(id);
      if (d.activate.empty()) {
        std::uniform_int_distribution<std::size_t> any(0, eligible.size() - 1);
        d.activate = {eligible[any(activationRng_)]};
      }
      break;
    }
    case ActivationPolicy::Kind::MinimalFair: {
      if (!due.empty()) {
        d.activate = singleton_ ? std::vector<int>{longestWaiting()} : due;
      } else {
        cursor_ %= eligible.size();
        d.activate = {eligible[cursor_]};
        cursor_ = (cursor_ + 1) % eligible.size();
      }
      break;
    }
  }
  for (int id : d.activate) {
    lastActive_[id] = round;
    d.frames[id] = drawFrame();
    d.fractions[id] = drawFraction();
  }
  return d;
}

std::optional<PlanSet> PolicyAdversary::nextPlans(const Configuration&, const std::vector<int>& need, double) {
  PlanSet out;
  double idleMax = timing_.maxIdle, computeMax = timing_.maxCompute, moveMax = timing_.maxMove;
  double moveMin = 0.05 * moveMax;
  if (timing_.kind == TimingPolicy::Kind::MidMove) {
    idleMax *= 0.2;
    computeMax *= 0.2;
    moveMin = 2.0 * moveMax;
    moveMax *= 6.0;
  }
  for (int id : need) {
    CyclePlan p;
    p.idle = std::uniform_real_distribution<double>(0.02 * idleMax, idleMax)(timingRng_);
    p.compute = std::uniform_real_distribution<double>(0.02 * computeMax, computeMax)(timingRng_);
    p.move = std::uniform_real_distribution<double>(moveMin, moveMax)(timingRng_);
    p.frame = drawFrame();
    p.fraction = drawFraction();
    out[id] = p;
  }
  return out;
}

ScriptedAdversary::ScriptedAdversary(std::vector<RoundDecision> rounds, std::vector<PlanSet> plans,
                                     std::map<int, std::vector<CyclePlan>> cyclicPlans,
                                     std::unique_ptr<Adversary> fallback)
    : rounds_(std::move(rounds)), plans_(std::move(plans)), cyclic_(std::move(cyclicPlans)), fallback_(std::move(fallback)) {}

std::optional<RoundDecision> ScriptedAdversary::nextRound(const Configuration& config, const std::vector<int>& eligible,
                                                          long round) {
  if (roundCursor_ < rounds_.size()) return rounds_[roundCursor_++];
  if (!fallback_) return std::nullopt;
  usingFallback_ = true;
  return fallback_->nextRound(config, eligible, round);
}

std::optional<PlanSet> ScriptedAdversary::nextPlans(const Configuration& config, const std::vector<int>& need,
                                                    double now) {
  if (planCursor_ < plans_.size()) return plans_[planCursor_++];
  if (!cyclic_.empty()) {
    PlanSet out;
    std::vector<int> rest;
    for (int id : need) {
      auto it = cyclic_.find(id);
      if (it == cyclic_.end() || it->second.empty()) {
        rest.push_back(id);
        continue;
      }
      std::size_t& c = cyclicCursor_[id];
      out[id] = it->second[c % it->second.size()];
      ++c;
    }
    if (!rest.empty()) {
      if (!fallback_) return std::nullopt;
      auto more = fallback_->nextPlans(config, rest, now);
      if (!more) return std::nullopt;
      out.insert(more->begin(), more->end());
    }
    return out;
  }
  if (!fallback_) return std::nullopt;
  usingFallback_ = true;
  return fallback_->nextPlans(config, need, now);
}

std::optional<RoundDecision> InteractiveAdversary::nextRound(const Configuration&, const std::vector<int>&, long) {
  if (rounds_.empty()) return std::nullopt;
  RoundDecision d = std::move(rounds_.front());
  rounds_.pop_front();
  return d;
}

std::optional<PlanSet> InteractiveAdversary::nextPlans(const Configuration&, const std::vector<int>&, double) {
  if (plans_.empty()) return std::nullopt;
  PlanSet p = std::move(plans_.front());
  plans_.pop_front();
  return p;
}

// ---------------------------------------------------------------------------
// Synchronous rounds

namespace {

std::size_t indexOf(const Configuration& config, int id) {
  for (std::size_t i = 0; i < config.robots.size(); ++i)
    if (config.robots[i].id == id) return i;
  throw Error(ErrorCode::IllegalDecision, "unknown robot " + std::to_string(id));
}

void checkFrame(const FrameSpec& f, int id) {
  if (!(f.scale > 0.0) || !std::isfinite(f.scale) || !std::isfinite(f.rotation))
    throw Error(ErrorCode::IllegalDecision, "invalid frame for robot " + std::to_string(id));
}

}  // namespace

RoundRecord ssynchRound(Configuration& config, const Protocol& protocol, const RoundDecision& decision,
                        const EngineOptions& options, long round) {
  if (decision.activate.empty()) throw Error(ErrorCode::EmptyActivationRejected, "empty activation set");
  RoundRecord rec;
  rec.round = round;
  const double t0 = static_cast<double>(round);
  config.time = t0;

  std::vector<int> active = decision.activate;
  std::sort(active.begin(), active.end());
  if (std::adjacent_find(active.begin(), active.end()) != active.end())
    throw Error(ErrorCode::IllegalDecision, "robot activated twice in one round");
  if (options.kind == SchedulerKind::FSynch) {
    std::size_t live = 0;
    for (const auto& r : config.robots)
      if (r.status != Status::Terminated) ++live;
    if (active.size() != live) throw Error(ErrorCode::IllegalDecision, "FSYNCH activates every live robot");
  }
  for (int id : active) {
    std::size_t i = indexOf(config, id);
    if (config.robots[i].status == Status::Terminated)
      throw Error(ErrorCode::IllegalDecision, "robot " + std::to_string(id) + " has terminated");
  }
  rec.activated = active;
  rec.events.push_back({t0, EventKind::Round});

  // Every Look sees the configuration as it was at the start of the round.
  struct Pending {
    std::size_t index;
    FrameSpec frame;
    Action action;
  };
  std::vector<Pending> pending;
  for (int id : active) {
    std::size_t i = indexOf(config, id);
    FrameSpec frame;
    if (auto it = decision.frames.find(id); it != decision.frames.end()) frame = it->second;
    checkFrame(frame, id);
    Snapshot snap = takeSnapshot(config, i, frame, options.knowledge, options.epsVis, options.epsColl);
    Action act = protocol.step(snap);
    if (!protocol.inPalette(act.newLight))
      throw Error(ErrorCode::PreconditionNotMet, "protocol produced a light outside its palette");
    TraceEvent look{t0, EventKind::Look, id, config.robots[i].position};
    look.frame = frame;
    rec.events.push_back(look);
    pending.push_back({i, frame, act});
  }

  std::vector<TraceEvent> moves, ends;
  for (const auto& p : pending) {
    RobotState& r = config.robots[p.index];
    if (p.action.newLight != r.light) {
      TraceEvent ev{t0, EventKind::Light, r.id};
      ev.light = p.action.newLight;
      rec.events.push_back(ev);
      r.light = p.action.newLight;
    }
    if (p.action.terminate) {
      rec.events.push_back({t0, EventKind::Terminate, r.id});
      r.status = Status::Terminated;
      continue;
    }
    if (options.faulty.count(r.id)) continue;
    LocalFrame lf = LocalFrame::at(r.position, p.frame);
    Point2 target = applyFrameInverse(lf, p.action.destination);
    double requested = distance(target, r.position);
    if (requested == 0.0) continue;
    double fraction = 1.0;
    if (auto it = decision.fractions.find(r.id); it != decision.fractions.end()) fraction = it->second;
    if (!std::isfinite(fraction)) throw Error(ErrorCode::IllegalDecision, "truncation fraction must be finite");
    double realized = options.rigidity.realize(requested, fraction);
    double f = realized / requested;
    Point2 end = f >= 1.0 ? target : r.position + f * (target - r.position);
    TraceEvent ms{t0, EventKind::MoveStart, r.id, r.position};
    ms.dest = end;
    ms.tEnd = t0 + 1.0;
    ms.realizedFraction = f;
    moves.push_back(ms);
    TraceEvent me{t0 + 1.0, EventKind::MoveEnd, r.id, end};
    ends.push_back(me);
    r.position = end;
  }
  rec.events.insert(rec.events.end(), moves.begin(), moves.end());
  rec.events.insert(rec.events.end(), ends.begin(), ends.end());
  config.time = t0 + 1.0;
  return rec;
}

RoundRecord sequentialRound(Configuration& config, const Protocol& protocol, const RoundDecision& decision,
                            const EngineOptions& options, long round) {
  if (decision.activate.empty()) throw Error(ErrorCode::EmptyActivationRejected, "empty activation set");
  if (decision.activate.size() != 1)
    throw Error(ErrorCode::IllegalDecision, "the sequential scheduler activates exactly one robot");
  return ssynchRound(config, protocol, decision, options, round);
}

bool Engine::allTerminated() const {
  for (const auto& r : configuration().robots)
    if (r.status != Status::Terminated) return false;
  return true;
}

SyncEngine::SyncEngine(Configuration initial, Protocol protocol, EngineOptions options)
    : config_(std::move(initial)), protocol_(std::move(protocol)), options_(std::move(options)),
      lastActive_(config_.robots.size(), -1) {}

std::vector<int> SyncEngine::eligible() const {
  std::vector<int> out;
  for (const auto& r : config_.robots)
    if (r.status != Status::Terminated) out.push_back(r.id);
  return out;
}

StepStatus SyncEngine::step(Adversary& adversary, std::vector<TraceEvent>& out) {
  if (allTerminated()) return StepStatus::Done;
  std::vector<int> live = eligible();
  std::optional<RoundDecision> d;
  if (options_.kind == SchedulerKind::FSynch) {
    d = adversary.nextRound(config_, live, round_);
    if (!d) return StepStatus::NoDecision;
    d->activate = live;
  } else {
    d = adversary.nextRound(config_, live, round_);
    if (!d) return StepStatus::NoDecision;
  }
  RoundRecord rec = options_.kind == SchedulerKind::Sequential
                        ? sequentialRound(config_, protocol_, *d, options_, round_)
                        : ssynchRound(config_, protocol_, *d, options_, round_);
  for (int id : rec.activated) lastActive_[indexOf(config_, id)] = round_;

  const long window = options_.window > 0 ? options_.window : 2 * static_cast<long>(config_.robots.size());
  for (std::size_t i = 0; i < config_.robots.size(); ++i) {
    if (config_.robots[i].status == Status::Terminated) continue;
    if (round_ - lastActive_[i] >= window) {
      std::string msg = "robot " + std::to_string(config_.robots[i].id) + " idle for " +
                        std::to_string(round_ - lastActive_[i]) + " rounds";
      if (adversary.enforcesFairness()) throw Error(ErrorCode::FairnessViolation, msg);
      warnings_.push_back(msg);
    }
  }
  out.insert(out.end(), rec.events.begin(), rec.events.end());
  ++round_;
  return StepStatus::Progressed;
}

// ---------------------------------------------------------------------------
// Asynchronous event engine

AsynchEngine::AsynchEngine(Configuration initial, Protocol protocol, EngineOptions options)
    : config_(std::move(initial)), protocol_(std::move(protocol)), options_(std::move(options)),
      cycles_(config_.robots.size()) {}

std::vector<int> AsynchEngine::needPlans() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < config_.robots.size(); ++i)
    if (config_.robots[i].status == Status::Idle && !cycles_[i].planned) out.push_back(config_.robots[i].id);
  return out;
}

double AsynchEngine::nextTime() const {
  // A robot waiting for a plan may look as soon as now.
  if (queue_.empty() || !needPlans().empty()) return config_.time;
  return queue_.top().time;
}

void AsynchEngine::applyPlans(const PlanSet& plans, const std::vector<int>& need) {
  for (int id : need) {
    auto it = plans.find(id);
    if (it == plans.end()) throw Error(ErrorCode::IllegalDecision, "no cycle plan for robot " + std::to_string(id));
    const CyclePlan& p = it->second;
    if (!(p.idle > 0.0) || !(p.compute > 0.0) || !(p.move > 0.0) || !std::isfinite(p.idle + p.compute + p.move))
      throw Error(ErrorCode::IllegalDecision, "cycle durations must be positive and finite");
    checkFrame(p.frame, id);
  }
  for (int id : need) {
    const CyclePlan& p = plans.at(id);
    std::size_t i = indexOf(config_, id);
    cycles_[i].planned = true;
    cycles_[i].plan = p;
    queue_.push({config_.time + p.idle, id, Kind::Look});
  }
}

StepStatus AsynchEngine::step(Adversary& adversary, std::vector<TraceEvent>& out) {
  if (allTerminated()) return StepStatus::Done;
  std::vector<int> need = needPlans();
  if (!need.empty()) {
    auto plans = adversary.nextPlans(config_, need, config_.time);
    if (!plans) return StepStatus::NoDecision;
    applyPlans(*plans, need);
  }
  if (queue_.empty()) return StepStatus::Done;
  Pending ev = queue_.top();
  queue_.pop();
  ++events_;
  config_.time = ev.time;
  std::size_t i = indexOf(config_, ev.robot);
  RobotState& r = config_.robots[i];
  RobotCycle& cyc = cycles_[i];

  switch (ev.kind) {
    case Kind::Look: {
      Snapshot snap = takeSnapshot(config_, i, cyc.plan.frame, options_.knowledge, options_.epsVis, options_.epsColl);
      cyc.action = protocol_.step(snap);
      if (!protocol_.inPalette(cyc.action.newLight))
        throw Error(ErrorCode::PreconditionNotMet, "protocol produced a light outside its palette");
      cyc.frame = cyc.plan.frame;
      r.status = Status::Computing;
      TraceEvent look{ev.time, EventKind::Look, r.id, r.position};
      look.frame = cyc.frame;
      out.push_back(look);
      queue_.push({ev.time + cyc.plan.compute, r.id, Kind::ComputeEnd});
      break;
    }
    case Kind::ComputeEnd: {
      LocalFrame lf = LocalFrame::at(r.position, cyc.frame);
      Point2 target = applyFrameInverse(lf, cyc.action.destination);
      TraceEvent ce{ev.time, EventKind::ComputeEnd, r.id};
      ce.light = cyc.action.newLight;
      ce.dest = target;
      out.push_back(ce);
      if (cyc.action.newLight != r.light) {
        TraceEvent le{ev.time, EventKind::Light, r.id};
        le.light = cyc.action.newLight;
        out.push_back(le);
        r.light = cyc.action.newLight;
      }
      if (cyc.action.terminate) {
        out.push_back({ev.time, EventKind::Terminate, r.id});
        r.status = Status::Terminated;
        break;
      }
      double requested = distance(target, r.position);
      if (options_.faulty.count(r.id)) requested = 0.0;
      double f = requested > 0.0 ? options_.rigidity.realize(requested, cyc.plan.fraction) / requested : 1.0;
      Point2 end = requested == 0.0 ? r.position : (f >= 1.0 ? target : r.position + f * (target - r.position));
      // A zero-length move is a Move phase of zero duration.
      double tEnd = requested > 0.0 ? ev.time + cyc.plan.move : ev.time;
      TraceEvent ms{ev.time, EventKind::MoveStart, r.id, r.position};
      ms.dest = end;
      ms.tEnd = tEnd;
      ms.realizedFraction = f;
      out.push_back(ms);
      r.status = Status::Moving;
      r.moveTo = end;
      r.moveStart = ev.time;
      r.moveEnd = tEnd;
      queue_.push({tEnd, r.id, Kind::MoveEnd});
      break;
    }
    case Kind::MoveEnd: {
      r.position = r.moveTo;
      r.status = Status::Idle;
      cyc.planned = false;
      out.push_back({ev.time, EventKind::MoveEnd, r.id, r.position});
      break;
    }
  }
  return StepStatus::Progressed;
}

std::unique_ptr<Engine> makeEngine(const Configuration& initial, const Protocol& protocol, const EngineOptions& options) {
  if (options.kind == SchedulerKind::ASynch) return std::make_unique<AsynchEngine>(initial, protocol, options);
  return std::make_unique<SyncEngine>(initial, protocol, options);
}

}  // namespace lumiswarm
