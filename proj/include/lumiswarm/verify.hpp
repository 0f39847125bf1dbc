#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lumiswarm/config.hpp"
#include "lumiswarm/scheduler.hpp"
#include "lumiswarm/trace.hpp"

namespace lumiswarm {

struct Violation {
  std::string kind;  // collision, hullMonotone, vertexPersistence, depletionHullFixed, secDrift, finalState, ...
  double time = 0.0;
  std::vector<int> robots;
  std::string detail;
};

enum class Outcome { Solved, InvariantViolation, CapExceeded };
std::string_view toString(Outcome o);

struct RunStats {
  long steps = 0;  // rounds, or processed ASYNCH queue entries
  std::vector<double> hullArea;
  std::vector<double> hullDiameter;
  std::vector<int> vertexCount;
  std::vector<double> shortestInteriorEdge;  // 0 when fewer than two robots are internal
  long nearMisses = 0;

  nlohmann::json summary() const;
};

struct Verdict {
  Outcome outcome = Outcome::CapExceeded;
  std::optional<Violation> violation;
  std::string reason;  // CapExceeded only
  RunStats stats;

  nlohmann::json toJson() const;  // outcome part, without stats
};

// Motion between two consecutive event times. Every robot moves linearly
// (or not at all) inside one step.
struct Step {
  double t0 = 0.0, t1 = 0.0;
  std::vector<Point2> p0, p1;
  std::vector<Light> lightsBefore;  // lights at t0 before any event at t0 applied
  std::vector<Light> lights;        // lights at t1
  std::vector<bool> terminated;
  std::vector<bool> moving;
};

// Rebuilds the global state from trace events alone, so a live run and a
// replay see exactly the same steps.
class StepBuilder {
 public:
  StepBuilder(const std::vector<Point2>& initial, const std::vector<Light>& lights);
  // Applies the event; returns the step it closed, if any. Throws TraceInvalid
  // when time runs backwards.
  std::optional<Step> feed(const TraceEvent& e);
  std::optional<Step> advanceTo(double t);
  const Configuration& state() const { return state_; }
  double time() const { return state_.time; }

 private:
  std::optional<Step> close(double t);

  Configuration state_;
  std::vector<Light> lightsAtStart_;
};

struct MonitorContext {
  double epsGeom = 1e-9;
  double epsColl = 0.0;  // absolute
  bool collinearStart = false;
  Light circleColor = Light::Vertex;
  double secTolerance = 1e-9;
};

class Monitor {
 public:
  virtual ~Monitor() = default;
  virtual std::string name() const = 0;
  virtual std::optional<Violation> check(const Step& step) = 0;
  virtual long warnings() const { return 0; }
};

// Throws ConfigInvalid for unknown names.
std::unique_ptr<Monitor> makeMonitor(const std::string& name, const MonitorContext& ctx);

// A recorded run viewed from the outside: starting state plus events.
struct TraceView {
  std::vector<Point2> initial;
  std::vector<Light> lights;
  std::vector<TraceEvent> events;
};

std::optional<Violation> runMonitor(Monitor& monitor, const TraceView& trace);
std::optional<Violation> monitorNoCollision(const TraceView& trace, double epsColl);
std::optional<Violation> monitorHullMonotone(const TraceView& trace, double epsGeom = 1e-9);
std::optional<Violation> monitorVertexPersistence(const TraceView& trace, double epsGeom = 1e-9);
std::optional<Violation> monitorDepletionHullFixed(const TraceView& trace, double epsGeom = 1e-9);
std::optional<Violation> monitorSecDrift(const TraceView& trace, Light circleColor, double tolerance = 1e-9);

// Throws NotAllTerminated.
bool judgeMutualVisibility(const Configuration& config, double epsGeom = 1e-9);
bool judgeCircle(const Configuration& config, double tolerance = 1e-6);
// Diameter dropped below epsNG (absolute) with no collision; with a faulty
// robot, every robot also ended within epsNG of it.
bool judgeNearGathering(const TraceView& trace, double epsNG, double epsColl, std::optional<int> faulty = std::nullopt);

struct PipelineSetup {
  std::vector<Point2> initial;
  std::vector<Light> lights;
  SchedulerKind scheduler = SchedulerKind::SSynch;
  double initialDiameter = 1.0;
  double epsGeom = 1e-9;
  double epsVis = 0.0;   // absolute
  double epsColl = 0.0;  // absolute
  GoalSpec goal;
  std::vector<std::string> monitors;
  Light circleColor = Light::Vertex;
};

PipelineSetup makePipelineSetup(const RunConfig& config, const std::vector<Point2>& initial);
double initialDiameter(const std::vector<Point2>& initial);

// Monitors, statistics and the goal judge over a stream of trace events.
class Pipeline {
 public:
  explicit Pipeline(PipelineSetup setup);
  void feed(const TraceEvent& e);
  void advanceTo(double t);
  // Evaluates the goal on the current state once no more events will come.
  void finish();
  // The verdict finish() would reach, without changing anything.
  std::optional<Verdict> preview() const;
  void conclude(Outcome outcome, std::optional<Violation> violation, std::string reason = {});
  // A verdict carrying the statistics gathered so far.
  Verdict makeVerdict(Outcome outcome, std::optional<Violation> violation, std::string reason = {}) const;

  bool concluded() const { return verdict_.has_value(); }
  const std::optional<Verdict>& verdict() const { return verdict_; }
  const RunStats& stats() const { return stats_; }
  const StepBuilder& builder() const { return builder_; }
  const PipelineSetup& setup() const { return setup_; }

 private:
  void onStep(const Step& s);
  std::optional<Verdict> goalOnState(const std::vector<Point2>& pts, bool allTerminated, double t) const;

  PipelineSetup setup_;
  StepBuilder builder_;
  std::vector<std::unique_ptr<Monitor>> monitors_;
  RunStats stats_;
  std::optional<Verdict> verdict_;
  std::vector<bool> moved_;
  long roundsAfterAllMoved_ = -1;
};

// One run: engine, adversary, trace and pipeline kept in lock step.
class Experiment {
 public:
  enum class Progress { Advanced, AwaitingDecision, Finished };

  // Adversary built from the config (policies or script).
  explicit Experiment(RunConfig config);
  // Decisions come from `adversary`; with interactive=true a missing decision
  // pauses the run instead of ending it.
  Experiment(RunConfig config, Adversary& adversary, bool interactive);

  // One engine step. Rethrows FairnessViolation, IllegalDecision and
  // EmptyActivationRejected.
  Progress advance();
  Progress runToEnd();

  bool finished() const { return pipeline_.concluded() && footerWritten_; }
  const Verdict& verdict() const { return *pipeline_.verdict(); }
  const TraceLog& trace() const { return trace_; }
  // Final trace, or the trace as it would end if no further decision came.
  std::string traceText() const;
  const Engine& engine() const { return *engine_; }
  const Pipeline& pipeline() const { return pipeline_; }
  const RunConfig& config() const { return config_; }
  const Protocol& protocol() const { return protocol_; }
  double initialDiameter() const { return d0_; }
  // Robots the next decision is about: the eligible set in synchronous
  // schedulers, the robots needing a cycle plan in ASYNCH.
  std::vector<int> pendingRobots() const;
  std::vector<std::string> takeWarnings() { return std::exchange(warnings_, {}); }
  const std::vector<TraceEvent>& lastEvents() const { return lastEvents_; }

 private:
  Experiment(RunConfig config, Adversary* adversary, bool interactive);
  void init();
  void seal();
  nlohmann::json footerFor(const Verdict& v) const;

  RunConfig config_;
  Protocol protocol_;
  std::vector<Point2> initial_;
  double d0_ = 1.0;
  std::unique_ptr<Adversary> owned_;
  Adversary* adversary_ = nullptr;
  bool interactive_ = false;
  std::unique_ptr<Engine> engine_;
  Pipeline pipeline_;
  TraceLog trace_;
  bool footerWritten_ = false;
  std::vector<std::string> warnings_;
  std::vector<TraceEvent> lastEvents_;
};

struct RunResult {
  TraceLog trace;
  Verdict verdict;
};

RunResult runExperiment(const RunConfig& config);

nlohmann::json traceHeader(const RunConfig& config, const std::vector<Point2>& initial);

struct ReplayResult {
  Verdict verdict;
  bool checksumOk = false;
  bool matches = false;  // recomputed footer equals the recorded one
  std::string message;
};

// Re-runs the monitors over a persisted trace without simulating. Throws
// TraceInvalid for unreadable traces.
ReplayResult replayTrace(std::string_view text);

}  // namespace lumiswarm
