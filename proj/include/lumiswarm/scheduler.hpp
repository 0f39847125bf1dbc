#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <utility>
#include <string>
#include <vector>

#include "lumiswarm/model.hpp"
#include "lumiswarm/protocols.hpp"
#include "lumiswarm/trace.hpp"

namespace lumiswarm {

enum class SchedulerKind { FSynch, SSynch, Sequential, ASynch };
std::string_view toString(SchedulerKind k);
SchedulerKind schedulerFromString(std::string_view s);

struct RigidityModel {
  enum class Kind { Rigid, NonRigid } kind = Kind::Rigid;
  double delta = 0.0;  // world units, NonRigid only

  // Travelled length for a requested move of length `requested` when the
  // adversary asks to stop after `fraction` of it.
  double realize(double requested, double fraction) const;
};

struct RoundDecision {
  std::vector<int> activate;
  std::map<int, FrameSpec> frames;
  std::map<int, double> fractions;
};

struct CyclePlan {
  double idle = 1.0;
  double compute = 1.0;
  double move = 1.0;
  double fraction = 1.0;
  FrameSpec frame;
};

using PlanSet = std::map<int, CyclePlan>;

// Source of every adversarial choice. Returning nullopt means no decision is
// available: a finished script or a human who has not answered yet.
class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual std::optional<RoundDecision> nextRound(const Configuration& config, const std::vector<int>& eligible,
                                                 long round) = 0;
  virtual std::optional<PlanSet> nextPlans(const Configuration& config, const std::vector<int>& need, double now) = 0;
  virtual bool enforcesFairness() const { return false; }
};

struct ActivationPolicy {
  enum class Kind { Full, RandomFair, RoundRobin, MinimalFair } kind = Kind::RandomFair;
  std::uint64_t seed = 1;
  int window = 0;  // 0: use 2n
  double probability = 0.5;
};

struct FramePolicy {
  enum class Kind { Identity, Random } kind = Kind::Identity;
  std::uint64_t seed = 2;
};

struct TruncationPolicy {
  enum class Kind { None, RandomFair, Worst } kind = Kind::None;
  std::uint64_t seed = 3;
};

struct TimingPolicy {
  // MidMove makes moves long and idle/compute phases short, so robots are
  // often observed while travelling.
  enum class Kind { Random, MidMove } kind = Kind::Random;
  std::uint64_t seed = 4;
  double maxIdle = 1.0;
  double maxCompute = 1.0;
  double maxMove = 1.0;
};

class PolicyAdversary : public Adversary {
 public:
  PolicyAdversary(ActivationPolicy activation, FramePolicy frames, TruncationPolicy truncation, TimingPolicy timing,
                  bool singleton);
  std::optional<RoundDecision> nextRound(const Configuration& config, const std::vector<int>& eligible,
                                         long round) override;
  std::optional<PlanSet> nextPlans(const Configuration& config, const std::vector<int>& need, double now) override;

 private:
  FrameSpec drawFrame();
  double drawFraction();

  ActivationPolicy activation_;
  FramePolicy frames_;
  TruncationPolicy truncation_;
  TimingPolicy timing_;
  bool singleton_;
  std::mt19937_64 activationRng_, frameRng_, truncationRng_, timingRng_;
  std::map<int, long> lastActive_;
  std::size_t cursor_ = 0;
};

// Replays a fixed list of decisions, optionally handing over to a fallback
// once the list runs out.
class ScriptedAdversary : public Adversary {
 public:
  ScriptedAdversary(std::vector<RoundDecision> rounds, std::vector<PlanSet> plans,
                    std::map<int, std::vector<CyclePlan>> cyclicPlans, std::unique_ptr<Adversary> fallback);
  std::optional<RoundDecision> nextRound(const Configuration& config, const std::vector<int>& eligible,
                                         long round) override;
  std::optional<PlanSet> nextPlans(const Configuration& config, const std::vector<int>& need, double now) override;
  bool enforcesFairness() const override { return !usingFallback_; }

 private:
  std::vector<RoundDecision> rounds_;
  std::vector<PlanSet> plans_;
  std::map<int, std::vector<CyclePlan>> cyclic_;
  std::map<int, std::size_t> cyclicCursor_;
  std::unique_ptr<Adversary> fallback_;
  std::size_t roundCursor_ = 0, planCursor_ = 0;
  bool usingFallback_ = false;
};

// Decisions pushed by a human through the playground.
class InteractiveAdversary : public Adversary {
 public:
  void pushRound(RoundDecision d) { rounds_.push_back(std::move(d)); }
  void pushPlans(PlanSet p) { plans_.push_back(std::move(p)); }
  std::optional<RoundDecision> nextRound(const Configuration&, const std::vector<int>&, long) override;
  std::optional<PlanSet> nextPlans(const Configuration&, const std::vector<int>&, double) override;

 private:
  std::deque<RoundDecision> rounds_;
  std::deque<PlanSet> plans_;
};

struct EngineOptions {
  SchedulerKind kind = SchedulerKind::SSynch;
  RigidityModel rigidity;
  Knowledge knowledge;
  double epsVis = kDefaultEpsVis;  // absolute
  double epsColl = 0.0;            // absolute
  std::set<int> faulty;
  int window = 0;                  // fairness window in rounds, 0: 2n
};

struct RoundRecord {
  long round = 0;
  std::vector<int> activated;
  std::vector<TraceEvent> events;
  std::vector<std::string> warnings;
};

// One synchronous round (FSYNCH, SSYNCH or sequential) under the given
// decision: every activated robot looks at the same configuration, then all
// lights, terminations and moves apply at once. Throws
// EmptyActivationRejected, IllegalDecision, CollisionPresent.
RoundRecord ssynchRound(Configuration& config, const Protocol& protocol, const RoundDecision& decision,
                        const EngineOptions& options, long round);
// ssynchRound restricted to a single activated robot.
RoundRecord sequentialRound(Configuration& config, const Protocol& protocol, const RoundDecision& decision,
                            const EngineOptions& options, long round);

enum class StepStatus { Progressed, NoDecision, Done };

class Engine {
 public:
  virtual ~Engine() = default;
  virtual double nextTime() const = 0;
  virtual StepStatus step(Adversary& adversary, std::vector<TraceEvent>& out) = 0;
  virtual const Configuration& configuration() const = 0;
  virtual long steps() const = 0;  // rounds or processed events
  bool allTerminated() const;
  std::vector<std::string> takeWarnings() { return std::exchange(warnings_, {}); }

 protected:
  std::vector<std::string> warnings_;
};

class SyncEngine : public Engine {
 public:
  SyncEngine(Configuration initial, Protocol protocol, EngineOptions options);
  double nextTime() const override { return static_cast<double>(round_); }
  StepStatus step(Adversary& adversary, std::vector<TraceEvent>& out) override;
  const Configuration& configuration() const override { return config_; }
  long steps() const override { return round_; }
  std::vector<int> eligible() const;

 private:
  Configuration config_;
  Protocol protocol_;
  EngineOptions options_;
  long round_ = 0;
  std::vector<long> lastActive_;
};

class AsynchEngine : public Engine {
 public:
  AsynchEngine(Configuration initial, Protocol protocol, EngineOptions options);
  double nextTime() const override;
  StepStatus step(Adversary& adversary, std::vector<TraceEvent>& out) override;
  const Configuration& configuration() const override { return config_; }
  long steps() const override { return events_; }
  // Robots currently waiting for the adversary to plan their next cycle.
  std::vector<int> needPlans() const;

 private:
  enum class Kind { Look = 0, ComputeEnd = 1, MoveEnd = 2 };
  struct Pending {
    double time;
    int robot;
    Kind kind;
    bool operator>(const Pending& o) const {
      if (time != o.time) return time > o.time;
      if (robot != o.robot) return robot > o.robot;
      return static_cast<int>(kind) > static_cast<int>(o.kind);
    }
  };
  struct RobotCycle {
    bool planned = false;
    CyclePlan plan;
    Action action;
    FrameSpec frame;
  };

  void applyPlans(const PlanSet& plans, const std::vector<int>& need);

  Configuration config_;
  Protocol protocol_;
  EngineOptions options_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<Pending>> queue_;
  std::vector<RobotCycle> cycles_;
  long events_ = 0;
};

std::unique_ptr<Engine> makeEngine(const Configuration& initial, const Protocol& protocol, const EngineOptions& options);

}  // namespace lumiswarm
