#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lumiswarm/protocols.hpp"
#include "lumiswarm/scheduler.hpp"

namespace lumiswarm {

struct AdversarySpec {
  ActivationPolicy::Kind activation = ActivationPolicy::Kind::RandomFair;
  FramePolicy::Kind frames = FramePolicy::Kind::Identity;
  TruncationPolicy::Kind truncation = TruncationPolicy::Kind::None;
  TimingPolicy::Kind timing = TimingPolicy::Kind::Random;
  int window = 0;
  double probability = 0.5;
  // Scripted decisions; when present they take precedence over the policies.
  std::vector<RoundDecision> script;
  std::vector<PlanSet> asynchScript;
  std::map<int, std::vector<CyclePlan>> cyclicPlans;
  bool fallbackToPolicy = false;  // onScriptEnd: "policy" instead of "stop"

  bool scripted() const { return !script.empty() || !asynchScript.empty() || !cyclicPlans.empty(); }
};

struct RigiditySpec {
  RigidityModel::Kind kind = RigidityModel::Kind::Rigid;
  std::optional<double> delta;          // world units
  std::optional<double> deltaFraction;  // of the initial hull diameter
};

struct InitialSpec {
  std::vector<Point2> points;  // explicit placement, wins over the generator
  std::string generator = "uniform";
  std::optional<std::uint64_t> seed;
  std::optional<double> angle;  // collinear generator: line direction in radians
};

// Factors of the initial hull diameter, except epsGeom and epsNudge which are
// relative to the extent of whatever point set is being examined.
struct Tolerances {
  double epsGeom = 1e-9;
  double epsVis = 1e-9;
  double epsColl = 1e-9;
  double epsNudge = 1e-6;
};

struct Caps {
  long maxRounds = 20000;
  long maxEvents = 400000;
  double maxTime = 1e7;
};

struct KnowledgeSpec {
  std::optional<bool> n, delta, axis;  // unset: whatever the protocol needs
};

enum class GoalKind { MutualVisibility, NearGathering, Circle, SequentialVisibility };
std::string_view toString(GoalKind k);

struct GoalSpec {
  GoalKind kind = GoalKind::MutualVisibility;
  double epsNG = 1e-3;     // fraction of the initial hull diameter
  long extraRounds = 1000;  // sequential visibility: rounds checked after every robot moved
};

struct RunConfig {
  std::string protocol = "shrink";
  ProtocolParams params;
  SchedulerKind scheduler = SchedulerKind::SSynch;
  AdversarySpec adversary;
  RigiditySpec rigidity;
  int n = 0;
  InitialSpec initial;
  Tolerances tolerances;
  Caps caps;
  KnowledgeSpec knowledge;
  std::vector<int> faults;
  std::optional<GoalSpec> goal;  // unset: the protocol's natural goal
  std::uint64_t seed = 1;
  std::optional<std::vector<std::string>> monitors;
};

// Throws ConfigInvalid.
RunConfig parseRunConfig(const nlohmann::json& j);
RunConfig loadRunConfig(const std::string& path);
// Canonical form; includeAdversary=false drops the adversary block.
nlohmann::json toJson(const RunConfig& c, bool includeAdversary = true);

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t deriveSeed(std::uint64_t top, std::uint64_t tag);

std::vector<Point2> generatePoints(const std::string& kind, int n, std::uint64_t seed,
                                   std::optional<double> angle = std::nullopt);
std::vector<Point2> initialPositions(const RunConfig& c);

GoalSpec effectiveGoal(const RunConfig& c);
std::vector<std::string> effectiveMonitors(const RunConfig& c);

std::unique_ptr<Adversary> makePolicyAdversary(const RunConfig& c);
// Scripted adversary when the config carries a script, else the policy one.
std::unique_ptr<Adversary> makeAdversary(const RunConfig& c);

nlohmann::json toJson(const FrameSpec& f);
FrameSpec frameFromJson(const nlohmann::json& j);
nlohmann::json toJson(const RoundDecision& d);
RoundDecision roundDecisionFromJson(const nlohmann::json& j);
nlohmann::json toJson(const CyclePlan& p);
CyclePlan cyclePlanFromJson(const nlohmann::json& j);
nlohmann::json toJson(const PlanSet& p);
PlanSet planSetFromJson(const nlohmann::json& j);

}  // namespace lumiswarm
