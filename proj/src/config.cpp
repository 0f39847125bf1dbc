#include "lumiswarm/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "lumiswarm/error.hpp"

namespace lumiswarm {

using nlohmann::json;

std::string_view toString(GoalKind k) {
  switch (k) {
    case GoalKind::MutualVisibility: return "mutualVisibility";
    case GoalKind::NearGathering: return "nearGathering";
    case GoalKind::Circle: return "circle";
    case GoalKind::SequentialVisibility: return "sequentialVisibility";
  }
  return "mutualVisibility";
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

template <class E>
E enumFrom(const std::string& s, std::initializer_list<std::pair<const char*, E>> table, const char* field) {
  for (const auto& [name, value] : table)
    if (s == name) return value;
  invalid(std::string("unknown ") + field + " '" + s + "'");
}

template <class E>
std::string enumName(E v, std::initializer_list<std::pair<const char*, E>> table) {
  for (const auto& [name, value] : table)
    if (v == value) return name;
  return "";
}

const std::initializer_list<std::pair<const char*, ActivationPolicy::Kind>> kActivation{
    {"full", ActivationPolicy::Kind::Full},
    {"randomFair", ActivationPolicy::Kind::RandomFair},
    {"roundRobin", ActivationPolicy::Kind::RoundRobin},
    {"minimalFair", ActivationPolicy::Kind::MinimalFair}};
const std::initializer_list<std::pair<const char*, FramePolicy::Kind>> kFrames{
    {"identity", FramePolicy::Kind::Identity}, {"random", FramePolicy::Kind::Random}};
const std::initializer_list<std::pair<const char*, TruncationPolicy::Kind>> kTruncation{
    {"none", TruncationPolicy::Kind::None},
    {"randomFair", TruncationPolicy::Kind::RandomFair},
    {"worst", TruncationPolicy::Kind::Worst}};
const std::initializer_list<std::pair<const char*, TimingPolicy::Kind>> kTiming{
    {"random", TimingPolicy::Kind::Random}, {"midMove", TimingPolicy::Kind::MidMove}};
const std::initializer_list<std::pair<const char*, GoalKind>> kGoals{
    {"mutualVisibility", GoalKind::MutualVisibility},
    {"nearGathering", GoalKind::NearGathering},
    {"circle", GoalKind::Circle},
    {"sequentialVisibility", GoalKind::SequentialVisibility}};

const std::set<std::string> kMonitorNames{"collision", "hullMonotone", "vertexPersistence", "depletionHullFixed",
                                          "secDrift"};

void onlyKeys(const json& j, std::initializer_list<const char*> keys, const char* where) {
  if (!j.is_object()) invalid(std::string(where) + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* key : keys) ok = ok || k == key;
    if (!ok) invalid(std::string("unknown key '") + k + "' in " + where);
  }
}

double positive(const json& j, const char* field) {
  double v = j.get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) invalid(std::string(field) + " must be positive");
  return v;
}

Point2 pointFrom(const json& j) {
  if (!j.is_array() || j.size() != 2) invalid("points must be [x, y] pairs");
  Point2 p{j[0].get<double>(), j[1].get<double>()};
  if (!isFinite(p)) invalid("point coordinates must be finite");
  return p;
}

}  // namespace

json toJson(const FrameSpec& f) { return {{"rotation", f.rotation}, {"reflect", f.reflect}, {"scale", f.scale}}; }

FrameSpec frameFromJson(const json& j) {
  FrameSpec f;
  f.rotation = j.value("rotation", 0.0);
  f.reflect = j.value("reflect", false);
  f.scale = j.value("scale", 1.0);
  return f;
}

json toJson(const RoundDecision& d) {
  json frames = json::object(), fractions = json::object();
  for (const auto& [id, f] : d.frames) frames[std::to_string(id)] = toJson(f);
  for (const auto& [id, f] : d.fractions) fractions[std::to_string(id)] = f;
  return {{"activate", d.activate}, {"frames", frames}, {"fractions", fractions}};
}

RoundDecision roundDecisionFromJson(const json& j) {
  RoundDecision d;
  d.activate = j.at("activate").get<std::vector<int>>();
  if (j.contains("frames"))
    for (const auto& [k, v] : j["frames"].items()) d.frames[std::stoi(k)] = frameFromJson(v);
  if (j.contains("fractions"))
    for (const auto& [k, v] : j["fractions"].items()) d.fractions[std::stoi(k)] = v.get<double>();
  return d;
}

json toJson(const CyclePlan& p) {
  return {{"idle", p.idle}, {"compute", p.compute}, {"move", p.move}, {"fraction", p.fraction}, {"frame", toJson(p.frame)}};
}

CyclePlan cyclePlanFromJson(const json& j) {
  CyclePlan p;
  p.idle = j.value("idle", 1.0);
  p.compute = j.value("compute", 1.0);
  p.move = j.value("move", 1.0);
  p.fraction = j.value("fraction", 1.0);
  if (j.contains("frame")) p.frame = frameFromJson(j["frame"]);
  return p;
}

json toJson(const PlanSet& p) {
  json out = json::object();
  for (const auto& [id, plan] : p) out[std::to_string(id)] = toJson(plan);
  return out;
}

PlanSet planSetFromJson(const json& j) {
  PlanSet p;
  const json& body = j.contains("plans") ? j["plans"] : j;
  for (const auto& [k, v] : body.items()) p[std::stoi(k)] = cyclePlanFromJson(v);
  return p;
}

RunConfig parseRunConfig(const json& j) {
  try {
    onlyKeys(j,
             {"protocol", "params", "scheduler", "adversary", "rigidity", "n", "initial", "tolerances", "caps",
              "knowledge", "faults", "goal", "seed", "monitors"},
             "config");
    RunConfig c;
    c.protocol = j.at("protocol").get<std::string>();
    if (j.contains("params")) {
      const json& p = j["params"];
      onlyKeys(p, {"hPositive", "epsAdjust", "epsNG", "sigmaStep"}, "params");
      if (p.contains("hPositive")) c.params.hPositive = positive(p["hPositive"], "hPositive");
      if (p.contains("epsAdjust")) c.params.epsAdjust = positive(p["epsAdjust"], "epsAdjust");
      if (p.contains("epsNG")) c.params.epsNG = positive(p["epsNG"], "epsNG");
      if (p.contains("sigmaStep")) c.params.sigmaStep = positive(p["sigmaStep"], "sigmaStep");
    }
    if (j.contains("scheduler")) c.scheduler = schedulerFromString(j["scheduler"].get<std::string>());
    if (j.contains("adversary")) {
      const json& a = j["adversary"];
      onlyKeys(a,
               {"activation", "frames", "truncation", "timing", "window", "probability", "script", "asynchScript",
                "cyclicPlans", "onScriptEnd"},
               "adversary");
      AdversarySpec& s = c.adversary;
      if (a.contains("activation")) s.activation = enumFrom(a["activation"].get<std::string>(), kActivation, "activation");
      if (a.contains("frames")) s.frames = enumFrom(a["frames"].get<std::string>(), kFrames, "frames");
      if (a.contains("truncation")) s.truncation = enumFrom(a["truncation"].get<std::string>(), kTruncation, "truncation");
      if (a.contains("timing")) s.timing = enumFrom(a["timing"].get<std::string>(), kTiming, "timing");
      if (a.contains("window")) s.window = a["window"].get<int>();
      if (a.contains("probability")) s.probability = a["probability"].get<double>();
      if (s.probability <= 0.0 || s.probability > 1.0) invalid("adversary.probability must be in (0, 1]");
      if (a.contains("script"))
        for (const auto& d : a["script"]) s.script.push_back(roundDecisionFromJson(d));
      if (a.contains("asynchScript"))
        for (const auto& d : a["asynchScript"]) s.asynchScript.push_back(planSetFromJson(d));
      if (a.contains("cyclicPlans"))
        for (const auto& [k, v] : a["cyclicPlans"].items())
          for (const auto& p : v) s.cyclicPlans[std::stoi(k)].push_back(cyclePlanFromJson(p));
      if (a.contains("onScriptEnd")) {
        std::string e = a["onScriptEnd"].get<std::string>();
        if (e != "stop" && e != "policy") invalid("onScriptEnd must be stop or policy");
        s.fallbackToPolicy = e == "policy";
      }
    }
    if (j.contains("rigidity")) {
      const json& r = j["rigidity"];
      onlyKeys(r, {"kind", "delta", "deltaFraction"}, "rigidity");
      std::string kind = r.value("kind", "rigid");
      if (kind == "rigid") c.rigidity.kind = RigidityModel::Kind::Rigid;
      else if (kind == "nonRigid") c.rigidity.kind = RigidityModel::Kind::NonRigid;
      else invalid("rigidity.kind must be rigid or nonRigid");
      if (r.contains("delta")) c.rigidity.delta = positive(r["delta"], "delta");
      if (r.contains("deltaFraction")) c.rigidity.deltaFraction = positive(r["deltaFraction"], "deltaFraction");
      if (c.rigidity.delta && c.rigidity.deltaFraction) invalid("give rigidity.delta or rigidity.deltaFraction, not both");
      if (c.rigidity.kind == RigidityModel::Kind::NonRigid && !c.rigidity.delta && !c.rigidity.deltaFraction)
        invalid("nonRigid needs delta or deltaFraction");
    }
    if (j.contains("initial")) {
      const json& i = j["initial"];
      onlyKeys(i, {"points", "generator", "seed", "angle"}, "initial");
      if (i.contains("points"))
        for (const auto& p : i["points"]) c.initial.points.push_back(pointFrom(p));
      if (i.contains("generator")) c.initial.generator = i["generator"].get<std::string>();
      if (i.contains("seed")) c.initial.seed = i["seed"].get<std::uint64_t>();
      if (i.contains("angle")) c.initial.angle = i["angle"].get<double>();
    }
    if (j.contains("n")) c.n = j["n"].get<int>();
    if (!c.initial.points.empty()) {
      if (c.n != 0 && c.n != static_cast<int>(c.initial.points.size())) invalid("n disagrees with initial.points");
      c.n = static_cast<int>(c.initial.points.size());
    }
    if (c.n < 1) invalid("n must be at least 1");
    if (j.contains("tolerances")) {
      const json& t = j["tolerances"];
      onlyKeys(t, {"epsGeom", "epsVis", "epsColl", "epsNudge"}, "tolerances");
      if (t.contains("epsGeom")) c.tolerances.epsGeom = positive(t["epsGeom"], "epsGeom");
      if (t.contains("epsVis")) c.tolerances.epsVis = positive(t["epsVis"], "epsVis");
      if (t.contains("epsColl")) c.tolerances.epsColl = positive(t["epsColl"], "epsColl");
      if (t.contains("epsNudge")) c.tolerances.epsNudge = positive(t["epsNudge"], "epsNudge");
    }
    if (j.contains("caps")) {
      const json& t = j["caps"];
      onlyKeys(t, {"maxRounds", "maxEvents", "maxTime"}, "caps");
      if (t.contains("maxRounds")) c.caps.maxRounds = t["maxRounds"].get<long>();
      if (t.contains("maxEvents")) c.caps.maxEvents = t["maxEvents"].get<long>();
      if (t.contains("maxTime")) c.caps.maxTime = positive(t["maxTime"], "maxTime");
      if (c.caps.maxRounds < 0 || c.caps.maxEvents < 0) invalid("caps must be non-negative");
    }
    if (j.contains("knowledge")) {
      const json& k = j["knowledge"];
      onlyKeys(k, {"n", "delta", "axis"}, "knowledge");
      if (k.contains("n")) c.knowledge.n = k["n"].get<bool>();
      if (k.contains("delta")) c.knowledge.delta = k["delta"].get<bool>();
      if (k.contains("axis")) c.knowledge.axis = k["axis"].get<bool>();
    }
    if (j.contains("faults")) c.faults = j["faults"].get<std::vector<int>>();
    for (int f : c.faults)
      if (f < 0 || f >= c.n) invalid("fault id out of range");
    if (j.contains("goal")) {
      const json& g = j["goal"];
      onlyKeys(g, {"kind", "epsNG", "extraRounds"}, "goal");
      GoalSpec goal;
      goal.kind = enumFrom(g.at("kind").get<std::string>(), kGoals, "goal");
      if (g.contains("epsNG")) goal.epsNG = positive(g["epsNG"], "goal.epsNG");
      if (g.contains("extraRounds")) goal.extraRounds = g["extraRounds"].get<long>();
      c.goal = goal;
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("monitors")) {
      c.monitors = j["monitors"].get<std::vector<std::string>>();
      for (const auto& m : *c.monitors)
        if (!kMonitorNames.count(m)) invalid("unknown monitor '" + m + "'");
    }

    // Protocol-level validation: the name, required params, required knowledge.
    ProtocolParams pp = c.params;
    Protocol proto = makeProtocol(c.protocol, pp);
    auto need = [&](bool required, const std::optional<bool>& given, const char* what) {
      if (required && given && !*given) invalid(c.protocol + " requires knowledge of " + what);
    };
    need(proto.needsN, c.knowledge.n, "n");
    need(proto.needsDelta, c.knowledge.delta, "delta");
    need(proto.needsAxis, c.knowledge.axis, "the North direction");
    if (proto.needsDelta && !c.rigidity.delta && !c.rigidity.deltaFraction)
      invalid(c.protocol + " requires rigidity.delta or rigidity.deltaFraction");
    if (c.initial.points.empty()) {
      static const std::set<std::string> kGenerators{"uniform", "collinear", "convex", "symmetricWithCenter"};
      if (!kGenerators.count(c.initial.generator)) invalid("unknown generator '" + c.initial.generator + "'");
      if (c.initial.generator == "symmetricWithCenter" && c.n % 2 == 0)
        invalid("symmetricWithCenter needs an odd n");
    }
    return c;
  } catch (const json::exception& ex) {
    invalid(ex.what());
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::ConfigInvalid) throw;
    invalid(ex.what());
  } catch (const std::invalid_argument&) {
    invalid("robot ids used as keys must be integers");
  }
}

RunConfig loadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot read config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& ex) {
    invalid(ex.what());
  }
  return parseRunConfig(j);
}

json toJson(const RunConfig& c, bool includeAdversary) {
  json j;
  j["protocol"] = c.protocol;
  json params = {{"hPositive", c.params.hPositive}, {"sigmaStep", c.params.sigmaStep}};
  if (c.params.epsAdjust) params["epsAdjust"] = *c.params.epsAdjust;
  if (c.params.epsNG) params["epsNG"] = *c.params.epsNG;
  j["params"] = params;
  j["scheduler"] = toString(c.scheduler);
  if (includeAdversary) {
    const AdversarySpec& s = c.adversary;
    json a = {{"activation", enumName(s.activation, kActivation)},
              {"frames", enumName(s.frames, kFrames)},
              {"truncation", enumName(s.truncation, kTruncation)},
              {"timing", enumName(s.timing, kTiming)},
              {"window", s.window},
              {"probability", s.probability},
              {"onScriptEnd", s.fallbackToPolicy ? "policy" : "stop"}};
    if (!s.script.empty()) {
      a["script"] = json::array();
      for (const auto& d : s.script) a["script"].push_back(toJson(d));
    }
    if (!s.asynchScript.empty()) {
      a["asynchScript"] = json::array();
      for (const auto& p : s.asynchScript) a["asynchScript"].push_back(toJson(p));
    }
    if (!s.cyclicPlans.empty()) {
      json cyc = json::object();
      for (const auto& [id, plans] : s.cyclicPlans) {
        json list = json::array();
        for (const auto& p : plans) list.push_back(toJson(p));
        cyc[std::to_string(id)] = list;
      }
      a["cyclicPlans"] = cyc;
    }
    j["adversary"] = a;
  }
  json rig = {{"kind", c.rigidity.kind == RigidityModel::Kind::Rigid ? "rigid" : "nonRigid"}};
  if (c.rigidity.delta) rig["delta"] = *c.rigidity.delta;
  if (c.rigidity.deltaFraction) rig["deltaFraction"] = *c.rigidity.deltaFraction;
  j["rigidity"] = rig;
  j["n"] = c.n;
  json init = json::object();
  if (!c.initial.points.empty()) {
    init["points"] = json::array();
    for (const auto& p : c.initial.points) init["points"].push_back({p.x, p.y});
  } else {
    init["generator"] = c.initial.generator;
    if (c.initial.seed) init["seed"] = *c.initial.seed;
    if (c.initial.angle) init["angle"] = *c.initial.angle;
  }
  j["initial"] = init;
  j["tolerances"] = {{"epsGeom", c.tolerances.epsGeom},
                     {"epsVis", c.tolerances.epsVis},
                     {"epsColl", c.tolerances.epsColl},
                     {"epsNudge", c.tolerances.epsNudge}};
  j["caps"] = {{"maxRounds", c.caps.maxRounds}, {"maxEvents", c.caps.maxEvents}, {"maxTime", c.caps.maxTime}};
  json know = json::object();
  if (c.knowledge.n) know["n"] = *c.knowledge.n;
  if (c.knowledge.delta) know["delta"] = *c.knowledge.delta;
  if (c.knowledge.axis) know["axis"] = *c.knowledge.axis;
  j["knowledge"] = know;
  j["faults"] = c.faults;
  if (c.goal)
    j["goal"] = {{"kind", toString(c.goal->kind)}, {"epsNG", c.goal->epsNG}, {"extraRounds", c.goal->extraRounds}};
  j["seed"] = c.seed;
  if (c.monitors) j["monitors"] = *c.monitors;
  return j;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t deriveSeed(std::uint64_t top, std::uint64_t tag) { return splitmix64(top ^ splitmix64(tag)); }

std::vector<Point2> generatePoints(const std::string& kind, int n, std::uint64_t seed, std::optional<double> angle) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Point2 center{5.0, 5.0};
  const double minGap = 0.05;
  std::vector<Point2> pts;
  auto farFromAll = [&](Point2 p) {
    return std::all_of(pts.begin(), pts.end(), [&](Point2 q) { return distance(p, q) >= minGap; });
  };

  if (kind == "uniform") {
    while (static_cast<int>(pts.size()) < n) {
      Point2 p{10.0 * unit(rng), 10.0 * unit(rng)};
      if (farFromAll(p)) pts.push_back(p);
    }
  } else if (kind == "collinear") {
    double th = angle ? *angle : kPi * unit(rng);
    Point2 dir{std::cos(th), std::sin(th)};
    std::vector<double> ts;
    while (static_cast<int>(ts.size()) < n) {
      double t = 10.0 * unit(rng) - 5.0;
      if (std::all_of(ts.begin(), ts.end(), [&](double s) { return std::abs(s - t) >= minGap; })) ts.push_back(t);
    }
    for (double t : ts) pts.push_back(center + t * dir);
  } else if (kind == "convex") {
    std::vector<double> th;
    const double minArc = 2.0 * kPi / (4.0 * n);
    while (static_cast<int>(th.size()) < n) {
      double a = 2.0 * kPi * unit(rng);
      bool ok = std::all_of(th.begin(), th.end(), [&](double b) {
        double d = std::abs(a - b);
        return std::min(d, 2.0 * kPi - d) >= minArc;
      });
      if (ok) th.push_back(a);
    }
    for (double a : th) pts.push_back(center + 5.0 * Point2{std::cos(a), std::sin(a)});
  } else if (kind == "symmetricWithCenter") {
    if (n % 2 == 0) invalid("symmetricWithCenter needs an odd n");
    pts.push_back(center);
    while (static_cast<int>(pts.size()) < n) {
      Point2 p{10.0 * unit(rng), 10.0 * unit(rng)};
      Point2 q = 2.0 * center - p;
      if (distance(p, center) < minGap) continue;
      if (farFromAll(p) && farFromAll(q)) {
        pts.push_back(p);
        pts.push_back(q);
      }
    }
  } else {
    invalid("unknown generator '" + kind + "'");
  }
  return pts;
}

std::vector<Point2> initialPositions(const RunConfig& c) {
  if (!c.initial.points.empty()) return c.initial.points;
  std::uint64_t seed = c.initial.seed ? *c.initial.seed : deriveSeed(c.seed, 0x1417);
  return generatePoints(c.initial.generator, c.n, seed, c.initial.angle);
}

GoalSpec effectiveGoal(const RunConfig& c) {
  if (c.goal) return *c.goal;
  GoalSpec g;
  const std::string& p = c.protocol;
  if (p == "shrink-near-gathering" || p == "shrink-near-gathering-eps") g.kind = GoalKind::NearGathering;
  else if (p == "shrink-circle" || p == "contain-circle") g.kind = GoalKind::Circle;
  else if (p == "sequential") g.kind = GoalKind::SequentialVisibility;
  return g;
}

std::vector<std::string> effectiveMonitors(const RunConfig& c) {
  if (c.monitors) return *c.monitors;
  const std::string& p = c.protocol;
  std::vector<std::string> out{"collision"};
  const bool shrinkLike = p == "shrink" || p == "shrink-delta" || p == "shrink-n" || p == "shrink-near-gathering" ||
                          p == "shrink-near-gathering-eps";
  const bool containLike = p == "contain" || p == "contain-axis" || p == "contain-n" || p == "contain-circle";
  if (shrinkLike) out.push_back("hullMonotone");
  // A stuck robot lets the hull collapse into a sliver thinner than the
  // vertex-degeneracy tolerance, so persistence is only watched fault-free.
  const bool persistence = (shrinkLike && p != "shrink-delta") || (containLike && p != "contain-circle");
  if (persistence && c.faults.empty()) out.push_back("vertexPersistence");
  if (containLike) out.push_back("depletionHullFixed");
  if (p == "shrink-circle" || p == "contain-circle") out.push_back("secDrift");
  return out;
}

std::unique_ptr<Adversary> makePolicyAdversary(const RunConfig& c) {
  const AdversarySpec& s = c.adversary;
  ActivationPolicy act{s.activation, deriveSeed(c.seed, 0xA1), s.window, s.probability};
  FramePolicy fr{s.frames, deriveSeed(c.seed, 0xF2)};
  TruncationPolicy tr{s.truncation, deriveSeed(c.seed, 0x73)};
  TimingPolicy tm{s.timing, deriveSeed(c.seed, 0x74)};
  return std::make_unique<PolicyAdversary>(act, fr, tr, tm, c.scheduler == SchedulerKind::Sequential);
}

std::unique_ptr<Adversary> makeAdversary(const RunConfig& c) {
  if (!c.adversary.scripted()) return makePolicyAdversary(c);
  std::unique_ptr<Adversary> fallback;
  if (c.adversary.fallbackToPolicy) fallback = makePolicyAdversary(c);
  return std::make_unique<ScriptedAdversary>(c.adversary.script, c.adversary.asynchScript, c.adversary.cyclicPlans,
                                             std::move(fallback));
}

}  // namespace lumiswarm
