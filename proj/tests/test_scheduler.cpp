#include <doctest.h>

#include <map>
#include <memory>
#include <random>

#include "lumiswarm/error.hpp"
#include "lumiswarm/scheduler.hpp"
#include "support.hpp"

using namespace lumiswarm;
using fixture::str;

namespace {

Configuration place(const std::vector<Point2>& pts, Light light = Light::Off) {
  Configuration c;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    RobotState r;
    r.id = static_cast<int>(i);
    r.position = pts[i];
    r.light = light;
    c.robots.push_back(r);
  }
  return c;
}

// Moves by a fixed local vector, never terminates.
Protocol drift(Point2 step) {
  Protocol p;
  p.name = "drift";
  p.palette = {Light::Off};
  p.step = [step](const Snapshot&) { return Action::moveTo(Light::Off, step); };
  return p;
}

Protocol idle() { return drift({0, 0}); }

ErrorCode codeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::ConfigInvalid;
}

std::unique_ptr<Adversary> scriptedPlans(std::vector<PlanSet> plans) {
  return std::make_unique<ScriptedAdversary>(std::vector<RoundDecision>{}, std::move(plans),
                                             std::map<int, std::vector<CyclePlan>>{}, nullptr);
}

}  // namespace

TEST_CASE("non-rigid clamp") {
  RigidityModel nr{RigidityModel::Kind::NonRigid, 0.3};
  CHECK(nr.realize(1.0, 0.1) == doctest::Approx(0.3));
  CHECK(nr.realize(0.2, 0.1) == doctest::Approx(0.2));
  CHECK(nr.realize(1.0, 0.5) == doctest::Approx(0.5));
  CHECK(nr.realize(1.0, 1.0) == doctest::Approx(1.0));
  RigidityModel rigid;
  CHECK(rigid.realize(1.0, 0.1) == doctest::Approx(1.0));

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> len(0.0, 2.0), frac(0.0, 1.0), del(0.01, 1.0);
  for (int i = 0; i < 10000; ++i) {
    RigidityModel m{RigidityModel::Kind::NonRigid, del(rng)};
    double requested = len(rng), l = m.realize(requested, frac(rng));
    CHECK((l == requested || (m.delta <= l && l < requested)));
  }
}

TEST_CASE("FSYNCH rigid round: every robot reaches its destination") {
  Configuration c = place({{0, 0}, {5, 0}, {0, 5}});
  EngineOptions opt;
  opt.kind = SchedulerKind::FSynch;
  RoundDecision d{{0, 1, 2}, {{1, FrameSpec{kPi / 2, false, 1.0}}}, {}};
  RoundRecord rec = ssynchRound(c, drift({1, 0}), d, opt, 0);
  CHECK(distance(c.robots[0].position, {1, 0}) <= 1e-12);
  CHECK(distance(c.robots[2].position, {1, 5}) <= 1e-12);
  // Robot 1's frame is rotated, so its local +x is some other world direction of length 1.
  CHECK(distance(c.robots[1].position, {5, 0}) == doctest::Approx(1.0));
  CHECK(rec.activated.size() == 3);
  CHECK(c.time == doctest::Approx(1.0));

  RoundDecision partial{{0, 1}, {}, {}};
  CHECK(str(codeOf([&] { ssynchRound(c, drift({1, 0}), partial, opt, 1); })) == "IllegalDecision");
}

TEST_CASE("SSYNCH non-rigid truncation") {
  Configuration c = place({{0, 0}, {5, 0}, {0, 5}});
  EngineOptions opt;
  opt.rigidity = {RigidityModel::Kind::NonRigid, 0.3};
  RoundDecision d{{0, 1}, {}, {{0, 0.1}, {1, 0.5}}};
  RoundRecord rec = ssynchRound(c, drift({1, 0}), d, opt, 0);
  CHECK(distance(c.robots[0].position, {0.3, 0}) <= 1e-12);
  CHECK(distance(c.robots[1].position, {5.5, 0}) <= 1e-12);
  CHECK(c.robots[2].position == Point2{0, 5});
  bool reported = false;
  for (const auto& e : rec.events)
    if (e.kind == EventKind::MoveStart && e.robot == 0) reported = std::abs(e.realizedFraction - 0.3) < 1e-12;
  CHECK(reported);

  Configuration shortMove = place({{0, 0}, {5, 0}, {0, 5}});
  ssynchRound(shortMove, drift({0.2, 0}), RoundDecision{{0}, {}, {{0, 0.1}}}, opt, 0);
  CHECK(distance(shortMove.robots[0].position, {0.2, 0}) <= 1e-12);
}

TEST_CASE("round decisions are validated") {
  Configuration c = place({{0, 0}, {5, 0}, {0, 5}});
  EngineOptions opt;
  CHECK(str(codeOf([&] { ssynchRound(c, idle(), RoundDecision{}, opt, 0); })) == "EmptyActivationRejected");
  CHECK(str(codeOf([&] { ssynchRound(c, idle(), RoundDecision{{0, 0}, {}, {}}, opt, 0); })) == "IllegalDecision");
  c.robots[2].status = Status::Terminated;
  CHECK(str(codeOf([&] { ssynchRound(c, idle(), RoundDecision{{2}, {}, {}}, opt, 0); })) == "IllegalDecision");
  CHECK(str(codeOf([&] { sequentialRound(c, idle(), RoundDecision{{0, 1}, {}, {}}, opt, 0); })) == "IllegalDecision");
  CHECK(str(codeOf([&] {
          ssynchRound(c, idle(), RoundDecision{{0}, {{0, FrameSpec{0, false, -1}}}, {}}, opt, 0);
        })) == "IllegalDecision");
}

TEST_CASE("looks within a round see the configuration at its start") {
  // Both robots move toward where the other was; neither sees the other's new spot.
  std::vector<Snapshot> seen;
  Protocol p;
  p.palette = {Light::Off};
  p.step = [&](const Snapshot& s) {
    seen.push_back(s);
    return Action::moveTo(Light::Off, s.visible[1].position / 2.0);
  };
  Configuration c = place({{0, 0}, {4, 0}});
  ssynchRound(c, p, RoundDecision{{0, 1}, {}, {}}, EngineOptions{}, 0);
  REQUIRE(seen.size() == 2);
  CHECK(distance(seen[0].visible[1].position, {4, 0}) <= 1e-12);
  CHECK(distance(seen[1].visible[1].position, {-4, 0}) <= 1e-12);
  CHECK(distance(c.robots[0].position, {2, 0}) <= 1e-12);
  CHECK(distance(c.robots[1].position, {2, 0}) <= 1e-12);
}

TEST_CASE("sequential scheduler: repeats allowed, starvation caught") {
  Configuration c = place({{0, 0}, {5, 0}, {0, 5}});
  EngineOptions opt;
  opt.kind = SchedulerKind::Sequential;
  opt.window = 6;
  std::vector<RoundDecision> rounds;
  for (int i = 0; i < 5; ++i) rounds.push_back({{0}, {}, {}});
  ScriptedAdversary ok(rounds, {}, {}, nullptr);
  SyncEngine e(c, idle(), opt);
  std::vector<TraceEvent> out;
  for (int i = 0; i < 5; ++i) CHECK(e.step(ok, out) == StepStatus::Progressed);
  CHECK(e.step(ok, out) == StepStatus::NoDecision);

  for (int i = 0; i < 5; ++i) rounds.push_back({{0}, {}, {}});
  ScriptedAdversary starving(rounds, {}, {}, nullptr);
  SyncEngine e2(c, idle(), opt);
  CHECK(str(codeOf([&] {
          for (int i = 0; i < 10; ++i) e2.step(starving, out);
        })) == "FairnessViolation");
}

TEST_CASE("policy activation is fair within 2n rounds") {
  for (auto kind : {ActivationPolicy::Kind::RandomFair, ActivationPolicy::Kind::RoundRobin, ActivationPolicy::Kind::MinimalFair}) {
    for (bool singleton : {false, true}) {
      const int n = 7;
      std::vector<Point2> pts;
      for (int i = 0; i < n; ++i) pts.push_back({std::cos(i * 0.9), std::sin(i * 0.9) * 2});
      EngineOptions opt;
      opt.kind = singleton ? SchedulerKind::Sequential : SchedulerKind::SSynch;
      ActivationPolicy act;
      act.kind = kind;
      act.seed = 5;
      PolicyAdversary adv(act, {}, {}, {}, singleton);
      SyncEngine e(place(pts), idle(), opt);
      std::vector<long> last(n, -1);
      for (long round = 0; round < 400; ++round) {
        std::vector<TraceEvent> out;
        REQUIRE(e.step(adv, out) == StepStatus::Progressed);
        for (const auto& ev : out)
          if (ev.kind == EventKind::Look) last[static_cast<std::size_t>(ev.robot)] = round;
        for (int i = 0; i < n; ++i) CHECK(round - last[static_cast<std::size_t>(i)] < 2 * n);
      }
      CHECK(e.takeWarnings().empty());
    }
  }
}

TEST_CASE("ASYNCH timeline of a single cycle") {
  CyclePlan plan{1.0, 1.0, 1.0, 1.0, {}};
  auto adv = scriptedPlans({PlanSet{{0, plan}, {1, CyclePlan{5.0, 1.0, 1.0, 1.0, {}}}}});
  AsynchEngine e(place({{0, 0}, {10, 10}}), drift({2, 0}), EngineOptions{EngineOptions{SchedulerKind::ASynch}});
  std::vector<TraceEvent> out;
  e.step(*adv, out);  // look of robot 0
  CHECK(e.configuration().time == doctest::Approx(1.0));
  e.step(*adv, out);  // compute end
  CHECK(e.configuration().time == doctest::Approx(2.0));
  CHECK(distance(e.configuration().positionAt(0, 2.5), {1, 0}) <= 1e-12);
  e.step(*adv, out);  // move end
  CHECK(e.configuration().time == doctest::Approx(3.0));
  CHECK(distance(e.configuration().robots[0].position, {2, 0}) <= 1e-12);
  std::vector<EventKind> kinds;
  for (const auto& ev : out)
    if (ev.robot == 0) kinds.push_back(ev.kind);
  REQUIRE(kinds.size() == 4);
  CHECK(str(kinds[0]) == str(EventKind::Look));
  CHECK(str(kinds[1]) == str(EventKind::ComputeEnd));
  CHECK(str(kinds[2]) == str(EventKind::MoveStart));
  CHECK(str(kinds[3]) == str(EventKind::MoveEnd));
}

TEST_CASE("ASYNCH observers see movers mid-segment and old lights during compute") {
  std::vector<Snapshot> seenBy1;
  Protocol p;
  p.palette = {Light::Off, Light::Vertex};
  p.step = [&](const Snapshot& s) {
    if (s.selfLight == Light::Off && s.visible.size() == 2 && seenBy1.empty() && s.visible[1].position.x < 0) {
      seenBy1.push_back(s);
      return Action::stay(Light::Off);
    }
    return Action::moveTo(Light::Vertex, {2, 0});
  };
  auto adv = scriptedPlans({PlanSet{{0, CyclePlan{1.0, 1.0, 1.0, 1.0, {}}}, {1, CyclePlan{2.5, 1.0, 1.0, 1.0, {}}}}});
  AsynchEngine e(place({{0, 0}, {10, 0}}), p, EngineOptions{SchedulerKind::ASynch});
  std::vector<TraceEvent> out;
  while (e.configuration().time < 2.5 || seenBy1.empty()) e.step(*adv, out);
  REQUIRE(seenBy1.size() == 1);
  // Robot 0 left (0,0) at t=2 towards (2,0) and is halfway at t=2.5.
  CHECK(distance(seenBy1[0].visible[1].position, {-9, 0}) <= 1e-12);
  CHECK(str(seenBy1[0].visible[1].light) == "Vertex");
}

TEST_CASE("ASYNCH rigid moves end at the computed destination and events are ordered") {
  EngineOptions opt{SchedulerKind::ASynch};
  TimingPolicy timing;
  timing.seed = 9;
  FramePolicy frames{FramePolicy::Kind::Random, 8};
  PolicyAdversary adv({}, frames, {}, timing, false);
  std::vector<Point2> pts;
  for (int i = 0; i < 6; ++i) pts.push_back({3.0 * std::cos(i), 3.0 * std::sin(i) + i});
  AsynchEngine e(place(pts), drift({0.01, 0}), opt);
  std::vector<TraceEvent> out;
  for (int i = 0; i < 2000; ++i) e.step(adv, out);
  std::map<int, double> lastT;
  std::map<int, Point2> dest;
  double prev = 0.0;
  for (const auto& ev : out) {
    CHECK(ev.t >= prev);
    prev = ev.t;
    if (ev.kind == EventKind::Look) {
      CHECK(ev.t > lastT[ev.robot]);
      lastT[ev.robot] = ev.t;
    }
    if (ev.kind == EventKind::ComputeEnd) dest[ev.robot] = ev.dest;
    if (ev.kind == EventKind::MoveEnd) CHECK(distance(ev.pos, dest[ev.robot]) <= 1e-12);
  }
}

TEST_CASE("engines are deterministic") {
  auto runOnce = [](SchedulerKind kind) {
    EngineOptions opt{kind};
    opt.rigidity = {RigidityModel::Kind::NonRigid, 0.05};
    ActivationPolicy act{ActivationPolicy::Kind::RandomFair, 77};
    PolicyAdversary adv(act, {FramePolicy::Kind::Random, 78}, {TruncationPolicy::Kind::RandomFair, 79}, {}, false);
    std::vector<Point2> pts{{0, 0}, {3, 1}, {1, 4}, {-2, 2}, {0.5, 1.5}};
    ProtocolParams params;
    auto engine = makeEngine(place(pts), makeProtocol("shrink", params), opt);
    std::vector<TraceEvent> out;
    for (int i = 0; i < 300 && engine->step(adv, out) == StepStatus::Progressed; ++i) {
    }
    std::string text;
    for (const auto& ev : out) text += toJson(ev).dump() + "\n";
    return text;
  };
  for (auto kind : {SchedulerKind::SSynch, SchedulerKind::ASynch}) {
    std::string a = runOnce(kind), b = runOnce(kind);
    CHECK(a.size() > 100);
    CHECK(a == b);
  }
}

TEST_CASE("scheduler names") {
  for (auto k : {SchedulerKind::FSynch, SchedulerKind::SSynch, SchedulerKind::Sequential, SchedulerKind::ASynch})
    CHECK(str(schedulerFromString(toString(k))) == str(k));
  CHECK_THROWS_AS(schedulerFromString("sometimes"), Error);
}
