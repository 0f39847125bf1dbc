#include <algorithm>
#include <cmath>
#include <limits>

#include "lumiswarm/error.hpp"
#include "view.hpp"

namespace lumiswarm {

Action sequentialStep(const Snapshot& s, const ProtocolParams& params, SequentialMode mode) {
  const Light self = s.selfLight;
  if (mode == SequentialMode::TwoColor && self == Light::Moved) return Action::halt(self);
  if (mode == SequentialMode::NKnown) {
    if (!s.n) throw Error(ErrorCode::MissingNKnowledge, "sequential-n needs n");
    if (static_cast<int>(s.visible.size()) == *s.n) return Action::halt(self);
  }
  const Light after = mode == SequentialMode::TwoColor ? Light::Moved : self;
  const std::vector<Point2> pts = s.positions();
  if (pts.size() < 2) return Action::stay(after);

  // Directions along lines through the observer are forbidden; move along the
  // bisector of the widest free angular gap.
  std::vector<double> angles;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    double th = std::atan2(pts[i].y, pts[i].x);
    for (double a : {th, th + kPi}) angles.push_back(std::fmod(a + 2.0 * kPi, 2.0 * kPi));
  }
  std::sort(angles.begin(), angles.end());
  double bestGap = -1.0, heading = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    double next = i + 1 < angles.size() ? angles[i + 1] : angles[0] + 2.0 * kPi;
    if (next - angles[i] > bestGap) {
      bestGap = next - angles[i];
      heading = (angles[i] + next) / 2.0;
    }
  }

  // Lines through two other robots must be neither crossed nor reached.
  const double tol = params.epsGeom * extent(pts);
  double nearest = std::numeric_limits<double>::infinity();
  double diam = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    for (std::size_t j = 1; j < pts.size(); ++j) diam = std::max(diam, distance(pts[i], pts[j]));
    diam = std::max(diam, norm(pts[i]));
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      double d = distanceToLine({0.0, 0.0}, pts[i], pts[j]);
      if (d > tol) nearest = std::min(nearest, d);
    }
  }
  double step = params.hPositive * diam;
  if (std::isfinite(nearest)) step = std::min(step, params.sigmaStep * nearest);
  return Action::moveTo(after, step * Point2{std::cos(heading), std::sin(heading)});
}

namespace {

Action shrinkCircle(const Snapshot& s, const ProtocolParams& params) {
  bool othersVertex = true;
  for (std::size_t i = 1; i < s.visible.size(); ++i) othersVertex = othersVertex && s.visible[i].light == Light::Vertex;
  // A robot turning Vertex this activation waits a cycle, so nobody starts the
  // circle phase while a neighbour still makes a Shrink move.
  if (othersVertex && s.selfLight == Light::Vertex) return circleFormationStep(s, params);
  Action a = shrinkStep(s, params);
  // Shrink's termination is where the circle phase begins.
  if (a.terminate) return Action::stay(a.newLight);
  return a;
}

Action containCircle(const Snapshot& s, const ProtocolParams& params) {
  bool allDone = std::all_of(s.visible.begin(), s.visible.end(), [](const SnapshotEntry& e) { return e.light == Light::Done; });
  if (allDone) return circleFormationStep(s, params);
  if (s.selfLight == Light::Done) return Action::stay(Light::Done);
  Snapshot mapped = s;
  for (auto& e : mapped.visible)
    if (e.light == Light::Done) e.light = Light::External;
  Action a = containStep(mapped, params);
  if (a.terminate) return Action::stay(Light::Done);
  return a;
}

Action brokenCollide(const Snapshot& s) {
  if (s.visible.size() < 2) return Action::stay(s.selfLight);
  Point2 best = s.visible[1].position;
  for (std::size_t i = 2; i < s.visible.size(); ++i)
    if (norm(s.visible[i].position) < norm(best)) best = s.visible[i].position;
  return Action::moveTo(s.selfLight, best);
}

}  // namespace

bool Protocol::inPalette(Light l) const { return std::find(palette.begin(), palette.end(), l) != palette.end(); }

std::vector<std::string> protocolNames() {
  return {"shrink",         "contain",     "contain-axis",      "shrink-near-gathering", "shrink-near-gathering-eps",
          "shrink-delta",   "shrink-n",    "contain-n",         "shrink-circle",         "contain-circle",
          "sequential",     "sequential-2color", "sequential-n", "broken-collide"};
}

Protocol makeProtocol(const std::string& name, const ProtocolParams& params) {
  const std::vector<Light> shrinkColors{Light::Off, Light::Vertex};
  const std::vector<Light> containColors{Light::Off, Light::External, Light::Adjusting};
  const std::vector<Light> lightless{Light::None};
  Protocol p;
  p.name = name;
  if (name == "shrink") {
    p.palette = shrinkColors;
    p.step = [params](const Snapshot& s) { return shrinkStep(s, params); };
  } else if (name == "contain") {
    p.palette = containColors;
    p.step = [params](const Snapshot& s) { return containStep(s, params); };
  } else if (name == "contain-axis") {
    p.palette = containColors;
    p.needsAxis = true;
    p.step = [params](const Snapshot& s) { return containAsynchVariant(s, params); };
  } else if (name == "shrink-near-gathering") {
    p.palette = lightless;
    p.step = [params](const Snapshot& s) { return shrinkNearGathering(s, params); };
  } else if (name == "shrink-near-gathering-eps") {
    if (!params.epsNG) throw Error(ErrorCode::ConfigInvalid, "shrink-near-gathering-eps needs params.epsNG");
    p.palette = shrinkColors;
    p.step = [params](const Snapshot& s) { return shrinkNearGathering(s, params); };
  } else if (name == "shrink-delta") {
    p.palette = shrinkColors;
    p.needsDelta = true;
    p.step = [params](const Snapshot& s) { return shrinkDeltaKnown(s, params); };
  } else if (name == "shrink-n") {
    p.palette = lightless;
    p.needsN = true;
    p.step = [params](const Snapshot& s) { return nKnownStep(s, NKnownBase::Shrink, params); };
  } else if (name == "contain-n") {
    p.palette = {Light::Off, Light::External};
    p.needsN = true;
    p.step = [params](const Snapshot& s) { return nKnownStep(s, NKnownBase::Contain, params); };
  } else if (name == "shrink-circle") {
    p.palette = shrinkColors;
    p.step = [params](const Snapshot& s) { return shrinkCircle(s, params); };
  } else if (name == "contain-circle") {
    p.palette = {Light::Off, Light::External, Light::Adjusting, Light::Done};
    p.step = [params](const Snapshot& s) { return containCircle(s, params); };
  } else if (name == "sequential") {
    p.palette = lightless;
    p.step = [params](const Snapshot& s) { return sequentialStep(s, params, SequentialMode::Base); };
  } else if (name == "sequential-2color") {
    p.palette = {Light::Off, Light::Moved};
    p.step = [params](const Snapshot& s) { return sequentialStep(s, params, SequentialMode::TwoColor); };
  } else if (name == "sequential-n") {
    p.palette = lightless;
    p.needsN = true;
    p.step = [params](const Snapshot& s) { return sequentialStep(s, params, SequentialMode::NKnown); };
  } else if (name == "broken-collide") {
    p.palette = lightless;
    p.step = [](const Snapshot& s) { return brokenCollide(s); };
  } else {
    throw Error(ErrorCode::ConfigInvalid, "unknown protocol '" + name + "'");
  }
  p.initialLight = p.palette.front();
  return p;
}

}  // namespace lumiswarm
