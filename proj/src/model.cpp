#include "lumiswarm/model.hpp"

#include <algorithm>
#include <string>

#include "lumiswarm/error.hpp"

namespace lumiswarm {

std::string_view toString(Light light) {
  switch (light) {
    case Light::None: return "None";
    case Light::Off: return "Off";
    case Light::Vertex: return "Vertex";
    case Light::External: return "External";
    case Light::Adjusting: return "Adjusting";
    case Light::Done: return "Done";
    case Light::Moved: return "Moved";
  }
  return "None";
}

Light lightFromString(std::string_view name) {
  for (Light l : {Light::None, Light::Off, Light::Vertex, Light::External, Light::Adjusting, Light::Done, Light::Moved})
    if (toString(l) == name) return l;
  throw Error(ErrorCode::ConfigInvalid, "unknown light color '" + std::string(name) + "'");
}

namespace {

Point2 rotate(Point2 v, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

Point2 flip(Point2 v, bool reflect) { return reflect ? Point2{v.x, -v.y} : v; }

}  // namespace

Point2 toLocal(const LocalFrame& frame, Point2 world) {
  return frame.scale * rotate(flip(world - frame.origin, frame.reflect), frame.rotation);
}

Point2 applyFrameInverse(const LocalFrame& frame, Point2 local) {
  return frame.origin + flip(rotate(local, -frame.rotation), frame.reflect) / frame.scale;
}

Point2 directionToLocal(const LocalFrame& frame, Point2 worldDir) {
  return normalized(rotate(flip(worldDir, frame.reflect), frame.rotation));
}

Point2 Configuration::positionAt(std::size_t index, double t) const {
  const RobotState& r = robots[index];
  if (r.status != Status::Moving || t <= r.moveStart) return r.position;
  if (t >= r.moveEnd) return r.moveTo;
  double f = (t - r.moveStart) / (r.moveEnd - r.moveStart);
  return r.position + f * (r.moveTo - r.position);
}

std::vector<Point2> Configuration::currentPositions() const {
  std::vector<Point2> out;
  out.reserve(robots.size());
  for (std::size_t i = 0; i < robots.size(); ++i) out.push_back(currentPosition(i));
  return out;
}

std::vector<Point2> Snapshot::positions() const {
  std::vector<Point2> out;
  out.reserve(visible.size());
  for (const auto& e : visible) out.push_back(e.position);
  return out;
}

Snapshot takeSnapshot(const Configuration& config, std::size_t robotIndex, const FrameSpec& spec,
                      const Knowledge& knowledge, double epsVis, double epsColl) {
  if (config.robots.at(robotIndex).status == Status::Terminated)
    throw Error(ErrorCode::RobotTerminated, "robot " + std::to_string(config.robots[robotIndex].id) + " has terminated");
  const std::vector<Point2> pos = config.currentPositions();
  const std::size_t n = pos.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (distance(pos[i], pos[j]) <= epsColl)
        throw Error(ErrorCode::CollisionPresent,
                    "robots " + std::to_string(config.robots[i].id) + " and " + std::to_string(config.robots[j].id));

  const LocalFrame frame = LocalFrame::at(pos[robotIndex], spec);
  Snapshot snap;
  snap.selfLight = config.robots[robotIndex].light;
  snap.visible.push_back({{0.0, 0.0}, snap.selfLight});

  std::vector<Point2> blockers;
  blockers.reserve(n);
  std::vector<SnapshotEntry> others;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == robotIndex) continue;
    blockers.clear();
    for (std::size_t k = 0; k < n; ++k)
      if (k != j && k != robotIndex) blockers.push_back(pos[k]);
    if (isVisible(pos[robotIndex], pos[j], blockers, epsVis))
      others.push_back({toLocal(frame, pos[j]), config.robots[j].light});
  }
  std::sort(others.begin(), others.end(),
            [](const SnapshotEntry& a, const SnapshotEntry& b) { return lexLess(a.position, b.position); });
  snap.visible.insert(snap.visible.end(), others.begin(), others.end());

  snap.n = knowledge.n;
  if (knowledge.delta) snap.delta = *knowledge.delta * spec.scale;
  if (knowledge.axis) snap.north = directionToLocal(frame, {0.0, 1.0});
  return snap;
}

}  // namespace lumiswarm
