#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "lumiswarm/geometry.hpp"

namespace lumiswarm {

enum class Light { None, Off, Vertex, External, Adjusting, Done, Moved };

std::string_view toString(Light light);
// Throws ConfigInvalid on unknown names.
Light lightFromString(std::string_view name);

enum class Status { Idle, Computing, Moving, Terminated };

// Adversarial part of a local frame; the origin is always the observer.
struct FrameSpec {
  double rotation = 0.0;
  bool reflect = false;
  double scale = 1.0;

  friend bool operator==(const FrameSpec&, const FrameSpec&) = default;
};

struct LocalFrame {
  Point2 origin;
  double rotation = 0.0;
  bool reflect = false;
  double scale = 1.0;

  static LocalFrame at(Point2 origin, const FrameSpec& spec) { return {origin, spec.rotation, spec.reflect, spec.scale}; }
};

Point2 toLocal(const LocalFrame& frame, Point2 world);
Point2 applyFrameInverse(const LocalFrame& frame, Point2 local);
// Directions ignore the origin and the scale.
Point2 directionToLocal(const LocalFrame& frame, Point2 worldDir);

struct RobotState {
  int id = 0;
  Point2 position;  // rest position, or start of the current move
  Light light = Light::Off;
  Status status = Status::Idle;
  Point2 moveTo;
  double moveStart = 0.0;
  double moveEnd = 0.0;
};

struct Configuration {
  std::vector<RobotState> robots;
  double time = 0.0;

  Point2 positionAt(std::size_t index, double t) const;
  Point2 currentPosition(std::size_t index) const { return positionAt(index, time); }
  std::vector<Point2> currentPositions() const;
};

// Which pieces of global knowledge the variant under test is given.
struct Knowledge {
  std::optional<int> n;
  std::optional<double> delta;  // world units
  bool axis = false;            // agreement on the North direction (world +y)
};

struct SnapshotEntry {
  Point2 position;
  Light light;
};

struct Snapshot {
  Light selfLight = Light::Off;
  std::vector<SnapshotEntry> visible;  // visible[0] is the observer at the origin
  std::optional<int> n;
  std::optional<double> delta;  // in local units
  std::optional<Point2> north;  // local unit vector

  std::vector<Point2> positions() const;
};

// Obstruction-filtered, egocentric view of robot `robotIndex` at config.time.
// Throws RobotTerminated, CollisionPresent.
Snapshot takeSnapshot(const Configuration& config, std::size_t robotIndex, const FrameSpec& frame,
                      const Knowledge& knowledge, double epsVis, double epsColl);

}  // namespace lumiswarm
