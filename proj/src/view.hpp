#pragma once

// Shared helpers for the per-activation protocol functions.

#include <optional>
#include <vector>

#include "lumiswarm/geometry.hpp"
#include "lumiswarm/protocols.hpp"

namespace lumiswarm::detail {

struct View {
  const Snapshot& snap;
  std::vector<Point2> pts;
  Hull hull;
  double tol = 0.0;     // absolute collinearity slack
  double nudge = 0.0;   // absolute epsNudge
  int selfBoundary = -1;
  bool selfVertex = false;

  View(const Snapshot& s, const ProtocolParams& params);

  std::size_t size() const { return pts.size(); }
  Light lightAt(std::size_t boundaryIndex) const { return snap.visible[hull.source[boundaryIndex]].light; }
  Light light(std::size_t input) const { return snap.visible[input].light; }
  bool othersAll(Light l) const;
  bool anyLight(Light l) const;  // self included
  bool selfStrictlyInside() const { return hull.containsStrictly({0.0, 0.0}, tol); }
  bool anyStrictlyInside() const;
  // Neighbours of the observer on the boundary walk (ccw, cw) with their lights.
  struct Side {
    Point2 pos;
    Light light;
  };
  std::pair<Side, Side> neighbors() const;
  double length() const { return hull.diameter(); }
};

// Unit normal of a segment hull, oriented toward local +y (then +x).
Point2 segmentNormal(const Hull& hull);
// Closest midpoint of two consecutive boundary robots.
std::optional<Point2> nearestEdgeMidpoint(const Hull& hull);

struct DefaultMove {
  Point2 dest;
  int limiting = -1;  // input index of the robot that fixed u, or -1
  double gamma = 0.5;
  Point2 a, b;
};
// Destination of a vertex robot, given its boundary neighbours.
DefaultMove shrinkDestination(const View& v);

// Point where the ray from the origin along unit `dir` leaves the circle.
Point2 rayCircleExit(Point2 dir, const Circle& c);

}  // namespace lumiswarm::detail

namespace lumiswarm {
Action shrinkNKnown(const Snapshot& s, const ProtocolParams& params);
}  // namespace lumiswarm
