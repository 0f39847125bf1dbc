#include <algorithm>
#include <cmath>

#include "lumiswarm/error.hpp"
#include "view.hpp"

namespace lumiswarm {

using detail::View;

namespace {

double capped(const ProtocolParams& params, double length) {
  return params.epsAdjust ? std::min(*params.epsAdjust, length) : length;
}

Point2 axisNormal(const Hull& hull, Point2 north) {
  Point2 n = detail::segmentNormal(hull);
  double up = dot(n, north);
  if (std::abs(up) > 1e-9) return up > 0.0 ? n : -n;
  return n;
}

Point2 adjustTarget(const ProtocolParams& params, Point2 a, Point2 b) {
  Point2 sum = a + b;
  if (!params.epsAdjust) return sum / 4.0;
  double len = norm(sum);
  return std::min(*params.epsAdjust, len / 4.0) * (sum / len);
}

bool strictlyInsideTriangle(Point2 p, Point2 a, Point2 b, Point2 c, double margin) {
  double area = cross(b - a, c - a);
  if (area == 0.0) return false;
  double sgn = area > 0.0 ? 1.0 : -1.0;
  auto side = [&](Point2 u, Point2 w) { return sgn * cross(w - u, p - u) / norm(w - u); };
  return side(a, b) > margin && side(b, c) > margin && side(c, a) > margin;
}

bool pathClear(const View& v, Point2 dest) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (distanceToSegment(v.pts[i], {0.0, 0.0}, dest) <= v.nudge / 2.0) return false;
  return true;
}

std::optional<Point2> firstTarget(const std::vector<Point2>& targets) {
  if (targets.empty()) return std::nullopt;
  return targets.front();
}

std::optional<Point2> firstClearTarget(const View& v, const std::vector<Point2>& targets) {
  for (Point2 t : targets)
    if (pathClear(v, t)) return t;
  return std::nullopt;
}

std::vector<Point2> boundaryTargets(const View& v, const AngularSector& sector) {
  try {
    return sectorBoundaryTargets(sector, v.hull, v.pts, v.nudge);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyIntersection) throw;
    return {};
  }
}

// Interior depletion for a robot strictly inside its view with no Adjusting
// robot in sight. The observer is always a member of the Off set.
std::optional<Point2> depletionTarget(const View& v, const ProtocolParams& params) {
  std::vector<Point2> offSet{{0.0, 0.0}};
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v.light(i) == Light::Off) offSet.push_back(v.pts[i]);

  if (offSet.size() == 1) return detail::nearestEdgeMidpoint(v.hull);

  // Targets are nudged off exact robot positions, so Off robots that were
  // collinear can drift apart by about a nudge; classify at that resolution.
  Hull inner = convexHull(offSet, std::max(params.epsGeom, params.epsNudgeFraction));
  const auto self = static_cast<std::size_t>(inner.boundaryIndexOfInput(0));
  if (inner.isSegment) {
    if (self != 0 && self + 1 != inner.size()) return std::nullopt;
    Point2 other = self == 0 ? inner.boundary[1] : inner.boundary[inner.size() - 2];
    AngularSector away{{0.0, 0.0}, normalized(-other), kPi / 4.0};
    return firstTarget(boundaryTargets(v, away));
  }
  if (inner.boundaryIndexOfInput(0) < 0 || !inner.vertexFlags[self]) return std::nullopt;

  Neighbors nb = hullNeighbors(inner, self);
  const double alpha = angleBetween(nb.ccw, nb.cw);
  const Point2 bisector = normalized(normalized(nb.ccw) + normalized(nb.cw));
  const double narrowed = alpha <= kPi / 2.0 ? alpha : kPi - alpha;
  const AngularSector cone{{0.0, 0.0}, bisector, alpha / 2.0};
  const AngularSector outward{{0.0, 0.0}, -bisector, narrowed / 2.0};

  // Admissible edges: fully visible, both ends External, both ends outside the
  // internal angle at the observer.
  std::vector<Segment> admissible;
  const std::size_t m = v.hull.size();
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t j = (i + 1) % m;
    if (v.lightAt(i) != Light::External || v.lightAt(j) != Light::External) continue;
    Point2 u = v.hull.boundary[i], w = v.hull.boundary[j];
    if (cone.contains(u) || cone.contains(w)) continue;
    bool hidden = false;
    for (std::size_t k = 1; k < v.size() && !hidden; ++k)
      hidden = strictlyInsideTriangle(v.pts[k], {0.0, 0.0}, u, w, v.tol);
    if (!hidden) admissible.push_back({u, w});
  }
  return firstTarget(sectorSegmentTargets(outward, admissible, v.pts, v.nudge));
}

// Depletion rule under agreement on North: only robots with nothing but
// External robots to their North move; rows move from their endpoints.
std::optional<Point2> axisDepletionTarget(const View& v, Point2 north) {
  const Point2 east = -perp(north);
  std::vector<double> rowSides;
  for (std::size_t i = 1; i < v.size(); ++i) {
    double h = dot(v.pts[i], north);
    if (h > v.tol && v.light(i) != Light::External) return std::nullopt;
    if (std::abs(h) <= v.tol && v.light(i) == Light::Off) rowSides.push_back(dot(v.pts[i], east));
  }
  if (rowSides.empty()) {
    AngularSector up{{0.0, 0.0}, north, kPi / 12.0};
    return firstClearTarget(v, boundaryTargets(v, up));
  }
  bool allEast = std::all_of(rowSides.begin(), rowSides.end(), [](double x) { return x > 0.0; });
  bool allWest = std::all_of(rowSides.begin(), rowSides.end(), [](double x) { return x < 0.0; });
  if (!allEast && !allWest) return std::nullopt;
  Point2 away = allEast ? -east : east;
  AngularSector quadrant{{0.0, 0.0}, normalized(north + away), kPi / 4.0};
  return firstClearTarget(v, boundaryTargets(v, quadrant));
}

Action containCore(const Snapshot& s, const ProtocolParams& params, bool axis) {
  if (axis && !s.north) throw Error(ErrorCode::MissingAxisKnowledge, "contain-axis needs the North direction");
  View v(s, params);
  const Light self = s.selfLight;
  const std::size_t n = v.size();

  if (n == 1) return Action::halt(self);
  if (n == 2) {
    if (self == Light::Adjusting) return Action::halt(Light::External);
    if (!axis) return Action::moveTo(Light::Adjusting, capped(params, v.length()) * detail::segmentNormal(v.hull));
    double otherHeight = dot(v.pts[1], *s.north);
    if (otherHeight <= v.tol)
      return Action::moveTo(Light::Adjusting, capped(params, v.length()) * axisNormal(v.hull, *s.north));
    if (v.light(1) == Light::Adjusting || v.light(1) == Light::External) return Action::halt(Light::External);
    return Action::stay(self);
  }
  if (v.hull.isSegment) {
    if (v.othersAll(Light::External))
      return Action::moveTo(Light::Adjusting,
                            capped(params, params.hPositive * v.length()) * detail::segmentNormal(v.hull));
    return Action::stay(self);
  }

  if (v.selfBoundary >= 0) {
    auto [a, b] = v.neighbors();
    if (self == Light::Adjusting) {
      bool noneOff = !v.anyLight(Light::Off);
      if (noneOff || v.anyLight(Light::External)) {
        if (a.light != Light::Off && b.light != Light::Off && !v.anyStrictlyInside()) return Action::halt(Light::External);
        return Action::stay(Light::External);
      }
      return Action::stay(self);
    }
    if (v.selfVertex && self == Light::External && v.othersAll(Light::External))
      return Action::moveTo(Light::Adjusting, adjustTarget(params, a.pos, b.pos));
    std::size_t adjusting = 0;
    for (const auto& e : s.visible)
      if (e.light == Light::Adjusting) ++adjusting;
    bool acute = n == 3 && angleBetween(a.pos, b.pos) < kPi / 2.0;
    if (acute || (adjusting > 1 && v.selfVertex) || adjusting == 0) return Action::stay(Light::External);
    return Action::stay(self);
  }

  if (v.anyLight(Light::Adjusting)) return Action::stay(self);
  auto target = axis ? axisDepletionTarget(v, *s.north) : depletionTarget(v, params);
  if (target) return Action::moveTo(self, *target);
  return Action::stay(self);
}

}  // namespace

Action containStep(const Snapshot& s, const ProtocolParams& params) { return containCore(s, params, false); }

Action containAsynchVariant(const Snapshot& s, const ProtocolParams& params) { return containCore(s, params, true); }

Action nKnownStep(const Snapshot& s, NKnownBase base, const ProtocolParams& params) {
  if (!s.n) throw Error(ErrorCode::MissingNKnowledge, "n-known variants need n");
  if (base == NKnownBase::Shrink) return shrinkNKnown(s, params);

  const int n = *s.n;
  View v(s, params);
  const Light self = s.selfLight;
  if (static_cast<int>(v.hull.vertexCount()) == n && v.selfVertex) return Action::halt(Light::External);
  if (v.hull.isSegment) {
    bool endpoint = v.size() == 2;
    bool moves = n == 3 ? !endpoint : endpoint;
    if (!moves) return Action::stay(self);
    double len = endpoint ? v.length() : params.hPositive * v.length();
    return Action::moveTo(self, len * detail::segmentNormal(v.hull));
  }
  if (v.selfBoundary >= 0) {
    if (v.selfVertex && self == Light::External && v.othersAll(Light::External)) {
      auto [a, b] = v.neighbors();
      return Action::moveTo(Light::External, adjustTarget(params, a.pos, b.pos));
    }
    return Action::stay(Light::External);
  }
  if (auto target = depletionTarget(v, params)) return Action::moveTo(self, *target);
  return Action::stay(self);
}

}  // namespace lumiswarm
