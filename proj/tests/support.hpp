#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lumiswarm/geometry.hpp"
#include "lumiswarm/model.hpp"

// Independent brute-force oracles and fixtures shared by the unit tests and
// the acceptance binary. None of these call into the library's geometry.
namespace oracle {

using lumiswarm::Point2;

inline double orient(Point2 a, Point2 b, Point2 c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

struct HullClass {
  std::vector<bool> onBoundary;
  std::vector<bool> vertex;  // non-degenerate
};

// A point is on the boundary iff some line through it and another input has
// every input on one closed side. It is a non-degenerate vertex iff it is on
// the boundary and lies in no closed segment between two other inputs that
// share that boundary line. `tol` is an absolute slack on the orientation test.
inline HullClass classifyByHalfPlanes(const std::vector<Point2>& pts, double tol) {
  const std::size_t n = pts.size();
  HullClass out{std::vector<bool>(n, false), std::vector<bool>(n, false)};
  if (n == 1) {
    out.onBoundary[0] = out.vertex[0] = true;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n && !out.onBoundary[i]; ++j) {
      if (j == i) continue;
      const double len = std::hypot(pts[j].x - pts[i].x, pts[j].y - pts[i].y);
      bool left = true, right = true;
      for (std::size_t k = 0; k < n; ++k) {
        double o = orient(pts[i], pts[j], pts[k]) / len;
        if (o < -tol) left = false;
        if (o > tol) right = false;
      }
      if (left || right) out.onBoundary[i] = true;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.onBoundary[i]) continue;
    bool between = false;
    for (std::size_t a = 0; a < n && !between; ++a)
      for (std::size_t b = a + 1; b < n && !between; ++b) {
        if (a == i || b == i) continue;
        const double len = std::hypot(pts[b].x - pts[a].x, pts[b].y - pts[a].y);
        if (std::abs(orient(pts[a], pts[b], pts[i])) / len > tol) continue;
        double t = ((pts[i].x - pts[a].x) * (pts[b].x - pts[a].x) + (pts[i].y - pts[a].y) * (pts[b].y - pts[a].y)) /
                   (len * len);
        between = t > 0.0 && t < 1.0;
      }
    out.vertex[i] = !between;
  }
  return out;
}

struct Disk {
  Point2 center;
  double radius;
};

inline std::optional<Disk> circumcircle(Point2 a, Point2 b, Point2 c) {
  double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
  if (std::abs(d) < 1e-14) return std::nullopt;
  double a2 = a.x * a.x + a.y * a.y, b2 = b.x * b.x + b.y * b.y, c2 = c.x * c.x + c.y * c.y;
  Point2 o{(a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
           (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d};
  return Disk{o, std::hypot(a.x - o.x, a.y - o.y)};
}

// Smallest circle among all pair-diameter and triple circumcircles that
// contain every point.
inline Disk enclosingCircle(const std::vector<Point2>& pts) {
  if (pts.size() == 1) return {pts[0], 0.0};
  auto covers = [&](const Disk& d) {
    for (Point2 p : pts)
      if (std::hypot(p.x - d.center.x, p.y - d.center.y) > d.radius * (1.0 + 1e-12) + 1e-12) return false;
    return true;
  };
  Disk best{{0.0, 0.0}, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      Disk d{{(pts[i].x + pts[j].x) / 2.0, (pts[i].y + pts[j].y) / 2.0},
             std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) / 2.0};
      if (d.radius < best.radius && covers(d)) best = d;
      for (std::size_t k = j + 1; k < pts.size(); ++k)
        if (auto c = circumcircle(pts[i], pts[j], pts[k]); c && c->radius < best.radius && covers(*c)) best = *c;
    }
  return best;
}

// Dense sampling of the gap between two linear motions, refined by ternary
// search around the best sample (the gap is convex in t).
inline double sampledTrajectoryGap(Point2 p0, Point2 p1, Point2 q0, Point2 q1, int samples = 10000) {
  auto gap = [&](double t) {
    double x = (p0.x + t * (p1.x - p0.x)) - (q0.x + t * (q1.x - q0.x));
    double y = (p0.y + t * (p1.y - p0.y)) - (q0.y + t * (q1.y - q0.y));
    return std::hypot(x, y);
  };
  int best = 0;
  for (int i = 1; i <= samples; ++i)
    if (gap(double(i) / samples) < gap(double(best) / samples)) best = i;
  double lo = std::max(0.0, double(best - 1) / samples), hi = std::min(1.0, double(best + 1) / samples);
  for (int it = 0; it < 200; ++it) {
    double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (gap(m1) < gap(m2)) hi = m2;
    else lo = m1;
  }
  return std::min(gap(double(best) / samples), gap((lo + hi) / 2.0));
}

inline double segmentDistance(Point2 p, Point2 a, Point2 b) {
  double dx = b.x - a.x, dy = b.y - a.y;
  double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy);
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - a.x - t * dx, p.y - a.y - t * dy);
}

inline std::vector<Point2> uniformPoints(std::mt19937_64& rng, int n, double side = 1.0) {
  std::uniform_real_distribution<double> u(0.0, side);
  std::vector<Point2> pts;
  for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
  return pts;
}

// Distinct points of a small integer grid, so collinear triples are exact.
inline std::vector<Point2> gridPoints(std::mt19937_64& rng, int n, int side = 4) {
  std::uniform_int_distribution<int> u(0, side);
  std::vector<Point2> pts;
  while (static_cast<int>(pts.size()) < n) {
    Point2 p{double(u(rng)), double(u(rng))};
    if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
  }
  return pts;
}

}  // namespace oracle

namespace fixture {

// doctest's ADL lookup trips over the library's string_view toString, so
// enums are compared through their names.
template <class E>
std::string str(E e) {
  return std::string(lumiswarm::toString(e));
}

using lumiswarm::Light;
using lumiswarm::Point2;
using lumiswarm::Snapshot;

// Snapshot with the observer at the origin followed by the given robots.
inline Snapshot view(Light self, std::vector<std::pair<Point2, Light>> others) {
  Snapshot s;
  s.selfLight = self;
  s.visible.push_back({{0.0, 0.0}, self});
  for (auto& [p, l] : others) s.visible.push_back({p, l});
  return s;
}

inline std::vector<std::pair<Point2, Light>> square(double half, Light l) {
  return {{{half, half}, l}, {{-half, half}, l}, {{-half, -half}, l}, {{half, -half}, l}};
}

}  // namespace fixture
