#include "lumiswarm/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "lumiswarm/error.hpp"

namespace lumiswarm {

namespace {

double signedDistance(Point2 a, Point2 b, Point2 p) { return cross(b - a, p - a) / norm(b - a); }

// Intersection of ray o + t*d (t >= 0) with segment a + s*(b - a), s in [0,1].
bool raySegment(Point2 o, Point2 d, Point2 a, Point2 b, double& t, double& s) {
  Point2 e = b - a;
  double denom = cross(d, e);
  if (std::abs(denom) <= 1e-15 * norm(d) * norm(e)) return false;
  Point2 w = a - o;
  t = cross(w, e) / denom;
  s = cross(w, d) / denom;
  return t >= 0.0 && s >= -1e-12 && s <= 1.0 + 1e-12;
}

Point2 rotate(Point2 v, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

Circle circleFrom2(Point2 a, Point2 b) { return {(a + b) / 2.0, distance(a, b) / 2.0}; }

Circle circleFrom3(Point2 a, Point2 b, Point2 c) {
  Point2 ab = b - a, ac = c - a;
  double d = 2.0 * cross(ab, ac);
  double scale = std::max({norm2(ab), norm2(ac), norm2(c - b)});
  if (std::abs(d) <= 1e-14 * scale) {
    Circle best = circleFrom2(a, b);
    for (Circle cand : {circleFrom2(a, c), circleFrom2(b, c)})
      if (cand.radius > best.radius) best = cand;
    return best;
  }
  double ab2 = norm2(ab), ac2 = norm2(ac);
  Point2 off{(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
  return {a + off, norm(off)};
}

bool inCircle(const Circle& c, Point2 p) { return distance(p, c.center) <= c.radius * (1.0 + 1e-12) + 1e-15; }

}  // namespace

double distanceToLine(Point2 p, Point2 a, Point2 b) { return std::abs(signedDistance(a, b, p)); }

double distanceToSegment(Point2 p, Point2 a, Point2 b) {
  Point2 d = b - a;
  double l2 = norm2(d);
  if (l2 == 0.0) return distance(p, a);
  double t = std::clamp(dot(p - a, d) / l2, 0.0, 1.0);
  return distance(p, a + t * d);
}

double extent(std::span<const Point2> points) {
  if (points.empty()) return 0.0;
  double minX = points[0].x, maxX = minX, minY = points[0].y, maxY = minY;
  for (Point2 p : points) {
    minX = std::min(minX, p.x);
    maxX = std::max(maxX, p.x);
    minY = std::min(minY, p.y);
    maxY = std::max(maxY, p.y);
  }
  return std::max(maxX - minX, maxY - minY);
}

std::size_t Hull::vertexCount() const { return static_cast<std::size_t>(std::count(vertexFlags.begin(), vertexFlags.end(), true)); }

std::vector<Point2> Hull::vertices() const {
  std::vector<Point2> out;
  for (std::size_t i = 0; i < size(); ++i)
    if (vertexFlags[i]) out.push_back(boundary[i]);
  return out;
}

int Hull::boundaryIndexOfInput(std::size_t inputIndex) const {
  for (std::size_t i = 0; i < source.size(); ++i)
    if (source[i] == inputIndex) return static_cast<int>(i);
  return -1;
}

int Hull::boundaryIndexOf(Point2 p) const {
  for (std::size_t i = 0; i < boundary.size(); ++i)
    if (boundary[i] == p) return static_cast<int>(i);
  return -1;
}

double Hull::area() const {
  if (isSegment) return 0.0;
  double a = 0.0;
  for (std::size_t i = 0; i < size(); ++i) a += cross(boundary[i], boundary[(i + 1) % size()]);
  return a / 2.0;
}

double Hull::diameter() const {
  double d = 0.0;
  auto vs = vertices();
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = i + 1; j < vs.size(); ++j) d = std::max(d, distance(vs[i], vs[j]));
  return d;
}

std::vector<Segment> Hull::edges() const {
  std::vector<Segment> out;
  if (size() < 2) return out;
  std::size_t count = isSegment ? size() - 1 : size();
  for (std::size_t i = 0; i < count; ++i) out.push_back({boundary[i], boundary[(i + 1) % size()]});
  return out;
}

std::vector<Segment> Hull::vertexEdges() const {
  std::vector<Segment> out;
  auto vs = vertices();
  if (vs.size() < 2) return out;
  if (isSegment) return {{vs.front(), vs.back()}};
  for (std::size_t i = 0; i < vs.size(); ++i) out.push_back({vs[i], vs[(i + 1) % vs.size()]});
  return out;
}

bool Hull::contains(Point2 p, double slack) const {
  if (size() == 1) return distance(p, boundary[0]) <= slack;
  if (isSegment) return distanceToSegment(p, boundary.front(), boundary.back()) <= slack;
  for (const Segment& e : vertexEdges())
    if (signedDistance(e.a, e.b, p) < -slack) return false;
  return true;
}

bool Hull::containsStrictly(Point2 p, double margin) const {
  if (isSegment) return false;
  for (const Segment& e : vertexEdges())
    if (signedDistance(e.a, e.b, p) <= margin) return false;
  return true;
}

bool AngularSector::contains(Point2 p, double tol) const {
  Point2 d = p - apex;
  if (norm(d) == 0.0) return true;
  return angleBetween(d, axis) <= halfAngle + tol;
}

Hull convexHull(std::span<const Point2> points, double epsGeom) {
  if (points.empty()) throw Error(ErrorCode::PreconditionNotMet, "convexHull needs at least one point");
  const std::size_t n = points.size();
  Hull hull;
  hull.epsGeom = epsGeom;
  hull.scale = extent(points);
  const double tol = epsGeom * hull.scale;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return lexLess(points[i], points[j]) || (points[i] == points[j] && i < j);
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (distance(points[i], points[j]) <= tol)
        throw Error(ErrorCode::DuplicatePoints, "two input points coincide");

  if (n == 1) {
    hull.boundary = {points[0]};
    hull.vertexFlags = {true};
    hull.source = {0};
    hull.isSegment = true;
    return hull;
  }

  Point2 lo = points[order.front()], hi = points[order.back()];
  bool collinear = true;
  for (Point2 p : points)
    if (distanceToLine(p, lo, hi) > tol) {
      collinear = false;
      break;
    }
  if (collinear) {
    Point2 dir = hi - lo;
    std::vector<std::size_t> byProj = order;
    std::sort(byProj.begin(), byProj.end(),
              [&](std::size_t i, std::size_t j) { return dot(points[i] - lo, dir) < dot(points[j] - lo, dir); });
    hull.isSegment = true;
    for (std::size_t k = 0; k < n; ++k) {
      hull.boundary.push_back(points[byProj[k]]);
      hull.source.push_back(byProj[k]);
      hull.vertexFlags.push_back(k == 0 || k + 1 == n);
    }
    return hull;
  }

  // Exact monotone chain first, then drop near-flat corners one at a time so
  // that a run of almost collinear points cannot push one of them off the
  // boundary by accumulated slack.
  std::vector<std::size_t> chain(2 * n);
  std::size_t k = 0;
  auto keep = [&](std::size_t a, std::size_t b, std::size_t p) {
    return signedDistance(points[a], points[p], points[b]) < 0.0;
  };
  for (std::size_t idx : order) {
    while (k >= 2 && !keep(chain[k - 2], chain[k - 1], idx)) --k;
    chain[k++] = idx;
  }
  for (std::size_t t = n - 1, lower = k + 1; t-- > 0;) {
    std::size_t idx = order[t];
    while (k >= lower && !keep(chain[k - 2], chain[k - 1], idx)) --k;
    chain[k++] = idx;
  }
  chain.resize(k - 1);
  const std::size_t m = chain.size();

  std::vector<bool> corner(m, true);
  for (std::size_t live = m; live > 3;) {
    std::size_t flattest = m;
    double flattestTurn = tol;
    for (std::size_t i = 0; i < m; ++i) {
      if (!corner[i]) continue;
      std::size_t prev = (i + m - 1) % m, next = (i + 1) % m;
      while (!corner[prev]) prev = (prev + m - 1) % m;
      while (!corner[next]) next = (next + 1) % m;
      double turn = -signedDistance(points[chain[prev]], points[chain[next]], points[chain[i]]);
      if (turn <= flattestTurn) {
        flattestTurn = turn;
        flattest = i;
      }
    }
    if (flattest == m) break;
    corner[flattest] = false;
    --live;
  }

  // Start the walk at the lowest, then leftmost, corner.
  std::size_t first = m;
  for (std::size_t i = 0; i < m; ++i) {
    if (!corner[i]) continue;
    Point2 p = points[chain[i]];
    if (first == m || p.y < points[chain[first]].y || (p.y == points[chain[first]].y && p.x < points[chain[first]].x))
      first = i;
  }
  std::rotate(chain.begin(), chain.begin() + static_cast<std::ptrdiff_t>(first), chain.end());
  std::rotate(corner.begin(), corner.begin() + static_cast<std::ptrdiff_t>(first), corner.end());

  std::vector<bool> onChain(n, false);
  for (std::size_t idx : chain) onChain[idx] = true;
  std::vector<std::vector<std::size_t>> onEdge(m);
  for (std::size_t i = 0; i < n; ++i) {
    if (onChain[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    std::size_t bestEdge = m;
    for (std::size_t e = 0; e < m; ++e) {
      double d = distanceToSegment(points[i], points[chain[e]], points[chain[(e + 1) % m]]);
      if (d < best) {
        best = d;
        bestEdge = e;
      }
    }
    if (best <= tol) onEdge[bestEdge].push_back(i);
  }
  for (std::size_t e = 0; e < m; ++e) {
    Point2 a = points[chain[e]];
    Point2 dir = points[chain[(e + 1) % m]] - a;
    std::sort(onEdge[e].begin(), onEdge[e].end(),
              [&](std::size_t i, std::size_t j) { return dot(points[i] - a, dir) < dot(points[j] - a, dir); });
    hull.boundary.push_back(a);
    hull.source.push_back(chain[e]);
    hull.vertexFlags.push_back(corner[e]);
    for (std::size_t idx : onEdge[e]) {
      hull.boundary.push_back(points[idx]);
      hull.source.push_back(idx);
      hull.vertexFlags.push_back(false);
    }
  }
  return hull;
}

bool isVisible(Point2 p, Point2 q, std::span<const Point2> others, double epsVis) {
  if (lexLess(q, p)) std::swap(p, q);
  Point2 d = q - p;
  double l2 = norm2(d);
  double l = std::sqrt(l2);
  for (Point2 o : others) {
    Point2 w = o - p;
    double t = dot(w, d) / l2;
    if (t <= 0.0 || t >= 1.0) continue;
    if (std::abs(cross(d, w)) / l <= epsVis) return false;
  }
  return true;
}

Neighbors hullNeighbors(const Hull& hull, std::size_t index) {
  const std::size_t m = hull.size();
  if (index >= m) throw Error(ErrorCode::NotOnBoundary, "boundary index out of range");
  if (m == 1) return {hull.boundary[0], hull.boundary[0]};
  if (hull.isSegment) {
    if (index == 0) return {hull.boundary[1], hull.boundary[1]};
    if (index + 1 == m) return {hull.boundary[m - 2], hull.boundary[m - 2]};
    return {hull.boundary[index + 1], hull.boundary[index - 1]};
  }
  return {hull.boundary[(index + 1) % m], hull.boundary[(index + m - 1) % m]};
}

Neighbors hullNeighbors(const Hull& hull, Point2 p) {
  int idx = hull.boundaryIndexOf(p);
  if (idx < 0) throw Error(ErrorCode::NotOnBoundary, "point is not on the hull boundary");
  return hullNeighbors(hull, static_cast<std::size_t>(idx));
}

Coeffs coeffsAlong(Point2 a, Point2 b, Point2 r, double epsGeom) {
  double det = cross(a, b);
  if (std::abs(det) <= epsGeom * norm(a) * norm(b)) throw Error(ErrorCode::DegenerateBasis, "basis vectors are parallel");
  return {cross(r, b) / det, cross(a, r) / det};
}

Circle smallestEnclosingCircle(std::span<const Point2> points) {
  if (points.empty()) throw Error(ErrorCode::PreconditionNotMet, "smallestEnclosingCircle needs at least one point");
  Circle c{points[0], 0.0};
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (inCircle(c, points[i])) continue;
    c = {points[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (inCircle(c, points[j])) continue;
      c = circleFrom2(points[i], points[j]);
      for (std::size_t k = 0; k < j; ++k)
        if (!inCircle(c, points[k])) c = circleFrom3(points[i], points[j], points[k]);
    }
  }
  return c;
}

double minTrajectoryDistance(Point2 p0, Point2 p1, Point2 q0, Point2 q1) {
  Point2 d0 = p0 - q0;
  Point2 dv = (p1 - p0) - (q1 - q0);
  double v2 = norm2(dv);
  double t = v2 > 0.0 ? std::clamp(-dot(d0, dv) / v2, 0.0, 1.0) : 0.0;
  return norm(d0 + t * dv);
}

bool rayHitsBoundary(const Hull& hull, Point2 origin, Point2 dir, Point2& hit) {
  double bestT = std::numeric_limits<double>::infinity();
  for (const Segment& e : hull.vertexEdges()) {
    double t, s;
    if (raySegment(origin, dir, e.a, e.b, t, s) && t > 0.0 && t < bestT) {
      bestT = t;
      hit = origin + t * dir;
    }
  }
  return std::isfinite(bestT);
}

std::vector<Point2> sectorSegmentTargets(const AngularSector& sector, std::span<const Segment> segments,
                                         std::span<const Point2> forbidden, double epsNudge) {
  struct Cand {
    Point2 p;
    double dev;
  };
  std::vector<Cand> cands;
  const Point2 axis = normalized(sector.axis);
  const bool fullPlane = sector.halfAngle >= kPi - 1e-15;
  const Point2 rays[2] = {rotate(axis, sector.halfAngle), rotate(axis, -sector.halfAngle)};
  auto deviation = [&](Point2 p) {
    Point2 d = p - sector.apex;
    return norm(d) == 0.0 ? 0.0 : angleBetween(d, axis);
  };
  auto nearForbidden = [&](Point2 p) {
    for (Point2 f : forbidden)
      if (distance(p, f) < epsNudge * (1.0 - 1e-9)) return true;
    return false;
  };

  for (const Segment& seg : segments) {
    Point2 e = seg.b - seg.a;
    double len = norm(e);
    if (len == 0.0) continue;
    auto at = [&](double s) { return seg.a + s * e; };
    std::vector<double> breaks{0.0, 1.0};
    double t, s;
    if (!fullPlane)
      for (Point2 r : rays)
        if (raySegment(sector.apex, r, seg.a, seg.b, t, s)) breaks.push_back(std::clamp(s, 0.0, 1.0));
    double bisectorS = -1.0;
    if (raySegment(sector.apex, axis, seg.a, seg.b, t, s)) bisectorS = std::clamp(s, 0.0, 1.0);
    std::sort(breaks.begin(), breaks.end());

    auto admit = [&](double sParam, double lo, double hi) {
      Point2 p = at(sParam);
      if (!nearForbidden(p)) {
        cands.push_back({p, deviation(p)});
        return;
      }
      for (Point2 f : forbidden) {
        if (distance(p, f) >= epsNudge) continue;
        double fs = dot(f - seg.a, e) / (len * len);
        for (double sign : {-1.0, 1.0}) {
          double ns = fs + sign * epsNudge / len;
          if (ns < lo || ns > hi) continue;
          Point2 q = at(ns);
          if (!nearForbidden(q) && sector.contains(q, 1e-12)) cands.push_back({q, deviation(q)});
        }
      }
    };

    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
      double lo = breaks[i], hi = breaks[i + 1];
      const bool hasBisector = bisectorS >= lo && bisectorS <= hi;
      // A very narrow sector still admits the point on its bisector.
      if (hi - lo <= 1e-12) {
        if (hasBisector) admit(bisectorS, lo, hi);
        continue;
      }
      double mid = (lo + hi) / 2.0;
      if (!sector.contains(at(mid), 1e-12)) continue;
      if (hasBisector) admit(bisectorS, lo, hi);
      admit(mid, lo, hi);
    }
  }

  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    if (x.dev != y.dev) return x.dev < y.dev;
    return lexLess(x.p, y.p);
  });
  std::vector<Point2> out;
  for (const Cand& c : cands) {
    bool dup = false;
    for (Point2 q : out)
      if (distance(q, c.p) <= 1e-12 * (1.0 + norm(c.p))) dup = true;
    if (!dup) out.push_back(c.p);
  }
  return out;
}

std::vector<Point2> sectorBoundaryTargets(const AngularSector& sector, const Hull& boundary,
                                          std::span<const Point2> forbidden, double epsNudge) {
  auto segs = boundary.edges();
  auto out = sectorSegmentTargets(sector, segs, forbidden, epsNudge);
  if (out.empty()) throw Error(ErrorCode::EmptyIntersection, "sector misses the admissible boundary");
  return out;
}

bool inGeneralPosition(std::span<const Point2> points, double epsGeom) {
  const double tol = epsGeom * extent(points);
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (distance(points[i], points[j]) <= tol) return false;
      for (std::size_t k = 0; k < n; ++k)
        if (k != i && k != j && distanceToLine(points[k], points[i], points[j]) <= tol) return false;
    }
  return true;
}

}  // namespace lumiswarm
