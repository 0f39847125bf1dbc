#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace lumiswarm {

inline constexpr double kDefaultEpsGeom = 1e-9;
inline constexpr double kDefaultEpsVis = 1e-9;
inline constexpr double kPi = 3.14159265358979323846;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator-(Point2 a) { return {-a.x, -a.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
inline Point2 operator/(Point2 a, double s) { return {a.x / s, a.y / s}; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Point2 a) { return dot(a, a); }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
// Left normal: rotation by +90 degrees.
inline Point2 perp(Point2 a) { return {-a.y, a.x}; }
inline Point2 normalized(Point2 a) { return a / norm(a); }
inline bool isFinite(Point2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }
inline bool lexLess(Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

// Angle in [0, pi] between two non-null vectors.
inline double angleBetween(Point2 a, Point2 b) { return std::atan2(std::abs(cross(a, b)), dot(a, b)); }

struct Segment {
  Point2 a;
  Point2 b;
};

// Convex hull of a point set with every input point that lies on the
// boundary kept in the boundary walk. Non-degenerate vertices are flagged;
// points in the relative interior of an edge are degenerate vertices.
struct Hull {
  std::vector<Point2> boundary;       // counterclockwise walk
  std::vector<bool> vertexFlags;      // true iff non-degenerate vertex
  std::vector<std::size_t> source;    // input index of each boundary entry
  bool isSegment = false;             // all inputs collinear (or a single point)
  double scale = 0.0;                 // extent used for relative tolerances
  double epsGeom = kDefaultEpsGeom;

  std::size_t size() const { return boundary.size(); }
  std::size_t vertexCount() const;
  std::vector<Point2> vertices() const;
  // Boundary position of input point `inputIndex`, or -1 when it is internal.
  int boundaryIndexOfInput(std::size_t inputIndex) const;
  // Boundary position of p (exact coordinates), or -1.
  int boundaryIndexOf(Point2 p) const;
  double area() const;
  double diameter() const;
  // Consecutive boundary entries; for a segment, the pieces between
  // consecutive collinear points.
  std::vector<Segment> edges() const;
  // Edges between consecutive non-degenerate vertices.
  std::vector<Segment> vertexEdges() const;
  // Closed containment with absolute slack.
  bool contains(Point2 p, double slack) const;
  // Strictly inside: further than `margin` from every edge line. Always
  // false for segments.
  bool containsStrictly(Point2 p, double margin) const;
  bool isStrictlyConvex() const { return vertexCount() == size(); }
};

struct AngularSector {
  Point2 apex;
  Point2 axis;       // unit direction
  double halfAngle;  // radians in (0, pi]

  bool contains(Point2 p, double tol = 1e-12) const;
};

struct Circle {
  Point2 center;
  double radius = 0.0;

  bool contains(Point2 p, double slack = 1e-9) const { return distance(p, center) <= radius + slack; }
};

struct Neighbors {
  Point2 ccw;
  Point2 cw;
};

struct Coeffs {
  double alpha;
  double beta;
};

// Throws DuplicatePoints when two inputs coincide within epsGeom (relative to
// the extent of the set).
Hull convexHull(std::span<const Point2> points, double epsGeom = kDefaultEpsGeom);

// False iff a point of `others` is within epsVis of the open segment pq.
bool isVisible(Point2 p, Point2 q, std::span<const Point2> others, double epsVis = kDefaultEpsVis);

// Adjacent boundary entries of boundary position `index`.
Neighbors hullNeighbors(const Hull& hull, std::size_t index);
// Throws NotOnBoundary when p is not a boundary entry.
Neighbors hullNeighbors(const Hull& hull, Point2 p);

// Solves r = alpha * a + beta * b. Throws DegenerateBasis when a and b are
// (nearly) parallel.
Coeffs coeffsAlong(Point2 a, Point2 b, Point2 r, double epsGeom = kDefaultEpsGeom);

Circle smallestEnclosingCircle(std::span<const Point2> points);

// Minimum distance over t in [0,1] between p0 + t(p1-p0) and q0 + t(q1-q0).
double minTrajectoryDistance(Point2 p0, Point2 p1, Point2 q0, Point2 q1);

// Candidate points of (sector intersected with the hull boundary) minus the
// forbidden points, nudged epsNudge away from them along the boundary. The
// bisector hit comes first when admissible; the rest are ordered by angular
// distance from the axis, then lexicographically. Throws EmptyIntersection.
std::vector<Point2> sectorBoundaryTargets(const AngularSector& sector, const Hull& boundary,
                                          std::span<const Point2> forbidden, double epsNudge);

// Same, restricted to an explicit set of boundary segments. Returns an empty
// list instead of throwing.
std::vector<Point2> sectorSegmentTargets(const AngularSector& sector, std::span<const Segment> segments,
                                         std::span<const Point2> forbidden, double epsNudge);

// First intersection of the ray origin + t*dir (t > 0) with the hull boundary.
bool rayHitsBoundary(const Hull& hull, Point2 origin, Point2 dir, Point2& hit);

double distanceToLine(Point2 p, Point2 a, Point2 b);
double distanceToSegment(Point2 p, Point2 a, Point2 b);
double extent(std::span<const Point2> points);

// True iff the points are pairwise distinct and no three are collinear
// (within epsGeom relative to the extent).
bool inGeneralPosition(std::span<const Point2> points, double epsGeom = kDefaultEpsGeom);

}  // namespace lumiswarm
