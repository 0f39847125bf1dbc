#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "lumiswarm/error.hpp"
#include "lumiswarm/geometry.hpp"
#include "support.hpp"

using namespace lumiswarm;

namespace {

bool near(Point2 a, Point2 b, double tol = 1e-12) { return distance(a, b) <= tol; }

std::set<std::pair<double, double>> asSet(const std::vector<Point2>& pts) {
  std::set<std::pair<double, double>> s;
  for (Point2 p : pts) s.insert({p.x, p.y});
  return s;
}

void checkAgainstOracle(const std::vector<Point2>& pts) {
  Hull h = convexHull(pts);
  oracle::HullClass want = oracle::classifyByHalfPlanes(pts, 1e-9 * extent(pts));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    int b = h.boundaryIndexOfInput(i);
    CHECK((b >= 0) == want.onBoundary[i]);
    if (b >= 0) CHECK(h.vertexFlags[static_cast<std::size_t>(b)] == want.vertex[i]);
  }
}

}  // namespace

TEST_CASE("hull of a square has four non-degenerate vertices") {
  Hull h = convexHull(std::vector<Point2>{{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  CHECK(h.size() == 4);
  CHECK(h.vertexCount() == 4);
  CHECK_FALSE(h.isSegment);
  CHECK(h.area() == doctest::Approx(1.0));
}

TEST_CASE("collinear input is a segment with degenerate middle points") {
  std::vector<Point2> pts{{0, 0}, {1, 0}, {2, 0}};
  Hull h = convexHull(pts);
  CHECK(h.isSegment);
  CHECK(h.vertexCount() == 2);
  CHECK(h.vertexFlags[static_cast<std::size_t>(h.boundaryIndexOfInput(0))]);
  CHECK(h.vertexFlags[static_cast<std::size_t>(h.boundaryIndexOfInput(2))]);
  CHECK_FALSE(h.vertexFlags[static_cast<std::size_t>(h.boundaryIndexOfInput(1))]);
}

TEST_CASE("duplicate points are rejected") {
  CHECK_THROWS_AS(convexHull(std::vector<Point2>{{0, 0}, {1, 0}, {0, 0}}), Error);
  try {
    convexHull(std::vector<Point2>{{0, 0}, {1, 1}, {1e-12, 0}});
    FAIL("expected DuplicatePoints");
  } catch (const Error& e) {
    CHECK(fixture::str(e.code()) == "DuplicatePoints");
  }
}

TEST_CASE("hull classification matches the half-plane oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    checkAgainstOracle(oracle::uniformPoints(rng, 6));
    checkAgainstOracle(oracle::gridPoints(rng, 3 + trial % 8));
  }
}

TEST_CASE("hull is idempotent and contains every input") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    auto pts = trial % 2 ? oracle::uniformPoints(rng, 3 + trial % 20, 10.0) : oracle::gridPoints(rng, 3 + trial % 12, 5);
    Hull h = convexHull(pts);
    Hull again = convexHull(h.boundary);
    CHECK(asSet(again.boundary) == asSet(h.boundary));
    for (Point2 p : pts) CHECK(h.contains(p, 1e-9 * h.scale));
  }
}

TEST_CASE("a nearly straight run of boundary points stays on the boundary") {
  // Positions from a Contain run: the first four are exactly collinear and the
  // fifth bends inward by less than the tolerance.
  std::vector<Point2> pts{{1.149492954830496, 6.6621828053090324},  {1.5941732377519047, 6.9528837699693069},
                          {1.7194097081546094, 7.0347546424926755}, {1.7673035770776266, 7.066064314704283},
                          {2.6707115918329452, 7.6566494156196123}, {5.2995191852457619, 1.0164289163642763},
                          {9.4073351183982457, 7.3987763570068061}, {4.7788984919013524, 8.9700929257437814},
                          {0.59917587567112229, 5.1315198072976544}};
  Hull h = convexHull(pts);
  for (std::size_t i = 0; i < 5; ++i) CHECK(h.boundaryIndexOfInput(i) >= 0);

  // Points on a barely bent arc are all boundary points, whatever the order.
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> bend(0.0, 3e-9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point2> arc;
    const double b = bend(rng);
    for (int i = 0; i < 12; ++i) {
      double x = i * 0.5;
      arc.push_back({x, x * (6.0 - x) * b});
    }
    arc.push_back({3.0, -4.0});
    std::shuffle(arc.begin(), arc.end(), rng);
    Hull a = convexHull(arc);
    for (std::size_t i = 0; i < arc.size(); ++i) CHECK(a.boundaryIndexOfInput(i) >= 0);
  }
}

TEST_CASE("visibility examples") {
  const Point2 p{0, 0}, q{4, 0};
  CHECK_FALSE(isVisible(p, q, std::vector<Point2>{{2, 0}}));
  CHECK(isVisible(p, q, std::vector<Point2>{{2, 1}}));
  CHECK(isVisible(p, q, std::vector<Point2>{{5, 0}}));
  CHECK(isVisible(p, q, std::vector<Point2>{}));
  CHECK_FALSE(isVisible(p, q, std::vector<Point2>{{2, 0.5e-9}}, 1e-9));
}

TEST_CASE("visibility is symmetric and agrees with a segment-distance oracle") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 2000; ++trial) {
    auto pts = trial % 2 ? oracle::gridPoints(rng, 6, 3) : oracle::uniformPoints(rng, 6);
    std::vector<Point2> others(pts.begin() + 2, pts.end());
    bool blocked = false;
    for (Point2 o : others) blocked = blocked || oracle::segmentDistance(o, pts[0], pts[1]) <= 1e-9;
    CHECK(isVisible(pts[0], pts[1], others) == !blocked);
    CHECK(isVisible(pts[0], pts[1], others) == isVisible(pts[1], pts[0], others));
  }
}

TEST_CASE("hull neighbours") {
  Hull sq = convexHull(std::vector<Point2>{{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  Neighbors nb = hullNeighbors(sq, Point2{0, 0});
  CHECK(nb.ccw == Point2{1, 0});
  CHECK(nb.cw == Point2{0, 1});

  Hull seg = convexHull(std::vector<Point2>{{0, 0}, {1, 0}, {2, 0}});
  Neighbors mid = hullNeighbors(seg, Point2{1, 0});
  CHECK(asSet({mid.ccw, mid.cw}) == asSet({{0, 0}, {2, 0}}));

  // (1,0) sits on the edge between (0,0) and (2,0).
  Hull withDegenerate = convexHull(std::vector<Point2>{{0, 0}, {1, 0}, {2, 0}, {1, 2}});
  CHECK(hullNeighbors(withDegenerate, Point2{0, 0}).ccw == Point2{1, 0});
  CHECK(hullNeighbors(withDegenerate, Point2{2, 0}).cw == Point2{1, 0});

  CHECK_THROWS_AS(hullNeighbors(sq, Point2{0.5, 0.5}), Error);
}

TEST_CASE("coefficients along a basis") {
  Coeffs c = coeffsAlong({1, 0}, {0, 1}, {0.3, 0.4});
  CHECK(c.alpha == doctest::Approx(0.3));
  CHECK(c.beta == doctest::Approx(0.4));
  Coeffs s = coeffsAlong({4, 0}, {0, 4}, {1, 1});
  CHECK(s.alpha == doctest::Approx(0.25));
  CHECK(s.beta == doctest::Approx(0.25));
  CHECK_THROWS_AS(coeffsAlong({1, 0}, {2, 0}, {1, 1}), Error);

  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 2000; ++trial) {
    Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, r{u(rng), u(rng)};
    if (std::abs(cross(a, b)) < 0.1 * norm(a) * norm(b)) continue;
    Coeffs k = coeffsAlong(a, b, r);
    CHECK(norm(k.alpha * a + k.beta * b - r) <= 1e-12 * std::max(norm(a), norm(b)) * 10.0);
  }
}

TEST_CASE("smallest enclosing circle examples") {
  Circle two = smallestEnclosingCircle(std::vector<Point2>{{0, 0}, {2, 0}});
  CHECK(near(two.center, {1, 0}));
  CHECK(two.radius == doctest::Approx(1.0));
  Circle right = smallestEnclosingCircle(std::vector<Point2>{{0, 0}, {2, 0}, {0, 2}});
  CHECK(near(right.center, {1, 1}));
  CHECK(right.radius == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("smallest enclosing circle matches the pair and triple oracle") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 1000; ++trial) {
    auto pts = oracle::uniformPoints(rng, 1 + trial % 10, 5.0);
    Circle c = smallestEnclosingCircle(pts);
    oracle::Disk d = oracle::enclosingCircle(pts);
    for (Point2 p : pts) CHECK(c.contains(p, 1e-9));
    CHECK(std::abs(c.radius - d.radius) <= 1e-9);
    CHECK(distance(c.center, d.center) <= 1e-9);
  }
}

TEST_CASE("trajectory distance examples and oracle") {
  CHECK(minTrajectoryDistance({0, 0}, {1, 1}, {1, 0}, {0, 1}) == doctest::Approx(0.0));
  CHECK(minTrajectoryDistance({0, 0}, {1, 0}, {0, 1}, {1, 1}) == doctest::Approx(1.0));

  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(-5.0, 5.0), ang(0.0, 2 * kPi);
  for (int trial = 0; trial < 300; ++trial) {
    Point2 p0{u(rng), u(rng)}, p1{u(rng), u(rng)}, q0{u(rng), u(rng)}, q1{u(rng), u(rng)};
    double d = minTrajectoryDistance(p0, p1, q0, q1);
    CHECK(std::abs(d - oracle::sampledTrajectoryGap(p0, p1, q0, q1)) <= 1e-6);
    CHECK(std::abs(d - minTrajectoryDistance(q0, q1, p0, p1)) <= 1e-9);
    // Rigid motion of the whole plane.
    double th = ang(rng);
    Point2 shift{u(rng), u(rng)};
    auto move = [&](Point2 p) { return Point2{std::cos(th) * p.x - std::sin(th) * p.y, std::sin(th) * p.x + std::cos(th) * p.y} + shift; };
    CHECK(std::abs(d - minTrajectoryDistance(move(p0), move(p1), move(q0), move(q1))) <= 1e-9);
  }
}

TEST_CASE("sector targets on a square boundary") {
  const std::vector<Point2> sq{{5, 5}, {-5, 5}, {-5, -5}, {5, -5}};
  Hull h = convexHull(sq);

  AngularSector left{{0, 0}, {-1, 0}, kPi / 4.0};
  auto t = sectorBoundaryTargets(left, h, sq, 1e-6);
  REQUIRE_FALSE(t.empty());
  CHECK(near(t.front(), {-5, 0}));
  for (Point2 p : t) CHECK(left.contains(p, 1e-9));

  AngularSector all{{0, 0}, {1, 0}, kPi};
  auto everywhere = sectorBoundaryTargets(all, h, sq, 1e-6);
  bool onEachSide[4] = {false, false, false, false};
  for (Point2 p : everywhere) {
    onEachSide[0] = onEachSide[0] || std::abs(p.x - 5) < 1e-9;
    onEachSide[1] = onEachSide[1] || std::abs(p.x + 5) < 1e-9;
    onEachSide[2] = onEachSide[2] || std::abs(p.y - 5) < 1e-9;
    onEachSide[3] = onEachSide[3] || std::abs(p.y + 5) < 1e-9;
  }
  CHECK((onEachSide[0] && onEachSide[1] && onEachSide[2] && onEachSide[3]));

  // The bisector hits a forbidden point exactly.
  std::vector<Point2> forbidden = sq;
  forbidden.push_back({-5, 0});
  auto nudged = sectorBoundaryTargets(left, h, forbidden, 1e-3);
  REQUIRE_FALSE(nudged.empty());
  for (Point2 p : nudged)
    for (Point2 f : forbidden) CHECK(distance(p, f) >= 1e-3 * (1 - 1e-9));
  CHECK(distance(nudged.front(), {-5, 0}) == doctest::Approx(1e-3));

  AngularSector narrow{{0, 0}, {-1, 0}, 1e-3};
  std::vector<Point2> blockAll = sq;
  for (int i = -10; i <= 10; ++i) blockAll.push_back({-5, i * 0.001});
  CHECK_THROWS_AS(sectorBoundaryTargets(narrow, h, blockAll, 1e-2), Error);
}

TEST_CASE("general position") {
  CHECK(inGeneralPosition(std::vector<Point2>{{0, 0}, {1, 0}, {0, 1}, {1, 1}}));
  CHECK_FALSE(inGeneralPosition(std::vector<Point2>{{0, 0}, {1, 1}, {2, 2}, {0, 1}}));
}
