#include <algorithm>
#include <cmath>
#include <limits>

#include "lumiswarm/error.hpp"
#include "view.hpp"

namespace lumiswarm {
namespace detail {

View::View(const Snapshot& s, const ProtocolParams& params) : snap(s), pts(s.positions()), hull(convexHull(pts, params.epsGeom)) {
  tol = params.epsGeom * hull.scale;
  nudge = params.epsNudgeFraction * hull.diameter();
  selfBoundary = hull.boundaryIndexOfInput(0);
  selfVertex = selfBoundary >= 0 && hull.vertexFlags[static_cast<std::size_t>(selfBoundary)];
}

bool View::othersAll(Light l) const {
  for (std::size_t i = 1; i < snap.visible.size(); ++i)
    if (snap.visible[i].light != l) return false;
  return true;
}

bool View::anyLight(Light l) const {
  for (const auto& e : snap.visible)
    if (e.light == l) return true;
  return false;
}

bool View::anyStrictlyInside() const {
  for (Point2 p : pts)
    if (hull.containsStrictly(p, tol)) return true;
  return false;
}

std::pair<View::Side, View::Side> View::neighbors() const {
  auto idx = static_cast<std::size_t>(selfBoundary);
  const std::size_t m = hull.size();
  std::size_t ccw, cw;
  if (hull.isSegment) {
    ccw = idx + 1 < m ? idx + 1 : idx - 1;
    cw = idx > 0 ? idx - 1 : idx + 1;
  } else {
    ccw = (idx + 1) % m;
    cw = (idx + m - 1) % m;
  }
  return {{hull.boundary[ccw], lightAt(ccw)}, {hull.boundary[cw], lightAt(cw)}};
}

Point2 segmentNormal(const Hull& hull) {
  Point2 n = perp(normalized(hull.boundary.back() - hull.boundary.front()));
  if (n.y < -1e-12 || (std::abs(n.y) <= 1e-12 && n.x < 0.0)) n = -n;
  return n;
}

std::optional<Point2> nearestEdgeMidpoint(const Hull& hull) {
  std::optional<Point2> best;
  double bestD = std::numeric_limits<double>::infinity();
  for (const Segment& e : hull.edges()) {
    Point2 m = (e.a + e.b) / 2.0;
    double d = norm(m);
    if (d < bestD || (d == bestD && best && lexLess(m, *best))) {
      bestD = d;
      best = m;
    }
  }
  return best;
}

DefaultMove shrinkDestination(const View& v) {
  auto [sa, sb] = v.neighbors();
  DefaultMove out;
  out.a = sa.pos;
  out.b = sb.pos;
  Point2 u = out.a / 2.0;
  double gamma = 0.5;
  const double tieTol = 1e-12;
  for (std::size_t i = 1; i < v.size(); ++i) {
    Point2 r = v.pts[i];
    Coeffs c = coeffsAlong(out.a, out.b, r, v.hull.epsGeom);
    double g = c.alpha + c.beta;
    if (g < gamma - tieTol) {
      u = r;
      gamma = g;
      out.limiting = static_cast<int>(i);
    } else if (std::abs(g - gamma) <= tieTol) {
      double dr = distance(r, out.b), du = distance(u, out.b);
      if (dr < du || (dr == du && lexLess(r, u))) {
        u = r;
        out.limiting = static_cast<int>(i);
      }
    }
  }
  out.gamma = gamma;
  out.dest = (u + gamma * out.b) / 2.0;
  return out;
}

Point2 rayCircleExit(Point2 dir, const Circle& c) {
  // |t*dir - center| = r with t > 0.
  double bq = dot(dir, c.center);
  double cq = norm2(c.center) - c.radius * c.radius;
  double disc = std::max(0.0, bq * bq - cq);
  return (bq + std::sqrt(disc)) * dir;
}

}  // namespace detail

using detail::View;

namespace {

enum class Termination { AllVertex, Never, NearGather, CountN };
enum class InteriorRule { AllVertex, Never, NMinus1 };

struct ShrinkOptions {
  bool lights = true;
  Termination term = Termination::AllVertex;
  InteriorRule interior = InteriorRule::AllVertex;
};

Action shrinkCore(const Snapshot& s, const ProtocolParams& params, const ShrinkOptions& opt) {
  View v(s, params);
  const Light keep = s.selfLight;
  if (v.size() == 3 && v.hull.isSegment)
    return Action::moveTo(keep, params.hPositive * v.length() * detail::segmentNormal(v.hull));

  if (v.selfVertex) {
    const Light light = opt.lights ? Light::Vertex : keep;
    switch (opt.term) {
      case Termination::AllVertex:
        if (v.othersAll(Light::Vertex)) return Action::halt(light);
        break;
      case Termination::NearGather:
        if (v.othersAll(Light::Vertex) && params.epsNG && v.length() < *params.epsNG) return Action::halt(light);
        break;
      case Termination::CountN:
        if (static_cast<int>(v.hull.vertexCount()) == *s.n) return Action::halt(light);
        break;
      case Termination::Never:
        break;
    }
    if (v.size() > 2) return Action::moveTo(light, detail::shrinkDestination(v).dest);
    return Action::stay(light);
  }

  bool interiorMove = false;
  switch (opt.interior) {
    case InteriorRule::AllVertex: interiorMove = v.othersAll(Light::Vertex); break;
    case InteriorRule::NMinus1: interiorMove = static_cast<int>(v.hull.vertexCount()) == *s.n - 1; break;
    case InteriorRule::Never: break;
  }
  if (interiorMove && v.selfStrictlyInside())
    if (auto m = detail::nearestEdgeMidpoint(v.hull)) return Action::moveTo(keep, *m);
  return Action::stay(keep);
}

}  // namespace

Action shrinkStep(const Snapshot& s, const ProtocolParams& params) { return shrinkCore(s, params, {}); }

Action shrinkNearGathering(const Snapshot& s, const ProtocolParams& params) {
  if (s.selfLight == Light::None) return shrinkCore(s, params, {false, Termination::Never, InteriorRule::Never});
  return shrinkCore(s, params, {true, params.epsNG ? Termination::NearGather : Termination::Never, InteriorRule::AllVertex});
}

Action shrinkDeltaKnown(const Snapshot& s, const ProtocolParams& params) {
  if (!s.delta) throw Error(ErrorCode::MissingDeltaKnowledge, "shrink-delta needs delta");
  const double delta = *s.delta;
  View v(s, params);
  const Light keep = s.selfLight;
  if (v.size() == 3 && v.hull.isSegment)
    return Action::moveTo(keep, params.hPositive * v.length() * detail::segmentNormal(v.hull));

  if (v.selfVertex) {
    if (v.othersAll(Light::Vertex)) return Action::halt(Light::Vertex);
    if (v.size() <= 2) return Action::stay(Light::Vertex);
    detail::DefaultMove dm = detail::shrinkDestination(v);
    if (dm.limiting < 0) return Action::moveTo(Light::Vertex, dm.dest);
    Point2 c = v.pts[static_cast<std::size_t>(dm.limiting)];
    if (norm(c) >= delta) return Action::moveTo(Light::Vertex, dm.dest);

    // Lateral move: stop next to the close robot on its line parallel to ab,
    // short enough that the adversary cannot truncate it.
    Point2 along = dm.gamma * dm.b - c;
    double room = norm(along);
    double step = std::min({v.nudge, room / 2.0, (delta - norm(c)) / 2.0});
    Point2 dest = room > 0.0 ? c + step * (along / room) : c;
    std::vector<Point2> after = v.pts;
    after[0] = dest;
    Hull h = convexHull(after, params.epsGeom);
    int idx = h.boundaryIndexOfInput(0);
    bool vertex = idx >= 0 && h.vertexFlags[static_cast<std::size_t>(idx)];
    return Action::moveTo(vertex ? Light::Vertex : Light::Off, dest);
  }

  if (v.othersAll(Light::Vertex) && v.selfStrictlyInside() && v.length() < delta)
    if (auto m = detail::nearestEdgeMidpoint(v.hull)) return Action::moveTo(keep, *m);
  return Action::stay(keep);
}

Action shrinkNKnown(const Snapshot& s, const ProtocolParams& params) {
  return shrinkCore(s, params, {false, Termination::CountN, InteriorRule::NMinus1});
}

Action circleFormationStep(const Snapshot& s, const ProtocolParams& params) {
  const Light l = s.selfLight;
  if (l != Light::Vertex && l != Light::Adjusting && l != Light::Done)
    throw Error(ErrorCode::PreconditionNotMet, "circle formation needs a uniform phase light");
  for (const auto& e : s.visible)
    if (e.light != l) throw Error(ErrorCode::PreconditionNotMet, "circle formation needs a uniform phase light");
  if (s.visible.size() <= 2) return Action::halt(l);

  View v(s, params);
  if (v.hull.isSegment || v.hull.vertexCount() != v.size())
    throw Error(ErrorCode::PreconditionNotMet, "circle formation needs a strictly convex view");
  Circle sec = smallestEnclosingCircle(v.pts);
  auto onSec = [&](Point2 p) { return std::abs(distance(p, sec.center) - sec.radius) <= v.tol; };

  if (onSec({0.0, 0.0})) {
    for (Point2 p : v.pts)
      if (!onSec(p)) return Action::stay(l);
    return Action::halt(l);
  }
  auto [a, b] = v.neighbors();
  Point2 from;
  if (onSec(b.pos))
    from = a.pos;
  else if (onSec(a.pos))
    from = b.pos;
  else
    return Action::stay(l);
  return Action::moveTo(l, detail::rayCircleExit(normalized(-from), sec));
}

}  // namespace lumiswarm
