#include <doctest.h>

#include <set>

#include "lumiswarm/config.hpp"
#include "lumiswarm/error.hpp"
#include "support.hpp"

using namespace lumiswarm;
using nlohmann::json;

namespace {

std::string errorOf(const json& j) {
  try {
    parseRunConfig(j);
  } catch (const Error& e) {
    return fixture::str(e.code());
  }
  return "none";
}

bool pairwiseDistinct(const std::vector<Point2>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (pts[i] == pts[j]) return false;
  return true;
}

}  // namespace

TEST_CASE("invalid configs are rejected") {
  CHECK(errorOf({{"n", 5}}) == "ConfigInvalid");
  CHECK(errorOf({{"protocol", "teleport"}, {"n", 5}}) == "ConfigInvalid");
  CHECK(errorOf({{"protocol", "shrink"}, {"n", 5}, {"colour", "red"}}) == "ConfigInvalid");
  CHECK(errorOf({{"protocol", "shrink"}, {"n", 5}, {"initial", {{"generator", "spiral"}}}}) == "ConfigInvalid");
  CHECK(errorOf({{"protocol", "shrink"}, {"n", 6}, {"initial", {{"generator", "symmetricWithCenter"}}}}) ==
        "ConfigInvalid");
  CHECK(errorOf({{"protocol", "shrink"}, {"n", 5}, {"tolerances", {{"epsGeom", -1.0}}}}) == "ConfigInvalid");
  CHECK(errorOf({{"protocol", "shrink"}, {"n", 5}, {"adversary", {{"activation", "sometimes"}}}}) == "ConfigInvalid");
  CHECK(errorOf({{"protocol", "shrink"}, {"n", 5}, {"scheduler", "chaotic"}}) == "ConfigInvalid");
  CHECK(errorOf({{"protocol", "shrink-delta"}, {"n", 5}}) == "ConfigInvalid");
  CHECK(errorOf({{"protocol", "shrink-n"}, {"n", 5}, {"knowledge", {{"n", false}}}}) == "ConfigInvalid");
  CHECK(errorOf({{"protocol", "shrink"}, {"n", 5}, {"monitors", {"everything"}}}) == "ConfigInvalid");
  CHECK(errorOf({{"protocol", "shrink"}, {"n", "five"}}) == "ConfigInvalid");
  CHECK(errorOf({{"protocol", "shrink"}, {"n", 5}}) == "none");
  CHECK_THROWS_AS(loadRunConfig("/nonexistent/config.json"), Error);
}

TEST_CASE("canonical form round-trips") {
  json rich = {{"protocol", "contain"},
               {"scheduler", "asynch"},
               {"n", 7},
               {"seed", 99},
               {"params", {{"epsAdjust", 0.01}}},
               {"rigidity", {{"kind", "nonRigid"}, {"deltaFraction", 0.1}}},
               {"initial", {{"generator", "collinear"}, {"angle", 0.5}, {"seed", 4}}},
               {"caps", {{"maxRounds", 50}}},
               {"monitors", {"collision"}},
               {"adversary",
                {{"activation", "minimalFair"},
                 {"timing", "midMove"},
                 {"onScriptEnd", "policy"},
                 {"script", {{{"activate", {0, 2}}, {"fractions", {{"2", 0.5}}}}}},
                 {"cyclicPlans", {{"1", {{{"idle", 0.5}, {"move", 2.0}, {"fraction", 0.7}}}}}}}}};
  RunConfig c = parseRunConfig(rich);
  json canon = toJson(c);
  CHECK(toJson(parseRunConfig(canon)) == canon);
  CHECK(c.adversary.script.at(0).fractions.at(2) == doctest::Approx(0.5));
  CHECK(c.adversary.cyclicPlans.at(1).at(0).move == doctest::Approx(2.0));
  CHECK(c.adversary.fallbackToPolicy);
  CHECK_FALSE(toJson(c, false).contains("adversary"));
}

TEST_CASE("generators produce distinct points of the requested shape") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    for (int n : {3, 9, 31}) {
      auto u = generatePoints("uniform", n, seed);
      CHECK(u.size() == static_cast<std::size_t>(n));
      CHECK(pairwiseDistinct(u));

      auto line = generatePoints("collinear", n, seed, 0.3);
      CHECK(pairwiseDistinct(line));
      for (Point2 p : line) CHECK(std::abs(oracle::orient(line[0], line[1], p)) <= 1e-9);

      auto ring = generatePoints("convex", n, seed);
      CHECK(pairwiseDistinct(ring));
      auto cls = oracle::classifyByHalfPlanes(ring, 1e-9);
      for (std::size_t i = 0; i < ring.size(); ++i) CHECK(cls.vertex[i]);

      auto sym = generatePoints("symmetricWithCenter", n, seed);
      REQUIRE(sym.size() == static_cast<std::size_t>(n));
      CHECK(pairwiseDistinct(sym));
      // Every robot has a mirror image through the first one.
      for (Point2 p : sym) {
        Point2 mirror{2 * sym[0].x - p.x, 2 * sym[0].y - p.y};
        bool found = false;
        for (Point2 q : sym) found = found || std::hypot(q.x - mirror.x, q.y - mirror.y) <= 1e-12;
        CHECK(found);
      }
    }
  }
  CHECK_THROWS_AS(generatePoints("symmetricWithCenter", 4, 1), Error);
  CHECK(generatePoints("uniform", 12, 5) == generatePoints("uniform", 12, 5));
  CHECK(generatePoints("uniform", 12, 5) != generatePoints("uniform", 12, 6));
}

TEST_CASE("explicit points win over the generator") {
  RunConfig c = parseRunConfig({{"protocol", "shrink"}, {"initial", {{"points", {{0, 0}, {1, 0}, {0, 1}}}}}});
  CHECK(initialPositions(c) == std::vector<Point2>{{0, 0}, {1, 0}, {0, 1}});
}

TEST_CASE("seed derivation") {
  // Reference splitmix64 output for state 0.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(deriveSeed(7, 1) == deriveSeed(7, 1));
  CHECK(deriveSeed(7, 1) != deriveSeed(7, 2));
  CHECK(deriveSeed(7, 1) != deriveSeed(8, 1));
}

TEST_CASE("natural goals and monitors") {
  CHECK(fixture::str(effectiveGoal(parseRunConfig({{"protocol", "shrink-circle"}, {"n", 5}})).kind) == "circle");
  CHECK(fixture::str(effectiveGoal(parseRunConfig({{"protocol", "sequential"}, {"n", 5}, {"scheduler", "sequential"}})).kind) ==
        "sequentialVisibility");
  auto shrink = effectiveMonitors(parseRunConfig({{"protocol", "shrink"}, {"n", 5}}));
  CHECK(std::set<std::string>(shrink.begin(), shrink.end()) ==
        std::set<std::string>{"collision", "hullMonotone", "vertexPersistence"});
  auto contain = effectiveMonitors(parseRunConfig({{"protocol", "contain"}, {"n", 5}}));
  CHECK(std::set<std::string>(contain.begin(), contain.end()) ==
        std::set<std::string>{"collision", "vertexPersistence", "depletionHullFixed"});
}
