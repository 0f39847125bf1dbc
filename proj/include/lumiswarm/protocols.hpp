#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lumiswarm/model.hpp"

namespace lumiswarm {

struct Action {
  Light newLight = Light::Off;
  Point2 destination;  // local; the origin means "stay"
  bool terminate = false;

  static Action stay(Light light) { return {light, {0.0, 0.0}, false}; }
  static Action moveTo(Light light, Point2 dest) { return {light, dest, false}; }
  static Action halt(Light light) { return {light, {0.0, 0.0}, true}; }
};

struct ProtocolParams {
  double hPositive = 0.25;  // "any positive amount", as a fraction of the visible hull length
  std::optional<double> epsAdjust;
  std::optional<double> epsNG;
  double sigmaStep = 0.1;  // fraction of the nearest forbidden-line distance
  double epsGeom = kDefaultEpsGeom;  // relative to the extent of the snapshot
  double epsNudgeFraction = 1e-6;    // nudge distance as a fraction of the visible hull diameter
};

enum class NKnownBase { Shrink, Contain };
enum class SequentialMode { Base, TwoColor, NKnown };

Action shrinkStep(const Snapshot& s, const ProtocolParams& params);
Action containStep(const Snapshot& s, const ProtocolParams& params);
// Throws MissingAxisKnowledge.
Action containAsynchVariant(const Snapshot& s, const ProtocolParams& params);
Action shrinkNearGathering(const Snapshot& s, const ProtocolParams& params);
// Throws MissingDeltaKnowledge.
Action shrinkDeltaKnown(const Snapshot& s, const ProtocolParams& params);
// Throws MissingNKnowledge.
Action nKnownStep(const Snapshot& s, NKnownBase base, const ProtocolParams& params);
// Throws PreconditionNotMet unless all visible lights agree and the view is
// strictly convex.
Action circleFormationStep(const Snapshot& s, const ProtocolParams& params = {});
Action sequentialStep(const Snapshot& s, const ProtocolParams& params, SequentialMode mode = SequentialMode::Base);

struct Protocol {
  std::string name;
  std::vector<Light> palette;
  Light initialLight = Light::Off;
  bool needsN = false;
  bool needsDelta = false;
  bool needsAxis = false;
  std::function<Action(const Snapshot&)> step;

  bool inPalette(Light l) const;
};

// Known names: shrink, contain, contain-axis, shrink-near-gathering,
// shrink-near-gathering-eps, shrink-delta, shrink-n, contain-n, shrink-circle,
// contain-circle, sequential, sequential-2color, sequential-n,
// broken-collide. Throws ConfigInvalid.
Protocol makeProtocol(const std::string& name, const ProtocolParams& params);
std::vector<std::string> protocolNames();

}  // namespace lumiswarm
