#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <vector>

namespace lumiswarm {

// Water levels around a cycle of vessels; valve i joins vessel i and i+1 mod n.
using VesselState = std::vector<double>;

// Every open valve moves a quarter of the level difference from the fuller
// vessel to the emptier one. Throws LengthMismatch.
VesselState vesselsStep(const VesselState& w, const std::vector<bool>& valves);

double energy(const VesselState& w);

struct EnergyCheck {
  double lhs = 0.0;  // energy(w) - energy(step(w))
  double rhs = 0.0;  // (1/4) * sum over open valves of the squared difference
  bool holds = true;
};

EnergyCheck checkEnergyInequality(const VesselState& w, const std::vector<bool>& valves);

// Valve schedules for the convergence runs. RandomFair opens each valve with
// the given probability but never leaves a valve shut for more than `window`
// consecutive steps; valves listed in `closed` stay shut forever.
class ValveSchedule {
 public:
  enum class Kind { AllOpen, RandomFair };

  ValveSchedule(Kind kind, std::size_t n, std::uint64_t seed = 1, std::set<std::size_t> closed = {},
                double probability = 0.5, int window = 0);
  std::vector<bool> next();

 private:
  Kind kind_;
  std::size_t n_;
  std::mt19937_64 rng_;
  std::set<std::size_t> closed_;
  double probability_;
  int window_;
  std::vector<int> shutFor_;
};

struct ConvergenceResult {
  VesselState w;
  long steps = 0;
  bool converged = false;
};

// Converged iff every level is within tol of mean(w0).
ConvergenceResult runToConvergence(const VesselState& w0, ValveSchedule schedule, double tol = 1e-9,
                                   long maxSteps = 1000000);

}  // namespace lumiswarm
