#include "lumiswarm/vessels.hpp"

#include <cmath>
#include <numeric>

#include "lumiswarm/error.hpp"

namespace lumiswarm {

VesselState vesselsStep(const VesselState& w, const std::vector<bool>& valves) {
  const std::size_t n = w.size();
  if (valves.size() != n) throw Error(ErrorCode::LengthMismatch, "one valve per vessel expected");
  VesselState out = w;
  for (std::size_t i = 0; i < n; ++i) {
    if (!valves[i]) continue;
    const std::size_t j = (i + 1) % n;
    const double transfer = (w[i] - w[j]) / 4.0;
    out[i] -= transfer;
    out[j] += transfer;
  }
  return out;
}

double energy(const VesselState& w) { return std::inner_product(w.begin(), w.end(), w.begin(), 0.0); }

EnergyCheck checkEnergyInequality(const VesselState& w, const std::vector<bool>& valves) {
  const VesselState next = vesselsStep(w, valves);
  EnergyCheck c;
  c.lhs = energy(w) - energy(next);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!valves[i]) continue;
    const double q = w[(i + 1) % w.size()] - w[i];
    c.rhs += q * q;
  }
  c.rhs /= 4.0;
  c.holds = c.lhs >= c.rhs - 1e-12;
  return c;
}

ValveSchedule::ValveSchedule(Kind kind, std::size_t n, std::uint64_t seed, std::set<std::size_t> closed,
                             double probability, int window)
    : kind_(kind),
      n_(n),
      rng_(seed),
      closed_(std::move(closed)),
      probability_(probability),
      window_(window > 0 ? window : static_cast<int>(2 * n)),
      shutFor_(n, 0) {}

std::vector<bool> ValveSchedule::next() {
  std::vector<bool> v(n_, true);
  std::bernoulli_distribution coin(probability_);
  for (std::size_t i = 0; i < n_; ++i) {
    if (closed_.count(i)) {
      v[i] = false;
      continue;
    }
    if (kind_ == Kind::RandomFair) v[i] = coin(rng_) || shutFor_[i] + 1 >= window_;
    shutFor_[i] = v[i] ? 0 : shutFor_[i] + 1;
  }
  return v;
}

ConvergenceResult runToConvergence(const VesselState& w0, ValveSchedule schedule, double tol, long maxSteps) {
  ConvergenceResult r;
  r.w = w0;
  if (w0.empty()) {
    r.converged = true;
    return r;
  }
  const double mean = std::accumulate(w0.begin(), w0.end(), 0.0) / static_cast<double>(w0.size());
  auto done = [&] {
    for (double x : r.w)
      if (!(std::abs(x - mean) < tol)) return false;
    return true;
  };
  while (!done()) {
    if (r.steps >= maxSteps) return r;
    r.w = vesselsStep(r.w, schedule.next());
    ++r.steps;
  }
  r.converged = true;
  return r;
}

}  // namespace lumiswarm
