#include "cflab/entropy.hpp"

#include <cmath>
#include <stdexcept>

namespace cflab {

double poisson_entropy(double t) {
  if (!(t >= 0.0))
    throw std::domain_error("poisson_entropy: parameter must be >= 0");
  if (t == 0.0) return 0.0;  // point mass
  const double lt = std::log(t);
  double lp = -t;  // ln p_i, updated incrementally; p_0 = e^{-t}
  double acc = 0.0;
  for (std::int64_t i = 0;; ++i) {
    acc -= std::exp(lp) * lp;
    const double lp_next = lp + lt - std::log(double(i + 1));
    // Past the mode the pmf ratio r = t/(i+2) stays below 1/2, and
    // -p ln p <= 2 sqrt(p) on (0,1), so the remaining sum is bounded by
    // 2 sqrt(p_{i+1}) / (1 - sqrt(r)) < 7 sqrt(p_{i+1}).
    if (double(i + 2) > 2.0 * t && 7.0 * std::exp(0.5 * lp_next) < 1e-15)
      break;
    lp = lp_next;
  }
  return acc;
}

double poisson_entropy_factorial_form(double t) {
  if (!(t >= 0.0))
    throw std::domain_error("poisson_entropy: parameter must be >= 0");
  if (t == 0.0) return 0.0;
  const double lt = std::log(t);
  double acc = t * (1.0 - lt);
  double lp = -t + 2.0 * lt - std::log(2.0);  // ln p_2
  for (std::int64_t i = 2;; ++i) {
    const double term = std::exp(lp) * std::lgamma(double(i) + 1.0);
    acc += term;
    // Once the pmf ratio is below 1/2 the ln(i!) factor grows too slowly to
    // offset it, so the tail is dominated by a ratio-0.6 geometric series.
    if (double(i + 2) > 2.0 * t && i > 4 && 1.5 * term < 1e-16) break;
    lp += lt - std::log(double(i + 1));
  }
  return acc;
}

EntropyCurve entropy_bound_curve(const CFScheme& s) {
  s.validate_structure();
  if (s.depth() < 1)
    throw std::invalid_argument("entropy_bound_curve: depth >= 1 required");
  EntropyCurve curve;
  curve.decreasing = true;
  Rational mu(1);
  for (int n = 1; n <= s.depth(); ++n) {
    mu /= Rational(BigInt(s.c_at(n).cardinality()));
    EntropyPoint p;
    p.n = n;
    p.mu = mu;
    p.f_nats = poisson_entropy(to_double(mu));
    if (n > 1 && !(p.f_nats < curve.points.back().f_nats))
      curve.decreasing = false;
    curve.points.push_back(std::move(p));
  }
  return curve;
}

}  // namespace cflab
