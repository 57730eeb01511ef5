#pragma once

#include <vector>

#include "cflab/rational.hpp"
#include "cflab/scheme.hpp"

namespace cflab {

/// Shannon entropy (nats) of the Poisson(t) distribution: -sum p_i ln p_i,
/// summed until a certified geometric tail bound falls below 1e-15.
/// Domain error for negative t; f(0) = 0.
double poisson_entropy(double t);

/// The same quantity along an independent route,
///   f(t) = t(1 - ln t) + e^{-t} sum_{i>=2} t^i ln(i!) / i!,
/// obtained from -ln p_i = t - i ln t + ln(i!).  Kept as a cross-check: the
/// two routes agree to 1e-12.
double poisson_entropy_factorial_form(double t);

struct EntropyPoint {
  int n = 0;
  Rational mu;          // measure of one level-n cylinder, 1/(#C_1...#C_n)
  double f_nats = 0.0;  // poisson_entropy(mu)
};

/// Entropy bound per level, with the finite-depth verdict: `decreasing`
/// holds iff the f-sequence strictly decreases over the stored levels (the
/// checkable evidence that the bound tends to zero).
struct EntropyCurve {
  std::vector<EntropyPoint> points;  // n = 1..depth
  bool decreasing = false;
};

EntropyCurve entropy_bound_curve(const CFScheme& s);

}  // namespace cflab
