#pragma once

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace cflab {

using BigInt = boost::multiprecision::cpp_int;

/// Exact rational measure value.  Always stored normalized (gcd 1, positive
/// denominator); arithmetic never rounds.
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(std::int64_t num, std::int64_t den) {
  return Rational(BigInt(num), BigInt(den));
}

inline double to_double(const Rational& r) {
  return r.convert_to<double>();
}

inline std::string num_string(const Rational& r) {
  return numerator(r).str();
}

inline std::string den_string(const Rational& r) {
  return denominator(r).str();
}

/// "p/q" (or just "p" for integers); used in reports and witnesses.
inline std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace cflab
