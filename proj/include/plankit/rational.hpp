#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>

namespace plankit {

/// Exact cost arithmetic. Grid problems only ever produce integers, so the
/// denominators stay at 1 and nothing overflows for realistic sizes.
using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}
inline double to_double(double d) { return d; }

inline std::string to_string(const Rational& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << '/' << r.denominator();
  return os.str();
}

/// Scalar-generic conversion used by the templated planners and learners.
template <class Scalar>
Scalar scalar_from(const Rational& r);

template <>
inline Rational scalar_from<Rational>(const Rational& r) {
  return r;
}
template <>
inline double scalar_from<double>(const Rational& r) {
  return to_double(r);
}

}  // namespace plankit
