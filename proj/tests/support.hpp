#pragma once

// Shared metric instances and sampling helpers for the test suites.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "finsler/metric.hpp"

namespace finsler::testing {

inline MetricSpec euclidean(int n) {
  return MetricSpec::flat(n, std::vector<std::string>(n, "0"), PhiFamily::riemannian());
}

/// Unit round sphere in the conformal chart a = delta / (1 + |x|^2/4)^2.
inline MetricSpec sphere() {
  const std::string c = "1/(1 + (x1^2 + x2^2)/4)^2";
  return MetricSpec::from_strings(2, {{c, "0"}, {"0", c}}, {"0", "0"}, PhiFamily::riemannian());
}

/// Funk metric of the unit disk written as a Randers metric; K = -1/4.
inline MetricSpec funk() {
  const std::string w = "(1 - x1^2 - x2^2)";
  return MetricSpec::from_strings(2,
                                  {{"(" + w + " + x1^2)/" + w + "^2", "x1*x2/" + w + "^2"},
                                   {"x1*x2/" + w + "^2", "(" + w + " + x2^2)/" + w + "^2"}},
                                  {"x1/" + w, "x2/" + w}, PhiFamily::randers());
}

/// Constant a = delta, constant b: a locally Minkowskian metric.
inline MetricSpec parallel(int n, const PhiFamily& phi, double b1 = 0.2) {
  std::vector<std::string> b(n, "0");
  b[0] = std::to_string(b1);
  return MetricSpec::flat(n, b, phi);
}

/// Nonconstant a and b with no special structure.
inline MetricSpec generic(int n, const PhiFamily& phi) {
  if (n == 2)
    return MetricSpec::from_strings(2, {{"1 + x2^2/5", "x1/10"}, {"x1/10", "1 + x1^2/7"}},
                                    {"0.1 + x2/7", "0.05*x1 - x2/9"}, phi);
  return MetricSpec::from_strings(3,
                                  {{"1 + x2^2/5", "x1/10", "0"}, {"x1/10", "1 + x1^2/7", "0.1*x3"}, {"0", "0.1*x3", "1.2"}},
                                  {"0.1 + x2/7", "0.05*x1 - x2/9", "0.1*sin(x3)"}, phi);
}

/// Flat alpha with a curl-carrying 1-form b = (0, k x1).
inline MetricSpec shear(const PhiFamily& phi, double k = 0.2) {
  return MetricSpec::flat(2, {"0", std::to_string(k) + "*x1"}, phi);
}

inline std::vector<double> uniform_vec(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& e : v) e = u(rng);
  return v;
}

/// A direction with |y| in [0.5, 1.5] (Euclidean), no component pattern.
inline std::vector<double> random_direction(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> r(0.5, 1.5);
  std::vector<double> y(n);
  double nn = 0;
  for (auto& e : y) {
    e = g(rng);
    nn += e * e;
  }
  const double scale = r(rng) / std::sqrt(nn);
  for (auto& e : y) e *= scale;
  return y;
}

inline double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline double rel_err(const Vector& got, const Vector& want) {
  return (got - want).cwiseAbs().maxCoeff() / std::max(want.cwiseAbs().maxCoeff(), 1e-6);
}

}  // namespace finsler::testing
