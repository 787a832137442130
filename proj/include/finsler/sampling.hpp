#pragma once

// Deterministic direction sets and seeded base points.

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/metric.hpp"

namespace finsler {

/// Directions at one base point.
struct BaseSample {
  std::vector<double> x;
  std::vector<std::vector<double>> ys;
};

using SampleSet = std::vector<BaseSample>;

namespace detail {

inline double radical_inverse(std::uint64_t i, unsigned base) {
  double r = 0, f = 1.0 / base;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f /= base;
  }
  return r;
}

inline constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace detail

/// Low-discrepancy points on the Euclidean unit sphere S^{n-1}: equally spaced
/// angles for n = 2, a Fibonacci lattice for n = 3, Halton points pushed through
/// the normal quantile function otherwise.
inline std::vector<Vector> sphere_points(int n, int count) {
  if (n < 2) throw ArgumentError("sphere dimension must be at least 2");
  if (count < 1) throw ArgumentError("direction count must be positive");
  const double pi = boost::math::constants::pi<double>();
  std::vector<Vector> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    Vector u(n);
    if (n == 2) {
      const double t = 2.0 * pi * (k + 0.5) / count;
      u << std::cos(t), std::sin(t);
    } else if (n == 3) {
      const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double rho = std::sqrt(1.0 - z * z);
      const double t = 2.0 * pi * k / golden;
      u << rho * std::cos(t), rho * std::sin(t), z;
    } else {
      if (n > static_cast<int>(std::size(detail::kPrimes))) throw ArgumentError("dimension too large for Halton directions");
      for (int i = 0; i < n; ++i) {
        const double h = detail::radical_inverse(static_cast<std::uint64_t>(k) + 1, detail::kPrimes[i]);
        u[i] = std::sqrt(2.0) * boost::math::erf_inv(2.0 * h - 1.0);
      }
      u.normalize();
    }
    out.push_back(u);
  }
  return out;
}

/// Directions y with alpha(x, y) = 1: y = L^{-T} u for a = L L^T.
inline std::vector<std::vector<double>> alpha_unit_directions(const MetricSpec& m, std::span<const double> x, int count) {
  const FrameAt fr = m.frame(x);
  std::vector<std::vector<double>> out;
  for (const Vector& u : sphere_points(m.dim(), count))
    out.push_back(to_std(fr.chol_l.transpose().triangularView<Eigen::Upper>().solve(u)));
  return out;
}

/// Uniform points in the box center +- radius from a seeded Mersenne twister.
inline std::vector<std::vector<double>> random_base_points(int n, int count, std::uint64_t seed, double radius,
                                                           std::span<const double> center = {}) {
  if (!(radius >= 0.0)) throw ArgumentError("sampling radius must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<std::vector<double>> out(count, std::vector<double>(n));
  for (auto& x : out)
    for (int i = 0; i < n; ++i) x[i] = (center.empty() ? 0.0 : center[i]) + u(rng);
  return out;
}

/// The sample used by classifiers: every base point paired with the same
/// number of alpha-unit directions.
inline SampleSet make_sample(const MetricSpec& m, const std::vector<std::vector<double>>& base_points,
                             int directions_per_point) {
  SampleSet s;
  for (const auto& x : base_points) s.push_back({x, alpha_unit_directions(m, x, directions_per_point)});
  return s;
}

}  // namespace finsler
