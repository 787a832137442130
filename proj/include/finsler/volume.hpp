#pragma once

// Busemann-Hausdorff volume coefficient by spherical quadrature, the
// definitional S-curvature and the volume scalar lambda of (alpha, beta)-metrics.

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "finsler/alphabeta.hpp"
#include "finsler/errors.hpp"
#include "finsler/geometry.hpp"
#include "finsler/metric.hpp"

namespace finsler {

struct VolumeData {
  double sigma_F = 0;
  double sigma_alpha = 0;
  double ratio = 0;  // sigma_F / sigma_alpha
  double quadrature_error_estimate = 0;
};

namespace detail {

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Matrix J = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(J);
  std::vector<double> x(n), w(n);
  for (int k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()[k];
    w[k] = 2.0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
  }
  return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

/// F(x, theta) from a precomputed frame, guarded by the convexity conditions.
inline double frame_F(const MetricSpec& m, const FrameAt& fr, const Vector& th) {
  const double alpha = std::sqrt(th.dot(fr.a * th));
  if (!m.phi().uses_beta()) return alpha;
  const double s = fr.b.dot(th) / alpha;
  check_phi_regular(m.phi(), s, fr.b2);
  return alpha * m.phi()(s);
}

/// Vol{y : F(x, y) < 1} = (1/n) * integral over the unit sphere of F(x, theta)^-n.
inline double indicatrix_volume(const MetricSpec& m, const FrameAt& fr, int resolution) {
  const int n = m.dim();
  const double pi = boost::math::constants::pi<double>();
  auto radial = [&](const Vector& th) {
    const double F = frame_F(m, fr, th);
    if (!(F > 0.0) || !std::isfinite(F)) throw RegularityError("non-positive indicatrix radius");
    return std::pow(F, -n);
  };
  double acc = 0;
  if (n == 2) {
    Vector th(2);
    for (int k = 0; k < resolution; ++k) {
      const double t = 2.0 * pi * k / resolution;
      th << std::cos(t), std::sin(t);
      acc += radial(th);
    }
    acc *= 2.0 * pi / resolution;
  } else {
    const auto& [z, w] = gauss_legendre(resolution);
    const int naz = 2 * resolution;
    Vector th(3);
    for (int i = 0; i < resolution; ++i) {
      const double rho = std::sqrt(1.0 - z[i] * z[i]);
      double ring = 0;
      for (int k = 0; k < naz; ++k) {
        const double t = 2.0 * pi * k / naz;
        th << rho * std::cos(t), rho * std::sin(t), z[i];
        ring += radial(th);
      }
      acc += w[i] * ring * 2.0 * pi / naz;
    }
  }
  return acc / n;
}

inline double unit_ball_volume(int n) {
  return std::pow(boost::math::constants::pi<double>(), n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

}  // namespace detail

/// sigma_F(x) = Vol(B^n) / Vol{F(x, .) < 1}. Trapezoid rule on the circle for
/// n = 2, Gauss-Legendre x trapezoid product grid for n = 3.
inline VolumeData bh_volume_coefficient(const MetricSpec& m, std::span<const double> x, int resolution) {
  if (resolution < 1) throw ArgumentError("quadrature resolution must be positive");
  if (m.dim() > 3) throw ArgumentError("volume quadrature supports n <= 3");
  const FrameAt fr = m.frame(x);
  const double v = detail::indicatrix_volume(m, fr, resolution);
  const double v2 = detail::indicatrix_volume(m, fr, 2 * resolution);
  const double ball = detail::unit_ball_volume(m.dim());
  VolumeData d;
  d.sigma_F = ball / v;
  d.sigma_alpha = std::sqrt(fr.a.determinant());
  d.ratio = d.sigma_F / d.sigma_alpha;
  d.quadrature_error_estimate = std::abs(ball / v2 - d.sigma_F);
  return d;
}

/// Gradient of ln sigma_F at x: central differences with step h and one Richardson step.
inline Vector log_sigma_gradient(const MetricSpec& m, std::span<const double> x, int resolution,
                                 double h = 1e-4) {
  if (resolution < 1) throw ArgumentError("quadrature resolution must be positive");
  if (m.dim() > 3) throw ArgumentError("volume quadrature supports n <= 3");
  const int n = m.dim();
  const double ball = detail::unit_ball_volume(n);
  std::vector<double> xs(x.begin(), x.end());
  auto log_sigma = [&] { return std::log(ball / detail::indicatrix_volume(m, m.frame(xs), resolution)); };
  Vector g(n);
  for (int i = 0; i < n; ++i) {
    auto central = [&](double step) {
      xs[i] = x[i] + step;
      const double fp = log_sigma();
      xs[i] = x[i] - step;
      const double fm = log_sigma();
      xs[i] = x[i];
      return (fp - fm) / (2.0 * step);
    };
    const double coarse = central(h), fine = central(h / 2);
    g[i] = (4.0 * fine - coarse) / 3.0;
  }
  return g;
}

/// dG^i / dy^i at p.
inline double spray_divergence(const MetricSpec& m, const PointState& p) {
  MetricJets mj(m, p, 1, 3);
  double d = 0;
  for (int i = 0; i < m.dim(); ++i) d += mj.spray()[i].dy(i);
  return d;
}

/// S = dG^i/dy^i - y^i d(ln sigma_F)/dx^i with a precomputed gradient of ln sigma_F.
inline double s_curvature_definitional(const MetricSpec& m, const PointState& p, const Vector& log_sigma_grad) {
  return spray_divergence(m, p) - to_vector(p.y).dot(log_sigma_grad);
}

inline double s_curvature_definitional(const MetricSpec& m, const PointState& p, int resolution) {
  return s_curvature_definitional(m, p, log_sigma_gradient(m, p.x, resolution));
}

/// 1/2 d^2 S / dy^j dy^k; the volume term is linear in y and drops out.
inline Matrix s_curvature_half_hessian(const MetricSpec& m, const PointState& p) {
  MetricJets mj(m, p, 1, 5);
  const int n = m.dim();
  Matrix H = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) H(j, k) += 0.5 * mj.spray()[i].partial({}, {i, j, k});
  return H;
}

struct LambdaEstimate {
  double value = 0;
  /// max |S_closed - S_definitional| over a small direction sample (NaN if n > 3).
  double residual = std::numeric_limits<double>::quiet_NaN();
};

/// lambda = -f'(b) / (2 b f(b)) with f = sigma_F / sigma_alpha as a function of b,
/// from the one-dimensional reduction
/// f(b) = int sin^{n-2} t dt / int sin^{n-2} t phi(b cos t)^{-n} dt over [0, pi].
inline double lambda_of_b(const PhiFamily& phi, double b, int n) {
  if (!phi.uses_beta()) throw DomainError("lambda is undefined for a Riemannian family");
  if (!(b > 1e-12)) throw DomainError("lambda requires b > 0");
  const double pi = boost::math::constants::pi<double>();
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto weight = [n](double t) { return n == 2 ? 1.0 : std::pow(std::sin(t), n - 2); };
  const double I = GK::integrate(
      [&](double t) {
        const double s = b * std::cos(t);
        check_phi_regular(phi, s, b * b);
        return weight(t) * std::pow(phi(s), -n);
      },
      0.0, pi, 15, 1e-14);
  const double dI = GK::integrate(
      [&](double t) {
        const double s = b * std::cos(t);
        return weight(t) * (-n) * std::pow(phi(s), -n - 1) * phi.derivative(s, 1) * std::cos(t);
      },
      0.0, pi, 15, 1e-14);
  // ln f = const - ln I
  return dI / (2.0 * b * I);
}

inline LambdaEstimate lambda_from_volume(const MetricSpec& m, std::span<const double> x, int resolution = 256) {
  const FrameAt fr = m.frame(x);
  LambdaEstimate est;
  est.value = lambda_of_b(m.phi(), std::sqrt(fr.b2), m.dim());
  if (m.dim() <= 3) {
    const Vector grad = log_sigma_gradient(m, x, resolution);
    const int n = m.dim();
    double worst = 0;
    for (int k = 0; k < 2 * n; ++k) {
      Vector y = Vector::Zero(n);
      y[k % n] = 1.0;
      y[(k + 1) % n] += (k < n ? 0.5 : -0.5);
      const PointState p = make_point(m, x, to_std(y));
      worst = std::max(worst, std::abs(s_curvature_closed(m, p, est.value) - s_curvature_definitional(m, p, grad)));
    }
    est.residual = worst;
  }
  return est;
}

}  // namespace finsler
