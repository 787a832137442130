#pragma once

// Closed-form machinery of (alpha, beta)-metrics: covariant derivatives of
// beta, the phi-scalars and the explicit spray, S-curvature, mean Cartan and
// mean Landsberg formulas.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/geometry.hpp"
#include "finsler/jets.hpp"
#include "finsler/metric.hpp"

namespace finsler {

/// Gamma^k_ij of alpha at x, stored as G(k, i, j).
inline Tensor3 christoffel(const MetricSpec& m, std::span<const double> x, const Matrix& a_inv) {
  const int n = m.dim();
  Tensor3 da(n);  // d a_ij / d x^k
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) da(i, j, k) = expr::eval_expr(m.da(i, j, k), x);
  Tensor3 lower(n);  // Gamma_{l ij}
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lower(l, i, j) = 0.5 * (da(l, i, j) + da(l, j, i) - da(i, j, l));
  Tensor3 G(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = 0;
        for (int l = 0; l < n; ++l) v += a_inv(k, l) * lower(l, i, j);
        G(k, i, j) = v;
      }
  return G;
}

/// Covariant derivative of beta with respect to alpha and its contractions at (x, y).
struct BetaCovariant {
  Matrix a, a_inv;
  Vector b, b_up;
  double b2 = 0;
  Matrix b_cov;  // b_{i|j}
  Matrix r, s;   // symmetric and antisymmetric parts
  Vector r_j;    // b^i r_ij
  Vector s_j;    // b^i s_ij
  double r00 = 0, r0 = 0, s0 = 0;
  Vector r_i0;        // r_ij y^j
  Vector s_i0;        // s_ij y^j
  Vector s_up_i0;     // a^{im} s_mj y^j
  Vector y_lower;     // a_ij y^j
  Vector G_alpha;     // spray of alpha
  double alpha = 0, beta = 0;
};

/// b_{i|j} = d b_i / d x^j - b_k Gamma^k_ij and every derived contraction.
inline BetaCovariant covariant_beta_data(const MetricSpec& m, const PointState& p) {
  const int n = m.dim();
  const FrameAt fr = m.frame(p.x);
  const Tensor3 gam = christoffel(m, p.x, fr.a_inv);
  const Vector y = to_vector(p.y);
  BetaCovariant c;
  c.a = fr.a;
  c.a_inv = fr.a_inv;
  c.b = fr.b;
  c.b_up = fr.b_up;
  c.b2 = fr.b2;
  c.b_cov.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = expr::eval_expr(m.db(i, j), p.x);
      for (int k = 0; k < n; ++k) v -= c.b[k] * gam(k, i, j);
      c.b_cov(i, j) = v;
    }
  c.r = 0.5 * (c.b_cov + c.b_cov.transpose());
  c.s = 0.5 * (c.b_cov - c.b_cov.transpose());
  c.r_j = c.r.transpose() * c.b_up;
  c.s_j = c.s.transpose() * c.b_up;
  c.r_i0 = c.r * y;
  c.s_i0 = c.s * y;
  c.s_up_i0 = c.a_inv * c.s_i0;
  c.r00 = y.dot(c.r_i0);
  c.r0 = c.r_j.dot(y);
  c.s0 = c.s_j.dot(y);
  c.y_lower = c.a * y;
  c.G_alpha = Vector::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) c.G_alpha[i] += 0.5 * gam(i, j, k) * y[j] * y[k];
  c.alpha = std::sqrt(y.dot(c.y_lower));
  c.beta = c.b.dot(y);
  return c;
}

/// Scalar functions of (s, b^2) entering the closed forms; primes are d/ds at fixed b^2.
struct PhiScalars {
  double s = 0, b2 = 0;
  int n = 0;
  double phi = 0, phi1 = 0, phi2 = 0;
  double Q = 0, Q1 = 0, Q2 = 0;
  double Theta = 0, Psi = 0, Psi_prime = 0;
  double Delta = 0, Phi = 0;
  double Psi1 = 0, Psi2 = 0, theta = 0;
  double PsiQ_prime = 0;  // (Psi Q)'
  std::optional<double> lambda;
};

namespace detail {

inline void require_nonzero(double v, const char* what) {
  if (!std::isfinite(v) || std::abs(v) < 1e-14) throw RegularityError(std::string(what) + " vanishes");
}

inline void require_positive(double v, const char* what) {
  if (!std::isfinite(v) || v < 1e-14) throw RegularityError(std::string(what) + " is not positive");
}

}  // namespace detail

/// Evaluates Q, Theta, Psi, Delta, Phi, Psi1, Psi2, theta of the given family.
inline PhiScalars phi_scalars(const PhiFamily& phi, double s, double b2, int n,
                              std::optional<double> lambda = std::nullopt) {
  if (b2 - s * s < 0.0) {
    if (s * s - b2 > 1e-12 * std::max(1.0, b2)) throw DomainError("b^2 < s^2");
    s = std::copysign(std::sqrt(b2), s);
  }
  PhiScalars r;
  r.s = s;
  r.b2 = b2;
  r.n = n;
  r.lambda = lambda;
  if (!phi.uses_beta()) {
    r.phi = 1.0;
    r.Delta = 1.0;
    return r;
  }
  const auto layout = jets::Layout::get(0, 1, 0, 5);
  const Jet sj = Jet::variable(layout, true, 0, s);
  const Jet w = b2 - sj * sj;  // b^2 - s^2
  const Jet ph = phi(sj);
  const Jet ph1 = ph.dy_jet(0);
  const Jet ph2 = ph1.dy_jet(0);
  const Jet den = ph - sj * ph1;
  detail::require_positive(den.value(), "phi - s phi'");
  const Jet Q = ph1 / den;
  const Jet Q1 = Q.dy_jet(0);
  const Jet Q2 = Q1.dy_jet(0);
  const Jet conv = den + w * ph2;
  detail::require_positive(conv.value(), "phi - s phi' + (b^2 - s^2) phi''");
  const Jet Theta = (ph * ph1 - sj * (ph * ph2 + ph1 * ph1)) / (2.0 * ph * conv);
  const Jet Psi = ph2 / (2.0 * conv);
  const Jet Delta = 1.0 + sj * Q + w * Q1;
  detail::require_nonzero(Delta.value(), "Delta");
  const Jet q = Q - sj * Q1;
  const Jet Phi = -(n * Delta + 1.0 + sj * Q) * q - w * (1.0 + sj * Q) * Q2;
  // sqrt(w) Delta^{1/2} d/ds[sqrt(w) Phi Delta^{-3/2}], expanded so that it stays
  // finite at w = 0.
  const Jet core = Phi * pow(Delta, -1.5);
  const double psi1 = -s * Phi.value() / Delta.value() +
                      w.value() * std::sqrt(Delta.value()) * core.dy(0);

  r.phi = ph.value();
  r.phi1 = ph1.value();
  r.phi2 = ph2.value();
  r.Q = Q.value();
  r.Q1 = Q1.value();
  r.Q2 = Q2.value();
  r.Theta = Theta.value();
  r.Psi = Psi.value();
  r.Psi_prime = Psi.dy(0);
  r.PsiQ_prime = (Psi * Q).dy(0);
  r.Delta = Delta.value();
  r.Phi = Phi.value();
  r.Psi1 = psi1;
  r.Psi2 = 2.0 * (n + 1) * q.value() + 3.0 * r.Phi / r.Delta;
  r.theta = q.value() / (2.0 * r.Delta);
  return r;
}

struct MatsumotoScalars {
  double Q = 0, Theta = 0, Psi = 0;
};

/// Q, Theta, Psi of phi = 1 + s + s^2 + s^3 in their reduced closed forms.
inline MatsumotoScalars second_matsumoto_scalars(double s, double b2) {
  const double dq = -1.0 + s * s + 2.0 * s * s * s;
  const double dd = 1.0 - 3.0 * s * s - 8.0 * s * s * s + 2.0 * b2 + 6.0 * b2 * s;
  const double ph = 1.0 + s + s * s + s * s * s;
  detail::require_nonzero(dq, "-1 + s^2 + 2 s^3");
  detail::require_nonzero(dd, "1 - 3 s^2 - 8 s^3 + 2 b^2 + 6 b^2 s");
  detail::require_nonzero(ph, "1 + s + s^2 + s^3");
  MatsumotoScalars r;
  r.Q = -(1.0 + 2.0 * s + 3.0 * s * s) / dq;
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  r.Theta = 0.5 * (1.0 - 6.0 * s2 - 12.0 * s3 - 15.0 * s4 - 12.0 * s5) / (ph * dd);
  r.Psi = (1.0 + 3.0 * s) / dd;
  return r;
}

/// Scalars at a point of a metric.
inline PhiScalars phi_scalars_at(const MetricSpec& m, const PointState& p,
                                 std::optional<double> lambda = std::nullopt) {
  return phi_scalars(m.phi(), p.s, p.b2, m.dim(), lambda);
}

/// G^i = G_alpha^i + alpha Q s^i_0 + theta (-2 alpha Q s_0 + r_00) [y^i / alpha + Q' / (Q - s Q') b^i].
inline Vector spray_closed_form(const MetricSpec& m, const PointState& p) {
  const BetaCovariant c = covariant_beta_data(m, p);
  if (!m.phi().uses_beta()) return c.G_alpha;
  const PhiScalars ps = phi_scalars_at(m, p);
  const double q = ps.Q - p.s * ps.Q1;
  detail::require_nonzero(q, "Q - s Q'");
  const Vector y = to_vector(p.y);
  const double a = c.alpha;
  return c.G_alpha + a * ps.Q * c.s_up_i0 +
         ps.theta * (-2.0 * a * ps.Q * c.s0 + c.r00) * (y / a + (ps.Q1 / q) * c.b_up);
}

/// S-curvature from its closed form. The second bracket multiplies r_0.
inline double s_curvature_closed(const MetricSpec& m, const PointState& p, double lambda) {
  if (!m.phi().uses_beta()) return 0.0;
  const BetaCovariant c = covariant_beta_data(m, p);
  const PhiScalars ps = phi_scalars_at(m, p, lambda);
  const int n = m.dim();
  const double w = ps.b2 - ps.s * ps.s;
  const double k_s0 = ps.Q1 - 2.0 * ps.Psi * ps.Q * ps.s - 2.0 * ps.PsiQ_prime * w - 2.0 * (n + 1) * ps.Q * ps.Theta +
                      2.0 * lambda;
  const double k_r0 = 2.0 * (ps.Psi + lambda);
  const double k_r00 = (w * ps.Psi_prime + (n + 1) * ps.Theta) / c.alpha;
  return k_s0 * c.s0 + k_r0 * c.r0 + k_r00 * c.r00;
}

/// Coefficient of lambda in the closed S-curvature: 2 (s_0 + r_0).
inline double s_curvature_lambda_coefficient(const MetricSpec& m, const PointState& p) {
  if (!m.phi().uses_beta()) return 0.0;
  const BetaCovariant c = covariant_beta_data(m, p);
  return 2.0 * (c.s0 + c.r0);
}

struct MeanCartanClosed {
  Vector I;
  double I_dot_b = 0;  // I_i b^i
};

/// I_i = -Phi (phi - s phi') / (2 Delta phi alpha^2) (alpha b_i - s y_i).
inline MeanCartanClosed mean_cartan_closed(const MetricSpec& m, const PointState& p) {
  MeanCartanClosed r;
  const FrameAt fr = m.frame(p.x);
  if (!m.phi().uses_beta()) {
    r.I = Vector::Zero(m.dim());
    return r;
  }
  const PhiScalars ps = phi_scalars_at(m, p);
  const Vector y = to_vector(p.y);
  const Vector h = p.alpha * fr.b - p.s * (fr.a * y);
  const double k = -ps.Phi * (ps.phi - p.s * ps.phi1) / (2.0 * ps.Delta * ps.phi * p.alpha * p.alpha);
  r.I = k * h;
  r.I_dot_b = -ps.Phi * (ps.phi - p.s * ps.phi1) * (ps.b2 - p.s * p.s) / (2.0 * ps.Delta * p.F);
  return r;
}

/// Mean Landsberg curvature from its closed form with h_i = alpha b_i - s y_i.
inline Vector mean_landsberg_closed(const MetricSpec& m, const PointState& p) {
  const int n = m.dim();
  if (!m.phi().uses_beta()) return Vector::Zero(n);
  const BetaCovariant c = covariant_beta_data(m, p);
  const PhiScalars ps = phi_scalars_at(m, p);
  const double a = c.alpha, s = p.s;
  const double w = ps.b2 - s * s;
  const double q = ps.Q - s * ps.Q1;
  const double pd = ps.Phi / ps.Delta;
  const double e = c.r00 - 2.0 * a * ps.Q * c.s0;
  const Vector h = a * c.b - s * c.y_lower;
  Vector bracket = Vector::Zero(n);
  if (w > 0.0) {
    bracket += (2.0 * a * a / w) * (pd + (n + 1) * q) * (c.r0 + c.s0) * h;
    bracket += (a / w) * (ps.Psi1 + s * pd) * e * h;
  }
  const Vector inner = -a * ps.Q1 * c.s0 * h + a * ps.Q * (a * a * c.s_j - c.y_lower * c.s0) +
                       a * a * ps.Delta * c.s_i0 + a * a * (c.r_i0 - 2.0 * a * ps.Q * c.s_j) - e * c.y_lower;
  bracket += a * pd * inner;
  return (-1.0 / (2.0 * ps.Delta * std::pow(a, 4))) * bracket;
}

/// Contraction of the mean Landsberg curvature with b^i:
/// -[Psi1 (r_00 - 2 alpha Q s_0) + alpha Psi2 (r_0 + s_0)] / (2 Delta alpha^2).
inline double jbar(const MetricSpec& m, const PointState& p) {
  if (!m.phi().uses_beta()) return 0.0;
  const BetaCovariant c = covariant_beta_data(m, p);
  const PhiScalars ps = phi_scalars_at(m, p);
  const double a = c.alpha;
  return -(ps.Psi1 * (c.r00 - 2.0 * a * ps.Q * c.s0) + a * ps.Psi2 * (c.r0 + c.s0)) / (2.0 * ps.Delta * a * a);
}

}  // namespace finsler
