#pragma once

// Sample-based classifiers for the named metric classes. Every residual is the
// maximum over the sample of a quantity made 0-homogeneous in y.

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "finsler/alphabeta.hpp"
#include "finsler/errors.hpp"
#include "finsler/geometry.hpp"
#include "finsler/metric.hpp"
#include "finsler/sampling.hpp"
#include "finsler/volume.hpp"

namespace finsler {

struct ClassFlag {
  bool holds = false;
  double residual = 0;
};

/// Least-squares c(x), one value per base point.
struct IsotropicFit {
  std::vector<double> c;
  double residual = 0;
  bool holds = false;
};

/// K = omega_m y^m / F + sigma with omega = 3 dc.
struct FlagCurvatureFit {
  std::vector<Vector> omega;
  std::vector<Vector> dc;
  std::vector<double> sigma;
  double residual = 0;
  bool holds = false;
  /// max |d omega_i / dx^j - d omega_j / dx^i| by central differences (NaN if not computed).
  double exactness_residual = std::numeric_limits<double>::quiet_NaN();
};

enum class LemmaBranch { CS1, CS2, None };

inline std::string to_string(LemmaBranch b) {
  switch (b) {
    case LemmaBranch::CS1:
      return "CS1";
    case LemmaBranch::CS2:
      return "CS2";
    case LemmaBranch::None:
      return "none";
  }
  return "?";
}

struct LemmaResult {
  LemmaBranch branch = LemmaBranch::None;
  std::vector<double> epsilon;  // CS1 estimate per base point
  double cs2_residual = 0;      // max(|r_ij|, |s_j|)
  double cs1_residual = 0;      // max(|r_ij - eps (b^2 a_ij - b_i b_j)|, |s_j|)
  double residual = 0;          // residual of the reported branch, or the smaller one
};

struct ClassifyOptions {
  double tol = 1e-7;
  int resolution = 64;
  bool flag_exactness = true;
  double exactness_step = 1e-3;
};

struct ClassificationReport {
  double tol = 0;
  ClassFlag riemannian, berwald, weakly_berwald, douglas, weakly_landsberg, killing_beta, parallel_beta, scalar_flag;
  IsotropicFit isotropic_S, isotropic_E, isotropic_berwald;
  FlagCurvatureFit almost_isotropic_flag;
  std::optional<LemmaResult> lemma;
  /// "definitional" (volume quadrature) or "closed" (n > 3).
  std::string s_source;
};

/// Everything the classifiers need at one sample state.
struct StateData {
  PointState p;
  CurvatureBundle cb;
  BetaCovariant beta;
  double S = 0;
  Matrix Fyy;   // d^2 F / dy dy
  Tensor3 Fyyy;  // d^3 F / dy dy dy
};

struct BaseData {
  std::vector<double> x;
  std::vector<StateData> states;
};

namespace detail {

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

inline StateData state_data(const MetricSpec& m, const PointState& p) {
  StateData d;
  d.p = p;
  d.cb = curvature_bundle(m, p);
  d.beta = covariant_beta_data(m, p);
  const int n = m.dim();
  MetricJets fj(m, p, 0, 3);
  d.Fyy.resize(n, n);
  d.Fyyy = Tensor3(n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      d.Fyy(j, k) = fj.F().partial({}, {j, k});
      for (int l = 0; l < n; ++l) d.Fyyy(j, k, l) = fj.F().partial({}, {j, k, l});
    }
  return d;
}

/// F_jk d^i_l + F_kl d^i_j + F_lj d^i_k + F_jkl y^i.
inline double ibc_pattern(const StateData& s, int i, int j, int k, int l) {
  double v = s.Fyyy(j, k, l) * s.p.y[i];
  if (i == l) v += s.Fyy(j, k);
  if (i == j) v += s.Fyy(k, l);
  if (i == k) v += s.Fyy(l, j);
  return v;
}

/// omega, sigma from K F = omega . y + sigma F over the given states.
inline std::pair<Vector, double> fit_flag(const std::vector<StateData>& states, double* residual) {
  const int n = states.front().p.dim();
  const int N = static_cast<int>(states.size());
  if (N < 2 * n) throw ArgumentError("flag curvature fit needs at least 2n flags per base point");
  Matrix A(N, n + 1);
  Vector rhs(N);
  std::vector<double> K(N);
  for (int k = 0; k < N; ++k) {
    const auto& s = states[k];
    const auto& t = states[(k + 1) % N];
    K[k] = flag_from(s.cb.g, s.cb.R, to_vector(s.p.y), to_vector(t.p.y));
    for (int i = 0; i < n; ++i) A(k, i) = s.p.y[i] / s.p.F;
    A(k, n) = 1.0;
    rhs[k] = K[k];
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(A);
  if (qr.rank() < n + 1) throw ArgumentError("degenerate flag set");
  const Vector sol = qr.solve(rhs);
  if (residual) {
    double r = 0;
    for (int k = 0; k < N; ++k) r = std::max(r, std::abs(A.row(k).dot(sol) - K[k]));
    *residual = r;
  }
  return {sol.head(n), sol[n]};
}

}  // namespace detail

/// Curvature data at every state of the sample. S is definitional for n <= 3
/// and closed-form (lambda from the volume reduction) otherwise.
inline std::vector<BaseData> evaluate_sample(const MetricSpec& m, const SampleSet& sample, int resolution,
                                             std::string* s_source = nullptr) {
  std::vector<BaseData> out;
  const bool definitional = m.dim() <= 3;
  if (s_source) *s_source = definitional ? "definitional" : "closed";
  for (const auto& base : sample) {
    BaseData bd;
    bd.x = base.x;
    Vector grad;
    std::optional<double> lambda;
    if (definitional) {
      grad = log_sigma_gradient(m, base.x, resolution);
    } else if (m.phi().uses_beta() && m.frame(base.x).b2 > 1e-24) {
      lambda = lambda_of_b(m.phi(), std::sqrt(m.frame(base.x).b2), m.dim());
    }
    for (const auto& y : base.ys) {
      StateData d = detail::state_data(m, make_point(m, base.x, y));
      d.S = definitional ? s_curvature_definitional(m, d.p, grad)
                         : (m.phi().uses_beta() ? s_curvature_closed(m, d.p, lambda.value_or(0.0)) : 0.0);
      bd.states.push_back(std::move(d));
    }
    out.push_back(std::move(bd));
  }
  return out;
}

/// Residual of E_jk = (n+1) c / (2F) h_jk with prescribed c per base point.
inline double isotropic_E_residual(const std::vector<BaseData>& data, const std::vector<double>& c) {
  if (c.size() != data.size()) throw ArgumentError("one c value per base point required");
  double r = 0;
  for (std::size_t b = 0; b < data.size(); ++b)
    for (const auto& s : data[b].states) {
      const int n = s.p.dim();
      const Matrix model = ((n + 1) * c[b] / (2.0 * s.p.F)) * s.cb.h;
      r = std::max(r, detail::max_abs(s.cb.E - model) * s.p.F);
    }
  return r;
}

/// Lemma branches from covariant data at base points: (CS2) r_ij = 0, s_j = 0;
/// (CS1) r_ij = eps (b^2 a_ij - b_i b_j), s_j = 0.
inline LemmaResult lemma_cs_branch(const std::vector<BetaCovariant>& data, double tol) {
  if (data.size() < 5) throw ArgumentError("lemma branch test needs at least 5 base points");
  LemmaResult res;
  for (const auto& c : data) {
    const double sj = detail::max_abs(c.s_j);
    res.cs2_residual = std::max({res.cs2_residual, detail::max_abs(c.r), sj});
    const Matrix P = c.b2 * c.a - c.b * c.b.transpose();
    const double pp = P.squaredNorm();
    const double eps = pp > 0 ? (c.r.cwiseProduct(P)).sum() / pp : 0.0;
    res.epsilon.push_back(eps);
    res.cs1_residual = std::max({res.cs1_residual, detail::max_abs(c.r - eps * P), sj});
  }
  if (res.cs2_residual <= tol) {
    res.branch = LemmaBranch::CS2;
    res.residual = res.cs2_residual;
  } else if (res.cs1_residual <= tol) {
    res.branch = LemmaBranch::CS1;
    res.residual = res.cs1_residual;
  } else {
    res.branch = LemmaBranch::None;
    res.residual = std::min(res.cs1_residual, res.cs2_residual);
  }
  return res;
}

inline LemmaResult lemma_cs_branch(const MetricSpec& m, const std::vector<std::vector<double>>& base_points,
                                   double tol) {
  std::vector<BetaCovariant> data;
  const int n = m.dim();
  for (const auto& x : base_points) {
    std::vector<double> y(n, 0.0);
    y[0] = 1.0;
    data.push_back(covariant_beta_data(m, make_point(m, x, y)));
  }
  return lemma_cs_branch(data, tol);
}

/// Fits K = omega . y / F + sigma per base point.
inline FlagCurvatureFit flag_curvature_fit(const MetricSpec& m, const std::vector<BaseData>& data, double tol,
                                           bool exactness = false, double step = 1e-3) {
  FlagCurvatureFit fit;
  for (const auto& bd : data) {
    double r = 0;
    auto [omega, sigma] = detail::fit_flag(bd.states, &r);
    fit.omega.push_back(omega);
    fit.dc.push_back(omega / 3.0);
    fit.sigma.push_back(sigma);
    fit.residual = std::max(fit.residual, r);
  }
  fit.holds = fit.residual <= tol;
  if (exactness) {
    const int n = m.dim();
    double worst = 0;
    for (const auto& bd : data) {
      Matrix dw(n, n);  // dw(i, j) = d omega_i / d x^j
      for (int j = 0; j < n; ++j) {
        Vector sides[2];
        for (int side = 0; side < 2; ++side) {
          std::vector<double> x = bd.x;
          x[j] += side == 0 ? step : -step;
          std::vector<StateData> st;
          for (const auto& s : bd.states) st.push_back(detail::state_data(m, make_point(m, x, s.p.y)));
          sides[side] = detail::fit_flag(st, nullptr).first;
        }
        dw.col(j) = (sides[0] - sides[1]) / (2.0 * step);
      }
      worst = std::max(worst, detail::max_abs(dw - dw.transpose()));
    }
    fit.exactness_residual = worst;
  }
  return fit;
}

inline FlagCurvatureFit flag_curvature_fit(const MetricSpec& m, const SampleSet& sample, double tol = 1e-7) {
  std::vector<BaseData> data;
  for (const auto& base : sample) {
    BaseData bd;
    bd.x = base.x;
    for (const auto& y : base.ys) bd.states.push_back(detail::state_data(m, make_point(m, base.x, y)));
    data.push_back(std::move(bd));
  }
  return flag_curvature_fit(m, data, tol);
}

inline ClassificationReport classify_evaluated(const MetricSpec& m, const std::vector<BaseData>& data,
                                               const ClassifyOptions& opt) {
  if (data.empty()) throw ArgumentError("empty sample");
  for (const auto& bd : data)
    if (bd.states.size() < 20) throw ArgumentError("classification needs at least 20 directions per base point");
  const int n = m.dim();
  ClassificationReport rep;
  rep.tol = opt.tol;
  auto upd = [](ClassFlag& f, double v) { f.residual = std::max(f.residual, v); };

  for (const auto& bd : data) {
    double sf = 0, ff = 0, eh = 0, hh = 0, bp = 0, pp = 0;
    for (const auto& s : bd.states) {
      const double F = s.p.F;
      upd(rep.riemannian, detail::max_abs(s.cb.I) * F);
      upd(rep.berwald, s.cb.B.max_abs() * F);
      upd(rep.weakly_berwald, detail::max_abs(s.cb.E) * F);
      upd(rep.douglas, s.cb.D.max_abs() * F);
      upd(rep.weakly_landsberg, detail::max_abs(s.cb.J));
      if (m.phi().uses_beta()) {
        upd(rep.killing_beta, std::abs(s.beta.r00) / (s.beta.alpha * s.beta.alpha));
        upd(rep.parallel_beta, detail::max_abs(s.beta.b_cov));
      }
      // Scalar flag curvature: R = K F^2 (delta - F^-1 F_{y^k} y^i) with K = tr R / ((n-1) F^2).
      {
        const Vector y = to_vector(s.p.y);
        const Vector Fy = s.cb.g * y / F;
        const double K = s.cb.R.trace() / ((n - 1) * F * F);
        const Matrix model = K * F * F * (Matrix::Identity(n, n) - y * Fy.transpose() / F);
        upd(rep.scalar_flag, detail::max_abs(s.cb.R - model) / (F * F));
      }
      sf += s.S * F;
      ff += F * F;
      const Matrix hF = s.cb.h / F;
      eh += (s.cb.E.cwiseProduct(hF)).sum();
      hh += hF.squaredNorm();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
              const double v = detail::ibc_pattern(s, i, j, k, l);
              bp += s.cb.B(i, j, k, l) * v;
              pp += v * v;
            }
    }
    const double cS = sf / ((n + 1) * ff);
    const double cE = hh > 0 ? eh / (0.5 * (n + 1) * hh) : 0.0;
    const double cB = pp > 0 ? bp / pp : 0.0;
    rep.isotropic_S.c.push_back(cS);
    rep.isotropic_E.c.push_back(cE);
    rep.isotropic_berwald.c.push_back(cB);
    for (const auto& s : bd.states) {
      const double F = s.p.F;
      rep.isotropic_S.residual = std::max(rep.isotropic_S.residual, std::abs(s.S - (n + 1) * cS * F) / F);
      double rb = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
              rb = std::max(rb, std::abs(s.cb.B(i, j, k, l) - cB * detail::ibc_pattern(s, i, j, k, l)));
      rep.isotropic_berwald.residual = std::max(rep.isotropic_berwald.residual, rb * F);
    }
  }
  rep.isotropic_E.residual = isotropic_E_residual(data, rep.isotropic_E.c);

  for (ClassFlag* f : {&rep.riemannian, &rep.berwald, &rep.weakly_berwald, &rep.douglas, &rep.weakly_landsberg,
                       &rep.killing_beta, &rep.parallel_beta, &rep.scalar_flag})
    f->holds = f->residual <= opt.tol;
  if (!m.phi().uses_beta()) rep.killing_beta.holds = rep.parallel_beta.holds = true;
  for (IsotropicFit* f : {&rep.isotropic_S, &rep.isotropic_E, &rep.isotropic_berwald}) f->holds = f->residual <= opt.tol;

  rep.almost_isotropic_flag = flag_curvature_fit(m, data, opt.tol, opt.flag_exactness, opt.exactness_step);
  if (data.size() >= 5) {
    std::vector<std::vector<double>> xs;
    for (const auto& bd : data) xs.push_back(bd.x);
    rep.lemma = lemma_cs_branch(m, xs, opt.tol);
  }
  return rep;
}

inline ClassificationReport classify_at_points(const MetricSpec& m, const SampleSet& sample,
                                               const ClassifyOptions& opt = {}) {
  for (const auto& b : sample)
    if (b.ys.size() < 20) throw ArgumentError("classification needs at least 20 directions per base point");
  std::string source;
  const auto data = evaluate_sample(m, sample, opt.resolution, &source);
  ClassificationReport rep = classify_evaluated(m, data, opt);
  rep.s_source = source;
  return rep;
}

}  // namespace finsler
