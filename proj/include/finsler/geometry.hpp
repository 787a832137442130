#pragma once

// Definitional Finsler quantities of F(x, y): everything is obtained by
// differentiating jets of F^2, never by finite differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/jets.hpp"
#include "finsler/metric.hpp"

namespace finsler {

using jets::Jet;

/// Dense rank-3 array with n^3 entries.
class Tensor3 {
 public:
  explicit Tensor3(int n = 0) : n_(n), v_(static_cast<std::size_t>(n) * n * n, 0.0) {}
  int dim() const { return n_; }
  double& operator()(int i, int j, int k) { return v_[(i * n_ + j) * n_ + k]; }
  double operator()(int i, int j, int k) const { return v_[(i * n_ + j) * n_ + k]; }
  std::span<const double> data() const { return v_; }
  double max_abs() const {
    double m = 0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }
  double norm() const {
    double s = 0;
    for (double x : v_) s += x * x;
    return std::sqrt(s);
  }

 private:
  int n_;
  std::vector<double> v_;
};

/// Dense rank-4 array; for B^i_jkl and D^i_jkl the first slot is the upper index.
class Tensor4 {
 public:
  explicit Tensor4(int n = 0) : n_(n), v_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}
  int dim() const { return n_; }
  double& operator()(int i, int j, int k, int l) { return v_[((i * n_ + j) * n_ + k) * n_ + l]; }
  double operator()(int i, int j, int k, int l) const { return v_[((i * n_ + j) * n_ + k) * n_ + l]; }
  std::span<const double> data() const { return v_; }
  double max_abs() const {
    double m = 0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }
  double norm() const {
    double s = 0;
    for (double x : v_) s += x * x;
    return std::sqrt(s);
  }

 private:
  int n_;
  std::vector<double> v_;
};

// ---------------------------------------------------------------------------
// Jet-level machinery

namespace detail {

/// Gauss-Jordan inverse of a symmetric positive definite jet matrix (row-major n x n).
inline std::vector<Jet> invert(const std::vector<Jet>& m, int n) {
  std::vector<Jet> a = m;
  std::vector<Jet> inv;
  inv.reserve(n * n);
  const auto& layout = m[0].layout();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv.emplace_back(layout, i == j ? 1.0 : 0.0);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col].value()) > std::abs(a[piv * n + col].value())) piv = r;
    if (std::abs(a[piv * n + col].value()) < 1e-300) throw RegularityError("fundamental tensor is singular");
    if (piv != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(a[piv * n + j], a[col * n + j]);
        std::swap(inv[piv * n + j], inv[col * n + j]);
      }
    }
    const Jet rp = reciprocal(a[col * n + col]);
    for (int j = 0; j < n; ++j) {
      a[col * n + j] = a[col * n + j] * rp;
      inv[col * n + j] = inv[col * n + j] * rp;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const Jet f = a[r * n + col];
      if (f.value() == 0.0 && f.higher_terms_zero()) continue;
      for (int j = 0; j < n; ++j) {
        a[r * n + j] -= f * a[col * n + j];
        inv[r * n + j] -= f * inv[col * n + j];
      }
    }
  }
  return inv;
}

}  // namespace detail

/// Jets of F, F^2, g_ij, g^ij and the spray G^i at one point, truncated at
/// (kx, ky) in F^2. Derived quantities lose orders: g is exact to (kx, ky-2),
/// G^i to (kx-1, ky-2).
class MetricJets {
 public:
  MetricJets(const MetricSpec& m, const PointState& p, int kx, int ky) : n_(m.dim()) {
    if (ky < 2) throw ArgumentError("metric jets need at least order 2 in y");
    layout_ = jets::Layout::get(n_, n_, kx, ky);
    for (int i = 0; i < n_; ++i) {
      x_.push_back(Jet::variable(layout_, false, i, p.x[i]));
      y_.push_back(Jet::variable(layout_, true, i, p.y[i]));
    }
    F_ = m.F(std::span<const Jet>(x_), std::span<const Jet>(y_));
    F_.check_finite();
    F2_ = F_ * F_;
    std::vector<Jet> dF2;
    for (int i = 0; i < n_; ++i) dF2.push_back(F2_.dy_jet(i));
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) g_.push_back(0.5 * dF2[i].dy_jet(j));
    Matrix gv(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) gv(i, j) = g_[i * n_ + j].value();
    Eigen::LLT<Matrix> llt(gv);
    if (llt.info() != Eigen::Success) throw RegularityError("fundamental tensor is not positive definite");
    ginv_ = detail::invert(g_, n_);
    if (kx >= 1) {
      for (int i = 0; i < n_; ++i) {
        Jet acc(layout_, 0.0);
        for (int l = 0; l < n_; ++l) {
          Jet bracket = -F2_.dx_jet(l);
          for (int k = 0; k < n_; ++k) bracket += y_[k] * dF2[l].dx_jet(k);
          acc += ginv_[i * n_ + l] * bracket;
        }
        G_.push_back(0.25 * acc);
      }
    }
  }

  int dim() const { return n_; }
  const jets::LayoutPtr& layout() const { return layout_; }
  const std::vector<Jet>& x() const { return x_; }
  const std::vector<Jet>& y() const { return y_; }
  const Jet& F() const { return F_; }
  const Jet& F2() const { return F2_; }
  const Jet& g(int i, int j) const { return g_[i * n_ + j]; }
  const Jet& ginv(int i, int j) const { return ginv_[i * n_ + j]; }
  const std::vector<Jet>& spray() const {
    if (G_.empty()) throw ArgumentError("spray requested from jets without an x order");
    return G_;
  }

  /// C_ijk = 1/2 d g_ij / d y^k as jets.
  Jet cartan(int i, int j, int k) const { return 0.5 * g_[i * n_ + j].dy_jet(k); }

  /// I_i = g^{jk} C_ijk as jets.
  std::vector<Jet> mean_cartan() const {
    std::vector<Jet> I;
    for (int i = 0; i < n_; ++i) {
      Jet acc(layout_, 0.0);
      for (int j = 0; j < n_; ++j) {
        const Jet dg = g_[i * n_ + j];
        for (int k = 0; k < n_; ++k) acc += ginv_[j * n_ + k] * dg.dy_jet(k);
      }
      I.push_back(0.5 * acc);
    }
    return I;
  }

  /// Horizontal derivative along the spray of a covector field T_i:
  /// y^m dT_i/dx^m - 2 G^m dT_i/dy^m - T_m N^m_i.
  std::vector<Jet> horizontal_along_spray(const std::vector<Jet>& T) const {
    const auto& G = spray();
    std::vector<Jet> out;
    for (int i = 0; i < n_; ++i) {
      Jet acc(layout_, 0.0);
      for (int m = 0; m < n_; ++m) {
        acc += y_[m] * T[i].dx_jet(m);
        acc -= 2.0 * (G[m] * T[i].dy_jet(m));
        acc -= T[m] * G[m].dy_jet(i);
      }
      out.push_back(acc);
    }
    return out;
  }

 private:
  int n_;
  jets::LayoutPtr layout_;
  std::vector<Jet> x_, y_;
  Jet F_, F2_;
  std::vector<Jet> g_, ginv_, G_;
};

// ---------------------------------------------------------------------------
// Quantities of an arbitrary spray, given as jets G^i(x, y).

/// B^i_jkl = d^3 G^i / dy^j dy^k dy^l.
inline Tensor4 berwald_from_spray(std::span<const Jet> G) {
  const int n = static_cast<int>(G.size());
  Tensor4 B(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k)
        for (int l = k; l < n; ++l) {
          const double v = G[i].partial({}, {j, k, l});
          B(i, j, k, l) = B(i, j, l, k) = B(i, k, j, l) = B(i, k, l, j) = B(i, l, j, k) = B(i, l, k, j) = v;
        }
  return B;
}

/// E_jk = 1/2 B^m_jkm.
inline Matrix mean_berwald_from_spray(std::span<const Jet> G) {
  const int n = static_cast<int>(G.size());
  Matrix E = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int m = 0; m < n; ++m) E(j, k) += 0.5 * G[m].partial({}, {j, k, m});
  return E;
}

/// D^i_jkl = B^i_jkl - 2/(n+1) {E_jk d^i_l + E_jl d^i_k + E_kl d^i_j + E_jk,l y^i}.
inline Tensor4 douglas_from_spray(std::span<const Jet> G, std::span<const double> y) {
  const int n = static_cast<int>(G.size());
  const Tensor4 B = berwald_from_spray(G);
  const Matrix E = mean_berwald_from_spray(G);
  Tensor3 dE(n);  // E_jk,l
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        double acc = 0;
        for (int m = 0; m < n; ++m) acc += 0.5 * G[m].partial({}, {j, k, m, l});
        dE(j, k, l) = acc;
      }
  Tensor4 D(n);
  const double c = 2.0 / (n + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double t = dE(j, k, l) * y[i];
          if (i == l) t += E(j, k);
          if (i == k) t += E(j, l);
          if (i == j) t += E(k, l);
          D(i, j, k, l) = B(i, j, k, l) - c * t;
        }
  return D;
}

/// R^i_k = 2 dG^i/dx^k - y^j d2G^i/dx^j dy^k + 2 G^j d2G^i/dy^j dy^k - dG^i/dy^j dG^j/dy^k.
inline Matrix riemann_from_spray(std::span<const Jet> G, std::span<const double> y) {
  const int n = static_cast<int>(G.size());
  Matrix R = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double v = 2.0 * G[i].partial({k}, {});
      for (int j = 0; j < n; ++j) {
        v -= y[j] * G[i].partial({j}, {k});
        v += 2.0 * G[j].value() * G[i].partial({}, {j, k});
        v -= G[i].partial({}, {j}) * G[j].partial({}, {k});
      }
      R(i, k) = v;
    }
  return R;
}

// ---------------------------------------------------------------------------
// Definitional quantities of a metric at a point.

inline Matrix fundamental_tensor(const MetricSpec& m, const PointState& p) {
  MetricJets mj(m, p, 0, 2);
  const int n = m.dim();
  Matrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = mj.g(i, j).value();
  return g;
}

inline Tensor3 cartan_torsion(const MetricSpec& m, const PointState& p) {
  MetricJets mj(m, p, 0, 3);
  const int n = m.dim();
  Tensor3 C(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) C(i, j, k) = 0.25 * mj.F2().partial({}, {i, j, k});
  return C;
}

inline Vector mean_cartan(const MetricSpec& m, const PointState& p) {
  MetricJets mj(m, p, 0, 3);
  const auto I = mj.mean_cartan();
  Vector v(m.dim());
  for (int i = 0; i < m.dim(); ++i) v[i] = I[i].value();
  return v;
}

inline Vector spray(const MetricSpec& m, const PointState& p) {
  MetricJets mj(m, p, 1, 2);
  Vector v(m.dim());
  for (int i = 0; i < m.dim(); ++i) v[i] = mj.spray()[i].value();
  return v;
}

/// N^i_j = dG^i / dy^j.
inline Matrix nonlinear_connection(const MetricSpec& m, const PointState& p) {
  MetricJets mj(m, p, 1, 3);
  const int n = m.dim();
  Matrix N(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) N(i, j) = mj.spray()[i].dy(j);
  return N;
}

inline Tensor4 berwald_curvature(const MetricSpec& m, const PointState& p) {
  MetricJets mj(m, p, 1, 5);
  return berwald_from_spray(mj.spray());
}

inline Matrix mean_berwald(const MetricSpec& m, const PointState& p) {
  MetricJets mj(m, p, 1, 5);
  return mean_berwald_from_spray(mj.spray());
}

inline Tensor4 douglas_curvature(const MetricSpec& m, const PointState& p) {
  MetricJets mj(m, p, 1, 6);
  return douglas_from_spray(mj.spray(), p.y);
}

inline Matrix riemann_curvature(const MetricSpec& m, const PointState& p) {
  MetricJets mj(m, p, 2, 4);
  return riemann_from_spray(mj.spray(), p.y);
}

namespace detail {

inline double flag_from(const Matrix& g, const Matrix& R, const Vector& y, const Vector& u_in) {
  const double gyy = y.dot(g * y);
  Vector u = u_in - (y.dot(g * u_in) / gyy) * y;
  const double guu = u.dot(g * u);
  if (!(guu > 1e-24 * gyy * std::max(1.0, u_in.squaredNorm())))
    throw DegenerateFlagError("transverse vector is parallel to the flagpole");
  u /= std::sqrt(guu);
  const double gyu = y.dot(g * u);
  return u.dot(g * (R * u)) / (gyy * u.dot(g * u) - gyu * gyu);
}

}  // namespace detail

/// K(P, y) for the flag P = span{y, u}.
inline double flag_curvature(const MetricSpec& m, const PointState& p, std::span<const double> u) {
  if (static_cast<int>(u.size()) != m.dim()) throw ArgumentError("transverse vector dimension mismatch");
  MetricJets mj(m, p, 2, 4);
  const int n = m.dim();
  Matrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = mj.g(i, j).value();
  const Matrix R = riemann_from_spray(mj.spray(), p.y);
  return detail::flag_from(g, R, to_vector(p.y), to_vector(u));
}

inline Vector mean_landsberg(const MetricSpec& m, const PointState& p) {
  MetricJets mj(m, p, 1, 4);
  const auto J = mj.horizontal_along_spray(mj.mean_cartan());
  Vector v(m.dim());
  for (int i = 0; i < m.dim(); ++i) v[i] = J[i].value();
  return v;
}

/// h_ij = g_ij - F^-2 (g_ip y^p)(g_jq y^q).
inline Matrix angular_metric(const MetricSpec& m, const PointState& p) {
  const Matrix g = fundamental_tensor(m, p);
  const Vector gy = g * to_vector(p.y);
  return g - gy * gy.transpose() / (p.F * p.F);
}

/// max_i |J_{i;m} y^m + K F^2 I_i| for a metric of constant flag curvature K.
inline double akbar_zadeh_residual(const MetricSpec& m, const PointState& p, double K) {
  MetricJets mj(m, p, 2, 5);
  const auto I = mj.mean_cartan();
  const auto J = mj.horizontal_along_spray(I);
  const auto JJ = mj.horizontal_along_spray(J);
  double r = 0;
  for (int i = 0; i < m.dim(); ++i) r = std::max(r, std::abs(JJ[i].value() + K * p.F * p.F * I[i].value()));
  return r;
}

/// Every definitional quantity at one point.
struct CurvatureBundle {
  double F = 0;
  Matrix g, g_inv, h;
  Tensor3 C;
  Vector I;
  Vector G;
  Matrix N;
  Tensor4 B;
  Matrix E;
  Tensor4 D;
  Matrix R;
  Vector J;
  /// y-divergence of the spray, dG^i/dy^i (the S-curvature minus its volume term).
  double spray_divergence = 0;
};

inline CurvatureBundle curvature_bundle(const MetricSpec& m, const PointState& p) {
  const int n = m.dim();
  MetricJets mj(m, p, 2, 6);
  CurvatureBundle cb;
  cb.F = p.F;
  cb.g.resize(n, n);
  cb.g_inv.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cb.g(i, j) = mj.g(i, j).value();
      cb.g_inv(i, j) = mj.ginv(i, j).value();
    }
  const Vector gy = cb.g * to_vector(p.y);
  cb.h = cb.g - gy * gy.transpose() / (p.F * p.F);
  cb.C = Tensor3(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) cb.C(i, j, k) = 0.25 * mj.F2().partial({}, {i, j, k});
  const auto I = mj.mean_cartan();
  const auto J = mj.horizontal_along_spray(I);
  const auto& G = mj.spray();
  cb.I.resize(n);
  cb.J.resize(n);
  cb.G.resize(n);
  cb.N.resize(n, n);
  for (int i = 0; i < n; ++i) {
    cb.I[i] = I[i].value();
    cb.J[i] = J[i].value();
    cb.G[i] = G[i].value();
    for (int j = 0; j < n; ++j) cb.N(i, j) = G[i].dy(j);
    cb.spray_divergence += G[i].dy(i);
  }
  cb.B = berwald_from_spray(G);
  cb.E = mean_berwald_from_spray(G);
  cb.D = douglas_from_spray(G, p.y);
  cb.R = riemann_from_spray(G, p.y);
  return cb;
}

// ---------------------------------------------------------------------------
// Geodesics

struct GeodesicSample {
  double t;
  std::vector<double> x;
  std::vector<double> v;
  double F;
};

struct Trajectory {
  std::vector<GeodesicSample> samples;
  /// max_t |F(c, c') - F(c0, c0')| / F(c0, c0').
  double max_relative_drift = 0;
};

/// Classical RK4 for c'' + 2 G(c, c') = 0.
inline Trajectory geodesic_integrate(const MetricSpec& m, std::span<const double> x0, std::span<const double> y0,
                                     double t_end, double step) {
  if (!(step > 0.0)) throw ArgumentError("geodesic step must be positive");
  if (!(t_end >= 0.0)) throw ArgumentError("t_end must be non-negative");
  const int n = m.dim();
  if (static_cast<int>(x0.size()) != n || static_cast<int>(y0.size()) != n)
    throw ArgumentError("initial data dimension mismatch");

  double t = 0.0;
  auto rhs = [&](const Vector& z) {
    const std::vector<double> x(z.data(), z.data() + n), v(z.data() + n, z.data() + 2 * n);
    const PointState p = make_point(m, x, v);
    const Vector G = spray(m, p);
    Vector dz(2 * n);
    dz.head(n) = z.tail(n);
    dz.tail(n) = -2.0 * G;
    if (!dz.allFinite()) throw EvaluationError("non-finite spray");
    return dz;
  };
  auto record = [&](Trajectory& tr, const Vector& z) {
    const std::vector<double> x(z.data(), z.data() + n), v(z.data() + n, z.data() + 2 * n);
    const double F = make_point(m, x, v).F;
    tr.samples.push_back({t, x, v, F});
  };

  Vector z(2 * n);
  for (int i = 0; i < n; ++i) {
    z[i] = x0[i];
    z[n + i] = y0[i];
  }
  Trajectory tr;
  record(tr, z);
  const double F0 = tr.samples.front().F;
  const auto steps = static_cast<long>(std::ceil(t_end / step - 1e-12));
  for (long k = 0; k < steps; ++k) {
    const double h = std::min(step, t_end - t);
    try {
      const Vector k1 = rhs(z);
      const Vector k2 = rhs(z + 0.5 * h * k1);
      const Vector k3 = rhs(z + 0.5 * h * k2);
      const Vector k4 = rhs(z + h * k3);
      const Vector next = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const double t_prev = t;
      t = (k + 1 == steps) ? t_end : t + h;
      try {
        record(tr, next);
      } catch (const Error&) {
        t = t_prev;
        throw;
      }
      z = next;
    } catch (const IntegrationError&) {
      throw;
    } catch (const Error& e) {
      throw IntegrationError(std::string("trajectory left the regularity domain: ") + e.what(), t);
    }
    tr.max_relative_drift = std::max(tr.max_relative_drift, std::abs(tr.samples.back().F - F0) / F0);
  }
  return tr;
}

}  // namespace finsler
