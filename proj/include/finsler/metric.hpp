#pragma once

// (alpha, beta)-metrics F = alpha * phi(beta / alpha) built from coordinate
// expressions for a_ij(x) and b_i(x).

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/expr.hpp"
#include "finsler/jets.hpp"

namespace finsler {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Vector to_vector(std::span<const double> v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}
inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

/// The profile function phi of an (alpha, beta)-metric.
class PhiFamily {
 public:
  enum class Kind { Riemannian, Randers, ApproxMatsumoto, Matsumoto, CustomPolynomial };

  static PhiFamily riemannian() { return PhiFamily(Kind::Riemannian, 0, {1.0}); }
  static PhiFamily randers() { return PhiFamily(Kind::Randers, 1, {1.0, 1.0}); }
  /// phi = 1 + s + ... + s^r.
  static PhiFamily approx_matsumoto(int r) {
    if (r < 1) throw ArgumentError("approximate Matsumoto order must be >= 1");
    return PhiFamily(Kind::ApproxMatsumoto, r, std::vector<double>(r + 1, 1.0));
  }
  /// phi = 1 + s + s^2 + s^3, i.e. F = alpha + beta + beta^2/alpha + beta^3/alpha^2.
  static PhiFamily second_approx_matsumoto() { return approx_matsumoto(3); }
  static PhiFamily matsumoto() { return PhiFamily(Kind::Matsumoto, 0, {}); }
  static PhiFamily custom_polynomial(std::vector<double> coefficients) {
    if (coefficients.empty() || coefficients[0] <= 0.0)
      throw ArgumentError("custom phi needs phi(0) > 0");
    return PhiFamily(Kind::CustomPolynomial, static_cast<int>(coefficients.size()) - 1, std::move(coefficients));
  }

  Kind kind() const { return kind_; }
  int order() const { return order_; }
  bool uses_beta() const { return kind_ != Kind::Riemannian; }
  bool is_polynomial() const { return kind_ != Kind::Matsumoto; }
  /// Polynomial coefficients c_k of phi = sum c_k s^k (empty for Matsumoto).
  const std::vector<double>& coefficients() const { return coeffs_; }

  std::string name() const {
    switch (kind_) {
      case Kind::Riemannian:
        return "riemannian";
      case Kind::Randers:
        return "randers";
      case Kind::ApproxMatsumoto:
        return "approx_matsumoto(" + std::to_string(order_) + ")";
      case Kind::Matsumoto:
        return "matsumoto";
      case Kind::CustomPolynomial:
        return "custom_polynomial";
    }
    return "?";
  }

  template <typename T>
  T operator()(const T& s) const {
    using jets::lift;
    using jets::value_of;
    if (kind_ == Kind::Matsumoto) {
      if (value_of(s) >= 1.0) throw RegularityError("Matsumoto metric requires s < 1");
      return 1.0 / (1.0 - s);
    }
    T r = lift(s, coeffs_.back());
    for (int k = static_cast<int>(coeffs_.size()) - 2; k >= 0; --k) r = r * s + coeffs_[k];
    return r;
  }

  /// phi^(k)(s).
  double derivative(double s, int k) const {
    if (kind_ == Kind::Matsumoto) {
      if (s >= 1.0) throw RegularityError("Matsumoto metric requires s < 1");
      double f = 1.0;
      for (int q = 2; q <= k; ++q) f *= q;
      return f / std::pow(1.0 - s, k + 1);
    }
    double r = 0.0;
    for (int j = static_cast<int>(coeffs_.size()) - 1; j >= k; --j) {
      double falling = 1.0;
      for (int q = 0; q < k; ++q) falling *= (j - q);
      r = r * s + coeffs_[j] * falling;
    }
    return r;
  }

 private:
  PhiFamily(Kind k, int order, std::vector<double> c) : kind_(k), order_(order), coeffs_(std::move(c)) {}
  Kind kind_;
  int order_;
  std::vector<double> coeffs_;
};

/// Checks the pointwise strong-convexity conditions of an (alpha, beta)-metric:
/// phi > 0, phi - s phi' > 0 and phi - s phi' + (b^2 - s^2) phi'' > 0.
inline void check_phi_regular(const PhiFamily& phi, double s, double b2) {
  if (!phi.uses_beta()) return;
  const double p0 = phi.derivative(s, 0), p1 = phi.derivative(s, 1), p2 = phi.derivative(s, 2);
  if (!(p0 > 0.0)) throw RegularityError("phi(s) <= 0 at s = " + std::to_string(s));
  if (!(p0 - s * p1 > 0.0)) throw RegularityError("phi - s phi' <= 0 at s = " + std::to_string(s));
  if (!(p0 - s * p1 + (b2 - s * s) * p2 > 0.0))
    throw RegularityError("phi - s phi' + (b^2 - s^2) phi'' <= 0 at s = " + std::to_string(s));
}

/// Numeric alpha and beta data at a base point.
struct FrameAt {
  Matrix a;
  Matrix a_inv;
  Vector b;       // b_i
  Vector b_up;    // b^i = a^{ij} b_j
  double b2 = 0;  // a^{ij} b_i b_j
  Matrix chol_l;  // a = L L^T
};

class MetricSpec {
 public:
  MetricSpec(int dim, std::vector<std::vector<expr::Expr>> a, std::vector<expr::Expr> b, PhiFamily phi) {
    auto data = std::make_shared<Data>(Data{dim, std::move(a), std::move(b), std::move(phi), {}, {}});
    if (dim < 2) throw ArgumentError("dimension must be at least 2");
    if (static_cast<int>(data->a.size()) != dim || static_cast<int>(data->b.size()) != dim)
      throw ArgumentError("coefficient table size does not match dimension");
    for (const auto& row : data->a)
      if (static_cast<int>(row.size()) != dim) throw ArgumentError("a must be dim x dim");
    auto& d = *data;
    d.da.resize(dim * dim * dim);
    d.db.resize(dim * dim);
    for (int i = 0; i < dim; ++i) {
      for (int k = 0; k < dim; ++k) {
        d.db[i * dim + k] = expr::diff_expr(d.b[i], k);
        for (int j = 0; j < dim; ++j) d.da[(i * dim + j) * dim + k] = expr::diff_expr(d.a[i][j], k);
      }
    }
    data_ = std::move(data);
  }

  static MetricSpec from_strings(int dim, const std::vector<std::vector<std::string>>& a,
                                 const std::vector<std::string>& b, PhiFamily phi) {
    std::vector<std::vector<expr::Expr>> ae(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      for (const auto& s : a[i]) ae[i].push_back(expr::parse(s, dim));
    std::vector<expr::Expr> be;
    for (const auto& s : b) be.push_back(expr::parse(s, dim));
    return MetricSpec(dim, std::move(ae), std::move(be), std::move(phi));
  }

  /// Flat alpha (a = identity) with the given b and phi.
  static MetricSpec flat(int dim, const std::vector<std::string>& b, PhiFamily phi) {
    std::vector<std::vector<std::string>> a(dim, std::vector<std::string>(dim, "0"));
    for (int i = 0; i < dim; ++i) a[i][i] = "1";
    return from_strings(dim, a, b, std::move(phi));
  }

  int dim() const { return data_->dim; }
  const expr::Expr& a(int i, int j) const { return data_->a[i][j]; }
  const expr::Expr& b(int i) const { return data_->b[i]; }
  const PhiFamily& phi() const { return data_->phi; }
  /// d a_ij / d x^k and d b_i / d x^k as symbolic expressions.
  const expr::Expr& da(int i, int j, int k) const { return data_->da[(i * dim() + j) * dim() + k]; }
  const expr::Expr& db(int i, int k) const { return data_->db[i * dim() + k]; }

  FrameAt frame(std::span<const double> x) const {
    check_dim(x);
    const int n = dim();
    FrameAt f;
    f.a.resize(n, n);
    f.b.resize(n);
    for (int i = 0; i < n; ++i) {
      f.b[i] = expr::eval_expr(b(i), x);
      for (int j = 0; j < n; ++j) f.a(i, j) = expr::eval_expr(a(i, j), x);
    }
    Eigen::LLT<Matrix> llt(f.a);
    if (llt.info() != Eigen::Success || !f.a.isApprox(f.a.transpose(), 1e-12))
      throw RegularityError("a_ij is not symmetric positive definite");
    f.chol_l = llt.matrixL();
    f.a_inv = llt.solve(Matrix::Identity(n, n));
    f.b_up = f.a_inv * f.b;
    f.b2 = f.b.dot(f.b_up);
    // The named families degenerate before b = 1; custom profiles are checked per direction.
    if (phi().uses_beta() && phi().kind() != PhiFamily::Kind::CustomPolynomial && !(f.b2 < 1.0))
      throw RegularityError("b^2 = " + std::to_string(f.b2) + " is not below 1");
    return f;
  }

  /// F(x, y) over any scalar type supported by the expression evaluator.
  template <typename T>
  T F(std::span<const T> x, std::span<const T> y) const {
    using std::sqrt;
    using jets::value_of;
    const int n = dim();
    T alpha2 = jets::lift(x[0], 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) alpha2 += expr::eval(a(i, j), x) * y[i] * y[j];
    if (!(value_of(alpha2) > 0.0)) throw RegularityError("alpha^2 <= 0");
    T alpha = sqrt(alpha2);
    if (!phi().uses_beta()) return alpha;
    T beta = jets::lift(x[0], 0.0);
    for (int i = 0; i < n; ++i) beta += expr::eval(b(i), x) * y[i];
    return alpha * phi()(beta / alpha);
  }

 private:
  void check_dim(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim()) throw ArgumentError("point dimension mismatch");
  }

  struct Data {
    int dim;
    std::vector<std::vector<expr::Expr>> a;
    std::vector<expr::Expr> b;
    PhiFamily phi;
    std::vector<expr::Expr> da;
    std::vector<expr::Expr> db;
  };
  std::shared_ptr<const Data> data_;
};

/// A regular point (x, y) of the slit tangent bundle with cached alpha, beta, s, F.
struct PointState {
  std::vector<double> x;
  std::vector<double> y;
  double alpha = 0;
  double beta = 0;
  double s = 0;
  double F = 0;
  double b2 = 0;

  int dim() const { return static_cast<int>(x.size()); }
};

inline PointState make_point(const MetricSpec& m, std::span<const double> x, std::span<const double> y) {
  const int n = m.dim();
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    throw ArgumentError("point dimension mismatch");
  const FrameAt fr = m.frame(x);
  const Vector yv = to_vector(y);
  if (yv.isZero(0.0)) throw ArgumentError("fiber vector y must be nonzero");
  PointState p;
  p.x.assign(x.begin(), x.end());
  p.y.assign(y.begin(), y.end());
  p.alpha = std::sqrt(yv.dot(fr.a * yv));
  p.beta = fr.b.dot(yv);
  p.s = p.beta / p.alpha;
  p.b2 = fr.b2;
  if (m.phi().uses_beta()) {
    check_phi_regular(m.phi(), p.s, p.b2);
    p.F = p.alpha * m.phi()(p.s);
  } else {
    p.F = p.alpha;
  }
  if (!(p.alpha > 0.0) || !(p.F > 0.0)) throw RegularityError("F(x, y) is not positive");
  return p;
}

inline PointState make_point(const MetricSpec& m, const std::vector<double>& x, const std::vector<double>& y) {
  return make_point(m, std::span<const double>(x), std::span<const double>(y));
}

}  // namespace finsler
