#pragma once

// Exact rational functions in s and t = b^2 with rational coefficients.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "finsler/errors.hpp"

namespace finsler::ratfunc {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

/// Polynomial in (s, t); keys are (deg_s, deg_t). Zero coefficients are never stored.
class Poly2 {
 public:
  using Key = std::pair<int, int>;

  Poly2() = default;
  Poly2(const Rational& c) {  // NOLINT(google-explicit-constructor)
    if (c != 0) c_[{0, 0}] = c;
  }
  Poly2(long c) : Poly2(Rational(c)) {}  // NOLINT(google-explicit-constructor)
  static Poly2 monomial(const Rational& c, int ds, int dt) {
    Poly2 p;
    if (c != 0) p.c_[{ds, dt}] = c;
    return p;
  }
  static Poly2 s() { return monomial(1, 1, 0); }
  static Poly2 t() { return monomial(1, 0, 1); }

  bool is_zero() const { return c_.empty(); }
  const std::map<Key, Rational>& terms() const { return c_; }
  int degree_s() const {
    int d = 0;
    for (const auto& [k, v] : c_) d = std::max(d, k.first);
    return d;
  }
  int degree_t() const {
    int d = 0;
    for (const auto& [k, v] : c_) d = std::max(d, k.second);
    return d;
  }
  /// Coefficient of the largest key (lexicographic in (deg_s, deg_t)).
  const Rational& leading() const {
    if (c_.empty()) throw ArithmeticError("leading coefficient of the zero polynomial");
    return c_.rbegin()->second;
  }

  Poly2& operator+=(const Poly2& o) {
    for (const auto& [k, v] : o.c_) add_term(k, v);
    return *this;
  }
  Poly2& operator-=(const Poly2& o) {
    for (const auto& [k, v] : o.c_) add_term(k, -v);
    return *this;
  }
  friend Poly2 operator+(Poly2 a, const Poly2& b) { return a += b; }
  friend Poly2 operator-(Poly2 a, const Poly2& b) { return a -= b; }
  friend Poly2 operator-(const Poly2& a) { return Poly2() - a; }
  friend Poly2 operator*(const Poly2& a, const Poly2& b) {
    Poly2 r;
    for (const auto& [ka, va] : a.c_)
      for (const auto& [kb, vb] : b.c_) r.add_term({ka.first + kb.first, ka.second + kb.second}, va * vb);
    return r;
  }
  Poly2 scaled(const Rational& f) const {
    Poly2 r;
    if (f == 0) return r;
    for (const auto& [k, v] : c_) r.c_[k] = v * f;
    return r;
  }
  friend bool operator==(const Poly2& a, const Poly2& b) { return a.c_ == b.c_; }

  /// Smallest (deg_s, deg_t) over all terms, i.e. the largest monomial factor.
  Key min_degrees() const {
    if (c_.empty()) return {0, 0};
    Key m{c_.begin()->first};
    for (const auto& [k, v] : c_) m = {std::min(m.first, k.first), std::min(m.second, k.second)};
    return m;
  }
  Poly2 shifted_down(const Key& by) const {
    Poly2 r;
    for (const auto& [k, v] : c_) r.c_[{k.first - by.first, k.second - by.second}] = v;
    return r;
  }

  Poly2 d_ds() const {
    Poly2 r;
    for (const auto& [k, v] : c_)
      if (k.first > 0) r.add_term({k.first - 1, k.second}, v * k.first);
    return r;
  }

  /// Positive rational c with (*this)/c having coprime integer coefficients.
  Rational content() const {
    if (c_.empty()) return 1;
    Integer g = 0, l = 1;
    for (const auto& [k, v] : c_) {
      g = boost::multiprecision::gcd(g, boost::multiprecision::numerator(v));
      l = boost::multiprecision::lcm(l, boost::multiprecision::denominator(v));
    }
    if (g < 0) g = -g;
    return Rational(g, l);
  }

  Rational eval(const Rational& s, const Rational& t) const {
    Rational r = 0;
    for (const auto& [k, v] : c_) r += v * pow_q(s, k.first) * pow_q(t, k.second);
    return r;
  }
  double eval(double s, double t) const {
    double r = 0;
    for (const auto& [k, v] : c_) r += v.convert_to<double>() * std::pow(s, k.first) * std::pow(t, k.second);
    return r;
  }

  std::string str() const {
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
      const auto& [k, v] = *it;
      if (!first) os << (v < 0 ? " - " : " + ");
      else if (v < 0) os << "-";
      first = false;
      const Rational a = v < 0 ? Rational(-v) : v;
      const bool bare = k.first == 0 && k.second == 0;
      if (a != 1 || bare) os << a << (bare ? "" : "*");
      if (k.first > 0) os << "s" << (k.first > 1 ? "^" + std::to_string(k.first) : "");
      if (k.first > 0 && k.second > 0) os << "*";
      if (k.second > 0) os << "t" << (k.second > 1 ? "^" + std::to_string(k.second) : "");
    }
    return os.str();
  }

 private:
  static Rational pow_q(const Rational& x, int e) {
    Rational r = 1;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
  }
  void add_term(const Key& k, const Rational& v) {
    if (v == 0) return;
    auto [it, inserted] = c_.emplace(k, v);
    if (!inserted) {
      it->second += v;
      if (it->second == 0) c_.erase(it);
    }
  }
  std::map<Key, Rational> c_;
};

/// num / den with den != 0, normalized so that den has coprime integer
/// coefficients and a positive leading coefficient.
class RatFunc {
 public:
  RatFunc() : num_(), den_(1) {}
  RatFunc(Poly2 num) : num_(std::move(num)), den_(1) { normalize(); }  // NOLINT(google-explicit-constructor)
  RatFunc(const Rational& c) : RatFunc(Poly2(c)) {}                    // NOLINT(google-explicit-constructor)
  RatFunc(long c) : RatFunc(Poly2(c)) {}                               // NOLINT(google-explicit-constructor)
  RatFunc(Poly2 num, Poly2 den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw ArithmeticError("zero denominator");
    normalize();
  }
  static RatFunc s() { return RatFunc(Poly2::s()); }
  static RatFunc t() { return RatFunc(Poly2::t()); }

  const Poly2& num() const { return num_; }
  const Poly2& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }

  friend RatFunc operator+(const RatFunc& a, const RatFunc& b) {
    if (a.den_ == b.den_) return RatFunc(a.num_ + b.num_, a.den_);
    return RatFunc(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend RatFunc operator-(const RatFunc& a, const RatFunc& b) {
    if (a.den_ == b.den_) return RatFunc(a.num_ - b.num_, a.den_);
    return RatFunc(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend RatFunc operator-(const RatFunc& a) { return RatFunc(-a.num_, a.den_); }
  friend RatFunc operator*(const RatFunc& a, const RatFunc& b) {
    return RatFunc(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend RatFunc operator/(const RatFunc& a, const RatFunc& b) {
    if (b.is_zero()) throw ArithmeticError("division by the zero rational function");
    return RatFunc(a.num_ * b.den_, a.den_ * b.num_);
  }
  /// Equality by cross-multiplication.
  friend bool operator==(const RatFunc& a, const RatFunc& b) { return a.num_ * b.den_ == b.num_ * a.den_; }

  /// Quotient-rule derivative in s at fixed t.
  RatFunc d_ds() const { return RatFunc(num_.d_ds() * den_ - num_ * den_.d_ds(), den_ * den_); }

  Rational eval(const Rational& s, const Rational& t) const {
    const Rational d = den_.eval(s, t);
    if (d == 0) throw ArithmeticError("denominator vanishes at evaluation point");
    return num_.eval(s, t) / d;
  }
  /// Exact evaluation at the rational values of s and t, rounded once.
  double eval(double s, double t) const { return eval(Rational(s), Rational(t)).convert_to<double>(); }

  std::string str() const { return "(" + num_.str() + ")/(" + den_.str() + ")"; }

 private:
  void normalize() {
    if (num_.is_zero()) {
      den_ = Poly2(1);
      return;
    }
    const auto mn = num_.min_degrees(), md = den_.min_degrees();
    const Poly2::Key common{std::min(mn.first, md.first), std::min(mn.second, md.second)};
    if (common != Poly2::Key{0, 0}) {
      num_ = num_.shifted_down(common);
      den_ = den_.shifted_down(common);
    }
    const Rational f = (den_.leading() < 0 ? Rational(-1) : Rational(1)) / den_.content();
    den_ = den_.scaled(f);
    num_ = num_.scaled(f);
  }
  Poly2 num_;
  Poly2 den_;
};

inline RatFunc d_ds(const RatFunc& a) { return a.d_ds(); }

/// Generic phi-scalars of a polynomial phi as exact rational functions.
struct PhiRational {
  RatFunc phi, phi1, phi2;
  RatFunc Q, Q1, Q2, Theta, Psi, Delta, Phi;
};

enum class QDenominator { PhiMinusSPhiPrime, PhiMinusSPhi };

/// Builds Q, Theta, Psi, Delta, Phi for phi = sum c_k s^k in dimension n.
/// The mode selects the denominator of Q.
inline PhiRational phi_rational(const std::vector<Rational>& coefficients, int n,
                                QDenominator mode = QDenominator::PhiMinusSPhiPrime) {
  Poly2 p;
  for (std::size_t k = 0; k < coefficients.size(); ++k) p += Poly2::monomial(coefficients[k], static_cast<int>(k), 0);
  const RatFunc s = RatFunc::s(), t = RatFunc::t();
  PhiRational r;
  r.phi = RatFunc(p);
  r.phi1 = RatFunc(p.d_ds());
  r.phi2 = RatFunc(p.d_ds().d_ds());
  const RatFunc den = mode == QDenominator::PhiMinusSPhiPrime ? r.phi - s * r.phi1 : r.phi - s * r.phi;
  r.Q = r.phi1 / den;
  r.Q1 = r.Q.d_ds();
  r.Q2 = r.Q1.d_ds();
  const RatFunc w = t - s * s;
  const RatFunc conv = (r.phi - s * r.phi1) + w * r.phi2;
  r.Theta = (r.phi * r.phi1 - s * (r.phi * r.phi2 + r.phi1 * r.phi1)) / (RatFunc(2) * r.phi * conv);
  r.Psi = r.phi2 / (RatFunc(2) * conv);
  r.Delta = RatFunc(1) + s * r.Q + w * r.Q1;
  r.Phi = -(RatFunc(n) * r.Delta + RatFunc(1) + s * r.Q) * (r.Q - s * r.Q1) - w * (RatFunc(1) + s * r.Q) * r.Q2;
  return r;
}

inline std::vector<Rational> second_matsumoto_coefficients() { return {1, 1, 1, 1}; }

struct IdentityCertificate {
  bool q_ok = false;
  bool theta_ok = false;
  bool psi_ok = false;
  bool all() const { return q_ok && theta_ok && psi_ok; }
};

/// Reduced closed forms of Q, Theta, Psi for phi = 1 + s + s^2 + s^3.
inline PhiRational second_matsumoto_reduced() {
  const Poly2 s = Poly2::s(), t = Poly2::t();
  const Poly2 s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  const Poly2 dd = Poly2(1) - s2.scaled(3) - s3.scaled(8) + t.scaled(2) + (t * s).scaled(6);
  PhiRational r;
  r.Q = RatFunc(-(Poly2(1) + s.scaled(2) + s2.scaled(3)), Poly2(-1) + s2 + s3.scaled(2));
  r.Theta = RatFunc((Poly2(1) - s2.scaled(6) - s3.scaled(12) - s4.scaled(15) - s5.scaled(12)).scaled(Rational(1, 2)),
                    (Poly2(1) + s + s2 + s3) * dd);
  r.Psi = RatFunc(Poly2(1) + s.scaled(3), dd);
  return r;
}

/// Exact comparison of the generic Q, Theta, Psi with their reduced forms for
/// phi = 1 + s + s^2 + s^3.
inline IdentityCertificate verify_matsumoto_reduction(QDenominator mode = QDenominator::PhiMinusSPhiPrime) {
  const PhiRational g = phi_rational(second_matsumoto_coefficients(), 2, mode);
  const PhiRational c = second_matsumoto_reduced();
  IdentityCertificate cert;
  cert.q_ok = g.Q == c.Q;
  cert.theta_ok = g.Theta == c.Theta;
  cert.psi_ok = g.Psi == c.Psi;
  return cert;
}

/// True iff the numerator of Phi is not the zero polynomial.
inline bool phi_nonvanishing_certificate(int n, const std::vector<Rational>& coefficients) {
  if (n < 2) throw ArgumentError("dimension must be at least 2");
  return !phi_rational(coefficients, n).Phi.is_zero();
}

inline bool phi_nonvanishing_certificate(int n) {
  return phi_nonvanishing_certificate(n, second_matsumoto_coefficients());
}

}  // namespace finsler::ratfunc
