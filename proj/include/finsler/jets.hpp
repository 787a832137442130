#pragma once

// Truncated multivariate Taylor arithmetic ("jets") over base coordinates x
// and fiber coordinates y. A jet stores the Taylor coefficients
// c_(a,b) = d^(a,b) f / (a! b!) of a scalar field for all multi-indices with
// |a| <= kx and |b| <= ky. Products of such truncations are exact, so every
// partial derivative up to the truncation orders is exact to rounding.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "finsler/errors.hpp"

namespace finsler::jets {

inline constexpr int kMaxOrderX = 2;
inline constexpr int kMaxOrderY = 6;

/// Exponent vectors of a mixed partial derivative: x[i] = number of d/dx^i,
/// y[i] = number of d/dy^i.
struct MultiIndex {
  std::vector<int> x;
  std::vector<int> y;

  /// Builds the multi-index of d/dx^{xv...} d/dy^{yv...}; variable order is
  /// irrelevant, so permuted variable lists give the same index.
  static MultiIndex from_vars(int nx, int ny, std::span<const int> xv, std::span<const int> yv) {
    MultiIndex m{std::vector<int>(nx, 0), std::vector<int>(ny, 0)};
    for (int v : xv) {
      if (v < 0 || v >= nx) throw ArgumentError("x variable index out of range");
      ++m.x[v];
    }
    for (int v : yv) {
      if (v < 0 || v >= ny) throw ArgumentError("y variable index out of range");
      ++m.y[v];
    }
    return m;
  }
  int order_x() const { return std::accumulate(x.begin(), x.end(), 0); }
  int order_y() const { return std::accumulate(y.begin(), y.end(), 0); }

  std::string str() const {
    std::ostringstream os;
    os << "(x:";
    for (int e : x) os << ' ' << e;
    os << "; y:";
    for (int e : y) os << ' ' << e;
    os << ')';
    return os.str();
  }
};

namespace detail {

// Monomials of degree <= k in nvars variables, graded order.
struct MonomialSet {
  int nvars = 0;
  int k = 0;
  std::vector<std::vector<int>> exps;
  std::vector<int> degree;
  std::map<std::vector<int>, int> index;
  // pairs[i] = (j, i*j) for every j with deg(i*j) <= k, sorted by deg(i*j).
  std::vector<std::vector<std::pair<int, int>>> pairs;
  // shift[v][i] = index of i + e_v, or -1.
  std::vector<std::vector<int>> shift;
  std::vector<double> factorial_weight;

  MonomialSet(int nv, int kk) : nvars(nv), k(kk) {
    std::vector<int> e(nv, 0);
    for (int d = 0; d <= k; ++d) enumerate(e, 0, d);
    for (std::size_t i = 0; i < exps.size(); ++i) index.emplace(exps[i], static_cast<int>(i));
    const int m = static_cast<int>(exps.size());
    pairs.resize(m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (degree[i] + degree[j] > k) continue;
        std::vector<int> s(nv);
        for (int v = 0; v < nv; ++v) s[v] = exps[i][v] + exps[j][v];
        pairs[i].emplace_back(j, index.at(s));
      }
      std::stable_sort(pairs[i].begin(), pairs[i].end(),
                       [&](auto a, auto b) { return degree[a.second] < degree[b.second]; });
    }
    shift.assign(nv, std::vector<int>(m, -1));
    for (int v = 0; v < nv; ++v) {
      for (int i = 0; i < m; ++i) {
        auto s = exps[i];
        ++s[v];
        auto it = index.find(s);
        if (it != index.end()) shift[v][i] = it->second;
      }
    }
    factorial_weight.resize(m);
    for (int i = 0; i < m; ++i) {
      double w = 1.0;
      for (int v = 0; v < nv; ++v)
        for (int q = 2; q <= exps[i][v]; ++q) w *= q;
      factorial_weight[i] = w;
    }
  }

 private:
  void enumerate(std::vector<int>& e, int var, int remaining) {
    if (var == nvars - 1 || nvars == 0) {
      if (nvars == 0) {
        if (remaining == 0) {
          exps.push_back(e);
          degree.push_back(0);
        }
        return;
      }
      e[var] = remaining;
      exps.push_back(e);
      degree.push_back(std::accumulate(e.begin(), e.end(), 0));
      e[var] = 0;
      return;
    }
    for (int p = remaining; p >= 0; --p) {
      e[var] = p;
      enumerate(e, var + 1, remaining - p);
    }
    e[var] = 0;
  }
};

}  // namespace detail

/// Shared, immutable indexing structure of all jets with the same variable
/// counts and truncation orders.
class Layout {
 public:
  static std::shared_ptr<const Layout> get(int nx, int ny, int kx, int ky) {
    if (nx < 0 || ny < 0) throw ArgumentError("negative variable count");
    if (kx < 0 || kx > kMaxOrderX || ky < 0 || ky > kMaxOrderY)
      throw ArgumentError("jet order out of supported range (x <= " + std::to_string(kMaxOrderX) +
                          ", y <= " + std::to_string(kMaxOrderY) + ")");
    static std::mutex mu;
    static std::map<std::tuple<int, int, int, int>, std::shared_ptr<const Layout>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(nx, ny, kx, ky);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto layout = std::shared_ptr<const Layout>(new Layout(nx, ny, kx, ky));
    cache.emplace(key, layout);
    return layout;
  }

  int nx() const { return xs_.nvars; }
  int ny() const { return ys_.nvars; }
  int kx() const { return xs_.k; }
  int ky() const { return ys_.k; }
  int size() const { return nxm_ * nym_; }
  int x_monomials() const { return nxm_; }
  int y_monomials() const { return nym_; }

  int index(const MultiIndex& m) const {
    auto ix = xs_.index.find(m.x);
    auto iy = ys_.index.find(m.y);
    if (ix == xs_.index.end() || iy == ys_.index.end()) return -1;
    return ix->second * nym_ + iy->second;
  }
  MultiIndex multi_index(int i) const { return {xs_.exps[i / nym_], ys_.exps[i % nym_]}; }
  int xdeg(int i) const { return xs_.degree[i / nym_]; }
  int ydeg(int i) const { return ys_.degree[i % nym_]; }
  double factorial_weight(int i) const {
    return xs_.factorial_weight[i / nym_] * ys_.factorial_weight[i % nym_];
  }

  const detail::MonomialSet& xset() const { return xs_; }
  const detail::MonomialSet& yset() const { return ys_; }

 private:
  Layout(int nx, int ny, int kx, int ky)
      : xs_(nx, kx), ys_(ny, ky),
        nxm_(static_cast<int>(xs_.exps.size())),
        nym_(static_cast<int>(ys_.exps.size())) {}

  detail::MonomialSet xs_;
  detail::MonomialSet ys_;
  int nxm_;
  int nym_;
};

using LayoutPtr = std::shared_ptr<const Layout>;

/// A truncated Taylor expansion. Coefficients are exact up to the validity
/// orders (ox, oy), which shrink under differentiation.
class Jet {
 public:
  Jet() = default;
  Jet(LayoutPtr layout, double value)
      : layout_(std::move(layout)), c_(layout_->size(), 0.0), ox_(layout_->kx()), oy_(layout_->ky()) {
    c_[0] = value;
  }

  /// The coordinate function x^var (is_y = false) or y^var (is_y = true)
  /// expanded at the given value.
  static Jet variable(LayoutPtr layout, bool is_y, int var, double value) {
    Jet j(layout, value);
    const int nv = is_y ? layout->ny() : layout->nx();
    if (var < 0 || var >= nv) throw ArgumentError("jet variable index out of range");
    MultiIndex m{std::vector<int>(layout->nx(), 0), std::vector<int>(layout->ny(), 0)};
    (is_y ? m.y : m.x)[var] = 1;
    const int idx = layout->index(m);
    if (idx >= 0) j.c_[idx] = 1.0;
    return j;
  }

  const LayoutPtr& layout() const { return layout_; }
  double value() const { return c_[0]; }
  int valid_x() const { return ox_; }
  int valid_y() const { return oy_; }
  std::span<const double> coefficients() const { return c_; }

  /// d^m f at the expansion point.
  double partial(const MultiIndex& m) const {
    if (m.order_x() > ox_ || m.order_y() > oy_)
      throw ArgumentError("requested partial " + m.str() + " exceeds jet validity");
    const int i = layout_->index(m);
    if (i < 0) throw ArgumentError("multi-index " + m.str() + " not in layout");
    return c_[i] * layout_->factorial_weight(i);
  }
  double partial(std::initializer_list<int> xv, std::initializer_list<int> yv) const {
    return partial(MultiIndex::from_vars(layout_->nx(), layout_->ny(),
                                         std::span<const int>(xv.begin(), xv.size()),
                                         std::span<const int>(yv.begin(), yv.size())));
  }
  double dy(int i) const { return partial({}, {i}); }
  double dx(int i) const { return partial({i}, {}); }

  /// Jet of the partial derivative d/dx^var or d/dy^var.
  Jet derivative(bool is_y, int var) const {
    Jet r = zero_like();
    const auto& set = is_y ? layout_->yset() : layout_->xset();
    if (var < 0 || var >= set.nvars) throw ArgumentError("derivative variable out of range");
    const int nym = layout_->y_monomials();
    for (int ix = 0; ix < layout_->x_monomials(); ++ix) {
      for (int iy = 0; iy < nym; ++iy) {
        const int src_local = is_y ? set.shift[var][iy] : set.shift[var][ix];
        if (src_local < 0) continue;
        const int src = is_y ? ix * nym + src_local : src_local * nym + iy;
        r.c_[ix * nym + iy] = set.exps[src_local][var] * c_[src];
      }
    }
    if (is_y) {
      r.oy_ = oy_ - 1;
    } else {
      r.ox_ = ox_ - 1;
    }
    if (r.ox_ < 0 || r.oy_ < 0) throw ArgumentError("differentiated past jet validity");
    return r;
  }
  Jet dy_jet(int var) const { return derivative(true, var); }
  Jet dx_jet(int var) const { return derivative(false, var); }

  Jet& operator+=(const Jet& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    ox_ = std::min(ox_, o.ox_);
    oy_ = std::min(oy_, o.oy_);
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    ox_ = std::min(ox_, o.ox_);
    oy_ = std::min(oy_, o.oy_);
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    *this = *this * o;
    return *this;
  }
  Jet& operator/=(const Jet& o) {
    *this = *this / o;
    return *this;
  }
  Jet& operator+=(double v) {
    c_[0] += v;
    return *this;
  }
  Jet& operator-=(double v) {
    c_[0] -= v;
    return *this;
  }
  Jet& operator*=(double v) {
    for (double& x : c_) x *= v;
    return *this;
  }
  Jet& operator/=(double v) {
    if (v == 0.0) throw EvaluationError("division by zero");
    for (double& x : c_) x /= v;
    return *this;
  }

  friend Jet operator-(Jet a) {
    for (double& x : a.c_) x = -x;
    return a;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double b) { return a += b; }
  friend Jet operator+(double a, Jet b) { return b += a; }
  friend Jet operator-(Jet a, double b) { return a -= b; }
  friend Jet operator-(double a, Jet b) { return (-b) += a; }
  friend Jet operator*(Jet a, double b) { return a *= b; }
  friend Jet operator*(double a, Jet b) { return b *= a; }
  friend Jet operator/(Jet a, double b) { return a /= b; }
  friend Jet operator/(double a, const Jet& b) { return reciprocal(b) *= a; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    a.check_compatible(b);
    Jet r = a.zero_like();
    r.ox_ = std::min(a.ox_, b.ox_);
    r.oy_ = std::min(a.oy_, b.oy_);
    const auto& xs = a.layout_->xset();
    const auto& ys = a.layout_->yset();
    const int nym = a.layout_->y_monomials();
    const double* ca = a.c_.data();
    const double* cb = b.c_.data();
    double* cr = r.c_.data();
    for (int ixa = 0; ixa < a.layout_->x_monomials(); ++ixa) {
      for (auto [ixb, ixc] : xs.pairs[ixa]) {
        if (xs.degree[ixc] > r.ox_) break;
        for (int iya = 0; iya < nym; ++iya) {
          const double va = ca[ixa * nym + iya];
          if (va == 0.0) continue;
          const double* rowb = cb + ixb * nym;
          double* rowr = cr + ixc * nym;
          for (auto [iyb, iyc] : ys.pairs[iya]) {
            if (ys.degree[iyc] > r.oy_) break;
            rowr[iyc] += va * rowb[iyb];
          }
        }
      }
    }
    return r;
  }
  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

  /// f(u) for a univariate f given its Taylor coefficients f^(k)(u0)/k! at u0.
  Jet compose(std::span<const double> taylor) const {
    const int order = ox_ + oy_;
    Jet h = *this;
    h.c_[0] = 0.0;
    Jet r = zero_like();
    r.ox_ = ox_;
    r.oy_ = oy_;
    const int top = std::min<int>(order, static_cast<int>(taylor.size()) - 1);
    r.c_[0] = taylor[top];
    for (int k = top - 1; k >= 0; --k) {
      r = r * h;
      r.c_[0] += taylor[k];
    }
    return r;
  }

  bool higher_terms_zero() const {
    return std::all_of(c_.begin() + 1, c_.end(), [](double v) { return v == 0.0; });
  }

  /// Throws EvaluationError naming the first non-finite coefficient.
  void check_finite() const {
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (!std::isfinite(c_[i]))
        throw EvaluationError("non-finite jet coefficient at multi-index " +
                              layout_->multi_index(static_cast<int>(i)).str());
    }
  }

  friend Jet reciprocal(const Jet& b) {
    const double u0 = b.value();
    if (u0 == 0.0 || !std::isfinite(u0)) throw EvaluationError("division by zero");
    std::vector<double> t(b.ox_ + b.oy_ + 1);
    double p = 1.0 / u0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      t[k] = (k % 2 == 0 ? p : -p);
      p /= u0;
    }
    return b.compose(t);
  }

  friend Jet sqrt(const Jet& u) {
    const double u0 = u.value();
    if (u0 < 0.0 || !std::isfinite(u0)) throw EvaluationError("sqrt of negative value");
    if (u0 == 0.0) {
      if (!u.higher_terms_zero()) throw EvaluationError("sqrt is not differentiable at zero");
      return u;
    }
    return pow(u, 0.5);
  }

  friend Jet pow(const Jet& u, double p) {
    const double u0 = u.value();
    const bool integral = std::floor(p) == p;
    if (integral && std::abs(p) < 64) return pow(u, static_cast<int>(p));
    if (u0 <= 0.0) throw EvaluationError("non-integer power of non-positive value");
    std::vector<double> t(u.ox_ + u.oy_ + 1);
    double coef = 1.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      t[k] = coef * std::pow(u0, p - static_cast<double>(k));
      coef *= (p - static_cast<double>(k)) / static_cast<double>(k + 1);
    }
    return u.compose(t);
  }

  friend Jet pow(const Jet& u, int p) {
    if (p < 0) return reciprocal(pow(u, -p));
    Jet r(u.layout_, 1.0);
    r.ox_ = u.ox_;
    r.oy_ = u.oy_;
    Jet base = u;
    while (p > 0) {
      if (p & 1) r = r * base;
      p >>= 1;
      if (p) base = base * base;
    }
    return r;
  }

  friend Jet exp(const Jet& u) {
    std::vector<double> t(u.ox_ + u.oy_ + 1);
    double e = std::exp(u.value());
    for (std::size_t k = 0; k < t.size(); ++k) {
      t[k] = e;
      e /= static_cast<double>(k + 1);
    }
    return u.compose(t);
  }

  friend Jet log(const Jet& u) {
    const double u0 = u.value();
    if (u0 <= 0.0) throw EvaluationError("log of non-positive value");
    std::vector<double> t(u.ox_ + u.oy_ + 1);
    t[0] = std::log(u0);
    double p = 1.0 / u0;
    for (std::size_t k = 1; k < t.size(); ++k) {
      t[k] = (k % 2 == 1 ? p : -p) / static_cast<double>(k);
      p /= u0;
    }
    return u.compose(t);
  }

  friend Jet sin(const Jet& u) { return u.trig(0); }
  friend Jet cos(const Jet& u) { return u.trig(1); }

 private:
  Jet zero_like() const {
    Jet r;
    r.layout_ = layout_;
    r.c_.assign(c_.size(), 0.0);
    r.ox_ = ox_;
    r.oy_ = oy_;
    return r;
  }
  void check_compatible(const Jet& o) const {
    if (layout_ != o.layout_) throw ArgumentError("jets with different layouts combined");
  }
  // shift 0: sin, 1: cos (cos(u) = sin(u + pi/2)).
  Jet trig(int shift) const {
    const double s = std::sin(value()), c = std::cos(value());
    const double cyc[4] = {s, c, -s, -c};
    std::vector<double> t(ox_ + oy_ + 1);
    double fact = 1.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (k > 0) fact *= static_cast<double>(k);
      t[k] = cyc[(k + shift) % 4] / fact;
    }
    return compose(t);
  }

  LayoutPtr layout_;
  std::vector<double> c_;
  int ox_ = 0;
  int oy_ = 0;
};

// Scalar helpers shared by generic code that runs on double, long double and Jet.
template <std::floating_point T>
inline T lift(const T&, double v) {
  return static_cast<T>(v);
}
inline Jet lift(const Jet& like, double v) { return Jet(like.layout(), v); }

template <std::floating_point T>
inline double value_of(const T& v) {
  return static_cast<double>(v);
}
inline double value_of(const Jet& v) { return v.value(); }

/// Expands f at (x, y) to the given truncation orders.
template <typename Field>
Jet jet_eval(Field&& f, std::span<const double> x, std::span<const double> y, int order_x,
             int order_y) {
  auto layout = Layout::get(static_cast<int>(x.size()), static_cast<int>(y.size()), order_x, order_y);
  std::vector<Jet> xj, yj;
  xj.reserve(x.size());
  yj.reserve(y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    xj.push_back(Jet::variable(layout, false, static_cast<int>(i), x[i]));
  for (std::size_t i = 0; i < y.size(); ++i)
    yj.push_back(Jet::variable(layout, true, static_cast<int>(i), y[i]));
  Jet r = f(std::span<const Jet>(xj), std::span<const Jet>(yj));
  r.check_finite();
  return r;
}

namespace detail {

template <typename Field>
long double nested_central(Field& f, std::vector<long double>& x, std::vector<long double>& y,
                           const std::vector<std::pair<bool, int>>& ops, std::size_t k,
                           long double h) {
  if (k == ops.size()) {
    return static_cast<long double>(
        f(std::span<const long double>(x), std::span<const long double>(y)));
  }
  auto [is_y, var] = ops[k];
  long double& slot = is_y ? y[var] : x[var];
  const long double saved = slot;
  slot = saved + h;
  const long double fp = nested_central(f, x, y, ops, k + 1, h);
  slot = saved - h;
  const long double fm = nested_central(f, x, y, ops, k + 1, h);
  slot = saved;
  return (fp - fm) / (2 * h);
}

}  // namespace detail

/// |jet partial - central-difference estimate| with one Richardson step.
/// The field is evaluated in long double to keep the difference quotient's
/// cancellation error small.
template <typename Field>
double fd_cross_check(Field&& f, std::span<const double> x, std::span<const double> y,
                      const MultiIndex& index, double h) {
  if (!(h > 0.0)) throw ArgumentError("finite-difference step must be positive");
  if (static_cast<std::size_t>(index.x.size()) != x.size() ||
      static_cast<std::size_t>(index.y.size()) != y.size())
    throw ArgumentError("multi-index dimension mismatch");
  const int ox = index.order_x(), oy = index.order_y();
  if (ox > kMaxOrderX || oy > kMaxOrderY) throw ArgumentError("multi-index beyond supported orders");
  const double exact = jet_eval(f, x, y, ox, oy).partial(index);

  std::vector<std::pair<bool, int>> ops;
  for (std::size_t i = 0; i < index.x.size(); ++i)
    for (int k = 0; k < index.x[i]; ++k) ops.emplace_back(false, static_cast<int>(i));
  for (std::size_t i = 0; i < index.y.size(); ++i)
    for (int k = 0; k < index.y[i]; ++k) ops.emplace_back(true, static_cast<int>(i));
  std::vector<long double> xl(x.begin(), x.end()), yl(y.begin(), y.end());
  const long double coarse = detail::nested_central(f, xl, yl, ops, 0, static_cast<long double>(h));
  const long double fine = detail::nested_central(f, xl, yl, ops, 0, static_cast<long double>(h) / 2);
  const long double richardson = (4 * fine - coarse) / 3;
  return static_cast<double>(std::fabs(static_cast<long double>(exact) - richardson));
}

}  // namespace finsler::jets
