#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/jets.hpp"

using namespace finsler;
using namespace finsler::jets;

namespace {

const std::vector<double> kX{0.3, -0.7};
const std::vector<double> kY{1.1, 0.4};

template <typename F>
Jet expand(F&& f, int ox = 2, int oy = 4) {
  return jet_eval(f, kX, kY, ox, oy);
}

}  // namespace

TEST(Jets, SumOfSquaresHasConstantSecondDerivative) {
  auto f = [](auto, auto y) { return y[0] * y[0] + y[1] * y[1]; };
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> x{u(rng), u(rng)}, y{u(rng), u(rng)};
    EXPECT_DOUBLE_EQ(jet_eval(f, x, y, 0, 2).partial({}, {0, 0}), 2.0);
  }
}

TEST(Jets, ConstantHasVanishingPartials) {
  auto f = [](auto x, auto) { return lift(x[0], 7.0); };
  const Jet j = expand(f);
  EXPECT_EQ(j.value(), 7.0);
  for (double c : j.coefficients().subspan(1)) EXPECT_EQ(c, 0.0);
}

TEST(Jets, MixedThirdPartial) {
  auto f = [](auto x, auto y) { return x[0] * y[0] * y[1]; };
  EXPECT_DOUBLE_EQ(expand(f).partial({0}, {0, 1}), 1.0);
}

TEST(Jets, PolynomialCoefficientsAreExact) {
  // f = 3 x1^2 y1 y2^2 + x2 y1^4 - 2 x1 x2 y2 + 5
  auto f = [](auto x, auto y) {
    return 3.0 * x[0] * x[0] * y[0] * y[1] * y[1] + x[1] * y[0] * y[0] * y[0] * y[0] - 2.0 * x[0] * x[1] * y[1] +
           lift(x[0], 5.0);
  };
  const Jet j = expand(f);
  const double x1 = kX[0], x2 = kX[1], y1 = kY[0], y2 = kY[1];
  auto near = [](double got, double want) { EXPECT_NEAR(got, want, 1e-12 * (1 + std::abs(want))); };
  near(j.value(), 3 * x1 * x1 * y1 * y2 * y2 + x2 * std::pow(y1, 4) - 2 * x1 * x2 * y2 + 5);
  near(j.partial({0, 0}, {1, 1}), 6 * 2 * y1);
  near(j.partial({0}, {0, 1, 1}), 6 * 2 * x1);
  near(j.partial({1}, {0, 0, 0, 0}), 24);
  near(j.partial({}, {0, 0, 0, 0}), 24 * x2);
  near(j.partial({0, 1}, {1}), -2);
  near(j.partial({0, 0}, {0, 1, 1}), 12);
  near(j.partial({}, {0, 0, 1, 1}), 0);
}

TEST(Jets, PermutedIndicesGiveTheSameValue) {
  auto f = [](auto x, auto y) { return sin(x[0] * y[1]) * exp(x[1] + y[0] * y[1]); };
  const Jet j = expand(f);
  EXPECT_EQ(j.partial({0, 1}, {0, 1, 1}), j.partial({1, 0}, {1, 0, 1}));
  EXPECT_EQ(j.partial({1, 0}, {1, 1, 0}), j.partial({0, 1}, {0, 1, 1}));
}

TEST(Jets, ElementaryFunctionsMatchAnalyticDerivatives) {
  auto f = [](auto, auto y) { return exp(y[0]) * cos(y[1]) + sqrt(y[0] * y[0] + y[1] * y[1]) + log(y[0]); };
  const Jet j = expand(f, 0, 4);
  const double a = kY[0], b = kY[1], r = std::hypot(a, b);
  EXPECT_NEAR(j.dy(0), std::exp(a) * std::cos(b) + a / r + 1 / a, 1e-13);
  EXPECT_NEAR(j.partial({}, {1, 1}), -std::exp(a) * std::cos(b) + a * a / (r * r * r), 1e-13);
  EXPECT_NEAR(j.partial({}, {0, 0, 0}), std::exp(a) * std::cos(b) - 3 * a * b * b / std::pow(r, 5) + 2 / (a * a * a),
              1e-12);
}

TEST(Jets, DerivativeJetShiftsCoefficients) {
  auto f = [](auto x, auto y) { return x[0] * x[1] * y[0] * y[0] * y[1]; };
  const Jet j = expand(f);
  const Jet d = j.dy_jet(0);
  EXPECT_EQ(d.valid_y(), 3);
  EXPECT_NEAR(d.value(), 2 * kX[0] * kX[1] * kY[0] * kY[1], 1e-15);
  EXPECT_NEAR(d.partial({0}, {1}), 2 * kX[1] * kY[0], 1e-15);
}

TEST(Jets, DivisionByZeroRaisesEvaluationError) {
  auto f = [](auto x, auto y) { return y[0] / (x[0] - x[0]); };
  EXPECT_THROW(expand(f), EvaluationError);
  auto g = [](auto, auto y) { return sqrt(y[0] - kY[0]); };
  EXPECT_THROW(expand(g), EvaluationError);
}

TEST(Jets, NonFiniteValueNamesTheMultiIndex) {
  auto f = [](auto, auto y) { return y[0] * std::numeric_limits<double>::infinity(); };
  try {
    expand(f);
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_NE(std::string(e.what()).find("(x:"), std::string::npos) << e.what();
  }
}

TEST(Jets, OrderBeyondValidityIsRejected) {
  auto f = [](auto, auto y) { return y[0] * y[1]; };
  const Jet j = jet_eval(f, kX, kY, 1, 2);
  EXPECT_THROW(j.partial({}, {0, 0, 0}), ArgumentError);
  EXPECT_THROW(j.partial({0, 1}, {}), ArgumentError);
}

TEST(Jets, FiniteDifferenceOnPolynomial) {
  auto f = [](auto x, auto y) { return x[0] * x[0] * y[0] * y[1] * y[1] - 3.0 * x[1] * y[0] * y[0]; };
  for (const auto& [xv, yv] : std::vector<std::pair<std::vector<int>, std::vector<int>>>{
           {{}, {0}}, {{0}, {1}}, {{0, 0}, {0, 1}}, {{1}, {0, 0}}, {{}, {0, 1, 1}}}) {
    const auto mi = MultiIndex::from_vars(2, 2, xv, yv);
    // Fourth-order nested differences: roundoff grows like eps / h^4.
    EXPECT_LE(fd_cross_check(f, kX, kY, mi, 2e-2), 1e-9) << mi.str();
  }
}

TEST(Jets, FiniteDifferenceOfSineAtZero) {
  auto f = [](auto, auto y) {
    using std::sin;
    return sin(y[0]);
  };
  const std::vector<double> x{0.0}, y{0.0};
  EXPECT_DOUBLE_EQ(jet_eval(f, x, y, 0, 1).dy(0), 1.0);
  EXPECT_LE(fd_cross_check(f, x, y, MultiIndex::from_vars(1, 1, std::vector<int>{}, std::vector<int>{0}), 1e-3), 1e-8);
}

TEST(Jets, ZeroStepIsRejected) {
  auto f = [](auto, auto y) { return y[0]; };
  EXPECT_THROW(fd_cross_check(f, kX, kY, MultiIndex::from_vars(2, 2, std::vector<int>{}, std::vector<int>{0}), 0.0),
               ArgumentError);
}

TEST(Jets, FiniteDifferenceOnRandomSmoothFields) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  std::uniform_int_distribution<int> var(0, 1), ny(0, 3), nx(0, 1);
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    const double a = u(rng), b = u(rng), c = u(rng);
    auto f = [a, b, c](auto x, auto y) {
      using std::cos, std::exp, std::sin, std::sqrt;
      return exp(a * x[0] + b * y[1]) * cos(c * y[0] + x[1]) + sqrt(1.0 + y[0] * y[0] + y[1] * y[1]) * sin(x[0] * y[1]);
    };
    std::vector<double> x{u(rng), u(rng)}, y{u(rng), u(rng)};
    std::vector<int> xv, yv;
    for (int k = nx(rng); k > 0; --k) xv.push_back(var(rng));
    for (int k = ny(rng); k > 0; --k) yv.push_back(var(rng));
    const auto mi = MultiIndex::from_vars(2, 2, xv, yv);
    const double value = jet_eval(f, x, y, mi.order_x(), mi.order_y()).partial(mi);
    const double h = xv.size() + yv.size() >= 3 ? 2e-2 : 1e-3;
    EXPECT_LE(fd_cross_check(f, x, y, mi, h), 1e-6 * (1 + std::abs(value))) << mi.str();
    ++checked;
  }
  EXPECT_EQ(checked, 60);
}
