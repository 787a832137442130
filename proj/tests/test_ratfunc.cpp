#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <vector>

#include "finsler/alphabeta.hpp"
#include "finsler/ratfunc.hpp"

using namespace finsler;
using namespace finsler::ratfunc;

namespace {

const RatFunc S = RatFunc::s();
const RatFunc T = RatFunc::t();

RatFunc random_ratfunc(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> c(-5, 5), d(0, 3);
  auto poly = [&] {
    Poly2 p;
    for (int k = 0; k < 4; ++k) p += Poly2::monomial(c(rng), d(rng), d(rng));
    return p;
  };
  Poly2 den = poly();
  while (den.is_zero()) den = poly();
  return RatFunc(poly(), den);
}

}  // namespace

TEST(RatFunc, Addition) { EXPECT_EQ(S + T, RatFunc(Poly2::s() + Poly2::t())); }

TEST(RatFunc, DivisionCancelsCommonFactor) {
  const RatFunc q = (S * S - S) / S;
  EXPECT_EQ(q, S - RatFunc(1));
  EXPECT_EQ(q.den(), Poly2(1));
}

TEST(RatFunc, DivisionByZeroThrows) { EXPECT_THROW(S / RatFunc(0), ArithmeticError); }

TEST(RatFunc, Derivatives) {
  EXPECT_EQ((S * S * S).d_ds(), RatFunc(3) * S * S);
  const RatFunc one_minus_s = RatFunc(1) - S;
  EXPECT_EQ((RatFunc(1) / one_minus_s).d_ds(), RatFunc(1) / (one_minus_s * one_minus_s));
  EXPECT_TRUE(T.d_ds().is_zero());
}

TEST(RatFunc, EqualityIsCrossMultiplication) {
  EXPECT_EQ(RatFunc(Poly2::s().scaled(2), Poly2::t().scaled(4)), RatFunc(Poly2::s(), Poly2::t().scaled(2)));
  EXPECT_FALSE(S == T);
}

TEST(RatFunc, ExactEvaluation) {
  const RatFunc f = (S * S + T) / (RatFunc(1) - S);
  EXPECT_EQ(f.eval(Rational(1, 2), Rational(1, 4)), Rational(1));
  EXPECT_DOUBLE_EQ(f.eval(0.5, 0.25), 1.0);
  EXPECT_THROW(f.eval(Rational(1), Rational(0)), ArithmeticError);
}

TEST(RatFunc, ArithmeticIsExact) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const RatFunc a = random_ratfunc(rng), b = random_ratfunc(rng);
    EXPECT_EQ((a + b) - b, a);
    EXPECT_EQ(a * b - b * a, RatFunc(0));
    if (!b.is_zero()) {
      EXPECT_EQ((a * b) / b, a);
    }
  }
}

TEST(Certificate, SecondMatsumotoReductionIsExact) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cert = verify_matsumoto_reduction();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_TRUE(cert.q_ok);
  EXPECT_TRUE(cert.theta_ok);
  EXPECT_TRUE(cert.psi_ok);
  EXPECT_LT(secs, 1.0);
}

TEST(Certificate, PhiMinusSPhiDenominatorIsRejected) {
  EXPECT_FALSE(verify_matsumoto_reduction(QDenominator::PhiMinusSPhi).q_ok);
}

TEST(Certificate, RandersReproducesUnitQ) {
  EXPECT_EQ(phi_rational({1, 1}, 2).Q, RatFunc(1));
}

TEST(Certificate, PhiNonvanishing) {
  EXPECT_TRUE(phi_nonvanishing_certificate(2));
  EXPECT_TRUE(phi_nonvanishing_certificate(3));
  EXPECT_TRUE(phi_nonvanishing_certificate(4));
  EXPECT_FALSE(phi_nonvanishing_certificate(2, {1}));
  EXPECT_THROW(phi_nonvanishing_certificate(1), ArgumentError);
}

TEST(Certificate, ExactValuesMatchFloatingPointScalars) {
  const PhiRational r = phi_rational(second_matsumoto_coefficients(), 3);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ub(0.05, 0.3), u(-1, 1);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  for (int t = 0; t < 500; ++t) {
    const double b = ub(rng), s = b * u(rng), b2 = b * b;
    const auto ps = phi_scalars(PhiFamily::second_approx_matsumoto(), s, b2, 3);
    EXPECT_LE(rel(ps.Q, r.Q.eval(s, b2)), 1e-12);
    EXPECT_LE(rel(ps.Theta, r.Theta.eval(s, b2)), 1e-12);
    EXPECT_LE(rel(ps.Psi, r.Psi.eval(s, b2)), 1e-12);
    EXPECT_LE(rel(ps.Delta, r.Delta.eval(s, b2)), 1e-12);
    EXPECT_LE(rel(ps.Phi, r.Phi.eval(s, b2)), 1e-12);
  }
}
