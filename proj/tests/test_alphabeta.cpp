#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "finsler/alphabeta.hpp"
#include "finsler/geometry.hpp"
#include "support.hpp"

using namespace finsler;
using namespace finsler::testing;

namespace {

const std::vector<PhiFamily> kFamilies{PhiFamily::randers(), PhiFamily::approx_matsumoto(2),
                                       PhiFamily::second_approx_matsumoto()};

/// Random regular (s, b^2) with b in [0.05, 0.3] and |s| <= b.
std::pair<double, double> random_sb(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ub(0.05, 0.3), u(-1, 1);
  const double b = ub(rng);
  return {b * u(rng), b * b};
}

}  // namespace

TEST(CovariantBeta, ConstantDataVanishes) {
  const auto m = parallel(3, PhiFamily::second_approx_matsumoto());
  const auto c = covariant_beta_data(m, make_point(m, std::vector<double>{0.3, 0.1, -0.2}, std::vector<double>{1, 2, 3}));
  EXPECT_EQ(c.b_cov.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(c.r00, 0.0);
  EXPECT_EQ(c.s0, 0.0);
  EXPECT_EQ(c.r0, 0.0);
  EXPECT_EQ(c.s_j.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(c.G_alpha.cwiseAbs().maxCoeff(), 0.0);
}

TEST(CovariantBeta, ShearOnFlatAlpha) {
  const auto m = shear(PhiFamily::second_approx_matsumoto(), 1.0);
  const auto c = covariant_beta_data(m, make_point(m, std::vector<double>{0.1, 0}, std::vector<double>{1, 1}));
  EXPECT_DOUBLE_EQ(c.b_cov(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(c.b_cov(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(c.r(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(c.r(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(c.s(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(c.s(0, 1), -0.5);
  EXPECT_DOUBLE_EQ(c.r00, 1.0);
}

TEST(CovariantBeta, SymmetricPlusAntisymmetricIsTheDerivative) {
  std::mt19937_64 rng(1);
  const auto m = generic(3, PhiFamily::second_approx_matsumoto());
  for (int t = 0; t < 20; ++t) {
    const auto c = covariant_beta_data(m, make_point(m, uniform_vec(rng, 3, -0.3, 0.3), random_direction(rng, 3)));
    EXPECT_LE((c.r + c.s - c.b_cov).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((c.r - c.r.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((c.s + c.s.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(CovariantBeta, ChristoffelMatchesSphereSymbols) {
  // a = e^{2u} delta with u = -log(1 + |x|^2/4): Gamma^k_ij = d_i u d^k_j + d_j u d^k_i - d^k u d_ij.
  const auto m = sphere();
  const std::vector<double> x{0.4, -0.7};
  const FrameAt fr = m.frame(x);
  const Tensor3 G = christoffel(m, x, fr.a_inv);
  const double w = 1 + (x[0] * x[0] + x[1] * x[1]) / 4;
  const double du[2] = {-x[0] / (2 * w), -x[1] / (2 * w)};
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double want = du[i] * (k == j) + du[j] * (k == i) - du[k] * (i == j);
        EXPECT_NEAR(G(k, i, j), want, 1e-14);
      }
}

TEST(PhiScalars, RandersHasUnitQ) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const auto [s, b2] = random_sb(rng);
    const auto ps = phi_scalars(PhiFamily::randers(), s, b2, 2);
    EXPECT_NEAR(ps.Q, 1.0, 1e-15);
    EXPECT_NEAR(ps.Q1, 0.0, 1e-15);
  }
}

TEST(PhiScalars, SecondMatsumotoAtZero) {
  for (double b2 : {0.01, 0.04, 0.09}) {
    const auto ps = phi_scalars(PhiFamily::second_approx_matsumoto(), 0.0, b2, 3);
    EXPECT_NEAR(ps.Q, 1.0, 1e-15);
    EXPECT_NEAR(ps.Q1, 2.0, 1e-14);
    EXPECT_NEAR(ps.Theta, 1.0 / (2 * (1 + 2 * b2)), 1e-15);
    EXPECT_NEAR(ps.Psi, 1.0 / (1 + 2 * b2), 1e-15);
    EXPECT_NEAR(ps.Delta, 1.0 + 2 * b2, 1e-15);
    const auto r = second_matsumoto_scalars(0.0, b2);
    EXPECT_DOUBLE_EQ(r.Q, 1.0);
    EXPECT_DOUBLE_EQ(r.Theta, 1.0 / (2 * (1 + 2 * b2)));
    EXPECT_DOUBLE_EQ(r.Psi, 1.0 / (1 + 2 * b2));
  }
}

TEST(PhiScalars, DefinitionalIdentitiesHold) {
  std::mt19937_64 rng(3);
  for (const auto& phi : kFamilies)
    for (int t = 0; t < 100; ++t) {
      const auto [s, b2] = random_sb(rng);
      const auto ps = phi_scalars(phi, s, b2, 3);
      EXPECT_NEAR(ps.Delta, 1 + s * ps.Q + (b2 - s * s) * ps.Q1, 1e-12);
      EXPECT_NEAR(ps.theta, (ps.Q - s * ps.Q1) / (2 * ps.Delta), 1e-12);
      EXPECT_NEAR(ps.Psi2, 2 * 4 * (ps.Q - s * ps.Q1) + 3 * ps.Phi / ps.Delta, 1e-12);
    }
}

TEST(PhiScalars, Psi1MatchesItsDefinitionByFiniteDifference) {
  // Psi1 = sqrt(b^2 - s^2) Delta^{1/2} d/ds [sqrt(b^2 - s^2) Phi Delta^{-3/2}].
  std::mt19937_64 rng(4);
  for (const auto& phi : kFamilies)
    for (int t = 0; t < 30; ++t) {
      auto [s, b2] = random_sb(rng);
      s *= 0.9;
      const double b = std::sqrt(b2), h = 1e-5 * b;
      auto inner = [&](double ss) {
        const auto q = phi_scalars(phi, ss, b2, 3);
        return std::sqrt(b2 - ss * ss) * q.Phi * std::pow(q.Delta, -1.5);
      };
      const auto ps = phi_scalars(phi, s, b2, 3);
      const double d = (inner(s + h) - inner(s - h)) / (2 * h);
      const double want = std::sqrt(b2 - s * s) * std::sqrt(ps.Delta) * d;
      EXPECT_NEAR(ps.Psi1, want, 1e-6 * std::max(1.0, std::abs(want)));
    }
}

TEST(PhiScalars, DomainAndRegularityErrors) {
  EXPECT_THROW(phi_scalars(PhiFamily::second_approx_matsumoto(), 0.5, 0.04, 2), DomainError);
  // phi - s phi' = 1 - s^2 - 2 s^3 < 0 at s = 0.8.
  EXPECT_THROW(phi_scalars(PhiFamily::second_approx_matsumoto(), 0.8, 0.81, 2), RegularityError);
  EXPECT_THROW(phi_scalars(PhiFamily::matsumoto(), 0.6, 0.49, 2), RegularityError);
}

TEST(PhiScalars, PhiVanishesOnlyForRiemannian) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ub(0.01, 0.3), u(-1, 1);
  for (int n : {2, 3, 4}) {
    EXPECT_EQ(phi_scalars(PhiFamily::riemannian(), 0.0, 0.0, n).Phi, 0.0);
    double lo = 1e300;
    for (int t = 0; t < 200; ++t) {
      const double b = ub(rng);
      lo = std::min(lo, std::abs(phi_scalars(PhiFamily::second_approx_matsumoto(), b * u(rng), b * b, n).Phi));
    }
    EXPECT_GT(lo, 1.0) << "n = " << n;
  }
}

TEST(SecondMatsumoto, ReducedFormsMatchGenericPath) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 200; ++t) {
    const auto [s, b2] = random_sb(rng);
    const auto g = phi_scalars(PhiFamily::second_approx_matsumoto(), s, b2, 3);
    const auto r = second_matsumoto_scalars(s, b2);
    EXPECT_NEAR(r.Q, g.Q, 1e-12 * std::abs(g.Q));
    EXPECT_NEAR(r.Theta, g.Theta, 1e-12 * std::abs(g.Theta));
    EXPECT_NEAR(r.Psi, g.Psi, 1e-12 * std::abs(g.Psi));
  }
}

TEST(ClosedSpray, ParallelAndRiemannian) {
  const auto par = parallel(3, PhiFamily::second_approx_matsumoto());
  const auto p = make_point(par, std::vector<double>{0.1, 0.2, 0.3}, std::vector<double>{1, -0.5, 0.2});
  EXPECT_LE(spray_closed_form(par, p).cwiseAbs().maxCoeff(), 1e-15);
  const auto s = sphere();
  const auto q = make_point(s, std::vector<double>{0.3, -0.1}, std::vector<double>{0.2, 0.9});
  EXPECT_EQ(spray_closed_form(s, q), covariant_beta_data(s, q).G_alpha);
  EXPECT_LE(max_abs_diff(spray_closed_form(s, q), spray(s, q)), 1e-13);
}

TEST(ClosedForms, AgreeWithDefinitionalGeometry) {
  std::mt19937_64 rng(7);
  for (const auto& phi : kFamilies)
    for (int n : {2, 3}) {
      const auto m = generic(n, phi);
      for (int t = 0; t < 25; ++t) {
        const auto p = make_point(m, uniform_vec(rng, n, -0.3, 0.3), random_direction(rng, n));
        const auto cb = curvature_bundle(m, p);
        EXPECT_LE(rel_err(spray_closed_form(m, p), cb.G), 1e-7) << phi.name();
        const auto mc = mean_cartan_closed(m, p);
        EXPECT_LE(rel_err(mc.I, cb.I), 1e-7) << phi.name();
        EXPECT_LE(rel_err(mean_landsberg_closed(m, p), cb.J), 1e-7) << phi.name();
        const auto c = covariant_beta_data(m, p);
        EXPECT_NEAR(mc.I_dot_b, cb.I.dot(c.b_up), 1e-10);
        EXPECT_NEAR(jbar(m, p), cb.J.dot(c.b_up), 1e-10);
        EXPECT_NEAR(mc.I.dot(to_vector(p.y)), 0.0, 1e-12);
      }
    }
}

TEST(ClosedForms, MeanCartanOfSecondMatsumoto) {
  std::mt19937_64 rng(8);
  const auto m = parallel(2, PhiFamily::second_approx_matsumoto(), 0.1);
  for (int t = 0; t < 100; ++t) {
    const auto p = make_point(m, uniform_vec(rng, 2, -1, 1), random_direction(rng, 2));
    EXPECT_LE(max_abs_diff(mean_cartan_closed(m, p).I, mean_cartan(m, p)), 1e-8);
  }
}

TEST(ClosedForms, RiemannianMeanCartanIsZero) {
  const auto s = sphere();
  const auto q = make_point(s, std::vector<double>{0.3, -0.1}, std::vector<double>{0.2, 0.9});
  EXPECT_EQ(mean_cartan_closed(s, q).I.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(mean_landsberg_closed(s, q).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(jbar(s, q), 0.0);
}

TEST(ClosedForms, KillingWithVanishingSjReducesMeanLandsberg) {
  // b = (0.2, -k x3, k x2) on flat alpha: r_ij = 0, and s_j = 0 at x = 0.
  const auto m = MetricSpec::flat(3, {"0.2", "-0.3*x3", "0.3*x2"}, PhiFamily::second_approx_matsumoto());
  std::mt19937_64 rng(9);
  const std::vector<double> x{0, 0, 0};
  for (int t = 0; t < 20; ++t) {
    const auto p = make_point(m, x, random_direction(rng, 3));
    const auto c = covariant_beta_data(m, p);
    ASSERT_LE(c.r.cwiseAbs().maxCoeff() + c.s_j.cwiseAbs().maxCoeff(), 1e-15);
    const auto ps = phi_scalars_at(m, p);
    const Vector want = -ps.Phi * c.s_i0 / (2 * c.alpha * ps.Delta);
    EXPECT_LE(max_abs_diff(mean_landsberg_closed(m, p), want), 1e-13);
    EXPECT_LE(max_abs_diff(mean_landsberg(m, p), want), 1e-10);
    EXPECT_NEAR(jbar(m, p), 0.0, 1e-13);
  }
}

TEST(ClosedSCurvature, VanishesForParallelBetaAndRiemannian) {
  std::mt19937_64 rng(10);
  for (const auto& phi : kFamilies) {
    const auto m = parallel(3, phi);
    const auto p = make_point(m, uniform_vec(rng, 3, -1, 1), random_direction(rng, 3));
    EXPECT_EQ(s_curvature_closed(m, p, 0.7), 0.0);
  }
  const auto s = sphere();
  EXPECT_EQ(s_curvature_closed(s, make_point(s, std::vector<double>{0.3, -0.1}, std::vector<double>{0.2, 0.9}), 1.0), 0.0);
}

TEST(ClosedSCurvature, LambdaEntersLinearly) {
  const auto m = generic(3, PhiFamily::second_approx_matsumoto());
  const auto p = make_point(m, std::vector<double>{0.1, -0.2, 0.05}, std::vector<double>{0.3, 0.8, -0.4});
  const double s0 = s_curvature_closed(m, p, 0.0), s1 = s_curvature_closed(m, p, 1.0);
  EXPECT_NEAR(s1 - s0, s_curvature_lambda_coefficient(m, p), 1e-14);
}
