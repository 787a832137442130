#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/expr.hpp"

using namespace finsler;
using finsler::expr::diff_expr;
using finsler::expr::eval_expr;
using finsler::expr::parse;

namespace {

double at(const std::string& text, std::vector<double> env) { return eval_expr(parse(text, static_cast<int>(env.size())), env); }

/// Random expression over x1, x2 built from the full grammar, kept inside
/// the domain of sqrt/log/division on the box [-1, 1]^2.
std::string random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 11);
  std::uniform_real_distribution<double> c(-2, 2);
  auto sub = [&] { return random_expr(rng, depth - 1); };
  switch (pick(rng)) {
    case 0:
      return "x1";
    case 1:
      return "x2";
    case 2:
      return std::to_string(std::round(c(rng) * 100) / 100);
    case 3:
      return "(" + sub() + " + " + sub() + ")";
    case 4:
      return "(" + sub() + " - " + sub() + ")";
    case 5:
      return "(" + sub() + " * " + sub() + ")";
    case 6:
      return "(" + sub() + ")/(2 + sin(" + sub() + "))";
    case 7:
      return "(" + sub() + ")^2";
    case 8:
      return "sin(" + sub() + ")";
    case 9:
      return "cos(" + sub() + ")";
    case 10:
      return "exp(" + sub() + "/4)";
    default:
      return "sqrt(1 + (" + sub() + ")^2)";
  }
}

}  // namespace

TEST(Expr, ParsesPolynomialAndTrigonometricAtoms) {
  const auto e = parse("x1^2 + sin(x2)", 2);
  EXPECT_TRUE(e.depends_on(0));
  EXPECT_TRUE(e.depends_on(1));
  EXPECT_EQ(e.max_var(), 1);
  EXPECT_NO_THROW(parse("1/(1 - x1)", 2));
}

TEST(Expr, SyntaxErrorReportsOffset) {
  try {
    parse("x1 +", 2);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(Expr, UnknownIdentifierAndOutOfRangeVariableAreRejected) {
  EXPECT_THROW(parse("tan(x1)", 2), ParseError);
  EXPECT_THROW(parse("y1 + 1", 2), ParseError);
  EXPECT_THROW(parse("x3", 2), ParseError);
  EXPECT_THROW(parse("x0", 2), ParseError);
  EXPECT_THROW(parse("", 2), ParseError);
  EXPECT_THROW(parse("(x1", 2), ParseError);
}

TEST(Expr, Evaluates) {
  EXPECT_DOUBLE_EQ(at("x1^2 + sin(x2)", {2, 0}), 4.0);
  EXPECT_DOUBLE_EQ(at("exp(0)*x2", {5, 3}), 3.0);
  EXPECT_THROW(at("1/(1 - x1)", {1, 0}), EvaluationError);
  EXPECT_THROW(at("sqrt(x1)", {-1, 0}), EvaluationError);
}

TEST(Expr, PrecedenceAndAssociativity) {
  EXPECT_DOUBLE_EQ(at("2^3^2", {0, 0}), 512.0);
  EXPECT_DOUBLE_EQ(at("-x1^2", {3, 0}), -9.0);
  EXPECT_DOUBLE_EQ(at("1 - 2 - 3", {0, 0}), -4.0);
  EXPECT_DOUBLE_EQ(at("8/4/2", {0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(at("1 + 2*3^2", {0, 0}), 19.0);
  EXPECT_DOUBLE_EQ(at("2*x1*x2 - x2/4", {1.5, 2}), 5.5);
  EXPECT_DOUBLE_EQ(at("1.5e-1*x1", {2, 0}), 0.3);
}

TEST(Expr, DifferentiatesWithConstantFolding) {
  EXPECT_EQ(diff_expr(parse("x1^2", 2), 0).str(), "2*x1");
  EXPECT_EQ(diff_expr(parse("sin(x2)", 2), 1).str(), "cos(x2)");
  EXPECT_EQ(diff_expr(parse("x2", 2), 0).str(), "0");
}

TEST(Expr, DerivativeMatchesCentralDifference) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 200; ++t) {
    const auto e = parse(random_expr(rng, 4), 2);
    for (int var = 0; var < 2; ++var) {
      const auto d = diff_expr(e, var);
      std::vector<double> x{u(rng), u(rng)};
      const double h = 1e-5;
      auto xp = x, xm = x;
      xp[var] += h;
      xm[var] -= h;
      const double fd = (eval_expr(e, xp) - eval_expr(e, xm)) / (2 * h);
      const double exact = eval_expr(d, x);
      EXPECT_NEAR(exact, fd, 1e-7 * std::max(1.0, std::abs(exact))) << e.str() << " d/dx" << var + 1;
    }
  }
}

TEST(Expr, PrintedFormParsesBackToTheSameFunction) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 50; ++t) {
    const auto e = parse(random_expr(rng, 4), 2);
    const auto back = parse(e.str(), 2);
    for (int k = 0; k < 100; ++k) {
      std::vector<double> x{u(rng), u(rng)};
      EXPECT_EQ(eval_expr(back, x), eval_expr(e, x)) << e.str();
    }
  }
}

TEST(Expr, EvaluationIsDeterministic) {
  const auto e = parse("exp(x1)*cos(x2) + log(2 + x1)", 2);
  const std::vector<double> x{0.3, -0.4};
  EXPECT_EQ(eval_expr(e, x), eval_expr(e, x));
  EXPECT_DOUBLE_EQ(eval_expr(e, x), std::exp(0.3) * std::cos(-0.4) + std::log(2.3));
}
