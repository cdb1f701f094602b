#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "itercert/poly.hpp"

using namespace itercert;

namespace {

bool holds(const RealInterval& r, const Rational& x) { return Rational(r.lo) <= x && x <= Rational(r.hi); }

const TaylorData::Coefficient* find(const TaylorData& t, std::size_t poly, const Exponents& e) {
  for (const auto& c : t.entries[poly])
    if (c.exponents == e) return &c;
  return nullptr;
}

}  // namespace

TEST(Parse, SingleQuadratic) {
  const auto f = parse_system("x1^2 - 1");
  EXPECT_EQ(f.n_vars(), 1u);
  EXPECT_EQ(f.max_degree(), 2u);
  ASSERT_EQ(f[0].terms().size(), 2u);
  EXPECT_EQ(f[0].terms().at({2}), Rational(1));
  EXPECT_EQ(f[0].terms().at({0}), Rational(-1));
}

TEST(Parse, TwoByTwo) {
  const auto f = parse_system("x1^2 - 1\nx2^2 - 4");
  EXPECT_EQ(f.n_vars(), 2u);
  EXPECT_EQ(f[1].terms().at({0, 2}), Rational(1));
  EXPECT_EQ(f[1].terms().at({0, 0}), Rational(-4));
}

TEST(Parse, DeclaredArityMismatchIsNonSquare) {
  try {
    parse_system("vars: 1\nx1^2 - 1\nx2 - 3");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line"), std::string::npos);
  }
}

TEST(Parse, ErrorsCarryPosition) {
  try {
    parse_system("x1^2 - 1\nx2 + * 3");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_GT(e.column(), 1u);
  }
  EXPECT_THROW(parse_system("x1 + x3\nx2"), ParseError);
  EXPECT_THROW(parse_system("x1 - 1/0"), ParseError);
  EXPECT_THROW(parse_system(""), ParseError);
}

TEST(Parse, CancellingTermsAreDropped) {
  const auto f = parse_system("x1^2 + 2*x1 - 2*x1 - 1/2 + 1/4");
  EXPECT_EQ(f[0].terms().size(), 2u);
  EXPECT_EQ(f[0].terms().at({0}), Rational(-1, 4));
}

TEST(Parse, RoundTrip) {
  const char* texts[] = {"x1^3 - 2*x1*x2 + 1/3\nx2^2 + x1 - 5", "x1^2 - 2*x1 + 1", "7/9*x1*x2^2 - x3\nx2 - 1\nx3^4 + x1",
                         "-x1 + 3/2"};
  for (const char* t : texts) {
    const auto f = parse_system(t);
    const auto g = parse_system(format_system(f));
    ASSERT_EQ(f.n_vars(), g.n_vars());
    for (std::size_t i = 0; i < f.n_vars(); ++i) EXPECT_EQ(f[i].terms(), g[i].terms()) << t;
  }
}

TEST(Evaluate, Examples) {
  EXPECT_EQ(evaluate(parse_system("x1^2 - 1"), ComplexPoint{{1.0, 0.0}})[0], std::complex<double>(0.0));
  const auto v = evaluate(parse_system("x1^2 - 1"), ComplexPoint{{1.1, 0.0}});
  EXPECT_NEAR(v[0].real(), 0.21, 1e-15);
  const auto w = evaluate(parse_system("x1^2 - 1\nx2^2 - 4"), ComplexPoint{{1.0, 0.0}, {-2.0, 0.0}});
  EXPECT_EQ(w[0], std::complex<double>(0.0));
  EXPECT_EQ(w[1], std::complex<double>(0.0));
  EXPECT_THROW(evaluate(parse_system("x1^2 - 1"), ComplexPoint{{1.0, 0.0}, {1.0, 0.0}}), DimensionError);
}

TEST(Jacobian, Examples) {
  EXPECT_NEAR(jacobian_at(parse_system("x1^2 - 1"), ComplexPoint{{1.1, 0.0}})(0, 0).real(), 2.2, 1e-15);
  const auto j = jacobian_at(parse_system("x1^2 - 1\nx2^2 - 4"), ComplexPoint{{1.0, 0.0}, {-2.0, 0.0}});
  EXPECT_EQ(j(0, 0), std::complex<double>(2.0));
  EXPECT_EQ(j(0, 1), std::complex<double>(0.0));
  EXPECT_EQ(j(1, 0), std::complex<double>(0.0));
  EXPECT_EQ(j(1, 1), std::complex<double>(-4.0));
  EXPECT_EQ(jacobian_at(parse_system("x1^2 - 2*x1 + 1"), ComplexPoint{{1.0, 0.0}})(0, 0), std::complex<double>(0.0));
}

TEST(Jacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> coef(-10, 10);
  std::uniform_int_distribution<int> expo(0, 2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + trial % 3;
    std::vector<Polynomial> polys;
    for (std::size_t i = 0; i < n; ++i) {
      Polynomial p(n);
      for (int t = 0; t < 4; ++t) {
        Exponents e(n, 0);
        unsigned total = 0;
        for (auto& x : e) {
          x = std::min<unsigned>(static_cast<unsigned>(expo(rng)), 4 - total);
          total += x;
        }
        p.add_term(e, Rational(coef(rng)));
      }
      Exponents lin(n, 0);
      lin[i] = 1;
      p.add_term(lin, Rational(1));
      polys.push_back(p);
    }
    const PolynomialSystem f(polys);
    ComplexPoint p(n), v(n);
    double norm = 0;
    for (std::size_t i = 0; i < n; ++i) {
      p.coords[i] = {u(rng), u(rng)};
      v.coords[i] = {u(rng), u(rng)};
      norm += std::norm(v.coords[i]);
    }
    for (auto& c : v.coords) c /= std::sqrt(norm);
    const double h = 1e-7;
    ComplexPoint q = p;
    for (std::size_t i = 0; i < n; ++i) q.coords[i] += h * v.coords[i];
    const auto f0 = evaluate(f, p);
    const auto f1 = evaluate(f, q);
    const auto j = jacobian_at(f, p);
    for (std::size_t i = 0; i < n; ++i) {
      std::complex<double> jv = 0;
      for (std::size_t k = 0; k < n; ++k) jv += j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * v.coords[k];
      const std::complex<double> fd = (f1[i] - f0[i]) / h;
      EXPECT_LE(std::abs(fd - jv), 1e-6 * std::max(1.0, std::abs(jv))) << "trial " << trial;
    }
  }
}

TEST(Taylor, Examples) {
  const auto f = parse_system("x1^2 - 1");
  const TaylorData t2 = taylor_at(f, ComplexPoint{{1.1, 0.0}}, 2);
  const auto* c = find(t2, 0, {2});
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->value.re, RealInterval(1.0));
  EXPECT_TRUE(c->value.im.contains(0.0));
  EXPECT_TRUE(taylor_at(f, ComplexPoint{{1.1, 0.0}}, 3).empty());

  const TaylorData cube = taylor_at(parse_system("x1^3"), ComplexPoint{{1.0, 0.0}}, 2);
  const auto* c3 = find(cube, 0, {2});
  ASSERT_NE(c3, nullptr);
  EXPECT_EQ(c3->value.re, RealInterval(3.0));
}

TEST(Taylor, EnclosesExactShift) {
  // (x + y)^3 at x = 1/3 (not representable): second coefficient is 3x.
  const auto f = parse_system("x1^3 + x1*x2\nx2^2");
  const double x = 1.0 / 3.0;
  const TaylorData t = taylor_at(f, ComplexPoint{{x, 0.0}, {0.5, 0.0}}, 2);
  const auto* c = find(t, 0, {2, 0});
  ASSERT_NE(c, nullptr);
  EXPECT_TRUE(holds(c->value.re, 3 * Rational(x)));
  const auto* mixed = find(t, 0, {1, 1});
  ASSERT_NE(mixed, nullptr);
  EXPECT_EQ(mixed->value.re, RealInterval(1.0));
  const auto* sq = find(t, 1, {0, 2});
  ASSERT_NE(sq, nullptr);
  EXPECT_EQ(sq->value.re, RealInterval(1.0));
  const TaylorData t3 = taylor_at(f, ComplexPoint{{x, 0.0}, {0.5, 0.0}}, 3);
  EXPECT_TRUE(t3.entries[1].empty());
  ASSERT_NE(find(t3, 0, {3, 0}), nullptr);
}
