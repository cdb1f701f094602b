#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_complex.hpp>

#include <cmath>
#include <random>

#include "itercert/engines.hpp"
#include "itercert/families.hpp"
#include "support/oracle.hpp"

using namespace itercert;

namespace {

using Big = boost::multiprecision::cpp_complex<256, boost::multiprecision::backends::digit_base_2>;
using BigReal = Big::value_type;

Big big(const Rational& q) { return Big(BigReal(q.get_num().get_str()) / BigReal(q.get_den().get_str())); }
Big big(std::complex<double> z) { return Big(BigReal(z.real()), BigReal(z.imag())); }

BigReal binom(unsigned a, unsigned b) {
  BigReal r = 1;
  for (unsigned i = 0; i < b; ++i) r = r * (a - i) / (i + 1);
  return r;
}

// Taylor coefficient of f_i at s for the multi-index b.
Big taylor_coeff(const Polynomial& p, const ComplexPoint& s, const Exponents& b) {
  Big acc(0);
  for (const auto& [a, c] : p.terms()) {
    bool ok = true;
    for (std::size_t j = 0; j < a.size() && ok; ++j) ok = a[j] >= b[j];
    if (!ok) continue;
    Big term = big(c);
    for (std::size_t j = 0; j < a.size(); ++j) {
      term *= Big(binom(a[j], b[j]));
      for (unsigned e = 0; e < a[j] - b[j]; ++e) term *= big(s[j]);
    }
    acc += term;
  }
  return acc;
}

void multi_indices(std::size_t n, unsigned k, Exponents& cur, std::size_t j, std::vector<Exponents>& out) {
  if (j + 1 == n) {
    cur[j] = k;
    out.push_back(cur);
    return;
  }
  for (unsigned e = 0; e <= k; ++e) {
    cur[j] = e;
    multi_indices(n, k - e, cur, j + 1, out);
  }
}

// Solves A X = B by Gaussian elimination with partial pivoting.
std::vector<std::vector<Big>> solve(std::vector<std::vector<Big>> a, std::vector<std::vector<Big>> b) {
  const std::size_t n = a.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (abs(a[r][c]) > abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const Big m = a[r][c] / a[c][c];
      for (std::size_t k = 0; k < n; ++k) a[r][k] -= m * a[c][k];
      for (std::size_t k = 0; k < b[r].size(); ++k) b[r][k] -= m * b[c][k];
    }
  }
  for (std::size_t r = 0; r < n; ++r)
    for (auto& v : b[r]) v /= a[r][r];
  return b;
}

struct Reference {
  double beta = 0;
  double gamma = 0;
};

// beta and gamma in the same norms as the engine, with an exact inverse.
Reference reference(const PolynomialSystem& f, const ComplexPoint& s) {
  const std::size_t n = f.n_vars();
  std::vector<std::vector<Big>> jac(n, std::vector<Big>(n));
  std::vector<std::vector<Big>> fs(n, std::vector<Big>(1));
  for (std::size_t i = 0; i < n; ++i) {
    fs[i][0] = taylor_coeff(f[i], s, Exponents(n, 0));
    for (std::size_t j = 0; j < n; ++j) {
      Exponents e(n, 0);
      e[j] = 1;
      jac[i][j] = taylor_coeff(f[i], s, e);
    }
  }
  Reference out;
  BigReal beta = 0;
  for (const auto& row : solve(jac, fs)) beta = std::max(beta, BigReal(abs(row[0])));
  out.beta = static_cast<double>(beta);
  BigReal gamma = 0;
  for (unsigned k = 2; k <= f.max_degree(); ++k) {
    std::vector<Exponents> idx;
    Exponents cur(n, 0);
    multi_indices(n, k, cur, 0, idx);
    std::vector<std::vector<Big>> t(n, std::vector<Big>(idx.size()));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t b = 0; b < idx.size(); ++b) t[i][b] = taylor_coeff(f[i], s, idx[b]);
    BigReal norm = 0;
    for (const auto& row : solve(jac, t)) {
      BigReal sum = 0;
      for (const auto& v : row) sum += abs(v);
      norm = std::max(norm, sum);
    }
    gamma = std::max(gamma, BigReal(pow(norm, BigReal(1) / (k - 1))));
  }
  out.gamma = static_cast<double>(gamma);
  return out;
}

IntervalBox real_box(double lo, double hi) {
  return IntervalBox(std::vector<ComplexInterval>{ComplexInterval(RealInterval(lo, hi), RealInterval(0.0))});
}

Certificate fake_alpha(double s, double beta) {
  Certificate c;
  c.engine = Engine::alpha;
  c.success = true;
  c.beta_bound = RealInterval(beta);
  c.region = real_box(s - 2 * beta, s + 2 * beta);
  return c;
}

Certificate fake_krawczyk(double lo, double hi) {
  Certificate c;
  c.engine = Engine::krawczyk;
  c.success = true;
  c.region = real_box(lo, hi);
  c.re1_range = c.region[0].re;
  return c;
}

Eigen::MatrixXcd scalar(double y) {
  Eigen::MatrixXcd m(1, 1);
  m(0, 0) = y;
  return m;
}

const ComplexPoint one{{1.0, 0.0}};

}  // namespace

TEST(Krawczyk, OperatorExamples) {
  const auto f = parse_system("x1^2 - 1");
  const IntervalBox k = krawczyk_operator(f, real_box(0.9, 1.1), one, scalar(0.5));
  EXPECT_LE(k[0].re.lo, 0.99);
  EXPECT_GE(k[0].re.hi, 1.01);
  EXPECT_GE(k[0].re.lo, 0.99 - 4 * detail::ulp(0.99));
  EXPECT_LE(k[0].re.hi, 1.01 + 4 * detail::ulp(1.01));

  const IntervalBox p = krawczyk_operator(f, real_box(1.0, 1.0), one, scalar(0.5));
  EXPECT_TRUE(p[0].re.contains(1.0));
  EXPECT_LE(p[0].re.hi - p[0].re.lo, 4 * detail::ulp(1.0));

  const auto g = parse_system("x1^2 - 2*x1 + 1");
  for (double y : {0.5, 1.0, 7.0, -3.0}) {
    const KrawczykResult r = krawczyk_image(g, real_box(0.9, 1.1), one, scalar(y));
    EXPECT_FALSE(r.contraction < 1.0 && contained_in_interior(r.image, real_box(0.9, 1.1))) << y;
  }
}

TEST(Krawczyk, CertifyExamples) {
  const Certificate a = krawczyk_certify(parse_system("x1^2 - 1"), one);
  ASSERT_TRUE(a.success);
  EXPECT_GE(a.region[0].re.lo, 1 - 1e-3);
  EXPECT_LE(a.region[0].re.hi, 1 + 1e-3);
  EXPECT_EQ(a.re1_range, a.region[0].re);
  EXPECT_EQ(a.real_certified, Realness::yes);

  const Certificate b = krawczyk_certify(parse_system("x1^2 - 2*x1 + 1"), one);
  EXPECT_FALSE(b.success);
  EXPECT_EQ(b.real_certified, Realness::undetermined);

  const Certificate c = krawczyk_certify(parse_system("x1^2 - 1\nx2^2 - 4"), ComplexPoint{{1.0000001, 0.0}, {-2.0000001, 0.0}});
  ASSERT_TRUE(c.success);
  EXPECT_TRUE(support::box_contains(c.region, {ExactComplex{1, 0}, ExactComplex{-2, 0}}));
}

TEST(Krawczyk, Distinctness) {
  EXPECT_TRUE(krawczyk_distinct(fake_krawczyk(0.99, 1.01), fake_krawczyk(-1.01, -0.99)));
  EXPECT_FALSE(krawczyk_distinct(fake_krawczyk(0.99, 1.01), fake_krawczyk(1.005, 1.02)));
  const auto f = parse_system("x1^2 - 1");
  EXPECT_TRUE(krawczyk_distinct(krawczyk_certify(f, one), krawczyk_certify(f, ComplexPoint{{-1.0, 0.0}})));
  EXPECT_THROW(krawczyk_distinct(fake_krawczyk(0, 1), fake_alpha(0, 1)), CertificateError);
}

TEST(Krawczyk, Realness) {
  const auto f = parse_system("x1^2 - 1");
  Certificate c = fake_krawczyk(0.999, 1.001);
  c.region[0].im = RealInterval(-1e-3, 1e-3);
  EXPECT_EQ(krawczyk_real(f, c), Realness::yes);

  const Certificate i = krawczyk_certify(parse_system("x1^2 + 1"), ComplexPoint{{0.0, 1.0}});
  ASSERT_TRUE(i.success);
  EXPECT_EQ(i.real_certified, Realness::undetermined);

  EXPECT_EQ(krawczyk_real(f, fake_krawczyk(1.0, 1.0)), Realness::yes);
}

TEST(Alpha, ThresholdIsRoundedDownExactValue) {
  const double a0 = alpha_threshold();
  auto below = [](double x) {
    const Rational t = Rational(13) - 4 * Rational(x);
    return t >= 0 && t * t >= 153;
  };
  EXPECT_TRUE(below(a0));
  EXPECT_FALSE(below(std::nextafter(a0, 1.0)));
  EXPECT_EQ(a0, 0.15767078078675456);
}

TEST(Alpha, ConstantsExamples) {
  const auto f = parse_system("x1^2 - 1");
  const AlphaConstants k = alpha_constants(f, ComplexPoint{{1.1, 0.0}});
  const Rational x(1.1);
  auto holds = [](const RealInterval& r, const Rational& v) { return Rational(r.lo) <= v && v <= Rational(r.hi); };
  EXPECT_TRUE(holds(k.beta, (x * x - 1) / (2 * x)));
  EXPECT_LE(k.gamma.hi, 0.4546);
  EXPECT_GE(k.gamma.hi, 0.4545);
  EXPECT_TRUE(holds(k.alpha, (x * x - 1) / (4 * x * x)));
  EXPECT_LT(k.alpha.hi, 0.0435);

  const AlphaConstants z = alpha_constants(f, one);
  EXPECT_EQ(z.beta.lo, 0.0);
  EXPECT_LE(z.beta.hi, 1e-15);
  EXPECT_LE(z.alpha.hi, 1e-15);

  EXPECT_THROW(alpha_constants(parse_system("x1^2 - 2*x1 + 1"), one), SingularJacobianError);
}

TEST(Alpha, CertifyExamples) {
  const auto f = parse_system("x1^2 - 1");
  const Certificate c = alpha_certify(f, ComplexPoint{{1.1, 0.0}});
  ASSERT_TRUE(c.success);
  const double two_beta = c.region[0].re.hi - 1.1;
  EXPECT_GE(two_beta, 0.1909);
  EXPECT_LE(two_beta, 0.1910);
  EXPECT_LE(c.region[0].re.lo, 1.1 - 0.1909);
  EXPECT_EQ(c.re1_range, c.region[0].re);
  EXPECT_TRUE(support::box_contains(c.region, {ExactComplex{1, 0}}));

  const Certificate far = alpha_certify(f, ComplexPoint{{2.0, 0.0}});
  EXPECT_FALSE(far.success);
  EXPECT_TRUE(far.alpha_value.contains(0.1875));
  EXPECT_EQ(far.real_certified, Realness::undetermined);

  EXPECT_FALSE(alpha_certify(parse_system("x1^2 - 2*x1 + 1"), one).success);
}

TEST(Alpha, Distinctness) {
  const ComplexPoint a{{1.1, 0.0}}, b{{-1.1, 0.0}}, c{{1.3, 0.0}};
  EXPECT_TRUE(alpha_distinct(fake_alpha(1.1, 0.0955), fake_alpha(-1.1, 0.0955), a, b));
  EXPECT_FALSE(alpha_distinct(fake_alpha(1.1, 0.0955), fake_alpha(1.1, 0.0955), a, a));
  EXPECT_FALSE(alpha_distinct(fake_alpha(1.1, 0.0955), fake_alpha(1.3, 0.0955), a, c));
}

TEST(Alpha, Realness) {
  const auto f = parse_system("x1^2 - 1");
  const ComplexPoint s{{1.1, 0.0}};
  EXPECT_EQ(alpha_real(f, s, alpha_certify(f, s)), Realness::yes);

  const auto g = parse_system("x1^2 + 1");
  const ComplexPoint i{{0.0, 1.0}};
  const Certificate ci = alpha_certify(g, i);
  ASSERT_TRUE(ci.success);
  EXPECT_LE(ci.gamma_bound.lo, 0.5);
  EXPECT_GE(ci.gamma_bound.hi, 0.5);
  EXPECT_EQ(alpha_real(g, i, ci), Realness::undetermined);

  const ComplexPoint near{{1.0, 1e-12}};
  EXPECT_EQ(alpha_real(f, near, alpha_certify(f, near)), Realness::yes);
}

TEST(Alpha, ConstantsAreUpperBounds) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1e-3, 1e-3);
  const char* systems[] = {"x1^2 - 1", "x1^3 - 2*x1 + 1/3", "x1^2 - 1\nx2^2 - 4",
                           "x1^2 + x1*x2 - 3/7\nx2^3 - x1 + 1", "x1*x2 - 2\nx1^2 + x2^2 - 5\n"};
  for (const char* text : systems) {
    const auto f = parse_system(text);
    for (int t = 0; t < 25; ++t) {
      ComplexPoint s(f.n_vars());
      for (std::size_t j = 0; j < f.n_vars(); ++j) s.coords[j] = {1.0 + j + 100 * u(rng), 100 * u(rng)};
      if (t % 2) {
        // near a root: refine by float Newton steps
        for (int it = 0; it < 8; ++it) {
          const auto y = detail::float_inverse(jacobian_at(f, s));
          if (!y) break;
          const auto v = evaluate(f, s);
          for (std::size_t i = 0; i < s.size(); ++i) {
            std::complex<double> step = 0;
            for (std::size_t j = 0; j < s.size(); ++j)
              step += (*y)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * v[j];
            s.coords[i] -= step;
          }
        }
        for (auto& z : s.coords) z += std::complex<double>(u(rng) * 1e-6, u(rng) * 1e-6);
      }
      AlphaConstants k;
      try {
        k = alpha_constants(f, s);
      } catch (const SingularJacobianError&) {
        continue;
      }
      const Reference r = reference(f, s);
      EXPECT_GE(k.beta.hi, r.beta) << text;
      EXPECT_LE(k.beta.lo, r.beta * (1 + 1e-12)) << text;
      EXPECT_GE(k.gamma.hi, r.gamma) << text;
      EXPECT_LE(k.gamma.lo, r.gamma * (1 + 1e-12)) << text;
    }
  }
}

TEST(Engines, MonotoneFailure) {
  const char* systems[] = {"x1^2 - 1", "x1^2 - 3", "x1^2 + 2", "x1^2 - x1 - 1"};
  for (const char* text : systems) {
    const auto f = parse_system(text);
    const auto roots = [&] {
      // float root via Newton from a nearby start
      std::complex<double> z = std::string(text).find("+ 2") != std::string::npos ? std::complex<double>(0.0, 1.4)
                                                                                   : std::complex<double>(1.7, 0.0);
      for (int i = 0; i < 60; ++i) z -= evaluate(f, ComplexPoint{z})[0] / jacobian_at(f, ComplexPoint{z})(0, 0);
      return z;
    }();
    for (Engine e : {Engine::krawczyk, Engine::alpha}) {
      double onset = 0;
      bool failed_after_onset = true;
      for (double p = 1e-12; p < 1e3; p *= 1.25) {
        const bool ok = certify(f, ComplexPoint{roots + p}, e).success;
        if (!ok && onset == 0) onset = p;
        if (ok && onset > 0 && p > 10 * onset) failed_after_onset = false;
      }
      EXPECT_GT(onset, 0) << text << ' ' << to_string(e);
      EXPECT_TRUE(failed_after_onset) << text << ' ' << to_string(e);
    }
  }
}

TEST(Engines, AgreeOnWellSeparatedSets) {
  std::size_t divergent = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const std::string kinds = seed % 3 == 0 ? "rc" : (seed % 3 == 1 ? "rrc" : "trr");
    const ProductFamily fam = ProductFamily::random(kinds, seed, 1e-9);
    for (std::size_t i = 0; i < fam.size(); ++i) {
      ComplexPoint s;
      fam.candidate(i, s);
      const Certificate k = krawczyk_certify(fam.system(), s, i);
      const Certificate a = alpha_certify(fam.system(), s, i);
      if (k.success != a.success) {
        ++divergent;
        EXPECT_GE(a.alpha_value.hi, 0.9 * alpha_threshold()) << "seed " << seed << " index " << i;
      }
    }
  }
  EXPECT_EQ(divergent, 0u);
}

TEST(Engines, SoundOnProductFamilies) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const ProductFamily fam = ProductFamily::random(seed % 2 ? "rct" : "crr", seed, 1e-9);
    for (Engine e : {Engine::krawczyk, Engine::alpha}) {
      std::vector<Certificate> certs;
      std::vector<ComplexPoint> pts;
      for (std::size_t i = 0; i < fam.size(); ++i) {
        ComplexPoint s;
        fam.candidate(i, s);
        const Certificate c = certify(fam.system(), s, e, i);
        ASSERT_TRUE(c.success) << "seed " << seed << " index " << i;
        EXPECT_TRUE(support::box_contains(c.region, fam.exact_root(i)));
        for (std::size_t j = 0; j < fam.size(); ++j)
          if (j != i) {
            EXPECT_FALSE(support::box_contains(c.region, fam.exact_root(j)));
          }
        if (c.real_certified == Realness::yes) {
          EXPECT_TRUE(fam.root_is_real(i));
        }
        certs.push_back(c);
        pts.push_back(s);
      }
      for (std::size_t i = 0; i < certs.size(); ++i)
        for (std::size_t j = i + 1; j < certs.size(); ++j) EXPECT_TRUE(distinct(certs[i], certs[j], pts[i], pts[j]));
    }
  }
}
