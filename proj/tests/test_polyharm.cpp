#include <gtest/gtest.h>

#include <sstream>

#include "ckt/errors.hpp"
#include "ckt/polyharm.hpp"
#include "oracles.hpp"

using namespace ckt;

TEST(Dims, KnownValues) {
  for (int m = 0; m <= 8; ++m) EXPECT_EQ(dims(3, m).h, 2 * m + 1);
  EXPECT_EQ(dims(2, 0).h, 1);
  for (int m = 1; m <= 8; ++m) EXPECT_EQ(dims(2, m).h, 2);
  EXPECT_EQ(dims(4, 2).p, 10);
  EXPECT_EQ(dims(4, 2).h, 9);
  EXPECT_THROW(dims(3, -1), ValidationError);
}

TEST(Dims, MatchesExactLaplacianNullity) {
  for (int n = 2; n <= 4; ++n)
    for (int m = 0; m <= 6; ++m) EXPECT_EQ(dims(n, m).h, oracle::laplacian_nullity(n, m)) << n << ' ' << m;
}

TEST(Dims, OverflowIsReported) {
  EXPECT_THROW(binomial(200, 100), OverflowError);
  EXPECT_EQ(binomial(10, 3), 120);
  EXPECT_EQ(binomial(5, 7), 0);
}

TEST(HarmonicDecompose, ExactOverRationals) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 30; ++t) {
    const int n = 2 + t % 3, m = t % 7;
    const auto p = oracle::random_int_poly(rng, n, m);
    const auto parts = harmonic_decompose(p);
    EXPECT_TRUE(reconstruct(n, m, parts) == p);
    for (const auto& [k, h] : parts) {
      EXPECT_TRUE(laplace(h).is_zero());
      EXPECT_EQ(h.m(), m - 2 * k);
    }
  }
}

TEST(HarmonicDecompose, FloatingMatchesRational) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 3, m = 2 + t % 5;
    const auto p = oracle::random_int_poly(rng, n, m);
    const auto exact = harmonic_decompose(p);
    const auto approx = harmonic_decompose(oracle::to_complex(p));
    ASSERT_EQ(exact.size(), approx.size());
    for (size_t i = 0; i < exact.size(); ++i) {
      EXPECT_EQ(exact[i].first, approx[i].first);
      EXPECT_LE(coeff_norm(oracle::to_complex(exact[i].second) - approx[i].second), 1e-11);
    }
  }
}

TEST(HarmonicDecompose, RadialPowerIsPure) {
  const auto parts = harmonic_decompose(radial_power<cplx>(3, 2));
  ASSERT_EQ(parts.size(), 1u);
  EXPECT_EQ(parts[0].first, 2);
  EXPECT_EQ(parts[0].second.m(), 0);
}

TEST(Sphere, MomentsMatchClosedForms) {
  const double area = oracle::sphere_area(3);
  EXPECT_NEAR(sphere_monomial_moment({0, 0, 0}, 3), area, 1e-13);
  EXPECT_NEAR(sphere_monomial_moment({2, 0, 0}, 3), area / 3, 1e-13);
  EXPECT_NEAR(sphere_monomial_moment({4, 0, 0}, 3), area / 5, 1e-13);
  EXPECT_NEAR(sphere_monomial_moment({2, 2, 0}, 3), area / 15, 1e-13);
  EXPECT_EQ(sphere_monomial_moment({1, 2, 0}, 3), 0.0);
}

TEST(Sphere, InnerProductMatchesMonteCarlo) {
  std::mt19937_64 rng(3);
  const HPoly p = HPoly::monomial({2, 1, 0}) + HPoly::monomial({0, 1, 2}) * cplx(0, 1);
  const HPoly q = HPoly::monomial({1, 1, 1}) + HPoly::monomial({0, 3, 0});
  const int N = 400000;
  cplx acc = 0;
  for (int i = 0; i < N; ++i) {
    const Eigen::VectorXd v = oracle::sphere_point(rng, 3);
    acc += evaluate(p, v) * std::conj(evaluate(q, v));
  }
  acc *= oracle::sphere_area(3) / N;
  EXPECT_LE(std::abs(acc - sphere_inner(p, q)), 5e-3);
}

TEST(HarmonicBasis, OrthonormalAndHarmonic) {
  for (int n = 2; n <= 4; ++n)
    for (int m = 0; m <= 4; ++m) {
      const auto& B = harmonic_basis(n, m);
      ASSERT_EQ(B.size(), dims(n, m).h);
      for (int i = 0; i < B.size(); ++i) {
        EXPECT_TRUE(is_harmonic(B.members[i]));
        for (int j = 0; j < B.size(); ++j)
          EXPECT_NEAR(std::abs(sphere_inner(B.members[i], B.members[j]) - cplx(i == j ? 1 : 0)), 0, 1e-12);
      }
    }
}

TEST(HarmonicBasis, CoordsRoundTrip) {
  std::mt19937_64 rng(5);
  const auto& B = harmonic_basis(4, 3);
  const Eigen::VectorXcd c = oracle::random_complex(rng, B.size(), 1).col(0);
  EXPECT_LE((B.coords(B.combine(c)) - c).norm(), 1e-12);
}

TEST(Bombieri, MonomialNorms) {
  EXPECT_NEAR(std::abs(bombieri_inner(HPoly::monomial({2, 0}), HPoly::monomial({2, 0}))), 2.0, 1e-15);
  EXPECT_NEAR(std::abs(bombieri_inner(HPoly::monomial({2, 1}), HPoly::monomial({2, 1}))), 2.0, 1e-15);
  EXPECT_EQ(std::abs(bombieri_inner(HPoly::monomial({2, 1}), HPoly::monomial({1, 2}))), 0.0);
}

TEST(ApplyDiff, ConstantOrderMatchesBombieri) {
  std::mt19937_64 rng(9);
  const HPoly p = oracle::to_complex(oracle::random_int_poly(rng, 3, 3));
  const HPoly q = oracle::to_complex(oracle::random_int_poly(rng, 3, 3));
  const HPoly d = apply_diff(p.conj(), q);
  EXPECT_EQ(d.m(), 0);
  EXPECT_NEAR(std::abs(d.coeff({0, 0, 0}) - std::conj(bombieri_inner(p, q))), 0, 1e-9);
}

TEST(Antiderivative, SolvesAndStaysHarmonic) {
  std::mt19937_64 rng(13);
  for (int n = 2; n <= 4; ++n)
    for (int m = 0; m <= 3; ++m) {
      const HPoly p = harmonic_basis(n, m).combine(oracle::random_complex(rng, dims(n, m).h, 1).col(0));
      for (int j = 0; j < n; ++j) {
        const HPoly f = harmonic_antiderivative(p, j, cplx(2, 1));
        EXPECT_TRUE(is_harmonic(f, 1e-10));
        EXPECT_LE(coeff_norm(partial(f, j) - p * cplx(2, 1)), 1e-10);
      }
    }
}

TEST(Antiderivative, RejectsNonHarmonicInput) {
  const HPoly p = radial_power<cplx>(3, 1);
  EXPECT_THROW(harmonic_antiderivative(p, 0, 1.0), ValidationError);
}

TEST(ComposeLinear, AgreesWithEvaluation) {
  std::mt19937_64 rng(17);
  const HPoly p = oracle::to_complex(oracle::random_int_poly(rng, 3, 3));
  Eigen::MatrixXd L = Eigen::MatrixXd::Random(3, 2);
  const HPoly q = compose_linear(p, L);
  EXPECT_EQ(q.n(), 2);
  const Eigen::Vector2d w(0.3, -1.2);
  EXPECT_NEAR(std::abs(evaluate(q, w) - evaluate(p, Eigen::VectorXd(L * w))), 0, 1e-12);
}

TEST(TextFormat, HPolyRoundTrip) {
  std::mt19937_64 rng(19);
  const HPoly p = harmonic_basis(3, 2).combine(oracle::random_complex(rng, 5, 1).col(0));
  std::stringstream ss;
  write_hpoly(ss, p);
  EXPECT_TRUE(read_hpoly(ss) == p);
}

TEST(TextFormat, RejectsBadInput) {
  std::stringstream bad("HPOLY 2 1 1\n1.0 0.0 1\n");
  EXPECT_THROW(read_hpoly(bad), ValidationError);
  std::stringstream wrong("POLY 2 1 0\n");
  EXPECT_THROW(read_hpoly(wrong), ValidationError);
  EXPECT_THROW(parse_double("1.5x"), ValidationError);
}
