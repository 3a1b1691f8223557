#include <gtest/gtest.h>

#include <sstream>

#include "ckt/connalg.hpp"
#include "ckt/errors.hpp"
#include "ckt/symbolcheck.hpp"
#include "oracles.hpp"

using namespace ckt;

namespace {

TwistedHarmonic recombine(const SplitResult& s, int n) {
  TwistedHarmonic out(n, s.plus.m, s.plus.fdim());
  const HPoly r2 = radial_power<cplx>(n, 1);
  for (int a = 0; a < out.fdim(); ++a) {
    out.columns[static_cast<size_t>(a)] = s.plus.columns[static_cast<size_t>(a)];
    if (s.minus.m >= 0) out.columns[static_cast<size_t>(a)] += multiply(r2, s.minus.columns[static_cast<size_t>(a)]);
  }
  return out;
}

double commutator_residual(const EndoMat& M, const EndoMat& X) {
  const int r = static_cast<int>(M.rows());
  Eigen::VectorXcd vx(r * r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) vx[a * r + b] = X(a, b);
  const Eigen::VectorXcd lhs = commutator_action(M) * vx;
  const EndoMat C = M * X - X * M;
  double s = 0;
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) s += std::norm(lhs[a * r + b] - C(a, b));
  return std::sqrt(s);
}

}  // namespace

TEST(ConnAlg, SkewHermitianCheck) {
  std::mt19937_64 rng(1);
  EXPECT_TRUE(is_skew_hermitian(oracle::random_skew(rng, 3)));
  EXPECT_FALSE(is_skew_hermitian(Eigen::MatrixXcd::Identity(2, 2)));
  FiberConnForm G(2, 2);
  G.gammas[0] = Eigen::MatrixXcd::Identity(2, 2);
  EXPECT_THROW(G.validate(), ValidationError);
}

TEST(ConnAlg, FormEvaluation) {
  std::mt19937_64 rng(2);
  FiberConnForm G(3, 2);
  for (auto& g : G.gammas) g = oracle::random_skew(rng, 2);
  const Eigen::Vector3d v(0.5, -1, 2);
  EXPECT_LE((G.at(v) - (0.5 * G.gammas[0] - G.gammas[1] + 2.0 * G.gammas[2])).norm(), 1e-14);
}

TEST(ConnAlg, SplitRecombinesToProduct) {
  std::mt19937_64 rng(3);
  for (int n = 2; n <= 4; ++n)
    for (int m = 0; m <= 3; ++m) {
      FiberConnForm G(n, 2);
      for (auto& g : G.gammas) g = oracle::random_skew(rng, 2);
      const TwistedHarmonic f = oracle::random_twisted(rng, n, m, 2);
      const SplitResult s = gamma_split(G, f);
      EXPECT_TRUE(s.plus.is_harmonic(1e-10));
      if (m >= 1) EXPECT_TRUE(s.minus.is_harmonic(1e-10));
      TwistedHarmonic diff = recombine(s, n);
      diff -= apply_form(G.gammas, f);
      EXPECT_LE(twisted_coeff_norm(diff), 1e-10) << n << ' ' << m;
    }
}

TEST(ConnAlg, CommutatorActionIsRowMajor) {
  std::mt19937_64 rng(4);
  for (int r = 1; r <= 4; ++r)
    EXPECT_LE(commutator_residual(oracle::random_complex(rng, r, r), oracle::random_complex(rng, r, r)), 1e-12);
}

TEST(ConnAlg, KronLayout) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXcd A = oracle::random_complex(rng, 2, 3), B = oracle::random_complex(rng, 3, 2);
  const Eigen::MatrixXcd K = kron(A, B);
  ASSERT_EQ(K.rows(), 6);
  ASSERT_EQ(K.cols(), 6);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 2; ++b) EXPECT_EQ(K(i * 3 + a, j * 2 + b), A(i, j) * B(a, b));
}

TEST(ConnAlg, CoordinateSplitMatchesPolynomials) {
  for (int n = 2; n <= 4; ++n)
    for (int m = 0; m <= 3; ++m) {
      const auto& cs = coordinate_split(n, m);
      const auto& B = harmonic_basis(n, m);
      const auto& Bu = harmonic_basis(n, m + 1);
      const HPoly r2 = radial_power<cplx>(n, 1);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < B.size(); ++i) {
          MultiIndex e(static_cast<size_t>(n), 0);
          e[static_cast<size_t>(j)] = 1;
          HPoly rhs = Bu.combine(cs.raise[static_cast<size_t>(j)].col(i));
          if (m >= 1) rhs += multiply(r2, harmonic_basis(n, m - 1).combine(cs.lower[static_cast<size_t>(j)].col(i)));
          EXPECT_LE(coeff_norm(multiply(HPoly::monomial(e), B.members[static_cast<size_t>(i)]) - rhs), 1e-12);
        }
    }
}

TEST(ConnAlg, GammaMinusRank) {
  std::mt19937_64 rng(6);
  for (int r = 2; r <= 3; ++r)
    for (int m = 1; m <= 3; ++m) {
      const RankReport rr = gamma_minus_matrix(FiberConnForm::single(3, oracle::random_skew(rng, r, true), 0), 3, m);
      EXPECT_EQ(rr.rank, dims(3, m - 1).h * r);
      EXPECT_EQ(rr.nullity, dims(3, m).h * r - rr.rank);
    }
}

TEST(ConnAlg, GammaPreimage) {
  std::mt19937_64 rng(7);
  for (int m = 0; m <= 3; ++m) {
    const TwistedHarmonic u = oracle::random_twisted(rng, 3, m, 2);
    const GammaPreimage pre = solve_gamma_preimage(u);
    EXPECT_NO_THROW(pre.G.validate());
    TwistedHarmonic diff = gamma_split(pre.G, pre.w).minus;
    diff -= u;
    EXPECT_LE(twisted_coeff_norm(diff), 1e-9 * (1 + twisted_coeff_norm(u)));
  }
  EXPECT_THROW(solve_gamma_preimage(oracle::random_twisted(rng, 2, 1, 1)), ValidationError);
}

TEST(ConnAlg, CommutatorFactor) {
  std::mt19937_64 rng(8);
  for (int r = 2; r <= 6; ++r)
    for (int t = 0; t < 5; ++t) {
      const EndoMat u = oracle::random_skew(rng, r, true);
      const CommutatorFactor f = commutator_factor(u);
      EXPECT_TRUE(is_skew_hermitian(f.A, 1e-10));
      EXPECT_TRUE(is_skew_hermitian(f.G, 1e-10));
      EXPECT_LE((f.A * f.G - f.G * f.A - u).norm(), 1e-9 * (1 + u.norm()));
    }
  EXPECT_THROW(commutator_factor(Eigen::MatrixXcd::Identity(2, 2) * cplx(0, 1)), ValidationError);
}

TEST(ConnAlg, GellMannBasis) {
  for (int r = 1; r <= 4; ++r) {
    const auto B = gell_mann_basis(r);
    ASSERT_EQ(static_cast<int>(B.size()), r * r - 1);
    for (size_t i = 0; i < B.size(); ++i) {
      EXPECT_TRUE(is_skew_hermitian(B[i]));
      EXPECT_NEAR(std::abs(B[i].trace()), 0, 1e-14);
      for (size_t j = 0; j < B.size(); ++j)
        EXPECT_NEAR(std::abs((B[i].adjoint() * B[j]).trace() - cplx(i == j ? 1 : 0)), 0, 1e-13);
    }
  }
}

TEST(ConnAlg, EndomorphismTraceAndAdjoint) {
  std::mt19937_64 rng(9);
  const TwistedHarmonic u = oracle::random_twisted(rng, 3, 2, 4);
  const Eigen::Vector3d x(0.2, 0.4, -0.7);
  Eigen::MatrixXcd U(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) U(a, b) = evaluate(u.columns[static_cast<size_t>(a * 2 + b)], x);
  EXPECT_NEAR(std::abs(evaluate(trace_end(u), x) - U.trace()), 0, 1e-13);
  const TwistedHarmonic ua = adjoint_end(u);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      EXPECT_NEAR(std::abs(evaluate(ua.columns[static_cast<size_t>(a * 2 + b)], x) - std::conj(U(b, a))), 0, 1e-13);
  const std::vector<SymTensor> ts{from_poly(u.columns[0]), from_poly(u.columns[1])};
  const auto tr = trace_sym(ts);
  EXPECT_EQ(tr[0].m(), 0);
}

TEST(ConnAlg, PairingWitness) {
  std::mt19937_64 rng(10);
  for (int m = 0; m <= 2; ++m) {
    const TwistedHarmonic u = oracle::random_twisted(rng, 3, m, 4);
    const PairingWitness w = endo_pairing_witness(u);
    EXPECT_NEAR(w.pairing, w.target, 1e-8 * w.target);
    EXPECT_GT(w.target, 0);
  }
}

TEST(ConnAlg, TextRoundTrip) {
  std::mt19937_64 rng(11);
  FiberConnForm G(3, 2);
  for (auto& g : G.gammas) g = oracle::random_skew(rng, 2);
  std::stringstream ss;
  write_connform(ss, G);
  const FiberConnForm H = read_connform(ss);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(G.gammas[static_cast<size_t>(j)], H.gammas[static_cast<size_t>(j)]);
  std::stringstream bad("MATRIX 2 2\n1 0\n");
  EXPECT_THROW(read_matrix(bad), ValidationError);
}
