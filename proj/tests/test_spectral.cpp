#include <gtest/gtest.h>

#include <sstream>

#include "ckt/errors.hpp"
#include "ckt/spectral.hpp"
#include "oracles.hpp"

using namespace ckt;

namespace {

const cplx I(0, 1);

Eigen::MatrixXcd diag3(cplx a, cplx b, cplx c) {
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(3, 3);
  D(0, 0) = a;
  D(1, 1) = b;
  D(2, 2) = c;
  return D;
}

}  // namespace

TEST(Spectral, DiagonalClosedForms) {
  const SpectralWindow W = spectral_window(diag3(0, I, -I), 0.5);
  EXPECT_LE((W.pi0_plus - diag3(1, 0, 0)).norm(), 1e-12);
  EXPECT_LE((W.pi0_minus - diag3(1, 0, 0)).norm(), 1e-12);
  EXPECT_LE((W.r0_plus - diag3(0, -I, I)).norm(), 1e-12);
  EXPECT_LE((W.r0_minus - diag3(0, I, -I)).norm(), 1e-12);
  EXPECT_LE(W.eigenprojector_defect, 1e-12);
}

TEST(Spectral, NonNormalIdempotent) {
  Eigen::MatrixXcd X(2, 2);
  X << 0, 1, 0, 1;
  const SpectralWindow W = spectral_window(X, 0.5);
  const Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(2, 2) - X;
  EXPECT_LE((W.pi0_plus - P).norm(), 1e-12);
  EXPECT_LE((W.pi0_minus - P).norm(), 1e-12);
  EXPECT_LE((W.r0_plus - X).norm(), 1e-12);
  EXPECT_LE((W.r0_minus + X).norm(), 1e-12);
  EXPECT_LE(pi_operator(W).norm(), 1e-12);
  EXPECT_LE((eigenprojector(X, 0.5) - P).norm(), 1e-12);
}

TEST(Spectral, ResolventIdentitiesOnRandomMatrices) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 5; ++t) {
    Eigen::MatrixXcd X = oracle::random_complex(rng, 8, 8);
    // shift so one eigenvalue sits at zero
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(X);
    X -= es.eigenvalues()[0] * Eigen::MatrixXcd::Identity(8, 8);
    double gap = 1e300;
    for (int i = 1; i < 8; ++i) gap = std::min(gap, std::abs(es.eigenvalues()[i] - es.eigenvalues()[0]));
    const SpectralWindow W = spectral_window(X, 0.5 * gap);
    EXPECT_LE(resolvent_identity_check(W), 1e-8);
    EXPECT_LE(pi_operator(W).norm(), 1e-9);
    EXPECT_LE((W.pi0_plus - eigenprojector(X, 0.5 * gap)).norm(), 1e-8);
    EXPECT_NEAR(W.pi0_plus.trace().real(), 1.0, 1e-9);
  }
}

TEST(Spectral, ContourOnSpectrumThrows) {
  EXPECT_THROW(spectral_window(diag3(0, I, -I), 1.0), ValidationError);
}

TEST(Spectral, ClusterTrace) {
  const ClusterTrace t = cluster_trace(diag3(0.1 * I, 5.0 * I, -0.2 * I), 1.0);
  EXPECT_NEAR(t.count, 2.0, 1e-12);
  EXPECT_NEAR(std::abs(t.lambda_plus - 0.1 * I), 0, 1e-12);
  EXPECT_NEAR(std::abs(t.lambda_minus + 0.1 * I), 0, 1e-12);
}

TEST(Spectral, TwoByTwoDerivatives) {
  // eigenvalue near 0 of diag(0, a) + s P has mu' = p11, mu'' = -2 p12 p21 / a
  const cplx a(0.3, 1.7);
  Eigen::MatrixXcd X = Eigen::MatrixXcd::Zero(2, 2);
  X(1, 1) = a;
  Eigen::MatrixXcd P(2, 2);
  P << cplx(0.4, -0.2), cplx(1.1, 0.3), cplx(-0.7, 0.5), cplx(0.2, 0.9);
  const LambdaDerivatives d = lambda_derivatives(X, P, 0.5);
  EXPECT_NEAR(std::abs(d.dot_closed + P(0, 0)), 0, 1e-10);
  EXPECT_NEAR(std::abs(d.ddot_closed - 2.0 * P(0, 1) * P(1, 0) / a), 0, 1e-10);
  EXPECT_NEAR(std::abs(d.dot_fd - d.dot_closed), 0, 1e-7);
  EXPECT_NEAR(std::abs(d.ddot_fd - d.ddot_closed), 0, 1e-6);
  EXPECT_GT(d.step, 0);
}

TEST(Spectral, SkewPerturbationOfSkewGenerator) {
  std::mt19937_64 rng(2);
  Eigen::MatrixXcd X = Eigen::MatrixXcd::Zero(6, 6);
  const Eigen::VectorXd mu = (Eigen::VectorXd(6) << 0, 0, 1.2, -1.5, 2.0, -2.5).finished();
  const Eigen::MatrixXcd U = oracle::skew_exp(oracle::random_skew(rng, 6), 1.0);
  X = U * (I * mu.cast<cplx>()).asDiagonal() * U.adjoint();
  const Eigen::MatrixXcd P = oracle::random_skew(rng, 6);
  const LambdaDerivatives d = lambda_derivatives(X, P, 0.6);
  EXPECT_LE(std::abs(d.ddot_fd - d.ddot_closed), 1e-6 * (1 + std::abs(d.ddot_closed)));
  EXPECT_LE(conjugation_check(X, P, {-0.05, 0.0, 0.05}, 0.6), 1e-10);
}

TEST(Spectral, DerivativesCsv) {
  std::ostringstream os;
  write_derivatives_csv(os, {LambdaDerivatives{}});
  EXPECT_EQ(os.str().rfind("index,step,", 0), 0u);
}
