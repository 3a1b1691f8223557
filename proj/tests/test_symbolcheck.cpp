#include <gtest/gtest.h>

#include <sstream>

#include "ckt/errors.hpp"
#include "ckt/symbolcheck.hpp"
#include "oracles.hpp"

using namespace ckt;

namespace {

Eigen::MatrixXd random_rotation(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  Eigen::MatrixXd Q = qr.householderQ();
  if (Q.determinant() < 0) Q.col(0) *= -1;
  return Q;
}

HPoly mono(std::initializer_list<int> a) { return HPoly::monomial(MultiIndex(a)); }

}  // namespace

TEST(Symbol, KernelDimensions) {
  std::mt19937_64 rng(1);
  for (int n = 3; n <= 4; ++n)
    for (int m = 1; m <= 3; ++m) {
      const Eigen::VectorXd xi = oracle::sphere_point(rng, n);
      const Eigen::MatrixXcd S = symbol_dstar(n, m, xi);
      EXPECT_EQ(S.cols(), dims(n, m).h);
      EXPECT_EQ(S.rows(), dims(n, m - 1).h);
      const Eigen::MatrixXcd K = kernel_basis(S);
      EXPECT_EQ(K.cols(), dims(n, m).h - dims(n, m - 1).h);
      EXPECT_LE((S * K).norm(), 1e-10);
      EXPECT_LE((K.adjoint() * K - Eigen::MatrixXcd::Identity(K.cols(), K.cols())).norm(), 1e-10);
      const Eigen::MatrixXcd F = symbol_dstar(n, m, xi, TensorModel::Full);
      EXPECT_EQ(kernel_basis(F).cols(), dims(n, m).p - dims(n, m - 1).p);
    }
}

TEST(Symbol, RotationEquivariance) {
  std::mt19937_64 rng(2);
  for (int m = 1; m <= 3; ++m)
    for (TensorModel model : {TensorModel::TraceFree, TensorModel::Full}) {
      const Eigen::MatrixXd R = random_rotation(rng, 3);
      const Eigen::VectorXd xi = oracle::sphere_point(rng, 3);
      const Eigen::MatrixXcd lhs = tensor_rotation(3, m - 1, R, model) * symbol_dstar(3, m, xi, model);
      const Eigen::MatrixXcd rhs = symbol_dstar(3, m, R * xi, model) * tensor_rotation(3, m, R, model);
      EXPECT_LE((lhs - rhs).norm(), 1e-10);
      const Eigen::MatrixXcd U = tensor_rotation(3, m, R, model);
      EXPECT_LE((U.adjoint() * U - Eigen::MatrixXcd::Identity(U.cols(), U.cols())).norm(), 1e-10);
    }
}

TEST(Symbol, FirstOrderIsDivergence) {
  const Eigen::Vector3d xi(0, 0.6, 0.8);
  const Eigen::MatrixXcd S = symbol_dstar(3, 1, xi, TensorModel::Full);
  // degree-1 orthonormal basis is e_i up to sign and phase, so singular values are |xi|
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S);
  EXPECT_NEAR(svd.singularValues()[0], 1.0, 1e-12);
}

TEST(Symbol, Verdicts) {
  EXPECT_EQ(uniform_span(dstar_family(3, 2), CosphereSampler(3, 1), 64).verdict, Verdict::Uniform);
  EXPECT_EQ(uniform_span(dstar_family(2, 2), CosphereSampler(2, 1), 64).verdict, Verdict::Elliptic);
  EXPECT_EQ(uniform_span(dstar_family(3, 2, TensorModel::Full), CosphereSampler(3, 1), 64).verdict,
            Verdict::Uniform);
  EXPECT_EQ(uniform_span(divergence_family(3), CosphereSampler(3, 1), 64).verdict, Verdict::Uniform);
  const SpanReport ce = uniform_span(counterexample_family(3, 2), CosphereSampler(3, 1), 64);
  EXPECT_EQ(ce.verdict, Verdict::NotUniform);
  EXPECT_EQ(ce.span_dim, 2);
  EXPECT_TRUE(ce.converged);
  for (int k = 1; k < 4; ++k) EXPECT_EQ(forms_contraction_span(4, k).verdict, Verdict::Uniform);
  EXPECT_EQ(forms_contraction_span(4, 4).verdict, Verdict::Elliptic);
  EXPECT_TRUE(dstar_family(2, 1).edge_case);
}

TEST(Symbol, VerdictStableUnderDoubling) {
  for (int n = 3; n <= 4; ++n) {
    const auto a = uniform_span(dstar_family(n, 3), CosphereSampler(n, 7), 64);
    const auto b = uniform_span(dstar_family(n, 3), CosphereSampler(n, 7), 128);
    EXPECT_EQ(a.verdict, b.verdict);
    EXPECT_EQ(a.span_dim, b.span_dim);
  }
}

TEST(Symbol, SpanCsv) {
  std::ostringstream os;
  write_span_csv(os, uniform_span(divergence_family(3), CosphereSampler(3, 1), 8));
  EXPECT_EQ(os.str().rfind("index,kernel_dim,span_dim\n", 0), 0u);
  EXPECT_NE(os.str().find("verdict=uniform"), std::string::npos);
}

TEST(Symbol, SamplerOnSphere) {
  const CosphereSampler s(4, 3);
  for (int i = 0; i < 50; ++i) EXPECT_NEAR(s(i).norm(), 1.0, 1e-14);
}

TEST(Quadrature, ExactForLowMoments) {
  for (int d = 1; d <= 3; ++d) {
    const SphereQuadrature Q = sphere_quadrature(d, 2000);
    const int n = d + 1;
    for (const MultiIndex& a : {MultiIndex(n, 0), [&] { MultiIndex b(n, 0); b[0] = 2; b[n - 1] += 2; return b; }(),
                                [&] { MultiIndex b(n, 0); b[n - 1] = 4; return b; }()}) {
      double s = 0;
      for (size_t i = 0; i < Q.nodes.size(); ++i) {
        double v = Q.weights[i];
        for (int k = 0; k < n; ++k) v *= std::pow(Q.nodes[i][k], a[static_cast<size_t>(k)]);
        s += v;
      }
      EXPECT_NEAR(s, sphere_monomial_moment(a, n), 1e-10);
    }
  }
}

TEST(Subsphere, ComponentsOfSimplePolynomials) {
  const Eigen::Vector3d e3(0, 0, 1);
  TwistedHarmonic f(3, 1, 1);
  f.columns[0] = mono({1, 0, 0});
  EXPECT_NEAR(subsphere_component_norm2(f, e3, 1), std::numbers::pi, 1e-12);
  EXPECT_NEAR(subsphere_component_norm2(f, e3, 0), 0, 1e-12);
  TwistedHarmonic g(3, 2, 1);
  g.columns[0] = mono({2, 0, 0});
  // x^2 = 1/2 + cos(2 theta)/2 on the unit circle
  EXPECT_NEAR(subsphere_component_norm2(g, e3, 0), std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(subsphere_component_norm2(g, e3, 2), std::numbers::pi / 4, 1e-12);
  // x_3 vanishes on the sub-sphere
  g.columns[0] = mono({0, 1, 1});
  EXPECT_NEAR(subsphere_component_norm2(g, e3, 1), 0, 1e-12);
}

TEST(Subsphere, ComponentMatchesQuadrature) {
  std::mt19937_64 rng(4);
  TwistedHarmonic f(3, 3, 2);
  for (auto& c : f.columns) c = oracle::to_complex(oracle::random_int_poly(rng, 3, 3));
  const Eigen::VectorXd xi = oracle::sphere_point(rng, 3);
  const TwistedHarmonic c1 = subsphere_component(f, xi, 1);
  const Eigen::MatrixXd W = orthogonal_complement(xi);
  EXPECT_LE((W.transpose() * xi).norm(), 1e-14);
  const SphereQuadrature Q = sphere_quadrature(1, 256);
  double s = 0;
  for (size_t i = 0; i < Q.nodes.size(); ++i) {
    const Eigen::VectorXd x = W * Q.nodes[i];
    for (const auto& col : c1.columns) s += Q.weights[i] * std::norm(evaluate(col, x));
  }
  EXPECT_NEAR(s, subsphere_component_norm2(f, xi, 1), 1e-10);
}

TEST(Pairing, QuadratureMatchesMoments) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    const int r = 2;
    const TwistedHarmonic u = oracle::random_twisted(rng, 3, 1 + t % 2, r * r);
    FiberConnForm A(3, r);
    for (auto& g : A.gammas) g = oracle::random_skew(rng, r, true);
    std::vector<EndoMat> acts;
    for (const auto& g : A.gammas) acts.push_back(commutator_action(g));
    const TwistedHarmonic f = apply_form(acts, u);
    const Eigen::VectorXd xi = oracle::sphere_point(rng, 3) * 1.7;
    const int m0 = t % 3;
    const TwistedHarmonic Am0 = subsphere_component(f, xi, m0);
    const PairingResult p = fiber_symbol_pairing(A, u, Am0, xi, 10000);
    const double expected = 2 * std::numbers::pi / xi.norm() * subsphere_component_norm2(f, xi, m0);
    EXPECT_NEAR(p.value.real(), expected, 1e-9 * (1 + expected));
    EXPECT_NEAR(p.value.imag(), 0, 1e-9 * (1 + expected));
  }
}

TEST(Pairing, RejectsBadInput) {
  const TwistedHarmonic u(2, 1, 4);
  EXPECT_THROW(fiber_symbol_pairing(FiberConnForm(2, 2), u, u, Eigen::Vector2d(1, 0), 100), ValidationError);
  EXPECT_THROW(forms_family(3, 4), ValidationError);
}
