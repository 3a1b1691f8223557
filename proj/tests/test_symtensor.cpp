#include <gtest/gtest.h>

#include <sstream>

#include "ckt/errors.hpp"
#include "ckt/symtensor.hpp"
#include "oracles.hpp"

using namespace ckt;

namespace {

double full_distance(const FullTensor& a, const FullTensor& b) {
  double s = 0;
  for (size_t i = 0; i < a.data.size(); ++i) s += std::norm(a.data[i] - b.data[i]);
  return std::sqrt(s);
}

}  // namespace

TEST(SymTensor, FullRoundTrip) {
  std::mt19937_64 rng(1);
  for (int m = 0; m <= 4; ++m) {
    const SymTensor T = oracle::random_tensor(rng, 3, m);
    EXPECT_LE(oracle::sym_distance(symmetrize(to_full(T)), T), 1e-13);
  }
}

TEST(SymTensor, MultiplicityCount) {
  EXPECT_EQ(multiplicity_count({2, 1, 0}), 3.0);
  EXPECT_EQ(multiplicity_count({1, 1, 1}), 6.0);
  EXPECT_EQ(multiplicity_count({0, 0, 0}), 1.0);
}

TEST(SymTensor, InnerMatchesFull) {
  std::mt19937_64 rng(2);
  for (int m = 0; m <= 4; ++m) {
    const SymTensor a = oracle::random_tensor(rng, 4, m), b = oracle::random_tensor(rng, 4, m);
    EXPECT_NEAR(std::abs(tensor_inner(a, b) - full_inner(to_full(a), to_full(b))), 0, 1e-12);
  }
}

TEST(SymTensor, TraceMatchesBruteForce) {
  std::mt19937_64 rng(3);
  for (int n = 2; n <= 4; ++n)
    for (int m = 2; m <= 5; ++m) {
      const SymTensor T = oracle::random_tensor(rng, n, m);
      EXPECT_LE(oracle::sym_distance(trace(T), symmetrize(oracle::full_trace(to_full(T)))), 1e-12);
    }
}

TEST(SymTensor, JayMatchesBruteForce) {
  std::mt19937_64 rng(4);
  for (int n = 2; n <= 4; ++n)
    for (int m = 0; m <= 3; ++m) {
      const SymTensor S = oracle::random_tensor(rng, n, m);
      EXPECT_LE(oracle::sym_distance(jay(S), symmetrize(oracle::full_metric_product(to_full(S)))), 1e-12);
    }
}

TEST(SymTensor, ContractAndProductMatchBruteForce) {
  std::mt19937_64 rng(5);
  for (int m = 1; m <= 4; ++m) {
    const SymTensor T = oracle::random_tensor(rng, 3, m);
    const Eigen::VectorXd xi = oracle::sphere_point(rng, 3);
    EXPECT_LE(oracle::sym_distance(contract(T, xi), symmetrize(oracle::full_contract(to_full(T), xi))), 1e-12);
    const Eigen::VectorXcd eta = oracle::random_complex(rng, 3, 1).col(0);
    EXPECT_LE(oracle::sym_distance(sym_product(eta, T), symmetrize(oracle::full_outer(eta, to_full(T)))), 1e-12);
  }
}

TEST(SymTensor, AdjointPairs) {
  std::mt19937_64 rng(6);
  const SymTensor T = oracle::random_tensor(rng, 3, 4), S = oracle::random_tensor(rng, 3, 2);
  EXPECT_NEAR(std::abs(tensor_inner(trace(T), S) - tensor_inner(T, jay(S))), 0, 1e-12);
  const SymTensor U = oracle::random_tensor(rng, 3, 3);
  const Eigen::VectorXd xi = oracle::sphere_point(rng, 3);
  EXPECT_NEAR(std::abs(tensor_inner(contract(T, xi), U) - tensor_inner(T, sym_product(xi.cast<cplx>(), U))), 0,
              1e-12);
}

TEST(SymTensor, PolynomialIntertwining) {
  std::mt19937_64 rng(7);
  for (int m = 2; m <= 5; ++m) {
    const SymTensor T = oracle::random_tensor(rng, 3, m);
    const HPoly P = to_poly(T);
    EXPECT_LE(coeff_norm(to_poly(trace(T)) * cplx(m * (m - 1)) - laplace(P)), 1e-11);
    EXPECT_LE(coeff_norm(to_poly(jay(T)) - multiply(radial_power<cplx>(3, 1), P)), 1e-12);
    // polynomial of T is T(x, ..., x)
    const Eigen::VectorXd x = oracle::sphere_point(rng, 3);
    const FullTensor F = to_full(T);
    cplx direct = 0;
    oracle::for_each_tuple(3, m, [&](const std::vector<int>& k) {
      double w = 1;
      for (int i : k) w *= x[i];
      direct += w * F.at(k);
    });
    EXPECT_NEAR(std::abs(direct - evaluate(P, x)), 0, 1e-12);
  }
}

TEST(SymTensor, MetricTensor) {
  const FullTensor g = to_full(metric_tensor(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(g.at({i, j}), cplx(i == j ? 1 : 0));
}

TEST(SymTensor, TracefreeProjection) {
  std::mt19937_64 rng(8);
  for (int m = 2; m <= 4; ++m) {
    const SymTensor T = oracle::random_tensor(rng, 3, m);
    const SymTensor P = tracefree_project(T);
    EXPECT_LE(tensor_norm(trace(P)), 1e-12);
    EXPECT_LE(oracle::sym_distance(tracefree_project(P), P), 1e-12);
    // the removed part lies in the image of jay, orthogonal to trace-free tensors
    const SymTensor Q = oracle::random_tensor(rng, 3, m - 2);
    EXPECT_NEAR(std::abs(tensor_inner(P, jay(Q))), 0, 1e-12);
  }
}

TEST(SymTensor, Bases) {
  for (int n = 2; n <= 4; ++n)
    for (int m = 0; m <= 4; ++m) {
      const Eigen::MatrixXcd B = tracefree_basis(n, m);
      const Eigen::VectorXd w = tensor_metric_weights(n, m);
      EXPECT_EQ(B.cols(), dims(n, m).h);
      const Eigen::MatrixXcd G = B.adjoint() * w.asDiagonal() * B;
      EXPECT_LE((G - Eigen::MatrixXcd::Identity(B.cols(), B.cols())).norm(), 1e-12);
      const Eigen::MatrixXcd F = full_symmetric_basis(n, m);
      EXPECT_EQ(F.cols(), dims(n, m).p);
    }
}

TEST(SymTensor, MatricesAgreeWithOperations) {
  std::mt19937_64 rng(9);
  const SymTensor T = oracle::random_tensor(rng, 3, 4);
  const Eigen::VectorXd xi = oracle::sphere_point(rng, 3);
  EXPECT_LE((trace_matrix(3, 4) * tensor_coords(T) - tensor_coords(trace(T))).norm(), 1e-12);
  EXPECT_LE((contract_matrix(3, 4, xi) * tensor_coords(T) - tensor_coords(contract(T, xi))).norm(), 1e-12);
  const SymTensor S = oracle::random_tensor(rng, 3, 2);
  EXPECT_LE((jay_matrix(3, 2) * tensor_coords(S) - tensor_coords(jay(S))).norm(), 1e-12);
}

TEST(SymTensor, FullTensorDistance) {
  std::mt19937_64 rng(10);
  const SymTensor T = oracle::random_tensor(rng, 2, 3);
  EXPECT_LE(full_distance(to_full(from_poly(to_poly(T))), to_full(T)), 1e-15);
}

TEST(SymTensor, TextRoundTripAndErrors) {
  std::mt19937_64 rng(11);
  const SymTensor T = oracle::random_tensor(rng, 3, 2);
  std::stringstream ss;
  write_symtensor(ss, T);
  EXPECT_LE(oracle::sym_distance(read_symtensor(ss), T), 0.0);
  EXPECT_THROW(contract(SymTensor(3, 0), Eigen::Vector3d(1, 0, 0)), ValidationError);
  EXPECT_THROW(tensor_inner(SymTensor(3, 1), SymTensor(3, 2)), ValidationError);
}
