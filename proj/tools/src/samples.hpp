#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "ckt/polyharm.hpp"
#include "ckt/torusmodel.hpp"

namespace ckt::cli {

inline cplx gauss_c(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const double re = g(rng);
  return cplx(re, g(rng));
}

inline HPoly random_poly(std::mt19937_64& rng, int n, int m) {
  HPoly p(n, m);
  for (const auto& a : monomials(n, m)) p.add(a, gauss_c(rng));
  return p;
}

inline Eigen::MatrixXcd random_complex(std::mt19937_64& rng, int rows, int cols) {
  Eigen::MatrixXcd M(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) M(i, j) = gauss_c(rng);
  return M;
}

inline Eigen::MatrixXcd random_skew_tracefree(std::mt19937_64& rng, int r) {
  const Eigen::MatrixXcd M = random_complex(rng, r, r);
  Eigen::MatrixXcd S = 0.5 * (M - M.adjoint());
  S -= (S.trace() / static_cast<double>(r)) * Eigen::MatrixXcd::Identity(r, r);
  return S;
}

// Skew-adjoint d x d matrix with a kernel of dimension k and the remaining
// eigenvalues i*mu with 1 <= |mu| <= 3.
inline Eigen::MatrixXcd random_skew_with_kernel(std::mt19937_64& rng, int d, int k) {
  std::uniform_real_distribution<double> u(1.0, 3.0);
  std::bernoulli_distribution sign;
  const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(random_complex(rng, d, d));
  const Eigen::MatrixXcd Q = qr.householderQ();
  Eigen::VectorXcd D = Eigen::VectorXcd::Zero(d);
  for (int i = k; i < d; ++i) D[i] = cplx(0, sign(rng) ? u(rng) : -u(rng));
  return Q * D.asDiagonal() * Q.adjoint();
}

// The positive ejection case on T^3 with a trivial line bundle: the
// perturbation (i a / 2) dx_1 on the modes +-e_2.
inline FourierConnection ejection_perturbation(int n, int r, double a, int component, int axis,
                                               const Eigen::MatrixXcd& shape) {
  FiberConnForm G(n, r, false);
  G.gammas[static_cast<size_t>(component)] = cplx(0, a / 2) * shape;
  FourierConnection A(n, r);
  std::vector<int> q(static_cast<size_t>(n), 0);
  q[static_cast<size_t>(axis)] = 1;
  A.add_mode(q, G);
  q[static_cast<size_t>(axis)] = -1;
  FiberConnForm Gm(n, r, false);
  Gm.gammas[static_cast<size_t>(component)] = -(cplx(0, a / 2) * shape).adjoint();
  A.add_mode(q, Gm);
  return A;
}

}  // namespace ckt::cli
