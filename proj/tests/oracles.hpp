#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/multiprecision/cpp_int.hpp>

#include "ckt/connalg.hpp"
#include "ckt/polynomial.hpp"
#include "ckt/symtensor.hpp"
#include "ckt/torusmodel.hpp"

namespace oracle {

using ckt::cplx;
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;
using RPoly = ckt::Poly<Rational>;

inline RPoly random_int_poly(std::mt19937_64& rng, int n, int m, int range = 9) {
  std::uniform_int_distribution<int> u(-range, range);
  RPoly p(n, m);
  for (const auto& a : ckt::monomials(n, m)) p.add(a, Rational(u(rng)));
  return p;
}

inline ckt::HPoly to_complex(const RPoly& p) {
  ckt::HPoly out(p.n(), p.m());
  for (const auto& [a, c] : p.terms()) out.add(a, cplx(c.convert_to<double>()));
  return out;
}

// Exact rank by Gaussian elimination.
inline int rational_rank(std::vector<std::vector<Rational>> A) {
  const size_t rows = A.size();
  const size_t cols = rows ? A[0].size() : 0;
  size_t rank = 0;
  for (size_t c = 0; c < cols && rank < rows; ++c) {
    size_t piv = rank;
    while (piv < rows && A[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(A[piv], A[rank]);
    for (size_t r = 0; r < rows; ++r) {
      if (r == rank || A[r][c] == 0) continue;
      const Rational f = A[r][c] / A[rank][c];
      for (size_t k = c; k < cols; ++k) A[r][k] -= f * A[rank][k];
    }
    ++rank;
  }
  return static_cast<int>(rank);
}

// Nullity of the Laplacian on homogeneous polynomials of degree m, exactly.
inline long long laplacian_nullity(int n, int m) {
  const auto mons = ckt::monomials(n, m);
  if (m < 2) return static_cast<long long>(mons.size());
  const auto low = ckt::monomials(n, m - 2);
  std::vector<std::vector<Rational>> A(low.size(), std::vector<Rational>(mons.size(), Rational(0)));
  for (size_t j = 0; j < mons.size(); ++j) {
    const RPoly lp = ckt::laplace(RPoly::monomial(mons[j]));
    for (size_t i = 0; i < low.size(); ++i) A[i][j] = lp.coeff(low[i]);
  }
  return static_cast<long long>(mons.size()) - rational_rank(A);
}

inline void for_each_tuple(int n, int m, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> k(static_cast<size_t>(m), 0);
  while (true) {
    f(k);
    int i = m - 1;
    while (i >= 0 && ++k[static_cast<size_t>(i)] == n) k[static_cast<size_t>(i--)] = 0;
    if (i < 0) return;
  }
}

// Brute-force operations on dense n^m tensors.
inline ckt::FullTensor full_trace(const ckt::FullTensor& T) {
  ckt::FullTensor out(T.n, T.m - 2);
  for_each_tuple(T.n, T.m - 2, [&](const std::vector<int>& k) {
    cplx s = 0;
    for (int i = 0; i < T.n; ++i) {
      std::vector<int> idx{i, i};
      idx.insert(idx.end(), k.begin(), k.end());
      s += T.at(idx);
    }
    out.at(k) = s;
  });
  return out;
}

inline ckt::FullTensor full_metric_product(const ckt::FullTensor& T) {
  ckt::FullTensor out(T.n, T.m + 2);
  for_each_tuple(T.n, T.m + 2, [&](const std::vector<int>& k) {
    if (k[0] != k[1]) return;
    out.at(k) = T.at(std::vector<int>(k.begin() + 2, k.end()));
  });
  return out;
}

inline ckt::FullTensor full_contract(const ckt::FullTensor& T, const Eigen::VectorXd& xi) {
  ckt::FullTensor out(T.n, T.m - 1);
  for_each_tuple(T.n, T.m - 1, [&](const std::vector<int>& k) {
    cplx s = 0;
    for (int i = 0; i < T.n; ++i) {
      std::vector<int> idx{i};
      idx.insert(idx.end(), k.begin(), k.end());
      s += xi[i] * T.at(idx);
    }
    out.at(k) = s;
  });
  return out;
}

inline ckt::FullTensor full_outer(const Eigen::VectorXcd& eta, const ckt::FullTensor& T) {
  ckt::FullTensor out(T.n, T.m + 1);
  for_each_tuple(T.n, T.m + 1, [&](const std::vector<int>& k) {
    out.at(k) = eta[k[0]] * T.at(std::vector<int>(k.begin() + 1, k.end()));
  });
  return out;
}

inline ckt::SymTensor random_tensor(std::mt19937_64& rng, int n, int m) {
  std::normal_distribution<double> g;
  ckt::SymTensor T(n, m);
  for (const auto& a : ckt::monomials(n, m)) T.add(a, cplx(g(rng), g(rng)));
  return T;
}

inline double sym_distance(const ckt::SymTensor& a, const ckt::SymTensor& b) {
  return ckt::tensor_coords(a - b).norm();
}

inline Eigen::VectorXd sphere_point(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v / v.norm();
}

inline double sphere_area(int n) { return 2 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0); }

inline Eigen::MatrixXcd random_complex(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd M(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) M(i, j) = cplx(g(rng), g(rng));
  return M;
}

inline Eigen::MatrixXcd random_skew(std::mt19937_64& rng, int r, bool tracefree = false) {
  const Eigen::MatrixXcd M = random_complex(rng, r, r);
  Eigen::MatrixXcd S = 0.5 * (M - M.adjoint());
  if (tracefree) S -= (S.trace() / static_cast<double>(r)) * Eigen::MatrixXcd::Identity(r, r);
  return S;
}

inline ckt::TwistedHarmonic random_twisted(std::mt19937_64& rng, int n, int m, int fdim) {
  ckt::TwistedHarmonic u(n, m, fdim);
  const auto& B = ckt::harmonic_basis(n, m);
  for (auto& col : u.columns) col = B.combine(random_complex(rng, B.size(), 1).col(0));
  return u;
}

// exp(t S) for skew-Hermitian S through its unitary eigendecomposition.
inline Eigen::MatrixXcd skew_exp(const Eigen::MatrixXcd& S, double t) {
  const Eigen::MatrixXcd H = cplx(0, -1) * S;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (H + H.adjoint()));
  Eigen::VectorXcd d(S.rows());
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::exp(cplx(0, t * es.eigenvalues()[i]));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

// Random FourierConnection with constant part and one pair of modes +-q.
inline ckt::FourierConnection random_connection(std::mt19937_64& rng, int n, int r, const std::vector<int>& q) {
  ckt::FourierConnection c(n, r);
  ckt::FiberConnForm G0(n, r);
  for (auto& g : G0.gammas) g = random_skew(rng, r);
  c.add_mode(std::vector<int>(static_cast<size_t>(n), 0), G0);
  ckt::FiberConnForm Gp(n, r, false), Gm(n, r, false);
  for (int j = 0; j < n; ++j) {
    Gp.gammas[static_cast<size_t>(j)] = random_complex(rng, r, r);
    Gm.gammas[static_cast<size_t>(j)] = -Gp.gammas[static_cast<size_t>(j)].adjoint();
  }
  std::vector<int> mq(q.size());
  for (size_t i = 0; i < q.size(); ++i) mq[i] = -q[i];
  c.add_mode(q, Gp);
  c.add_mode(mq, Gm);
  return c;
}

// (i a / 2) dx_1 on the modes +-e_2, the standard ejection perturbation.
inline ckt::FourierConnection ejection(int n, int r, double a, const Eigen::MatrixXcd& shape) {
  ckt::FiberConnForm Gp(n, r, false), Gm(n, r, false);
  Gp.gammas[0] = cplx(0, a / 2) * shape;
  Gm.gammas[0] = -Gp.gammas[0].adjoint();
  ckt::FourierConnection A(n, r);
  std::vector<int> q(static_cast<size_t>(n), 0);
  q[1] = 1;
  A.add_mode(q, Gp);
  q[1] = -1;
  A.add_mode(q, Gm);
  return A;
}

}  // namespace oracle
