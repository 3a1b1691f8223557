#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ckt/polynomial.hpp"

namespace ckt {

using cplx = std::complex<double>;
using HPoly = Poly<cplx>;

struct Dims {
  long long p = 0;
  long long h = 0;
};

// Checked binomial coefficient; zero outside 0 <= k <= n. Throws OverflowError.
long long binomial(long long n, long long k);

// p = dim of homogeneous polynomials, h = dim of harmonic ones.
Dims dims(int n, int m);

// The differential operator of P applied to Q; degree m(Q) - m(P).
HPoly apply_diff(const HPoly& P, const HPoly& Q);

// sum_a a! p_a conj(q_a)
cplx bombieri_inner(const HPoly& P, const HPoly& Q);
double bombieri_norm(const HPoly& P);

// Euclidean norm of the coefficient vector.
double coeff_norm(const HPoly& P);

double sphere_monomial_moment(const MultiIndex& alpha, int n);

// Integral of P * conj(Q) over the unit sphere.
cplx sphere_inner(const HPoly& P, const HPoly& Q);

cplx evaluate(const HPoly& P, const Eigen::Ref<const Eigen::VectorXd>& v);
cplx evaluate(const HPoly& P, const Eigen::Ref<const Eigen::VectorXcd>& v);

// Q(w) = P(L w) where L is n x k; the result lives in k variables.
HPoly compose_linear(const HPoly& P, const Eigen::MatrixXd& L);

struct HarmonicBasis {
  int n = 0;
  int m = 0;
  std::vector<HPoly> members;

  int size() const { return static_cast<int>(members.size()); }
  // coordinates of a harmonic polynomial of degree m
  Eigen::VectorXcd coords(const HPoly& P) const;
  HPoly combine(const Eigen::Ref<const Eigen::VectorXcd>& c) const;
};

// Sphere-orthonormal basis of harmonic polynomials; memoized per (n, m).
const HarmonicBasis& harmonic_basis(int n, int m);

// f in H_{m+1} with d f / d v_j = c p (j is 0-based). Throws ValidationError
// when the system has no solution.
HPoly harmonic_antiderivative(const HPoly& p, int j, cplx c);

bool is_harmonic(const HPoly& P, double tol = 1e-12);

// Matrix of coefficients in the monomial order for degree m.
Eigen::VectorXcd monomial_coords(const HPoly& P);
HPoly from_monomial_coords(int n, int m, const Eigen::Ref<const Eigen::VectorXcd>& c);

void write_hpoly(std::ostream& os, const HPoly& P);
HPoly read_hpoly(std::istream& is);

std::string format_double(double x);
double parse_double(const std::string& s);

}  // namespace ckt
