#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "ckt/polyharm.hpp"
#include "ckt/symtensor.hpp"

namespace ckt {

using EndoMat = Eigen::MatrixXcd;

bool is_skew_hermitian(const EndoMat& M, double tol = 1e-12);

// Value of a connection 1-form on the coordinate directions: gammas[j] = G(e_j).
struct FiberConnForm {
  int n = 0;
  int r = 0;
  std::vector<EndoMat> gammas;
  bool unitary = true;

  FiberConnForm() = default;
  FiberConnForm(int n_, int r_, bool unitary_ = true);
  static FiberConnForm single(int n, const EndoMat& A, int direction);

  // G(v) = sum_j v_j G_j
  EndoMat at(const Eigen::Ref<const Eigen::VectorXd>& v) const;
  void validate(double tol = 1e-12) const;
  FiberConnForm& operator+=(const FiberConnForm& o);
  FiberConnForm operator*(cplx s) const;
  bool is_zero() const;
};

// Harmonic polynomials of degree m with values in C^fdim, one polynomial per
// fiber coordinate. For endomorphism fibers, column a*r + b is entry (a, b).
struct TwistedHarmonic {
  int n = 0;
  int m = 0;
  std::vector<HPoly> columns;

  TwistedHarmonic() = default;
  TwistedHarmonic(int n_, int m_, int fdim);
  int fdim() const { return static_cast<int>(columns.size()); }
  bool is_harmonic(double tol = 1e-12) const;
  bool is_zero() const;
  TwistedHarmonic& operator+=(const TwistedHarmonic& o);
  TwistedHarmonic& operator-=(const TwistedHarmonic& o);
  TwistedHarmonic operator*(cplx s) const;
};

cplx twisted_bombieri(const TwistedHarmonic& a, const TwistedHarmonic& b);
cplx twisted_sphere_inner(const TwistedHarmonic& a, const TwistedHarmonic& b);
double twisted_coeff_norm(const TwistedHarmonic& a);

struct SplitResult {
  TwistedHarmonic plus;
  TwistedHarmonic minus;
};

// Splits sum_j v_j L_j f = plus + |v|^2 minus for fiber actions L_j.
SplitResult split_by_actions(const std::vector<EndoMat>& actions, const TwistedHarmonic& f);

SplitResult gamma_split(const FiberConnForm& G, const TwistedHarmonic& f);

// Row-major vectorized commutator action X -> M X - X M.
EndoMat commutator_action(const EndoMat& M);

SplitResult endo_split(const FiberConnForm& A, const TwistedHarmonic& u);

// Scalar raising/lowering matrices for multiplication by v_j in orthonormal
// harmonic bases of degrees m -> m+1 and m -> m-1.
struct CoordinateSplit {
  std::vector<Eigen::MatrixXcd> raise;
  std::vector<Eigen::MatrixXcd> lower;
};
const CoordinateSplit& coordinate_split(int n, int m);

// Index (l, a) -> l * fdim + a.
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B);

struct RankReport {
  Eigen::MatrixXcd matrix;
  Eigen::VectorXd singular_values;
  int rank = 0;
  int nullity = 0;
};

RankReport gamma_minus_matrix(const FiberConnForm& G, int n, int m);

struct GammaPreimage {
  FiberConnForm G;
  TwistedHarmonic w;
};

GammaPreimage solve_gamma_preimage(const TwistedHarmonic& u);

struct CommutatorFactor {
  EndoMat A;
  EndoMat G;
};

CommutatorFactor commutator_factor(const EndoMat& u);

// Frobenius-orthonormal trace-free skew-Hermitian basis (i times generalized Gell-Mann).
std::vector<EndoMat> gell_mann_basis(int r);

HPoly trace_end(const TwistedHarmonic& u);
TwistedHarmonic adjoint_end(const TwistedHarmonic& u);
std::vector<SymTensor> trace_sym(const std::vector<SymTensor>& u);

struct PairingWitness {
  FiberConnForm A;
  TwistedHarmonic w;
  double pairing = 0;
  double target = 0;  // squared Bombieri norm of the chosen component
  int component = -1;
};

PairingWitness endo_pairing_witness(const TwistedHarmonic& u);

void write_matrix(std::ostream& os, const Eigen::MatrixXcd& M);
Eigen::MatrixXcd read_matrix(std::istream& is);
void write_connform(std::ostream& os, const FiberConnForm& G);
FiberConnForm read_connform(std::istream& is);

}  // namespace ckt
