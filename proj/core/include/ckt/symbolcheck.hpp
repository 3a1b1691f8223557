#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ckt/connalg.hpp"

namespace ckt {

enum class TensorModel { TraceFree, Full };

// Symbol of the symmetric-tensor divergence at a unit covector: -i times
// contraction, in orthonormal bases of degree m and m-1 tensors.
Eigen::MatrixXcd symbol_dstar(int n, int m, const Eigen::Ref<const Eigen::VectorXd>& xi,
                              TensorModel model = TensorModel::TraceFree);

// Representation of a rotation R on degree-m tensors in the same basis as symbol_dstar.
Eigen::MatrixXcd tensor_rotation(int n, int m, const Eigen::MatrixXd& R, TensorModel model = TensorModel::TraceFree);

// Orthonormal basis of vectors with singular value <= tol * sigma_max.
Eigen::MatrixXcd kernel_basis(const Eigen::MatrixXcd& M, double tol = 1e-10);

struct SymbolFamily {
  std::string name;
  int n = 0;
  int domain_dim = 0;
  int codomain_dim = 0;
  std::function<Eigen::MatrixXcd(const Eigen::VectorXd&)> evaluate;
  bool edge_case = false;
};

SymbolFamily dstar_family(int n, int m, TensorModel model = TensorModel::TraceFree);
SymbolFamily divergence_family(int n);
SymbolFamily counterexample_family(int n, int r);
SymbolFamily forms_family(int n, int k);

// Deterministic quasi-uniform points on the unit sphere in R^n.
class CosphereSampler {
 public:
  CosphereSampler(int n, std::uint64_t seed);
  Eigen::VectorXd operator()(int index) const;
  int n() const { return n_; }

 private:
  int n_;
  std::vector<double> offset_;
  std::vector<double> alpha_;
};

enum class Verdict { Uniform, NotUniform, Elliptic };
std::string to_string(Verdict v);

struct SpanReport {
  std::string family;
  int sampled_count = 0;
  std::vector<int> kernel_dims;
  std::vector<int> span_dims;
  int span_dim = 0;
  int fiber_dim = 0;
  Verdict verdict = Verdict::NotUniform;
  bool converged = false;
  int stable_after = 0;
  bool edge_case = false;
};

SpanReport uniform_span(const SymbolFamily& family, const CosphereSampler& sampler, int N);

SpanReport forms_contraction_span(int n, int k, int N = 64, std::uint64_t seed = 1);

void write_span_csv(std::ostream& os, const SpanReport& rep);

// sum_j v_j L_j f without splitting; the result need not be harmonic.
TwistedHarmonic apply_form(const std::vector<EndoMat>& actions, const TwistedHarmonic& f);

// Orthonormal basis of the orthogonal complement of xi (n x (n-1)).
Eigen::MatrixXd orthogonal_complement(const Eigen::Ref<const Eigen::VectorXd>& xi);

// The degree-m0 harmonic component of f restricted to the sub-sphere
// orthogonal to xi0, extended to R^n constantly along xi0.
TwistedHarmonic subsphere_component(const TwistedHarmonic& f, const Eigen::Ref<const Eigen::VectorXd>& xi0,
                                    int m0);

// L2 norm squared of that component on the sub-sphere, computed from moments.
double subsphere_component_norm2(const TwistedHarmonic& f, const Eigen::Ref<const Eigen::VectorXd>& xi0, int m0);

struct SphereQuadrature {
  std::vector<Eigen::VectorXd> nodes;
  std::vector<double> weights;
};

// Quadrature on the unit sphere of R^{d+1} with roughly N nodes, exact for
// polynomials of low degree.
SphereQuadrature sphere_quadrature(int d, int N);

struct PairingResult {
  cplx value;
  double error_estimate = 0;
  int nodes = 0;
};

PairingResult fiber_symbol_pairing(const FiberConnForm& A1, const TwistedHarmonic& u, const TwistedHarmonic& Am0,
                                   const Eigen::Ref<const Eigen::VectorXd>& xi0, int Nq);

}  // namespace ckt
