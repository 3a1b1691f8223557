#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ckt/connalg.hpp"

namespace ckt {

using SpMat = Eigen::SparseMatrix<cplx>;

enum class BundleKind { Vector, Endomorphism };

struct TorusConfig {
  int n = 3;
  int K = 1;
  int m = 0;
  int r = 1;
  BundleKind kind = BundleKind::Vector;

  int fdim() const { return kind == BundleKind::Vector ? r : r * r; }
  int num_modes() const;
  long long basis_dim(int degree) const;
  void validate() const;
};

// Gamma(x) = sum_q exp(i q.x) coeffs[q]; q ranges over integer vectors.
struct FourierConnection {
  int n = 0;
  int r = 0;
  std::map<std::vector<int>, FiberConnForm> coeffs;

  FourierConnection() = default;
  FourierConnection(int n_, int r_);
  static FourierConnection constant(const FiberConnForm& G);

  void add_mode(const std::vector<int>& q, const FiberConnForm& G);
  EndoMat at(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& v) const;
  // skew-Hermitian at every x: coeffs[q]^dagger = -coeffs[-q]
  bool is_unitary(double tol = 1e-12) const;
  void validate(double tol = 1e-12) const;
  FourierConnection scaled(double s) const;
  FourierConnection plus(const FourierConnection& o) const;
  bool is_zero() const;
};

void write_fourier_connection(std::ostream& os, const FourierConnection& c);
FourierConnection read_fourier_connection(std::istream& is);

// Index maps for the basis (mode, harmonic, fiber) of a given degree.
struct TorusIndex {
  TorusConfig config;
  std::vector<std::vector<int>> modes;
  std::map<std::vector<int>, int> mode_lookup;

  explicit TorusIndex(const TorusConfig& c);
  int mode_of(const std::vector<int>& k) const;  // -1 when outside the box
  Eigen::Index flat(int mode, int harmonic, int fiber, int degree) const;
  Eigen::Index dim(int degree) const;
};

struct TorusAssembly {
  TorusConfig config;
  std::vector<std::vector<int>> modes;
  SpMat xplus;          // degree m -> m+1
  SpMat xminus;         // degree m+1 -> m, defined as -xplus^dagger
  SpMat xminus_direct;  // the same operator assembled from its own blocks
  SpMat xminus_down;    // degree m -> m-1 (empty when m = 0)
  int dropped_couplings = 0;

  double adjointness_defect() const;
};

TorusAssembly assemble(const TorusConfig& config, const FourierConnection& conn, bool include_free = true);

// Same operators through the symmetric-tensor route with the lowering constant.
TorusAssembly assemble_via_D(const TorusConfig& config, const FourierConnection& conn);

double max_entry_difference(const SpMat& a, const SpMat& b);

struct NullSpace {
  Eigen::MatrixXcd basis;
  double max_residual = 0;
  double lambda_max = 0;
};

// Null space of X through the Hermitian matrix X^dagger X, split into
// connected components of its sparsity graph.
NullSpace sparse_null_space(const SpMat& X, double rel_tol = 1e-12);

// All eigenvalues of a sparse Hermitian matrix (ascending).
Eigen::VectorXd sparse_hermitian_eigenvalues(const SpMat& H);

struct KernelReport {
  Eigen::MatrixXcd basis;
  std::vector<double> mode_weight;
  double max_residual = 0;
  int dim() const { return static_cast<int>(basis.cols()); }
};

KernelReport ckt_kernel(const TorusAssembly& asm_);

struct SecondVariation {
  std::vector<double> per_element;
  double total = 0;
};

SecondVariation second_variation_predict(const TorusAssembly& asm0, const FourierConnection& A,
                                         const Eigen::MatrixXcd& kernel);

struct ScanRow {
  double s = 0;
  double lambda = 0;
  int kernel_dim = 0;
  int window_count = 0;
  double min_eigenvalue = 0;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  double radius = 0;
  double predicted_total = 0;
  double lambda_dot_fit = 0;
  double lambda_ddot_fit = 0;
  double ratio = 0;  // lambda_ddot_fit / (2 * predicted_total)
  std::string factor;
};

ScanResult lambda_scan(const TorusConfig& config, const FourierConnection& conn0, const FourierConnection& A,
                       const std::vector<double>& s_grid, double window_radius = -1);

void write_scan_csv(std::ostream& os, const ScanResult& res);

// Skew-adjoint generator on the direct sum of degrees 0..config.m.
struct Generator {
  TorusConfig config;
  SpMat X;
  std::vector<Eigen::Index> degree_offset;
};

Generator assemble_generator(const TorusConfig& config, const FourierConnection& conn, bool include_free = true);

// Fiber value of a degree-d coefficient vector at (x, v).
Eigen::VectorXcd evaluate_section(const TorusConfig& config, int degree, const Eigen::Ref<const Eigen::VectorXcd>& c,
                                  const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& v);

Eigen::VectorXcd evaluate_generator_section(const Generator& g, const Eigen::Ref<const Eigen::VectorXcd>& c,
                                            const Eigen::Ref<const Eigen::VectorXd>& x,
                                            const Eigen::Ref<const Eigen::VectorXd>& v);

// Degree-0 coefficients of the identity endomorphism section (constant mode).
Eigen::VectorXcd identity_section(const TorusConfig& config);

// Fiber trace of an endomorphism-bundle coefficient vector, as a scalar one.
Eigen::VectorXcd fiber_trace(const TorusConfig& config, int degree, const Eigen::Ref<const Eigen::VectorXcd>& c);

}  // namespace ckt
