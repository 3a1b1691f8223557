#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "ckt/polyharm.hpp"

namespace ckt {

// Symmetric m-tensor over R^n. The coefficient at a multiplicity vector theta
// multiplies the symmetrized basis element with that multiplicity.
class SymTensor {
 public:
  using Terms = std::map<MultiIndex, cplx, MonomialOrder>;

  SymTensor() = default;
  SymTensor(int n, int m);

  int n() const { return n_; }
  int m() const { return m_; }
  const Terms& terms() const { return terms_; }
  cplx coeff(const MultiIndex& theta) const;
  void add(const MultiIndex& theta, cplx c);

  SymTensor& operator+=(const SymTensor& o);
  SymTensor& operator-=(const SymTensor& o);
  SymTensor& operator*=(cplx s);
  friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
  friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
  friend SymTensor operator*(SymTensor a, cplx s) { return a *= s; }
  friend SymTensor operator*(cplx s, SymTensor a) { return a *= s; }

 private:
  int n_ = 1;
  int m_ = 0;
  Terms terms_;
};

// Dense tensor with n^m components, index (k1..km) flattened with k1 slowest.
struct FullTensor {
  int n = 0;
  int m = 0;
  std::vector<cplx> data;

  FullTensor(int n_, int m_);
  cplx& at(const std::vector<int>& k);
  cplx at(const std::vector<int>& k) const;
};

// Number of index tuples with multiplicity theta: m! / prod theta_i!.
double multiplicity_count(const MultiIndex& theta);

SymTensor metric_tensor(int n);

SymTensor symmetrize(const FullTensor& T);
FullTensor to_full(const SymTensor& T);

cplx tensor_inner(const SymTensor& a, const SymTensor& b);
double tensor_norm(const SymTensor& a);
cplx full_inner(const FullTensor& a, const FullTensor& b);

SymTensor trace(const SymTensor& T);
SymTensor jay(const SymTensor& T);
SymTensor tracefree_project(const SymTensor& T);
SymTensor contract(const SymTensor& T, const Eigen::Ref<const Eigen::VectorXd>& xi);
// symmetrized product of the 1-form eta with T
SymTensor sym_product(const Eigen::Ref<const Eigen::VectorXcd>& eta, const SymTensor& T);

HPoly to_poly(const SymTensor& T);
SymTensor from_poly(const HPoly& P);

// Coordinates in the multiplicity order (same as the monomial order).
Eigen::VectorXcd tensor_coords(const SymTensor& T);
SymTensor from_tensor_coords(int n, int m, const Eigen::Ref<const Eigen::VectorXcd>& c);

// Diagonal of the tensor metric in multiplicity coordinates.
Eigen::VectorXd tensor_metric_weights(int n, int m);

// Matrices of linear maps in multiplicity coordinates.
Eigen::MatrixXcd trace_matrix(int n, int m);
Eigen::MatrixXcd jay_matrix(int n, int m);
Eigen::MatrixXcd contract_matrix(int n, int m, const Eigen::Ref<const Eigen::VectorXd>& xi);
Eigen::MatrixXcd tracefree_projector(int n, int m);

// Columns: tensor-metric orthonormal basis (multiplicity coordinates).
Eigen::MatrixXcd tracefree_basis(int n, int m);
Eigen::MatrixXcd full_symmetric_basis(int n, int m);

void write_symtensor(std::ostream& os, const SymTensor& T);
SymTensor read_symtensor(std::istream& is);

}  // namespace ckt
