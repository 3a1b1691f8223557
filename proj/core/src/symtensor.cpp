#include "ckt/symtensor.hpp"

#include <cmath>
#include <istream>
#include <ostream>

namespace ckt {

SymTensor::SymTensor(int n, int m) : n_(n), m_(m) {
  if (n < 1) throw ValidationError("tensor needs n >= 1");
}

cplx SymTensor::coeff(const MultiIndex& theta) const {
  auto it = terms_.find(theta);
  return it == terms_.end() ? cplx(0) : it->second;
}

void SymTensor::add(const MultiIndex& theta, cplx c) {
  if (static_cast<int>(theta.size()) != n_ || degree_of(theta) != m_)
    throw ValidationError("multiplicity vector does not match tensor shape");
  auto [it, fresh] = terms_.try_emplace(theta, c);
  if (!fresh) it->second += c;
  if (it->second == cplx(0)) terms_.erase(it);
}

SymTensor& SymTensor::operator+=(const SymTensor& o) {
  if (o.n_ != n_ || o.m_ != m_) throw ValidationError("tensor shape mismatch");
  for (const auto& [t, c] : o.terms_) add(t, c);
  return *this;
}

SymTensor& SymTensor::operator-=(const SymTensor& o) {
  if (o.n_ != n_ || o.m_ != m_) throw ValidationError("tensor shape mismatch");
  for (const auto& [t, c] : o.terms_) add(t, -c);
  return *this;
}

SymTensor& SymTensor::operator*=(cplx s) {
  if (s == cplx(0)) terms_.clear();
  for (auto& [t, c] : terms_) c *= s;
  return *this;
}

FullTensor::FullTensor(int n_, int m_) : n(n_), m(m_) {
  size_t sz = 1;
  for (int i = 0; i < m; ++i) sz *= static_cast<size_t>(n);
  data.assign(sz, cplx(0));
}

static size_t flat_index(int n, const std::vector<int>& k) {
  size_t idx = 0;
  for (int x : k) idx = idx * static_cast<size_t>(n) + static_cast<size_t>(x);
  return idx;
}

cplx& FullTensor::at(const std::vector<int>& k) { return data[flat_index(n, k)]; }
cplx FullTensor::at(const std::vector<int>& k) const { return data[flat_index(n, k)]; }

double multiplicity_count(const MultiIndex& theta) {
  double r = 1.0;
  int run = 0;
  for (int t : theta)
    for (int i = 1; i <= t; ++i) {
      ++run;
      r = r * run / i;
    }
  return r;
}

static MultiIndex multiplicity_of(int n, const std::vector<int>& k) {
  MultiIndex theta(n, 0);
  for (int x : k) ++theta[x];
  return theta;
}

template <class F>
static void for_each_tuple(int n, int m, F&& f) {
  std::vector<int> k(m, 0);
  if (m == 0) {
    f(k);
    return;
  }
  while (true) {
    f(k);
    int i = m - 1;
    while (i >= 0 && ++k[i] == n) k[i--] = 0;
    if (i < 0) break;
  }
}

SymTensor metric_tensor(int n) {
  SymTensor g(n, 2);
  for (int i = 0; i < n; ++i) {
    MultiIndex t(n, 0);
    t[i] = 2;
    g.add(t, 1.0);
  }
  return g;
}

SymTensor symmetrize(const FullTensor& T) {
  SymTensor out(T.n, T.m);
  for_each_tuple(T.n, T.m, [&](const std::vector<int>& k) {
    const cplx c = T.at(k);
    if (c != cplx(0)) out.add(multiplicity_of(T.n, k), c);
  });
  return out;
}

FullTensor to_full(const SymTensor& T) {
  FullTensor out(T.n(), T.m());
  for_each_tuple(T.n(), T.m(), [&](const std::vector<int>& k) {
    const MultiIndex theta = multiplicity_of(T.n(), k);
    out.at(k) = T.coeff(theta) / multiplicity_count(theta);
  });
  return out;
}

cplx tensor_inner(const SymTensor& a, const SymTensor& b) {
  if (a.n() != b.n() || a.m() != b.m()) throw ValidationError("tensor shape mismatch");
  cplx s = 0;
  for (const auto& [t, c] : a.terms()) s += c * std::conj(b.coeff(t)) / multiplicity_count(t);
  return s;
}

double tensor_norm(const SymTensor& a) { return std::sqrt(std::max(0.0, tensor_inner(a, a).real())); }

cplx full_inner(const FullTensor& a, const FullTensor& b) {
  if (a.data.size() != b.data.size()) throw ValidationError("tensor shape mismatch");
  cplx s = 0;
  for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * std::conj(b.data[i]);
  return s;
}

SymTensor trace(const SymTensor& T) {
  const int n = T.n();
  const int m = T.m();
  SymTensor out(n, m - 2);
  if (m < 2) return out;
  for (const auto& [theta, c] : T.terms())
    for (int i = 0; i < n; ++i) {
      if (theta[i] < 2) continue;
      MultiIndex low = theta;
      low[i] -= 2;
      out.add(low, c * multiplicity_count(low) / multiplicity_count(theta));
    }
  return out;
}

SymTensor jay(const SymTensor& T) {
  const int n = T.n();
  SymTensor out(n, T.m() + 2);
  for (const auto& [theta, c] : T.terms())
    for (int i = 0; i < n; ++i) {
      MultiIndex up = theta;
      up[i] += 2;
      out.add(up, c);
    }
  return out;
}

SymTensor contract(const SymTensor& T, const Eigen::Ref<const Eigen::VectorXd>& xi) {
  if (T.m() < 1) throw ValidationError("contract requires m >= 1");
  if (xi.size() != T.n()) throw ValidationError("contract: covector dimension mismatch");
  SymTensor out(T.n(), T.m() - 1);
  for (const auto& [theta, c] : T.terms())
    for (int i = 0; i < T.n(); ++i) {
      if (theta[i] < 1 || xi[i] == 0.0) continue;
      MultiIndex low = theta;
      low[i] -= 1;
      out.add(low, c * xi[i] * multiplicity_count(low) / multiplicity_count(theta));
    }
  return out;
}

SymTensor sym_product(const Eigen::Ref<const Eigen::VectorXcd>& eta, const SymTensor& T) {
  if (eta.size() != T.n()) throw ValidationError("sym_product: covector dimension mismatch");
  SymTensor out(T.n(), T.m() + 1);
  for (const auto& [theta, c] : T.terms())
    for (int i = 0; i < T.n(); ++i) {
      if (eta[i] == cplx(0)) continue;
      MultiIndex up = theta;
      up[i] += 1;
      out.add(up, eta[i] * c);
    }
  return out;
}

HPoly to_poly(const SymTensor& T) {
  HPoly P(T.n(), T.m());
  for (const auto& [theta, c] : T.terms()) P.add(theta, c);
  return P;
}

SymTensor from_poly(const HPoly& P) {
  SymTensor T(P.n(), P.m());
  for (const auto& [a, c] : P.terms()) T.add(a, c);
  return T;
}

Eigen::VectorXcd tensor_coords(const SymTensor& T) {
  const auto mons = monomials(T.n(), T.m());
  Eigen::VectorXcd c(static_cast<Eigen::Index>(mons.size()));
  for (size_t i = 0; i < mons.size(); ++i) c[static_cast<Eigen::Index>(i)] = T.coeff(mons[i]);
  return c;
}

SymTensor from_tensor_coords(int n, int m, const Eigen::Ref<const Eigen::VectorXcd>& c) {
  const auto mons = monomials(n, m);
  if (static_cast<size_t>(c.size()) != mons.size()) throw ValidationError("coordinate length mismatch");
  SymTensor T(n, m);
  for (size_t i = 0; i < mons.size(); ++i)
    if (c[static_cast<Eigen::Index>(i)] != cplx(0)) T.add(mons[i], c[static_cast<Eigen::Index>(i)]);
  return T;
}

Eigen::VectorXd tensor_metric_weights(int n, int m) {
  const auto mons = monomials(n, m);
  Eigen::VectorXd w(static_cast<Eigen::Index>(mons.size()));
  for (size_t i = 0; i < mons.size(); ++i) w[static_cast<Eigen::Index>(i)] = 1.0 / multiplicity_count(mons[i]);
  return w;
}

template <class Op>
static Eigen::MatrixXcd matrix_of(int n, int m_in, int m_out, Op op) {
  const auto in = monomials(n, m_in);
  const auto rows = static_cast<Eigen::Index>(monomials(n, m_out).size());
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(rows, static_cast<Eigen::Index>(in.size()));
  for (size_t j = 0; j < in.size(); ++j) {
    SymTensor e(n, m_in);
    e.add(in[j], 1.0);
    if (rows > 0) M.col(static_cast<Eigen::Index>(j)) = tensor_coords(op(e));
  }
  return M;
}

Eigen::MatrixXcd trace_matrix(int n, int m) {
  return matrix_of(n, m, m - 2, [](const SymTensor& t) { return trace(t); });
}

Eigen::MatrixXcd jay_matrix(int n, int m) {
  return matrix_of(n, m, m + 2, [](const SymTensor& t) { return jay(t); });
}

Eigen::MatrixXcd contract_matrix(int n, int m, const Eigen::Ref<const Eigen::VectorXd>& xi) {
  Eigen::VectorXd x = xi;
  return matrix_of(n, m, m - 1, [&](const SymTensor& t) { return contract(t, x); });
}

Eigen::MatrixXcd tracefree_projector(int n, int m) {
  const auto dim = static_cast<Eigen::Index>(monomials(n, m).size());
  if (m < 2) return Eigen::MatrixXcd::Identity(dim, dim);
  const Eigen::MatrixXcd J = jay_matrix(n, m - 2);
  const Eigen::VectorXd w = tensor_metric_weights(n, m);
  const Eigen::MatrixXcd JtW = J.adjoint() * w.asDiagonal();
  const Eigen::MatrixXcd G = JtW * J;
  const Eigen::MatrixXcd coef = G.ldlt().solve(JtW);
  return Eigen::MatrixXcd::Identity(dim, dim) - J * coef;
}

SymTensor tracefree_project(const SymTensor& T) {
  const Eigen::VectorXcd c = tracefree_projector(T.n(), T.m()) * tensor_coords(T);
  return from_tensor_coords(T.n(), T.m(), c);
}

static Eigen::MatrixXcd orthonormalize_columns(const Eigen::MatrixXcd& cand, const Eigen::VectorXd& w) {
  std::vector<Eigen::VectorXcd> basis;
  auto ip = [&](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return (b.adjoint() * w.asDiagonal() * a)(0, 0);
  };
  for (Eigen::Index j = 0; j < cand.cols(); ++j) {
    Eigen::VectorXcd v = cand.col(j);
    const double n0 = std::sqrt(std::abs(ip(v, v)));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) v -= q * ip(v, q);
    const double nn = std::sqrt(std::abs(ip(v, v)));
    if (nn <= 1e-10 * std::max(1.0, n0)) continue;
    basis.push_back(v / nn);
  }
  Eigen::MatrixXcd out(cand.rows(), static_cast<Eigen::Index>(basis.size()));
  for (size_t j = 0; j < basis.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = basis[j];
  return out;
}

Eigen::MatrixXcd tracefree_basis(int n, int m) {
  const Eigen::MatrixXcd P = tracefree_projector(n, m);
  Eigen::MatrixXcd B = orthonormalize_columns(P, tensor_metric_weights(n, m));
  if (m >= 0 && B.cols() != dims(n, m).h) throw ConvergenceError("trace-free basis lost rank");
  return B;
}

Eigen::MatrixXcd full_symmetric_basis(int n, int m) {
  const auto mons = monomials(n, m);
  const auto d = static_cast<Eigen::Index>(mons.size());
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) B(i, i) = std::sqrt(multiplicity_count(mons[static_cast<size_t>(i)]));
  return B;
}

void write_symtensor(std::ostream& os, const SymTensor& T) {
  os << "SYMT " << T.n() << ' ' << T.m() << ' ' << T.terms().size() << '\n';
  for (const auto& [theta, c] : T.terms()) {
    os << format_double(c.real()) << ' ' << format_double(c.imag());
    for (int x : theta) os << ' ' << x;
    os << '\n';
  }
}

SymTensor read_symtensor(std::istream& is) {
  std::string tag;
  int n = 0, m = 0;
  size_t terms = 0;
  if (!(is >> tag >> n >> m >> terms) || tag != "SYMT") throw ValidationError("expected SYMT header");
  SymTensor T(n, m);
  for (size_t t = 0; t < terms; ++t) {
    std::string re, im;
    if (!(is >> re >> im)) throw ValidationError("truncated SYMT term");
    MultiIndex theta(n);
    for (int i = 0; i < n; ++i)
      if (!(is >> theta[i])) throw ValidationError("truncated SYMT multiplicities");
    T.add(theta, cplx(parse_double(re), parse_double(im)));
  }
  return T;
}

}  // namespace ckt
