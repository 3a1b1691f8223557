#include "ckt/torusmodel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "ckt/symtensor.hpp"

namespace ckt {

int TorusConfig::num_modes() const {
  int c = 1;
  for (int i = 0; i < n; ++i) c *= 2 * K + 1;
  return c;
}

long long TorusConfig::basis_dim(int degree) const {
  if (degree < 0) return 0;
  return static_cast<long long>(num_modes()) * dims(n, degree).h * fdim();
}

void TorusConfig::validate() const {
  if (n < 2) throw ValidationError("torus config: n >= 2 required");
  if (K < 0) throw ValidationError("torus config: K >= 0 required");
  if (m < 0) throw ValidationError("torus config: m >= 0 required");
  if (r < 1) throw ValidationError("torus config: r >= 1 required");
}

FourierConnection::FourierConnection(int n_, int r_) : n(n_), r(r_) {
  if (n < 1 || r < 1) throw ValidationError("FourierConnection needs n >= 1, r >= 1");
}

FourierConnection FourierConnection::constant(const FiberConnForm& G) {
  FourierConnection c(G.n, G.r);
  c.add_mode(std::vector<int>(static_cast<size_t>(G.n), 0), G);
  return c;
}

void FourierConnection::add_mode(const std::vector<int>& q, const FiberConnForm& G) {
  if (static_cast<int>(q.size()) != n || G.n != n || G.r != r)
    throw ValidationError("FourierConnection: mode shape mismatch");
  auto it = coeffs.find(q);
  if (it == coeffs.end())
    coeffs.emplace(q, G);
  else
    it->second += G;
}

EndoMat FourierConnection::at(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& v) const {
  EndoMat out = EndoMat::Zero(r, r);
  for (const auto& [q, G] : coeffs) {
    double ph = 0;
    for (int i = 0; i < n; ++i) ph += q[static_cast<size_t>(i)] * x[i];
    out += std::exp(cplx(0, ph)) * G.at(v);
  }
  return out;
}

static std::vector<int> negate(const std::vector<int>& q) {
  std::vector<int> out(q.size());
  for (size_t i = 0; i < q.size(); ++i) out[i] = -q[i];
  return out;
}

bool FourierConnection::is_unitary(double tol) const {
  for (const auto& [q, G] : coeffs) {
    auto it = coeffs.find(negate(q));
    for (int j = 0; j < n; ++j) {
      const EndoMat& g = G.gammas[static_cast<size_t>(j)];
      const EndoMat other = it == coeffs.end() ? EndoMat::Zero(r, r) : it->second.gammas[static_cast<size_t>(j)];
      if ((g.adjoint() + other).norm() > tol * (1.0 + g.norm())) return false;
    }
  }
  return true;
}

void FourierConnection::validate(double tol) const {
  for (const auto& [q, G] : coeffs) {
    if (static_cast<int>(q.size()) != n) throw ValidationError("FourierConnection: mode dimension mismatch");
    if (G.n != n || G.r != r) throw ValidationError("FourierConnection: coefficient shape mismatch");
  }
  if (!is_unitary(tol)) throw ValidationError("FourierConnection: not skew-Hermitian (need coeff[q]^+ = -coeff[-q])");
}

FourierConnection FourierConnection::scaled(double s) const {
  FourierConnection out(n, r);
  for (const auto& [q, G] : coeffs) out.coeffs.emplace(q, G * cplx(s));
  return out;
}

FourierConnection FourierConnection::plus(const FourierConnection& o) const {
  if (o.n != n || o.r != r) throw ValidationError("FourierConnection: shape mismatch");
  FourierConnection out = *this;
  for (const auto& [q, G] : o.coeffs) out.add_mode(q, G);
  return out;
}

bool FourierConnection::is_zero() const {
  for (const auto& [q, G] : coeffs)
    if (!G.is_zero()) return false;
  return true;
}

void write_fourier_connection(std::ostream& os, const FourierConnection& c) {
  size_t rows = c.coeffs.size() * static_cast<size_t>(c.n);
  os << "FOURIERCONN " << c.n << ' ' << c.r << " unitary: " << (c.is_unitary() ? "yes" : "no") << ' ' << rows
     << '\n';
  for (const auto& [q, G] : c.coeffs)
    for (int j = 0; j < c.n; ++j) {
      for (int x : q) os << x << ' ';
      os << j;
      const EndoMat& g = G.gammas[static_cast<size_t>(j)];
      for (int a = 0; a < c.r; ++a)
        for (int b = 0; b < c.r; ++b) os << ' ' << format_double(g(a, b).real()) << ' ' << format_double(g(a, b).imag());
      os << '\n';
    }
}

FourierConnection read_fourier_connection(std::istream& is) {
  std::string tag, flag, yn;
  int n = 0, r = 0;
  size_t rows = 0;
  if (!(is >> tag >> n >> r >> flag >> yn >> rows) || tag != "FOURIERCONN" || flag != "unitary:")
    throw ValidationError("expected FOURIERCONN header");
  if (yn != "yes" && yn != "no") throw ValidationError("unitary flag must be yes or no");
  FourierConnection c(n, r);
  for (size_t t = 0; t < rows; ++t) {
    std::vector<int> q(static_cast<size_t>(n));
    int j = 0;
    for (auto& x : q)
      if (!(is >> x)) throw ValidationError("truncated FOURIERCONN mode");
    if (!(is >> j) || j < 0 || j >= n) throw ValidationError("bad FOURIERCONN direction");
    FiberConnForm G(n, r, yn == "yes");
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        std::string re, im;
        if (!(is >> re >> im)) throw ValidationError("truncated FOURIERCONN entries");
        G.gammas[static_cast<size_t>(j)](a, b) = cplx(parse_double(re), parse_double(im));
      }
    c.add_mode(q, G);
  }
  if (yn == "yes") c.validate(1e-12);
  return c;
}

TorusIndex::TorusIndex(const TorusConfig& c) : config(c) {
  c.validate();
  std::vector<int> k(static_cast<size_t>(c.n), -c.K);
  while (true) {
    mode_lookup.emplace(k, static_cast<int>(modes.size()));
    modes.push_back(k);
    int i = c.n - 1;
    while (i >= 0 && ++k[static_cast<size_t>(i)] > c.K) k[static_cast<size_t>(i--)] = -c.K;
    if (i < 0) break;
  }
}

int TorusIndex::mode_of(const std::vector<int>& k) const {
  auto it = mode_lookup.find(k);
  return it == mode_lookup.end() ? -1 : it->second;
}

Eigen::Index TorusIndex::flat(int mode, int harmonic, int fiber, int degree) const {
  const Eigen::Index h = dims(config.n, degree).h;
  return (static_cast<Eigen::Index>(mode) * h + harmonic) * config.fdim() + fiber;
}

Eigen::Index TorusIndex::dim(int degree) const { return static_cast<Eigen::Index>(config.basis_dim(degree)); }

double TorusAssembly::adjointness_defect() const { return max_entry_difference(xminus, xminus_direct); }

double max_entry_difference(const SpMat& a, const SpMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ValidationError("max_entry_difference: shape mismatch");
  const SpMat d = a - b;
  double m = 0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SpMat::InnerIterator it(d, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

namespace {

// Scalar raising/lowering matrices for multiplication by v_j, one per direction.
struct ScalarBlocks {
  std::vector<Eigen::MatrixXcd> raise;       // h(m+1) x h(m)
  std::vector<Eigen::MatrixXcd> lower_up;    // h(m) x h(m+1)
  std::vector<Eigen::MatrixXcd> lower_down;  // h(m-1) x h(m)
};

std::vector<EndoMat> fiber_actions(const TorusConfig& c, const FiberConnForm& G) {
  std::vector<EndoMat> out;
  for (const auto& g : G.gammas) out.push_back(c.kind == BundleKind::Vector ? g : commutator_action(g));
  return out;
}

void add_block(std::vector<Eigen::Triplet<cplx>>& trip, Eigen::Index r0, Eigen::Index c0, const Eigen::MatrixXcd& B) {
  for (Eigen::Index j = 0; j < B.cols(); ++j)
    for (Eigen::Index i = 0; i < B.rows(); ++i)
      if (B(i, j) != cplx(0)) trip.emplace_back(r0 + i, c0 + j, B(i, j));
}

Eigen::MatrixXcd weighted_sum(const std::vector<Eigen::MatrixXcd>& mats, const std::vector<int>& k, cplx s) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(mats[0].rows(), mats[0].cols());
  for (size_t j = 0; j < mats.size(); ++j)
    if (k[j] != 0) out += (s * static_cast<double>(k[j])) * mats[j];
  return out;
}

Eigen::MatrixXcd action_sum(const std::vector<Eigen::MatrixXcd>& mats, const std::vector<EndoMat>& acts) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(mats[0].rows() * acts[0].rows(), mats[0].cols() * acts[0].cols());
  for (size_t j = 0; j < mats.size(); ++j)
    if (acts[j].norm() != 0.0 && mats[j].size() > 0) out += kron(mats[j], acts[j]);
  return out;
}

TorusAssembly assemble_generic(const TorusConfig& config, const FourierConnection& conn, bool include_free,
                               const ScalarBlocks& sb) {
  config.validate();
  if (conn.n != config.n) throw ValidationError("assemble: connection dimension does not match config");
  if (conn.r != config.r) throw ValidationError("assemble: connection fiber rank does not match config");
  const TorusIndex idx(config);
  const int n = config.n;
  const int m = config.m;
  const int fd = config.fdim();
  const Eigen::Index h0 = dims(n, m).h;
  const Eigen::Index h1 = dims(n, m + 1).h;
  const Eigen::Index hd = m >= 1 ? dims(n, m - 1).h : 0;
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(fd, fd);

  std::vector<Eigen::Triplet<cplx>> tp, tm, td;
  TorusAssembly out;
  out.config = config;
  out.modes = idx.modes;

  std::vector<std::pair<std::vector<int>, std::vector<EndoMat>>> terms;
  for (const auto& [q, G] : conn.coeffs)
    if (!G.is_zero()) terms.emplace_back(q, fiber_actions(config, G));

  for (int mi = 0; mi < static_cast<int>(idx.modes.size()); ++mi) {
    const auto& k = idx.modes[static_cast<size_t>(mi)];
    if (include_free) {
      const cplx I1(0, 1);
      add_block(tp, mi * h1 * fd, mi * h0 * fd, kron(weighted_sum(sb.raise, k, I1), I));
      add_block(tm, mi * h0 * fd, mi * h1 * fd, kron(weighted_sum(sb.lower_up, k, I1), I));
      if (m >= 1) add_block(td, mi * hd * fd, mi * h0 * fd, kron(weighted_sum(sb.lower_down, k, I1), I));
    }
    for (const auto& [q, acts] : terms) {
      std::vector<int> t = k;
      for (int i = 0; i < n; ++i) t[static_cast<size_t>(i)] += q[static_cast<size_t>(i)];
      const int ti = idx.mode_of(t);
      if (ti < 0) {
        ++out.dropped_couplings;
        continue;
      }
      add_block(tp, ti * h1 * fd, mi * h0 * fd, action_sum(sb.raise, acts));
      add_block(tm, ti * h0 * fd, mi * h1 * fd, action_sum(sb.lower_up, acts));
      if (m >= 1) add_block(td, ti * hd * fd, mi * h0 * fd, action_sum(sb.lower_down, acts));
    }
  }
  out.xplus.resize(idx.dim(m + 1), idx.dim(m));
  out.xplus.setFromTriplets(tp.begin(), tp.end());
  out.xminus_direct.resize(idx.dim(m), idx.dim(m + 1));
  out.xminus_direct.setFromTriplets(tm.begin(), tm.end());
  out.xminus_down.resize(idx.dim(m - 1), idx.dim(m));
  out.xminus_down.setFromTriplets(td.begin(), td.end());
  out.xminus = -SpMat(out.xplus.adjoint());
  out.xplus.makeCompressed();
  out.xminus.makeCompressed();
  return out;
}

// Harmonic coordinates of trace-free tensors of degree d given by tensor coordinates.
Eigen::MatrixXcd tensor_to_harmonic(int n, int d) {
  const auto& B = harmonic_basis(n, d);
  const auto mons = monomials(n, d);
  Eigen::MatrixXcd M(B.size(), static_cast<Eigen::Index>(mons.size()));
  for (size_t j = 0; j < mons.size(); ++j)
    M.col(static_cast<Eigen::Index>(j)) = B.coords(HPoly::monomial(mons[j]));
  return M;
}

Eigen::MatrixXcd harmonic_to_tensor(int n, int d) {
  const auto& B = harmonic_basis(n, d);
  Eigen::MatrixXcd M(static_cast<Eigen::Index>(monomials(n, d).size()), B.size());
  for (int l = 0; l < B.size(); ++l)
    M.col(l) = tensor_coords(from_poly(B.members[static_cast<size_t>(l)]));
  return M;
}

Eigen::MatrixXcd sym_product_matrix(int n, int d, int j) {
  const auto mons = monomials(n, d);
  Eigen::VectorXcd eta = Eigen::VectorXcd::Zero(n);
  eta[j] = 1.0;
  Eigen::MatrixXcd M(static_cast<Eigen::Index>(monomials(n, d + 1).size()), static_cast<Eigen::Index>(mons.size()));
  for (size_t c = 0; c < mons.size(); ++c) {
    SymTensor e(n, d);
    e.add(mons[c], 1.0);
    M.col(static_cast<Eigen::Index>(c)) = tensor_coords(sym_product(eta, e));
  }
  return M;
}

// Raising through D followed by the trace-free projection; lowering through
// D* with the factor -d / (n - 2 + 2d).
ScalarBlocks tensor_route_blocks(int n, int m) {
  ScalarBlocks sb;
  const Eigen::MatrixXcd P1 = tracefree_projector(n, m + 1);
  const Eigen::MatrixXcd Hc1 = tensor_to_harmonic(n, m + 1);
  const Eigen::MatrixXcd T0 = harmonic_to_tensor(n, m);
  const Eigen::MatrixXcd T1 = harmonic_to_tensor(n, m + 1);
  const Eigen::MatrixXcd Hc0 = tensor_to_harmonic(n, m);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[j] = 1.0;
    sb.raise.push_back(Hc1 * P1 * sym_product_matrix(n, m, j) * T0);
    // D* w = -i contraction, so -d / (n - 2 + 2d) * D* per unit of i xi_j
    const double f_up = static_cast<double>(m + 1) / (n - 2 + 2 * (m + 1));
    sb.lower_up.push_back(f_up * (Hc0 * contract_matrix(n, m + 1, e) * T1));
    if (m >= 1) {
      const double f_dn = static_cast<double>(m) / (n - 2 + 2 * m);
      sb.lower_down.push_back(f_dn * (tensor_to_harmonic(n, m - 1) * contract_matrix(n, m, e) * T0));
    } else {
      sb.lower_down.push_back(Eigen::MatrixXcd::Zero(0, T0.cols()));
    }
  }
  return sb;
}

}  // namespace

TorusAssembly assemble(const TorusConfig& config, const FourierConnection& conn, bool include_free) {
  config.validate();
  const auto& cs = coordinate_split(config.n, config.m);
  const auto& cs1 = coordinate_split(config.n, config.m + 1);
  ScalarBlocks sb{cs.raise, cs1.lower, cs.lower};
  if (config.m == 0)
    for (auto& M : sb.lower_down) M = Eigen::MatrixXcd::Zero(0, M.cols());
  return assemble_generic(config, conn, include_free, sb);
}

TorusAssembly assemble_via_D(const TorusConfig& config, const FourierConnection& conn) {
  config.validate();
  if (!conn.is_unitary(1e-12))
    throw ValidationError("assemble_via_D: the adjoint route needs a skew-Hermitian connection");
  return assemble_generic(config, conn, true, tensor_route_blocks(config.n, config.m));
}

namespace {

std::vector<std::vector<Eigen::Index>> components(const SpMat& H) {
  const Eigen::Index N = H.rows();
  std::vector<Eigen::Index> parent(static_cast<size_t>(N));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<Eigen::Index(Eigen::Index)> find = [&](Eigen::Index x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  };
  for (int k = 0; k < H.outerSize(); ++k)
    for (SpMat::InnerIterator it(H, k); it; ++it) {
      const Eigen::Index a = find(it.row()), b = find(it.col());
      if (a != b) parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
    }
  std::map<Eigen::Index, std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < N; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<Eigen::Index>> out;
  for (auto& [root, g] : groups) out.push_back(std::move(g));
  return out;
}

Eigen::MatrixXcd dense_block(const SpMat& H, const std::vector<Eigen::Index>& idx) {
  std::map<Eigen::Index, Eigen::Index> pos;
  for (size_t i = 0; i < idx.size(); ++i) pos[idx[i]] = static_cast<Eigen::Index>(i);
  const auto d = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(d, d);
  for (size_t c = 0; c < idx.size(); ++c)
    for (SpMat::InnerIterator it(H, idx[c]); it; ++it) B(pos.at(it.row()), static_cast<Eigen::Index>(c)) = it.value();
  return B;
}

struct ComponentEigen {
  std::vector<Eigen::Index> idx;
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

std::vector<ComponentEigen> hermitian_components(const SpMat& H, bool vectors) {
  std::vector<ComponentEigen> out;
  for (auto& idx : components(H)) {
    ComponentEigen ce;
    ce.idx = idx;
    const Eigen::MatrixXcd B = dense_block(H, idx);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(B, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw ConvergenceError("Hermitian eigensolver failed on a block of size " + std::to_string(B.rows()));
    ce.values = es.eigenvalues();
    if (vectors) ce.vectors = es.eigenvectors();
    out.push_back(std::move(ce));
  }
  return out;
}

}  // namespace

NullSpace sparse_null_space(const SpMat& X, double rel_tol) {
  const SpMat G = SpMat(X.adjoint()) * X;
  const auto comps = hermitian_components(G, true);
  NullSpace ns;
  for (const auto& c : comps)
    if (c.values.size()) ns.lambda_max = std::max(ns.lambda_max, c.values.maxCoeff());
  const double thr = rel_tol * ns.lambda_max;
  std::vector<Eigen::VectorXcd> cols;
  for (const auto& c : comps)
    for (Eigen::Index i = 0; i < c.values.size(); ++i)
      if (c.values[i] <= thr) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(X.cols());
        for (size_t p = 0; p < c.idx.size(); ++p) v[c.idx[p]] = c.vectors(static_cast<Eigen::Index>(p), i);
        cols.push_back(v);
      }
  ns.basis.resize(X.cols(), static_cast<Eigen::Index>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) ns.basis.col(static_cast<Eigen::Index>(j)) = cols[j];
  if (ns.basis.cols() > 0) {
    const Eigen::MatrixXcd R = X * ns.basis;
    ns.max_residual = R.colwise().norm().maxCoeff();
  }
  return ns;
}

Eigen::VectorXd sparse_hermitian_eigenvalues(const SpMat& H) {
  std::vector<double> all;
  for (const auto& c : hermitian_components(H, false))
    for (Eigen::Index i = 0; i < c.values.size(); ++i) all.push_back(c.values[i]);
  std::sort(all.begin(), all.end());
  return Eigen::Map<Eigen::VectorXd>(all.data(), static_cast<Eigen::Index>(all.size()));
}

KernelReport ckt_kernel(const TorusAssembly& asm_) {
  const NullSpace ns = sparse_null_space(asm_.xplus);
  KernelReport rep;
  rep.basis = ns.basis;
  rep.max_residual = ns.max_residual;
  const int nm = static_cast<int>(asm_.modes.size());
  const Eigen::Index per = asm_.xplus.cols() / std::max(1, nm);
  rep.mode_weight.assign(static_cast<size_t>(nm), 0.0);
  for (int mi = 0; mi < nm; ++mi)
    rep.mode_weight[static_cast<size_t>(mi)] = rep.basis.middleRows(mi * per, per).squaredNorm();
  return rep;
}

SecondVariation second_variation_predict(const TorusAssembly& asm0, const FourierConnection& A,
                                         const Eigen::MatrixXcd& kernel) {
  SecondVariation sv;
  if (kernel.rows() != asm0.xplus.cols()) throw ValidationError("second_variation_predict: kernel size mismatch");
  const TorusAssembly pa = assemble(asm0.config, A, false);
  const Eigen::MatrixXcd F = pa.xplus * kernel;
  const NullSpace Z = sparse_null_space(asm0.xminus);
  const Eigen::MatrixXcd proj = Z.basis * (Z.basis.adjoint() * F);
  for (Eigen::Index i = 0; i < proj.cols(); ++i) {
    sv.per_element.push_back(proj.col(i).squaredNorm());
    sv.total += sv.per_element.back();
  }
  return sv;
}

ScanResult lambda_scan(const TorusConfig& config, const FourierConnection& conn0, const FourierConnection& A,
                       const std::vector<double>& s_grid, double window_radius) {
  if (s_grid.empty()) throw ValidationError("lambda_scan: empty s grid");
  ScanResult res;
  const TorusAssembly a0 = assemble(config, conn0);
  const SpMat D0 = SpMat(a0.xplus.adjoint()) * a0.xplus;
  const Eigen::VectorXd e0 = sparse_hermitian_eigenvalues(D0);
  const double thr0 = 1e-12 * std::max(1.0, e0.size() ? e0.maxCoeff() : 0.0);
  double first_nonzero = -1;
  for (Eigen::Index i = 0; i < e0.size(); ++i)
    if (e0[i] > thr0) {
      first_nonzero = e0[i];
      break;
    }
  if (window_radius <= 0)
    res.radius = first_nonzero > 0 ? 0.5 * first_nonzero : 1.0;
  else
    res.radius = window_radius;
  if (first_nonzero > 0 && res.radius >= first_nonzero)
    throw ValidationError("lambda_scan: window contains nonzero unperturbed eigenvalues");

  const KernelReport ker = ckt_kernel(a0);
  res.predicted_total = second_variation_predict(a0, A, ker.basis).total;

  for (double s : s_grid) {
    const TorusAssembly as = assemble(config, conn0.plus(A.scaled(s)));
    const SpMat D = SpMat(as.xplus.adjoint()) * as.xplus;
    const Eigen::VectorXd e = sparse_hermitian_eigenvalues(D);
    const double thr = 1e-12 * std::max(1.0, e.size() ? e.maxCoeff() : 0.0);
    ScanRow row;
    row.s = s;
    row.min_eigenvalue = e.size() ? e[0] : 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      if (e[i] < res.radius) {
        row.lambda += e[i];
        ++row.window_count;
      }
      if (e[i] <= thr) ++row.kernel_dim;
    }
    res.rows.push_back(row);
  }

  const auto npts = static_cast<Eigen::Index>(res.rows.size());
  const Eigen::Index deg = std::min<Eigen::Index>(4, npts - 1);
  if (deg >= 2) {
    Eigen::MatrixXd V(npts, deg + 1);
    Eigen::VectorXd y(npts);
    for (Eigen::Index i = 0; i < npts; ++i) {
      const double s = res.rows[static_cast<size_t>(i)].s;
      for (Eigen::Index p = 0; p <= deg; ++p) V(i, p) = std::pow(s, static_cast<double>(p));
      y[i] = res.rows[static_cast<size_t>(i)].lambda;
    }
    const Eigen::VectorXd c = V.colPivHouseholderQr().solve(y);
    res.lambda_dot_fit = c[1];
    res.lambda_ddot_fit = 2 * c[2];
  }
  if (res.predicted_total > 0) {
    res.ratio = res.lambda_ddot_fit / (2 * res.predicted_total);
    if (std::abs(res.ratio - 1.0) <= 0.05)
      res.factor = "1.0";
    else if (std::abs(res.ratio - 0.5) <= 0.05)
      res.factor = "0.5";
    else
      res.factor = "unresolved";
  } else {
    res.ratio = 0;
    res.factor = "no-prediction";
  }
  return res;
}

void write_scan_csv(std::ostream& os, const ScanResult& res) {
  os << "s,lambda,kernel_dim,predicted_second_variation,window_count,min_eigenvalue\n";
  for (const auto& r : res.rows)
    os << format_double(r.s) << ',' << format_double(r.lambda) << ',' << r.kernel_dim << ','
       << format_double(res.predicted_total) << ',' << r.window_count << ',' << format_double(r.min_eigenvalue)
       << '\n';
  os << "# radius=" << format_double(res.radius) << " lambda_dot_fit=" << format_double(res.lambda_dot_fit)
     << " lambda_ddot_fit=" << format_double(res.lambda_ddot_fit) << " ratio=" << format_double(res.ratio)
     << " factor=" << res.factor << '\n';
}

Generator assemble_generator(const TorusConfig& config, const FourierConnection& conn, bool include_free) {
  config.validate();
  Generator g;
  g.config = config;
  Eigen::Index total = 0;
  for (int d = 0; d <= config.m; ++d) {
    g.degree_offset.push_back(total);
    total += static_cast<Eigen::Index>(config.basis_dim(d));
  }
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int d = 0; d < config.m; ++d) {
    TorusConfig cd = config;
    cd.m = d;
    const TorusAssembly a = assemble(cd, conn, include_free);
    const Eigen::Index r0 = g.degree_offset[static_cast<size_t>(d) + 1];
    const Eigen::Index c0 = g.degree_offset[static_cast<size_t>(d)];
    for (int k = 0; k < a.xplus.outerSize(); ++k)
      for (SpMat::InnerIterator it(a.xplus, k); it; ++it) {
        trip.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
        trip.emplace_back(c0 + it.col(), r0 + it.row(), -std::conj(it.value()));
      }
  }
  g.X.resize(total, total);
  g.X.setFromTriplets(trip.begin(), trip.end());
  return g;
}

Eigen::VectorXcd evaluate_section(const TorusConfig& config, int degree, const Eigen::Ref<const Eigen::VectorXcd>& c,
                                  const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& v) {
  const TorusIndex idx(config);
  if (c.size() != idx.dim(degree)) throw ValidationError("evaluate_section: coefficient length mismatch");
  const auto& B = harmonic_basis(config.n, degree);
  const int fd = config.fdim();
  std::vector<cplx> yv(static_cast<size_t>(B.size()));
  for (int l = 0; l < B.size(); ++l) yv[static_cast<size_t>(l)] = evaluate(B.members[static_cast<size_t>(l)], v);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(fd);
  for (int mi = 0; mi < static_cast<int>(idx.modes.size()); ++mi) {
    double ph = 0;
    for (int i = 0; i < config.n; ++i) ph += idx.modes[static_cast<size_t>(mi)][static_cast<size_t>(i)] * x[i];
    const cplx e = std::exp(cplx(0, ph));
    for (int l = 0; l < B.size(); ++l)
      for (int a = 0; a < fd; ++a) out[a] += c[idx.flat(mi, l, a, degree)] * e * yv[static_cast<size_t>(l)];
  }
  return out;
}

Eigen::VectorXcd evaluate_generator_section(const Generator& g, const Eigen::Ref<const Eigen::VectorXcd>& c,
                                            const Eigen::Ref<const Eigen::VectorXd>& x,
                                            const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (c.size() != g.X.cols()) throw ValidationError("evaluate_generator_section: length mismatch");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(g.config.fdim());
  for (int d = 0; d <= g.config.m; ++d) {
    const Eigen::Index len = static_cast<Eigen::Index>(g.config.basis_dim(d));
    out += evaluate_section(g.config, d, c.segment(g.degree_offset[static_cast<size_t>(d)], len), x, v);
  }
  return out;
}

Eigen::VectorXcd identity_section(const TorusConfig& config) {
  if (config.kind != BundleKind::Endomorphism) throw ValidationError("identity_section: endomorphism bundle required");
  const TorusIndex idx(config);
  const int m0 = idx.mode_of(std::vector<int>(static_cast<size_t>(config.n), 0));
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(idx.dim(0));
  for (int a = 0; a < config.r; ++a) c[idx.flat(m0, 0, a * config.r + a, 0)] = 1.0;
  return c;
}

Eigen::VectorXcd fiber_trace(const TorusConfig& config, int degree, const Eigen::Ref<const Eigen::VectorXcd>& c) {
  if (config.kind != BundleKind::Endomorphism) throw ValidationError("fiber_trace: endomorphism bundle required");
  const int r = config.r;
  const Eigen::Index blocks = c.size() / (r * r);
  if (blocks * r * r != c.size() || c.size() != static_cast<Eigen::Index>(config.basis_dim(degree)))
    throw ValidationError("fiber_trace: coefficient length mismatch");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(blocks);
  for (Eigen::Index b = 0; b < blocks; ++b)
    for (int a = 0; a < r; ++a) out[b] += c[b * r * r + a * r + a];
  return out;
}

}  // namespace ckt
