#include "ckt/connalg.hpp"

#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>

namespace ckt {

bool is_skew_hermitian(const EndoMat& M, double tol) {
  if (M.rows() != M.cols()) return false;
  return (M + M.adjoint()).norm() <= tol * std::max(1.0, M.norm());
}

FiberConnForm::FiberConnForm(int n_, int r_, bool unitary_) : n(n_), r(r_), unitary(unitary_) {
  if (n < 1 || r < 1) throw ValidationError("FiberConnForm needs n >= 1, r >= 1");
  gammas.assign(static_cast<size_t>(n), EndoMat::Zero(r, r));
}

FiberConnForm FiberConnForm::single(int n, const EndoMat& A, int direction) {
  FiberConnForm G(n, static_cast<int>(A.rows()), is_skew_hermitian(A));
  if (direction < 0 || direction >= n) throw ValidationError("direction out of range");
  G.gammas[static_cast<size_t>(direction)] = A;
  return G;
}

EndoMat FiberConnForm::at(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  if (v.size() != n) throw ValidationError("FiberConnForm::at dimension mismatch");
  EndoMat out = EndoMat::Zero(r, r);
  for (int j = 0; j < n; ++j) out += v[j] * gammas[static_cast<size_t>(j)];
  return out;
}

void FiberConnForm::validate(double tol) const {
  if (static_cast<int>(gammas.size()) != n) throw ValidationError("FiberConnForm: wrong number of components");
  for (const auto& g : gammas) {
    if (g.rows() != r || g.cols() != r) throw ValidationError("FiberConnForm: component shape mismatch");
    if (unitary && !is_skew_hermitian(g, tol))
      throw ValidationError("FiberConnForm flagged unitary but a component is not skew-Hermitian");
  }
}

FiberConnForm& FiberConnForm::operator+=(const FiberConnForm& o) {
  if (o.n != n || o.r != r) throw ValidationError("FiberConnForm shape mismatch");
  for (int j = 0; j < n; ++j) gammas[static_cast<size_t>(j)] += o.gammas[static_cast<size_t>(j)];
  unitary = unitary && o.unitary;
  return *this;
}

FiberConnForm FiberConnForm::operator*(cplx s) const {
  FiberConnForm out = *this;
  for (auto& g : out.gammas) g *= s;
  if (s.imag() != 0.0) out.unitary = false;
  return out;
}

bool FiberConnForm::is_zero() const {
  for (const auto& g : gammas)
    if (g.norm() != 0.0) return false;
  return true;
}

TwistedHarmonic::TwistedHarmonic(int n_, int m_, int fdim) : n(n_), m(m_) {
  if (fdim < 1) throw ValidationError("TwistedHarmonic needs fiber dimension >= 1");
  columns.assign(static_cast<size_t>(fdim), HPoly(n_, m_));
}

bool TwistedHarmonic::is_harmonic(double tol) const {
  for (const auto& c : columns)
    if (!ckt::is_harmonic(c, tol)) return false;
  return true;
}

bool TwistedHarmonic::is_zero() const {
  for (const auto& c : columns)
    if (!c.is_zero()) return false;
  return true;
}

TwistedHarmonic& TwistedHarmonic::operator+=(const TwistedHarmonic& o) {
  if (o.fdim() != fdim()) throw ValidationError("fiber dimension mismatch");
  for (size_t a = 0; a < columns.size(); ++a) columns[a] += o.columns[a];
  return *this;
}

TwistedHarmonic& TwistedHarmonic::operator-=(const TwistedHarmonic& o) {
  if (o.fdim() != fdim()) throw ValidationError("fiber dimension mismatch");
  for (size_t a = 0; a < columns.size(); ++a) columns[a] -= o.columns[a];
  return *this;
}

TwistedHarmonic TwistedHarmonic::operator*(cplx s) const {
  TwistedHarmonic out = *this;
  for (auto& c : out.columns) c *= s;
  return out;
}

cplx twisted_bombieri(const TwistedHarmonic& a, const TwistedHarmonic& b) {
  if (a.fdim() != b.fdim()) throw ValidationError("fiber dimension mismatch");
  cplx s = 0;
  for (size_t k = 0; k < a.columns.size(); ++k) s += bombieri_inner(a.columns[k], b.columns[k]);
  return s;
}

cplx twisted_sphere_inner(const TwistedHarmonic& a, const TwistedHarmonic& b) {
  if (a.fdim() != b.fdim()) throw ValidationError("fiber dimension mismatch");
  cplx s = 0;
  for (size_t k = 0; k < a.columns.size(); ++k) s += sphere_inner(a.columns[k], b.columns[k]);
  return s;
}

double twisted_coeff_norm(const TwistedHarmonic& a) {
  double s = 0;
  for (const auto& c : a.columns) s += std::pow(coeff_norm(c), 2);
  return std::sqrt(s);
}

static HPoly times_coord(const HPoly& P, int j) {
  HPoly out(P.n(), P.m() + 1);
  for (const auto& [a, c] : P.terms()) {
    MultiIndex b = a;
    b[j] += 1;
    out.add(b, c);
  }
  return out;
}

SplitResult split_by_actions(const std::vector<EndoMat>& actions, const TwistedHarmonic& f) {
  const int n = f.n;
  const int m = f.m;
  const int fd = f.fdim();
  if (static_cast<int>(actions.size()) != n) throw ValidationError("split: need one action per direction");
  for (const auto& L : actions)
    if (L.rows() != fd || L.cols() != fd) throw ValidationError("split: action does not match fiber dimension");
  if (m < 0) throw ValidationError("split: negative degree");
  if (n < 2) throw ValidationError("split: n >= 2 required");

  SplitResult out{TwistedHarmonic(n, m + 1, fd), TwistedHarmonic(n, m - 1, fd)};
  for (int j = 0; j < n; ++j) {
    const EndoMat& L = actions[static_cast<size_t>(j)];
    for (int a = 0; a < fd; ++a) {
      const HPoly& fa = f.columns[static_cast<size_t>(a)];
      if (fa.is_zero()) continue;
      const HPoly vf = times_coord(fa, j);
      const HPoly df = m >= 1 ? partial(fa, j) : HPoly(n, -1);
      for (int b = 0; b < fd; ++b) {
        const cplx l = L(b, a);
        if (l == cplx(0)) continue;
        out.plus.columns[static_cast<size_t>(b)] += vf * l;
        if (m >= 1) out.minus.columns[static_cast<size_t>(b)] += df * l;
      }
    }
  }
  if (m >= 1) {
    const cplx inv = 1.0 / static_cast<double>(n + 2 * (m - 1));
    const HPoly r2 = radial_power<cplx>(n, 1);
    for (int b = 0; b < fd; ++b) {
      auto& mb = out.minus.columns[static_cast<size_t>(b)];
      mb *= inv;
      out.plus.columns[static_cast<size_t>(b)] -= multiply(r2, mb);
    }
  }
  return out;
}

SplitResult gamma_split(const FiberConnForm& G, const TwistedHarmonic& f) {
  if (G.r != f.fdim()) throw ValidationError("gamma_split: fiber rank mismatch");
  if (G.n != f.n) throw ValidationError("gamma_split: dimension mismatch");
  if (!f.is_harmonic(1e-9)) throw ValidationError("gamma_split: input is not harmonic");
  return split_by_actions(G.gammas, f);
}

EndoMat commutator_action(const EndoMat& M) {
  const auto r = M.rows();
  const EndoMat I = EndoMat::Identity(r, r);
  return kron(M, I) - kron(I, M.transpose());
}

SplitResult endo_split(const FiberConnForm& A, const TwistedHarmonic& u) {
  if (A.r * A.r != u.fdim()) throw ValidationError("endo_split: fiber must have dimension r^2");
  if (A.n != u.n) throw ValidationError("endo_split: dimension mismatch");
  if (!u.is_harmonic(1e-9)) throw ValidationError("endo_split: input is not harmonic");
  std::vector<EndoMat> acts;
  for (const auto& g : A.gammas) acts.push_back(commutator_action(g));
  return split_by_actions(acts, u);
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
  Eigen::MatrixXcd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

static CoordinateSplit build_coordinate_split(int n, int m) {
  CoordinateSplit cs;
  const auto& B = harmonic_basis(n, m);
  const auto& Bup = harmonic_basis(n, m + 1);
  const HarmonicBasis* Bdown = m >= 1 ? &harmonic_basis(n, m - 1) : nullptr;
  for (int j = 0; j < n; ++j) {
    std::vector<EndoMat> acts(static_cast<size_t>(n), EndoMat::Zero(1, 1));
    acts[static_cast<size_t>(j)](0, 0) = 1.0;
    Eigen::MatrixXcd up(Bup.size(), B.size());
    Eigen::MatrixXcd down = Eigen::MatrixXcd::Zero(Bdown ? Bdown->size() : 0, B.size());
    for (int l = 0; l < B.size(); ++l) {
      TwistedHarmonic f(n, m, 1);
      f.columns[0] = B.members[static_cast<size_t>(l)];
      const SplitResult s = split_by_actions(acts, f);
      up.col(l) = Bup.coords(s.plus.columns[0]);
      if (Bdown) down.col(l) = Bdown->coords(s.minus.columns[0]);
    }
    cs.raise.push_back(up);
    cs.lower.push_back(down);
  }
  return cs;
}

const CoordinateSplit& coordinate_split(int n, int m) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<CoordinateSplit>> cache;
  if (n < 2 || m < 0) throw ValidationError("coordinate_split requires n >= 2, m >= 0");
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({n, m});
    if (it != cache.end()) return *it->second;
  }
  auto built = std::make_unique<CoordinateSplit>(build_coordinate_split(n, m));
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n, m}];
  if (!slot) slot = std::move(built);
  return *slot;
}

RankReport gamma_minus_matrix(const FiberConnForm& G, int n, int m) {
  if (m < 1) throw ValidationError("gamma_minus_matrix requires m >= 1");
  if (G.n != n) throw ValidationError("gamma_minus_matrix: dimension mismatch");
  const int r = G.r;
  const auto& B = harmonic_basis(n, m);
  const auto& Bd = harmonic_basis(n, m - 1);
  RankReport rep;
  rep.matrix = Eigen::MatrixXcd::Zero(Bd.size() * r, B.size() * r);
  for (int l = 0; l < B.size(); ++l)
    for (int a = 0; a < r; ++a) {
      TwistedHarmonic f(n, m, r);
      f.columns[static_cast<size_t>(a)] = B.members[static_cast<size_t>(l)];
      const SplitResult s = gamma_split(G, f);
      for (int b = 0; b < r; ++b)
        rep.matrix.col(l * r + a)(Eigen::seqN(b, Bd.size(), r)) = Bd.coords(s.minus.columns[static_cast<size_t>(b)]);
    }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(rep.matrix);
  rep.singular_values = svd.singularValues();
  const double smax = rep.singular_values.size() ? rep.singular_values[0] : 0.0;
  rep.rank = 0;
  for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i)
    if (smax > 0 && rep.singular_values[i] > 1e-10 * smax) ++rep.rank;
  rep.nullity = static_cast<int>(rep.matrix.cols()) - rep.rank;
  return rep;
}

GammaPreimage solve_gamma_preimage(const TwistedHarmonic& u) {
  const int n = u.n;
  const int m = u.m;
  const int r = u.fdim();
  if (n < 3) throw ValidationError("solve_gamma_preimage: unsupported dimension n < 3");
  if (!u.is_harmonic(1e-9)) throw ValidationError("solve_gamma_preimage: target is not harmonic");
  GammaPreimage out{FiberConnForm(n, r, true), TwistedHarmonic(n, m + 1, r)};
  // G(v) = diag(i v_1, ..., i v_1): each fiber slot uses the form i e_1^*
  out.G.gammas[0] = cplx(0, 1) * EndoMat::Identity(r, r);
  const cplx scale = cplx(0, -1) * static_cast<double>(n + 2 * m);
  for (int k = 0; k < r; ++k) {
    const HPoly& uk = u.columns[static_cast<size_t>(k)];
    if (uk.is_zero()) continue;
    out.w.columns[static_cast<size_t>(k)] = harmonic_antiderivative(uk, 0, scale);
  }
  return out;
}

static double bisect_zero(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm) <= 1e-14 || hi - lo < 1e-16) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

static CommutatorFactor factor_rec(const EndoMat& u) {
  const auto r = u.rows();
  CommutatorFactor out{EndoMat::Zero(r, r), EndoMat::Zero(r, r)};
  if (r <= 1 || u.norm() == 0.0) return out;

  const EndoMat H = cplx(0, -1) * u;
  Eigen::SelfAdjointEigenSolver<EndoMat> es((H + H.adjoint()) * 0.5);
  const Eigen::VectorXcd top = es.eigenvectors().col(r - 1);
  const Eigen::VectorXcd bot = es.eigenvectors().col(0);
  auto path = [&](double t) -> Eigen::VectorXcd { return std::cos(t) * top + std::sin(t) * bot; };
  auto f = [&](double t) {
    const Eigen::VectorXcd x = path(t);
    return (x.adjoint() * H * x)(0, 0).real();
  };
  const double t0 = bisect_zero(f, 0.0, M_PI / 2);
  Eigen::VectorXcd x0 = path(t0);
  x0.normalize();

  Eigen::HouseholderQR<EndoMat> qr(x0);
  const EndoMat Q = qr.householderQ();
  const EndoMat uq = Q.adjoint() * u * Q;
  const Eigen::VectorXcd X = uq.block(1, 0, r - 1, 1);
  EndoMat up = uq.block(1, 1, r - 1, r - 1);
  up = 0.5 * (up - EndoMat(up.adjoint()));
  up -= (up.trace() / static_cast<double>(r - 1)) * EndoMat::Identity(r - 1, r - 1);

  const CommutatorFactor sub = factor_rec(up);
  double lam = 1.0;
  if (r - 1 >= 1) {
    Eigen::ComplexEigenSolver<EndoMat> ce(sub.A, false);
    lam += ce.eigenvalues().cwiseAbs().maxCoeff();
  }
  const EndoMat shifted = sub.A - cplx(0, lam) * EndoMat::Identity(r - 1, r - 1);
  const Eigen::VectorXcd S = shifted.partialPivLu().solve(X);

  EndoMat A = EndoMat::Zero(r, r);
  EndoMat G = EndoMat::Zero(r, r);
  A(0, 0) = cplx(0, lam);
  A.block(1, 1, r - 1, r - 1) = sub.A;
  G.block(1, 0, r - 1, 1) = S;
  G.block(0, 1, 1, r - 1) = -S.adjoint();
  G.block(1, 1, r - 1, r - 1) = sub.G;
  out.A = Q * A * Q.adjoint();
  out.G = Q * G * Q.adjoint();
  return out;
}

CommutatorFactor commutator_factor(const EndoMat& u) {
  if (u.rows() != u.cols()) throw ValidationError("commutator_factor: matrix must be square");
  const double tol = 1e-10 * (1.0 + u.norm());
  if ((u + u.adjoint()).norm() > tol) throw ValidationError("commutator_factor: input is not skew-Hermitian");
  if (std::abs(u.trace()) > tol) throw ValidationError("commutator_factor: input is not trace-free");
  CommutatorFactor f = factor_rec(u);
  f.A = 0.5 * (f.A - EndoMat(f.A.adjoint()));
  f.G = 0.5 * (f.G - EndoMat(f.G.adjoint()));
  return f;
}

std::vector<EndoMat> gell_mann_basis(int r) {
  if (r < 1) throw ValidationError("gell_mann_basis: r >= 1");
  std::vector<EndoMat> out;
  const cplx I(0, 1);
  const double s = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < r; ++j)
    for (int k = j + 1; k < r; ++k) {
      EndoMat sym = EndoMat::Zero(r, r);
      sym(j, k) = sym(k, j) = s;
      EndoMat anti = EndoMat::Zero(r, r);
      anti(j, k) = -I * s;
      anti(k, j) = I * s;
      out.push_back(I * sym);
      out.push_back(I * anti);
    }
  for (int l = 1; l < r; ++l) {
    EndoMat d = EndoMat::Zero(r, r);
    const double c = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
    for (int i = 0; i < l; ++i) d(i, i) = c;
    d(l, l) = -l * c;
    out.push_back(I * d);
  }
  return out;
}

static int fiber_rank(const TwistedHarmonic& u) {
  const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(u.fdim()))));
  if (r * r != u.fdim()) throw ValidationError("endomorphism fiber must have dimension r^2");
  return r;
}

HPoly trace_end(const TwistedHarmonic& u) {
  const int r = fiber_rank(u);
  HPoly out(u.n, u.m);
  for (int i = 0; i < r; ++i) out += u.columns[static_cast<size_t>(i * r + i)];
  return out;
}

TwistedHarmonic adjoint_end(const TwistedHarmonic& u) {
  const int r = fiber_rank(u);
  TwistedHarmonic out(u.n, u.m, u.fdim());
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      out.columns[static_cast<size_t>(a * r + b)] = u.columns[static_cast<size_t>(b * r + a)].conj();
  return out;
}

std::vector<SymTensor> trace_sym(const std::vector<SymTensor>& u) {
  std::vector<SymTensor> out;
  out.reserve(u.size());
  for (const auto& t : u) {
    if (!out.empty() && (t.n() != u.front().n() || t.m() != u.front().m()))
      throw ValidationError("trace_sym: entries must share shape");
    out.push_back(trace(t));
  }
  return out;
}

PairingWitness endo_pairing_witness(const TwistedHarmonic& u) {
  const int r = fiber_rank(u);
  const int n = u.n;
  const int m = u.m;
  if (n < 3) throw ValidationError("endo_pairing_witness: n >= 3 required");
  const auto basis = gell_mann_basis(r);
  int best = -1;
  double best_norm = 0;
  HPoly best_p(n, m);
  for (size_t i = 0; i < basis.size(); ++i) {
    HPoly p(n, m);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        const cplx s = std::conj(basis[i](a, b));
        if (s != cplx(0)) p += u.columns[static_cast<size_t>(a * r + b)] * s;
      }
    const double nn = bombieri_norm(p);
    if (nn > best_norm * (1 + 1e-12)) {
      best = static_cast<int>(i);
      best_norm = nn;
      best_p = p;
    }
  }
  if (best < 0 || best_norm == 0.0) throw ValidationError("endo_pairing_witness: u has no trace-free component");

  const CommutatorFactor cf = commutator_factor(basis[static_cast<size_t>(best)]);
  // deg f = m + 1, so the lowering constant is n + 2m
  const HPoly f = harmonic_antiderivative(best_p, 0, static_cast<double>(n + 2 * m));
  PairingWitness out;
  out.A = FiberConnForm::single(n, cf.A, 0);
  out.w = TwistedHarmonic(n, m + 1, r * r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) out.w.columns[static_cast<size_t>(a * r + b)] = f * cf.G(a, b);
  const SplitResult s = endo_split(out.A, out.w);
  const cplx pr = twisted_bombieri(u, s.minus);
  out.pairing = pr.real();
  out.target = best_norm * best_norm;
  out.component = best;
  return out;
}

void write_matrix(std::ostream& os, const Eigen::MatrixXcd& M) {
  os << "CMAT " << M.rows() << ' ' << M.cols() << '\n';
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(M(i, j).real()) << ' ' << format_double(M(i, j).imag());
    }
    os << '\n';
  }
}

Eigen::MatrixXcd read_matrix(std::istream& is) {
  std::string tag;
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> tag >> rows >> cols) || tag != "CMAT" || rows < 0 || cols < 0)
    throw ValidationError("expected CMAT header");
  Eigen::MatrixXcd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::string re, im;
      if (!(is >> re >> im)) throw ValidationError("truncated CMAT data");
      M(i, j) = cplx(parse_double(re), parse_double(im));
    }
  return M;
}

void write_connform(std::ostream& os, const FiberConnForm& G) {
  os << "CONNFORM " << G.n << ' ' << G.r << " unitary: " << (G.unitary ? "yes" : "no") << '\n';
  for (const auto& g : G.gammas) write_matrix(os, g);
}

FiberConnForm read_connform(std::istream& is) {
  std::string tag, flag, yn;
  int n = 0, r = 0;
  if (!(is >> tag >> n >> r >> flag >> yn) || tag != "CONNFORM" || flag != "unitary:")
    throw ValidationError("expected CONNFORM header");
  if (yn != "yes" && yn != "no") throw ValidationError("unitary flag must be yes or no");
  FiberConnForm G(n, r, yn == "yes");
  for (int j = 0; j < n; ++j) G.gammas[static_cast<size_t>(j)] = read_matrix(is);
  G.validate(1e-12);
  return G;
}

}  // namespace ckt
