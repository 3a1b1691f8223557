#include "ckt/polyharm.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <system_error>

namespace ckt {

long long binomial(long long n, long long k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (long long i = 0; i < k; ++i) {
    r = r * static_cast<unsigned __int128>(n - i) / static_cast<unsigned __int128>(i + 1);
    if (r > static_cast<unsigned __int128>(std::numeric_limits<long long>::max()))
      throw OverflowError("binomial(" + std::to_string(n) + "," + std::to_string(k) +
                          ") overflows 64-bit integer");
  }
  return static_cast<long long>(r);
}

Dims dims(int n, int m) {
  if (n < 2) throw ValidationError("dims requires n >= 2");
  if (m < 0) throw ValidationError("dims requires m >= 0");
  Dims d;
  d.p = binomial(static_cast<long long>(n) + m - 1, m);
  d.h = d.p - (m >= 2 ? binomial(static_cast<long long>(n) + m - 3, m - 2) : 0);
  return d;
}

HPoly apply_diff(const HPoly& P, const HPoly& Q) {
  if (P.n() != Q.n()) throw ValidationError("apply_diff: dimension mismatch");
  if (P.m() > Q.m()) throw ValidationError("apply_diff: deg P > deg Q");
  HPoly out(Q.n(), Q.m() - P.m());
  MultiIndex r(Q.n());
  for (const auto& [a, ca] : P.terms())
    for (const auto& [b, cb] : Q.terms()) {
      double f = 1.0;
      bool ok = true;
      for (int i = 0; i < Q.n() && ok; ++i) {
        if (b[i] < a[i]) {
          ok = false;
          break;
        }
        for (int t = 0; t < a[i]; ++t) f *= b[i] - t;
        r[i] = b[i] - a[i];
      }
      if (ok) out.add(r, ca * cb * f);
    }
  return out;
}

static double factorial_weight(const MultiIndex& a) {
  double w = 1.0;
  for (int x : a)
    for (int t = 2; t <= x; ++t) w *= t;
  return w;
}

cplx bombieri_inner(const HPoly& P, const HPoly& Q) {
  if (P.n() != Q.n() || P.m() != Q.m()) throw ValidationError("bombieri_inner: degree mismatch");
  cplx s = 0;
  for (const auto& [a, c] : P.terms()) {
    auto it = Q.terms().find(a);
    if (it != Q.terms().end()) s += factorial_weight(a) * c * std::conj(it->second);
  }
  return s;
}

double bombieri_norm(const HPoly& P) { return std::sqrt(std::max(0.0, bombieri_inner(P, P).real())); }

double coeff_norm(const HPoly& P) {
  double s = 0;
  for (const auto& [a, c] : P.terms()) s += std::norm(c);
  return std::sqrt(s);
}

double sphere_monomial_moment(const MultiIndex& alpha, int n) {
  if (static_cast<int>(alpha.size()) != n) throw ValidationError("moment: length mismatch");
  if (n < 2) throw ValidationError("moment: n >= 2 required");
  double lg = 0;
  int total = 0;
  for (int a : alpha) {
    if (a % 2 != 0) return 0.0;
    lg += std::lgamma((a + 1) / 2.0);
    total += a;
  }
  lg -= std::lgamma((total + n) / 2.0);
  return 2.0 * std::exp(lg);
}

cplx sphere_inner(const HPoly& P, const HPoly& Q) {
  if (P.n() != Q.n()) throw ValidationError("sphere_inner: dimension mismatch");
  cplx s = 0;
  MultiIndex g(P.n());
  for (const auto& [a, ca] : P.terms())
    for (const auto& [b, cb] : Q.terms()) {
      bool even = true;
      for (int i = 0; i < P.n(); ++i) {
        g[i] = a[i] + b[i];
        if (g[i] % 2) even = false;
      }
      if (even) s += ca * std::conj(cb) * sphere_monomial_moment(g, P.n());
    }
  return s;
}

template <class V>
static cplx evaluate_impl(const HPoly& P, const V& v) {
  if (v.size() != P.n()) throw ValidationError("evaluate: point dimension mismatch");
  cplx s = 0;
  for (const auto& [a, c] : P.terms()) {
    cplx t = c;
    for (int i = 0; i < P.n(); ++i)
      for (int e = 0; e < a[i]; ++e) t *= v[i];
    s += t;
  }
  return s;
}

cplx evaluate(const HPoly& P, const Eigen::Ref<const Eigen::VectorXd>& v) { return evaluate_impl(P, v); }
cplx evaluate(const HPoly& P, const Eigen::Ref<const Eigen::VectorXcd>& v) { return evaluate_impl(P, v); }

HPoly compose_linear(const HPoly& P, const Eigen::MatrixXd& L) {
  if (L.rows() != P.n()) throw ValidationError("compose_linear: L must have n rows");
  const int k = static_cast<int>(L.cols());
  std::vector<HPoly> lin;
  for (int i = 0; i < P.n(); ++i) {
    HPoly l(k, 1);
    for (int j = 0; j < k; ++j) {
      MultiIndex e(k, 0);
      e[j] = 1;
      if (L(i, j) != 0.0) l.add(e, L(i, j));
    }
    lin.push_back(l);
  }
  HPoly out(k, P.m());
  for (const auto& [a, c] : P.terms()) {
    HPoly t = HPoly::constant(k, c);
    for (int i = 0; i < P.n(); ++i)
      for (int e = 0; e < a[i]; ++e) t = multiply(t, lin[i]);
    out += t;
  }
  return out;
}

Eigen::VectorXcd monomial_coords(const HPoly& P) {
  const auto mons = monomials(P.n(), P.m());
  Eigen::VectorXcd c(static_cast<Eigen::Index>(mons.size()));
  for (size_t i = 0; i < mons.size(); ++i) c[static_cast<Eigen::Index>(i)] = P.coeff(mons[i]);
  return c;
}

HPoly from_monomial_coords(int n, int m, const Eigen::Ref<const Eigen::VectorXcd>& c) {
  const auto mons = monomials(n, m);
  if (static_cast<size_t>(c.size()) != mons.size()) throw ValidationError("coordinate length mismatch");
  HPoly P(n, m);
  for (size_t i = 0; i < mons.size(); ++i)
    if (c[static_cast<Eigen::Index>(i)] != cplx(0)) P.add(mons[i], c[static_cast<Eigen::Index>(i)]);
  return P;
}

Eigen::VectorXcd HarmonicBasis::coords(const HPoly& P) const {
  if (P.n() != n || P.m() != m) throw ValidationError("harmonic coords: degree mismatch");
  Eigen::VectorXcd c(size());
  for (int i = 0; i < size(); ++i) c[i] = sphere_inner(P, members[static_cast<size_t>(i)]);
  return c;
}

HPoly HarmonicBasis::combine(const Eigen::Ref<const Eigen::VectorXcd>& c) const {
  if (c.size() != size()) throw ValidationError("harmonic combine: length mismatch");
  HPoly out(n, m);
  for (int i = 0; i < size(); ++i)
    if (c[i] != cplx(0)) out += members[static_cast<size_t>(i)] * c[i];
  return out;
}

static HarmonicBasis build_basis(int n, int m) {
  HarmonicBasis B;
  B.n = n;
  B.m = m;
  const long long target = dims(n, m).h;
  if (m < 0) return B;
  for (const auto& a : monomials(n, m)) {
    if (a[0] > 1) continue;
    HPoly h(n, m);
    for (const auto& [k, part] : harmonic_decompose(HPoly::monomial(a)))
      if (k == 0) h = part;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : B.members) h -= q * sphere_inner(h, q);
    const double nn = std::sqrt(std::max(0.0, sphere_inner(h, h).real()));
    if (nn < 1e-10) continue;
    h /= cplx(nn);
    B.members.push_back(h);
  }
  if (static_cast<long long>(B.members.size()) != target)
    throw ConvergenceError("harmonic basis construction lost rank");
  return B;
}

const HarmonicBasis& harmonic_basis(int n, int m) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<HarmonicBasis>> cache;
  if (n < 2 || m < 0) throw ValidationError("harmonic_basis requires n >= 2, m >= 0");
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n, m}];
  if (!slot) slot = std::make_unique<HarmonicBasis>(build_basis(n, m));
  return *slot;
}

bool is_harmonic(const HPoly& P, double tol) {
  return coeff_norm(laplace(P)) <= tol * std::max(1.0, coeff_norm(P));
}

HPoly harmonic_antiderivative(const HPoly& p, int j, cplx c) {
  if (j < 0 || j >= p.n()) throw ValidationError("harmonic_antiderivative: coordinate out of range");
  if (p.m() < 0) throw ValidationError("harmonic_antiderivative: negative degree");
  const auto& B = harmonic_basis(p.n(), p.m() + 1);
  const auto rows = static_cast<Eigen::Index>(monomials(p.n(), p.m()).size());
  Eigen::MatrixXcd M(rows, B.size());
  for (int l = 0; l < B.size(); ++l) M.col(l) = monomial_coords(partial(B.members[static_cast<size_t>(l)], j));
  Eigen::VectorXcd rhs = monomial_coords(p) * c;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(M);
  cod.setThreshold(1e-12);
  Eigen::VectorXcd x = cod.solve(rhs);
  const double res = (M * x - rhs).norm();
  if (res > 1e-10 * std::max(1.0, rhs.norm()))
    throw ValidationError("harmonic_antiderivative: no harmonic solution (residual " + format_double(res) + ")");
  return B.combine(x);
}

std::string format_double(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  double x = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ValidationError("cannot parse number '" + s + "'");
  return x;
}

void write_hpoly(std::ostream& os, const HPoly& P) {
  os << "HPOLY " << P.n() << ' ' << P.m() << ' ' << P.terms().size() << '\n';
  for (const auto& [a, c] : P.terms()) {
    os << format_double(c.real()) << ' ' << format_double(c.imag());
    for (int x : a) os << ' ' << x;
    os << '\n';
  }
}

HPoly read_hpoly(std::istream& is) {
  std::string tag;
  int n = 0, m = 0;
  size_t terms = 0;
  if (!(is >> tag >> n >> m >> terms) || tag != "HPOLY") throw ValidationError("expected HPOLY header");
  HPoly P(n, m);
  for (size_t t = 0; t < terms; ++t) {
    std::string re, im;
    if (!(is >> re >> im)) throw ValidationError("truncated HPOLY term");
    MultiIndex a(n);
    for (int i = 0; i < n; ++i)
      if (!(is >> a[i])) throw ValidationError("truncated HPOLY exponents");
    P.add(a, cplx(parse_double(re), parse_double(im)));
  }
  return P;
}

}  // namespace ckt
