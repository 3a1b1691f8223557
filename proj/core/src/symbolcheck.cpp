#include "ckt/symbolcheck.hpp"

#include <cmath>
#include <ostream>
#include <random>

namespace ckt {

static Eigen::MatrixXcd model_basis(int n, int m, TensorModel model) {
  return model == TensorModel::TraceFree ? tracefree_basis(n, m) : full_symmetric_basis(n, m);
}

Eigen::MatrixXcd symbol_dstar(int n, int m, const Eigen::Ref<const Eigen::VectorXd>& xi, TensorModel model) {
  if (xi.size() != n) throw ValidationError("symbol_dstar: covector dimension mismatch");
  if (std::abs(xi.norm() - 1.0) > 1e-12) throw ValidationError("symbol_dstar: covector must be unit");
  const Eigen::MatrixXcd Cin = model_basis(n, m, model);
  if (m == 0) return Eigen::MatrixXcd::Zero(0, Cin.cols());
  const Eigen::MatrixXcd Cout = model_basis(n, m - 1, model);
  Eigen::MatrixXcd Y = contract_matrix(n, m, xi) * Cin;
  if (model == TensorModel::TraceFree) Y = tracefree_projector(n, m - 1) * Y;
  const Eigen::VectorXd w = tensor_metric_weights(n, m - 1);
  return cplx(0, -1) * (Cout.adjoint() * w.asDiagonal() * Y);
}

Eigen::MatrixXcd tensor_rotation(int n, int m, const Eigen::MatrixXd& R, TensorModel model) {
  if (R.rows() != n || R.cols() != n) throw ValidationError("tensor_rotation: R must be n x n");
  const Eigen::MatrixXcd C = model_basis(n, m, model);
  const Eigen::VectorXd w = tensor_metric_weights(n, m);
  const Eigen::MatrixXd Rt = R.transpose();
  Eigen::MatrixXcd rho(C.cols(), C.cols());
  for (Eigen::Index j = 0; j < C.cols(); ++j) {
    const HPoly p = to_poly(from_tensor_coords(n, m, C.col(j)));
    const SymTensor t = from_poly(compose_linear(p, Rt));
    rho.col(j) = C.adjoint() * w.asDiagonal() * tensor_coords(t);
  }
  return rho;
}

Eigen::MatrixXcd kernel_basis(const Eigen::MatrixXcd& M, double tol) {
  const Eigen::Index d = M.cols();
  if (M.rows() == 0 || M.norm() == 0.0) return Eigen::MatrixXcd::Identity(d, d);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  const double smax = s[0];
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > tol * smax) ++rank;
  return svd.matrixV().rightCols(d - rank);
}

SymbolFamily dstar_family(int n, int m, TensorModel model) {
  if (m < 1) throw ValidationError("dstar_family requires m >= 1");
  SymbolFamily f;
  f.name = std::string("dstar-") + (model == TensorModel::TraceFree ? "tracefree" : "full") + "-n" +
           std::to_string(n) + "-m" + std::to_string(m);
  f.n = n;
  const Eigen::MatrixXcd Cin = model_basis(n, m, model);
  const Eigen::MatrixXcd Cout = model_basis(n, m - 1, model);
  f.domain_dim = static_cast<int>(Cin.cols());
  f.codomain_dim = static_cast<int>(Cout.cols());
  f.evaluate = [n, m, model](const Eigen::VectorXd& xi) { return symbol_dstar(n, m, xi, model); };
  f.edge_case = (n == 2 && m == 1);
  return f;
}

SymbolFamily divergence_family(int n) {
  SymbolFamily f;
  f.name = "divergence-n" + std::to_string(n);
  f.n = n;
  f.domain_dim = n;
  f.codomain_dim = 1;
  f.evaluate = [](const Eigen::VectorXd& xi) {
    Eigen::MatrixXcd M = cplx(0, 1) * xi.transpose().cast<cplx>();
    return M;
  };
  return f;
}

SymbolFamily counterexample_family(int n, int r) {
  SymbolFamily f;
  f.name = "counterexample-r" + std::to_string(r);
  f.n = n;
  f.domain_dim = 2 * r;
  f.codomain_dim = r;
  f.evaluate = [r](const Eigen::VectorXd& xi) {
    Eigen::MatrixXcd M(r, 2 * r);
    const double s = xi.squaredNorm();
    M.leftCols(r) = s * Eigen::MatrixXcd::Identity(r, r);
    M.rightCols(r) = -s * Eigen::MatrixXcd::Identity(r, r);
    return M;
  };
  return f;
}

static std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

SymbolFamily forms_family(int n, int k) {
  if (k < 0 || k > n) throw ValidationError("forms_family requires 0 <= k <= n");
  SymbolFamily f;
  f.name = "forms-n" + std::to_string(n) + "-k" + std::to_string(k);
  f.n = n;
  const auto dom = subsets(n, k);
  const auto cod = subsets(n, k - 1);
  f.domain_dim = static_cast<int>(dom.size());
  f.codomain_dim = static_cast<int>(cod.size());
  f.evaluate = [dom, cod](const Eigen::VectorXd& xi) {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(cod.size()),
                                                static_cast<Eigen::Index>(dom.size()));
    for (size_t j = 0; j < dom.size(); ++j)
      for (size_t p = 0; p < dom[j].size(); ++p) {
        std::vector<int> rest = dom[j];
        rest.erase(rest.begin() + static_cast<long>(p));
        size_t row = 0;
        while (cod[row] != rest) ++row;
        const double sign = (p % 2 == 0) ? 1.0 : -1.0;
        M(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) += cplx(0, -1) * sign * xi[dom[j][p]];
      }
    return M;
  };
  return f;
}

CosphereSampler::CosphereSampler(int n, std::uint64_t seed) : n_(n) {
  if (n < 2) throw ValidationError("CosphereSampler requires n >= 2");
  const int d = n == 2 ? 1 : (n == 3 ? 2 : n + (n % 2));
  double g = 2.0;
  for (int it = 0; it < 200; ++it) g = std::pow(1.0 + g, 1.0 / (d + 1));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int k = 1; k <= d; ++k) {
    alpha_.push_back(std::fmod(std::pow(1.0 / g, k), 1.0));
    offset_.push_back(U(rng));
  }
}

Eigen::VectorXd CosphereSampler::operator()(int index) const {
  std::vector<double> u(alpha_.size());
  for (size_t k = 0; k < u.size(); ++k) {
    double x = offset_[k] + (index + 1) * alpha_[k];
    u[k] = x - std::floor(x);
  }
  Eigen::VectorXd v(n_);
  if (n_ == 2) {
    v << std::cos(2 * M_PI * u[0]), std::sin(2 * M_PI * u[0]);
    return v;
  }
  if (n_ == 3) {
    const double z = 1.0 - 2.0 * u[0];
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    v << rho * std::cos(2 * M_PI * u[1]), rho * std::sin(2 * M_PI * u[1]), z;
    return v;
  }
  for (int i = 0; i < n_; i += 2) {
    const double r = std::sqrt(-2.0 * std::log(std::max(1e-300, u[static_cast<size_t>(i)])));
    const double t = 2 * M_PI * u[static_cast<size_t>(i) + 1];
    v[i] = r * std::cos(t);
    if (i + 1 < n_) v[i + 1] = r * std::sin(t);
  }
  return v / v.norm();
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Uniform: return "uniform";
    case Verdict::NotUniform: return "not-uniform";
    case Verdict::Elliptic: return "elliptic";
  }
  return "unknown";
}

SpanReport uniform_span(const SymbolFamily& family, const CosphereSampler& sampler, int N) {
  if (sampler.n() != family.n) throw ValidationError("uniform_span: sampler dimension mismatch");
  if (N < 1) throw ValidationError("uniform_span: N >= 1 required");
  SpanReport rep;
  rep.family = family.name;
  rep.fiber_dim = family.domain_dim;
  rep.edge_case = family.edge_case;
  Eigen::MatrixXcd Q(family.domain_dim, 0);
  int last_change = 0;
  bool all_zero = true;
  for (int i = 0; i < N; ++i) {
    const Eigen::VectorXd xi = sampler(i);
    const Eigen::MatrixXcd M = family.evaluate(xi);
    if (M.cols() != family.domain_dim || M.rows() != family.codomain_dim)
      throw ValidationError("uniform_span: symbol shape changed");
    const Eigen::MatrixXcd K = kernel_basis(M, 1e-10);
    rep.kernel_dims.push_back(static_cast<int>(K.cols()));
    if (K.cols() > 0) all_zero = false;
    if (K.cols() > 0 && Q.cols() < family.domain_dim) {
      Eigen::MatrixXcd R = K - Q * (Q.adjoint() * K);
      R -= Q * (Q.adjoint() * R);
      Eigen::BDCSVD<Eigen::MatrixXcd> svd(R, Eigen::ComputeThinU);
      int add = 0;
      for (Eigen::Index j = 0; j < svd.singularValues().size(); ++j)
        if (svd.singularValues()[j] > 1e-8) ++add;
      if (add > 0) {
        Eigen::MatrixXcd Qn(Q.rows(), Q.cols() + add);
        Qn << Q, svd.matrixU().leftCols(add);
        Q = Qn;
        last_change = i + 1;
      }
    }
    rep.span_dims.push_back(static_cast<int>(Q.cols()));
  }
  rep.sampled_count = N;
  rep.span_dim = static_cast<int>(Q.cols());
  rep.stable_after = last_change;
  rep.converged = rep.span_dim == rep.fiber_dim || N - last_change >= std::max(16, rep.fiber_dim);
  if (all_zero)
    rep.verdict = Verdict::Elliptic;
  else if (rep.span_dim == rep.fiber_dim)
    rep.verdict = Verdict::Uniform;
  else
    rep.verdict = Verdict::NotUniform;
  return rep;
}

SpanReport forms_contraction_span(int n, int k, int N, std::uint64_t seed) {
  return uniform_span(forms_family(n, k), CosphereSampler(n, seed), N);
}

void write_span_csv(std::ostream& os, const SpanReport& rep) {
  os << "index,kernel_dim,span_dim\n";
  for (size_t i = 0; i < rep.kernel_dims.size(); ++i)
    os << i << ',' << rep.kernel_dims[i] << ',' << rep.span_dims[i] << '\n';
  os << "# summary family=" << rep.family << " span_dim=" << rep.span_dim << " fiber_dim=" << rep.fiber_dim
     << " verdict=" << to_string(rep.verdict) << " converged=" << (rep.converged ? "yes" : "no")
     << " stable_after=" << rep.stable_after << (rep.edge_case ? " edge_case=n2m1" : "") << '\n';
}

TwistedHarmonic apply_form(const std::vector<EndoMat>& actions, const TwistedHarmonic& f) {
  const int fd = f.fdim();
  if (static_cast<int>(actions.size()) != f.n) throw ValidationError("apply_form: need one action per direction");
  TwistedHarmonic out(f.n, f.m + 1, fd);
  for (int j = 0; j < f.n; ++j)
    for (int a = 0; a < fd; ++a) {
      const HPoly& fa = f.columns[static_cast<size_t>(a)];
      if (fa.is_zero()) continue;
      MultiIndex e(f.n, 0);
      e[j] = 1;
      const HPoly vf = multiply(HPoly::monomial(e), fa);
      for (int b = 0; b < fd; ++b) {
        const cplx l = actions[static_cast<size_t>(j)](b, a);
        if (l != cplx(0)) out.columns[static_cast<size_t>(b)] += vf * l;
      }
    }
  return out;
}

Eigen::MatrixXd orthogonal_complement(const Eigen::Ref<const Eigen::VectorXd>& xi) {
  const auto n = xi.size();
  if (xi.norm() == 0.0) throw ValidationError("orthogonal_complement: zero covector");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(xi / xi.norm());
  const Eigen::MatrixXd Q = qr.householderQ();
  return Q.rightCols(n - 1);
}

static std::vector<HPoly> subsphere_parts(const HPoly& p, const Eigen::MatrixXd& W, int m0) {
  std::vector<HPoly> out;
  const HPoly g = compose_linear(p, W);
  for (const auto& [k, h] : harmonic_decompose(g))
    if (g.m() - 2 * k == m0) out.push_back(h);
  return out;
}

TwistedHarmonic subsphere_component(const TwistedHarmonic& f, const Eigen::Ref<const Eigen::VectorXd>& xi0, int m0) {
  if (f.n < 3) throw ValidationError("subsphere_component: n >= 3 required");
  const Eigen::MatrixXd W = orthogonal_complement(xi0);
  TwistedHarmonic out(f.n, m0, f.fdim());
  for (int a = 0; a < f.fdim(); ++a)
    for (const auto& h : subsphere_parts(f.columns[static_cast<size_t>(a)], W, m0))
      out.columns[static_cast<size_t>(a)] += compose_linear(h, W.transpose());
  return out;
}

double subsphere_component_norm2(const TwistedHarmonic& f, const Eigen::Ref<const Eigen::VectorXd>& xi0, int m0) {
  if (f.n < 3) throw ValidationError("subsphere_component_norm2: n >= 3 required");
  const Eigen::MatrixXd W = orthogonal_complement(xi0);
  double s = 0;
  for (int a = 0; a < f.fdim(); ++a)
    for (const auto& h : subsphere_parts(f.columns[static_cast<size_t>(a)], W, m0)) s += sphere_inner(h, h).real();
  return s;
}

// Gauss rule for the weight (1 - t^2)^a on [-1, 1] by Golub-Welsch.
static void gauss_gegenbauer(int q, double a, std::vector<double>& t, std::vector<double>& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(q, q);
  for (int k = 1; k < q; ++k) {
    const double s = 2.0 * k + 2.0 * a;
    const double beta = 4.0 * k * (k + a) * (k + a) * (k + 2 * a) / (s * s * (s + 1) * (s - 1));
    J(k, k - 1) = J(k - 1, k) = std::sqrt(beta);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::exp((2 * a + 1) * std::log(2.0) + 2 * std::lgamma(a + 1) - std::lgamma(2 * a + 2));
  t.resize(static_cast<size_t>(q));
  w.resize(static_cast<size_t>(q));
  for (int i = 0; i < q; ++i) {
    t[static_cast<size_t>(i)] = es.eigenvalues()[i];
    w[static_cast<size_t>(i)] = mu0 * std::pow(es.eigenvectors()(0, i), 2);
  }
}

SphereQuadrature sphere_quadrature(int d, int N) {
  if (d < 1) throw ValidationError("sphere_quadrature: d >= 1");
  SphereQuadrature Q;
  if (d == 1) {
    const int q = std::max(4, N);
    for (int i = 0; i < q; ++i) {
      const double th = 2 * M_PI * i / q;
      Eigen::VectorXd v(2);
      v << std::cos(th), std::sin(th);
      Q.nodes.push_back(v);
      Q.weights.push_back(2 * M_PI / q);
    }
    return Q;
  }
  const int q = std::max(4, static_cast<int>(std::lround(std::pow(static_cast<double>(N), 1.0 / d))));
  std::vector<double> t, w;
  gauss_gegenbauer(q, (d - 2) / 2.0, t, w);
  const int sub_n = std::max(4, N / q);
  const SphereQuadrature sub = sphere_quadrature(d - 1, sub_n);
  for (size_t i = 0; i < t.size(); ++i) {
    const double rho = std::sqrt(std::max(0.0, 1.0 - t[i] * t[i]));
    for (size_t j = 0; j < sub.nodes.size(); ++j) {
      Eigen::VectorXd v(d + 1);
      v[0] = t[i];
      v.tail(d) = rho * sub.nodes[j];
      Q.nodes.push_back(v);
      Q.weights.push_back(w[i] * sub.weights[j]);
    }
  }
  return Q;
}

static cplx pairing_sum(const std::vector<EndoMat>& acts, const TwistedHarmonic& u, const TwistedHarmonic& Am0,
                        const Eigen::MatrixXd& W, int r, int Nq) {
  const SphereQuadrature Q = sphere_quadrature(static_cast<int>(W.cols()) - 1, Nq);
  cplx s = 0;
  for (size_t i = 0; i < Q.nodes.size(); ++i) {
    const Eigen::VectorXd v = W * Q.nodes[i];
    EndoMat Av = EndoMat::Zero(r, r);
    EndoMat U(r, r), B(r, r);
    for (int j = 0; j < static_cast<int>(v.size()); ++j) Av += v[j] * acts[static_cast<size_t>(j)];
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        U(a, b) = evaluate(u.columns[static_cast<size_t>(a * r + b)], v);
        B(a, b) = evaluate(Am0.columns[static_cast<size_t>(a * r + b)], v);
      }
    const EndoMat C = Av * U - U * Av;
    s += Q.weights[i] * (C.array() * B.conjugate().array()).sum();
  }
  return s;
}

PairingResult fiber_symbol_pairing(const FiberConnForm& A1, const TwistedHarmonic& u, const TwistedHarmonic& Am0,
                                   const Eigen::Ref<const Eigen::VectorXd>& xi0, int Nq) {
  const int n = u.n;
  if (n < 3) throw ValidationError("fiber_symbol_pairing: unsupported dimension n < 3");
  if (A1.n != n || Am0.n != n || xi0.size() != n) throw ValidationError("fiber_symbol_pairing: dimension mismatch");
  if (A1.r * A1.r != u.fdim() || Am0.fdim() != u.fdim())
    throw ValidationError("fiber_symbol_pairing: endomorphism fiber mismatch");
  if (Nq < 8) throw ValidationError("fiber_symbol_pairing: Nq >= 8 required");
  const Eigen::MatrixXd W = orthogonal_complement(xi0);
  const double pref = 2 * M_PI / xi0.norm();
  const cplx full = pairing_sum(A1.gammas, u, Am0, W, A1.r, Nq);
  const cplx half = pairing_sum(A1.gammas, u, Am0, W, A1.r, Nq / 2);
  PairingResult res;
  res.value = pref * full;
  res.error_estimate = pref * std::abs(full - half);
  res.nodes = static_cast<int>(sphere_quadrature(n - 2, Nq).nodes.size());
  return res;
}

}  // namespace ckt
