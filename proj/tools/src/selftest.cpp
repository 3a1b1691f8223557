#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "ckt/cli.hpp"
#include "ckt/connalg.hpp"
#include "ckt/holonomy.hpp"
#include "ckt/polyharm.hpp"
#include "ckt/spectral.hpp"
#include "ckt/symbolcheck.hpp"
#include "ckt/symtensor.hpp"
#include "ckt/torusmodel.hpp"
#include "samples.hpp"

namespace ckt::cli {

namespace {

std::string kv(const std::string& k, double v) {
  std::ostringstream os;
  os << k << '=' << format_double(v);
  return os.str();
}

SelfCheck check_dims() {
  double worst = 0;
  for (int n = 2; n <= 3; ++n)
    for (int m = 0; m <= 4; ++m) {
      const auto mons = monomials(n, m);
      const auto lower = monomials(n, m - 2);
      Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(lower.size()),
                                                  static_cast<Eigen::Index>(mons.size()));
      for (size_t j = 0; j < mons.size(); ++j)
        if (m >= 2) L.col(static_cast<Eigen::Index>(j)) = monomial_coords(laplace(HPoly::monomial(mons[j])));
      Eigen::FullPivLU<Eigen::MatrixXcd> lu(L);
      const auto nullity = static_cast<long long>(mons.size()) - (m >= 2 ? lu.rank() : 0);
      worst = std::max(worst, static_cast<double>(std::llabs(nullity - dims(n, m).h)));
    }
  return {"dims", worst == 0, kv("max_mismatch", worst)};
}

SelfCheck check_harmdecomp(std::mt19937_64& rng) {
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const HPoly p = random_poly(rng, 3, 1 + t % 5);
    const auto parts = harmonic_decompose(p);
    worst = std::max(worst, coeff_norm(reconstruct(p.n(), p.m(), parts) - p));
    for (const auto& [k, h] : parts) worst = std::max(worst, coeff_norm(laplace(h)));
  }
  return {"harmdecomp", worst <= 1e-12, kv("max_residual", worst)};
}

SelfCheck check_tensors(std::mt19937_64& rng) {
  double worst = 0;
  for (int t = 0; t < 10; ++t) {
    const int m = 2 + t % 3;
    const SymTensor T = from_poly(random_poly(rng, 3, m));
    const HPoly lhs = to_poly(trace(T)) * cplx(m * (m - 1));
    worst = std::max(worst, coeff_norm(lhs - laplace(to_poly(T))));
    const SymTensor S = from_poly(random_poly(rng, 3, m - 2));
    worst = std::max(worst, coeff_norm(to_poly(jay(S)) - multiply(radial_power<cplx>(3, 1), to_poly(S))));
  }
  return {"tensor-intertwining", worst <= 1e-12, kv("max_residual", worst)};
}

SelfCheck check_gamma(std::mt19937_64& rng) {
  const Eigen::MatrixXcd A = random_skew_tracefree(rng, 2);
  const RankReport rr = gamma_minus_matrix(FiberConnForm::single(3, A, 0), 3, 2);
  const bool rank_ok = rr.rank == dims(3, 1).h * 2;
  TwistedHarmonic u(3, 2, 2);
  const auto& B = harmonic_basis(3, 2);
  for (auto& col : u.columns) col = B.combine(random_complex(rng, B.size(), 1).col(0));
  const GammaPreimage pre = solve_gamma_preimage(u);
  TwistedHarmonic diff = gamma_split(pre.G, pre.w).minus;
  diff -= u;
  const double res = twisted_coeff_norm(diff);
  return {"gamma-surjectivity", rank_ok && res <= 1e-9, "rank=" + std::to_string(rr.rank) + " " + kv("residual", res)};
}

SelfCheck check_commutator(std::mt19937_64& rng) {
  double worst = 0;
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXcd u = random_skew_tracefree(rng, 2 + t % 4);
    const CommutatorFactor f = commutator_factor(u);
    worst = std::max({worst, (f.A * f.G - f.G * f.A - u).norm(), (f.A + f.A.adjoint()).norm(),
                      (f.G + f.G.adjoint()).norm()});
  }
  return {"commutator-factor", worst <= 1e-9, kv("max_defect", worst)};
}

SelfCheck check_divtype() {
  const SpanReport a = uniform_span(dstar_family(3, 2), CosphereSampler(3, 1), 64);
  const SpanReport b = uniform_span(dstar_family(2, 2), CosphereSampler(2, 1), 64);
  const bool ok = a.verdict == Verdict::Uniform && b.verdict == Verdict::Elliptic;
  return {"divtype", ok, "n3m2=" + to_string(a.verdict) + " n2m2=" + to_string(b.verdict)};
}

SelfCheck check_torus(std::mt19937_64& rng) {
  TorusConfig c{3, 1, 1, 2, BundleKind::Vector};
  FourierConnection conn = FourierConnection::constant(FiberConnForm::single(3, random_skew_tracefree(rng, 2), 0));
  conn = conn.plus(ejection_perturbation(3, 2, 0.7, 1, 0, random_complex(rng, 2, 2)));
  const TorusAssembly a = assemble(c, conn);
  const TorusAssembly b = assemble_via_D(c, conn);
  const double adj = a.adjointness_defect();
  const double route = std::max(max_entry_difference(a.xplus, b.xplus), max_entry_difference(a.xminus_direct, b.xminus_direct));
  const int kdim = ckt_kernel(assemble(c, FourierConnection(3, 2))).dim();
  const bool ok = adj <= 1e-12 && route <= 1e-10 && kdim == dims(3, 1).h * 2;
  return {"torus-assembly", ok, kv("adjointness", adj) + " " + kv("route", route) + " trivial_kernel=" + std::to_string(kdim)};
}

SelfCheck check_eject() {
  const TorusConfig c{3, 1, 0, 1, BundleKind::Vector};
  const FourierConnection A = ejection_perturbation(3, 1, 1.0, 0, 1, Eigen::MatrixXcd::Identity(1, 1));
  const ScanResult res = lambda_scan(c, FourierConnection(3, 1), A, {-0.04, -0.02, -0.01, 0.0, 0.01, 0.02, 0.04});
  const bool ok = std::abs(res.ratio - 1.0) <= 0.05 || std::abs(res.ratio - 0.5) <= 0.05;
  return {"ejection", ok, kv("ratio", res.ratio) + " factor=" + res.factor};
}

SelfCheck check_kato(std::mt19937_64& rng) {
  const Eigen::MatrixXcd X = random_skew_with_kernel(rng, 10, 2);
  const SpectralWindow W = spectral_window(X, 0.5);
  const double id = resolvent_identity_check(W);
  const double pi = pi_operator(W).norm();
  Eigen::MatrixXcd P = random_complex(rng, 10, 10);
  P = (0.5 * (P - P.adjoint())).eval();
  const LambdaDerivatives d = lambda_derivatives(X, P, 0.5);
  const double err = std::abs(d.ddot_closed - d.ddot_fd) / (1 + std::abs(d.ddot_closed));
  return {"kato", id <= 1e-9 && pi <= 1e-10 && err <= 1e-6,
          kv("identities", id) + " " + kv("pi", pi) + " " + kv("ddot_rel", err)};
}

SelfCheck check_holonomy() {
  const cplx I(0, 1);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(2, 2);
  A(0, 0) = I;
  A(1, 1) = 2.0 * I;
  const OpacityReport diag = opacity_probe(FourierConnection::constant(FiberConnForm::single(2, A, 0)), 8, 5.0);
  Eigen::MatrixXcd sx(2, 2), sy(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -I, I, 0;
  FiberConnForm G(2, 2);
  G.gammas[0] = I * sx;
  G.gammas[1] = I * sy;
  const OpacityReport pauli = opacity_probe(FourierConnection::constant(G), 8, 5.0);
  const bool ok = diag.verdict == "not-opaque" && diag.projectors.size() == 2 && pauli.verdict == "opaque";
  return {"holonomy", ok, "diagonal=" + diag.verdict + " pauli=" + pauli.verdict};
}

SelfCheck check_pairing(std::mt19937_64& rng) {
  TwistedHarmonic u(3, 1, 4);
  const auto& B = harmonic_basis(3, 1);
  for (auto& col : u.columns) col = B.combine(random_complex(rng, B.size(), 1).col(0));
  const PairingWitness w = endo_pairing_witness(u);
  const double rel = std::abs(w.pairing - w.target) / w.target;
  return {"pairing-witness", rel <= 1e-8, kv("relative_error", rel)};
}

}  // namespace

std::vector<SelfCheck> selftest_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SelfCheck> out;
  out.push_back(check_dims());
  out.push_back(check_harmdecomp(rng));
  out.push_back(check_tensors(rng));
  out.push_back(check_gamma(rng));
  out.push_back(check_commutator(rng));
  out.push_back(check_divtype());
  out.push_back(check_torus(rng));
  out.push_back(check_eject());
  out.push_back(check_kato(rng));
  out.push_back(check_holonomy());
  out.push_back(check_pairing(rng));
  return out;
}

}  // namespace ckt::cli
