#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ckt/cli.hpp"
#include "ckt/connalg.hpp"
#include "ckt/errors.hpp"
#include "ckt/holonomy.hpp"
#include "ckt/polyharm.hpp"
#include "ckt/spectral.hpp"
#include "ckt/symbolcheck.hpp"
#include "ckt/torusmodel.hpp"
#include "runconfig.hpp"
#include "samples.hpp"

namespace ckt::cli {

namespace {

std::string fmt(double x) { return format_double(x); }

BundleKind parse_kind(const std::string& s) {
  if (s == "vector") return BundleKind::Vector;
  if (s == "endomorphism") return BundleKind::Endomorphism;
  throw ValidationError("torus.kind must be vector or endomorphism, got '" + s + "'");
}

TorusConfig torus_config(const RunConfig& cfg) {
  TorusConfig c;
  c.n = cfg.integer("torus", "n");
  c.K = cfg.integer("torus", "K");
  c.m = cfg.integer("torus", "m");
  c.r = cfg.integer("torus", "r");
  c.kind = parse_kind(cfg.str("torus", "kind"));
  c.validate();
  return c;
}

FourierConnection load_connection(const std::string& path, int n, int r) {
  if (path.empty()) return FourierConnection(n, r);
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open connection file " + path);
  FourierConnection c = read_fourier_connection(is);
  if (c.n != n || c.r != r) throw ValidationError("connection file " + path + " does not match torus n and r");
  return c;
}

int cmd_dims(RunConfig& cfg, std::ostream& out) {
  const int n = cfg.integer("dims", "n");
  const int mmax = cfg.integer("dims", "mmax");
  if (n < 1) throw ValidationError("dims: n >= 1 required");
  if (mmax < 0) throw ValidationError("dims: mmax >= 0 required");
  auto csv = open_output(cfg, "dims.csv");
  csv << "n,m,p,h\n";
  out << std::setw(3) << "n" << std::setw(4) << "m" << std::setw(12) << "p" << std::setw(12) << "h" << '\n';
  for (int m = 0; m <= mmax; ++m) {
    const Dims d = dims(n, m);
    out << std::setw(3) << n << std::setw(4) << m << std::setw(12) << d.p << std::setw(12) << d.h << '\n';
    csv << n << ',' << m << ',' << d.p << ',' << d.h << '\n';
  }
  return 0;
}

int cmd_harmdecomp(RunConfig& cfg, std::ostream& out) {
  std::vector<HPoly> polys;
  const std::string input = cfg.str("harmdecomp", "input");
  if (!input.empty()) {
    std::ifstream is(input);
    if (!is) throw ValidationError("cannot open polynomial file " + input);
    while (is >> std::ws && is.peek() != EOF) polys.push_back(read_hpoly(is));
  } else {
    const int n = cfg.integer("harmdecomp", "n");
    const int m = cfg.integer("harmdecomp", "m");
    const int count = cfg.integer("harmdecomp", "count");
    if (n < 1 || m < 0 || count < 1) throw ValidationError("harmdecomp: need n >= 1, m >= 0, count >= 1");
    std::mt19937_64 rng(cfg.seed);
    for (int i = 0; i < count; ++i) polys.push_back(random_poly(rng, n, m));
  }
  auto csv = open_output(cfg, "harmdecomp.csv");
  auto parts_file = open_output(cfg, "harmdecomp.parts.txt");
  csv << "poly,k,degree,coeff_norm,laplacian_norm,residual\n";
  double worst_res = 0, worst_lap = 0;
  for (size_t i = 0; i < polys.size(); ++i) {
    const HPoly& p = polys[i];
    const auto parts = harmonic_decompose(p);
    const double res = coeff_norm(reconstruct(p.n(), p.m(), parts) - p) / std::max(1.0, coeff_norm(p));
    worst_res = std::max(worst_res, res);
    for (const auto& [k, h] : parts) {
      const double lap = coeff_norm(laplace(h));
      worst_lap = std::max(worst_lap, lap);
      csv << i << ',' << k << ',' << h.m() << ',' << fmt(coeff_norm(h)) << ',' << fmt(lap) << ',' << fmt(res) << '\n';
      parts_file << "PART " << i << ' ' << k << '\n';
      write_hpoly(parts_file, h);
    }
  }
  const bool pass = worst_res <= cfg.tol && worst_lap <= cfg.tol;
  out << "polynomials=" << polys.size() << " max_residual=" << fmt(worst_res) << " max_laplacian=" << fmt(worst_lap)
      << " pass=" << (pass ? "yes" : "no") << '\n';
  return 0;
}

int cmd_divtype(RunConfig& cfg, std::ostream& out) {
  const std::string family = cfg.str("divtype", "family");
  const int n = cfg.integer("divtype", "n");
  const int samples = cfg.integer("divtype", "samples");
  if (samples < 1) throw ValidationError("divtype.samples >= 1 required");
  SymbolFamily fam;
  if (family == "dstar") {
    const std::string model = cfg.str("divtype", "model");
    if (model != "tracefree" && model != "full") throw ValidationError("divtype.model must be tracefree or full");
    fam = dstar_family(n, cfg.integer("divtype", "m"), model == "full" ? TensorModel::Full : TensorModel::TraceFree);
  } else if (family == "divergence") {
    fam = divergence_family(n);
  } else if (family == "counterexample") {
    fam = counterexample_family(n, cfg.integer("divtype", "r"));
  } else if (family == "forms") {
    fam = forms_family(n, cfg.integer("divtype", "k"));
  } else {
    throw ValidationError("divtype.family must be dstar, divergence, counterexample or forms");
  }
  const SpanReport rep = uniform_span(fam, CosphereSampler(n, cfg.seed), samples);
  auto csv = open_output(cfg, "divtype.csv");
  write_span_csv(csv, rep);
  out << "family=" << rep.family << " span=" << rep.span_dim << '/' << rep.fiber_dim
      << " verdict=" << to_string(rep.verdict) << " converged=" << (rep.converged ? "yes" : "no")
      << (rep.edge_case ? " edge_case=yes" : "") << '\n';
  return 0;
}

int cmd_commutator(RunConfig& cfg, std::ostream& out) {
  std::vector<Eigen::MatrixXcd> inputs;
  const std::string input = cfg.str("commutator", "input");
  if (!input.empty()) {
    std::ifstream is(input);
    if (!is) throw ValidationError("cannot open matrix file " + input);
    while (is >> std::ws && is.peek() != EOF) inputs.push_back(read_matrix(is));
  } else {
    const int r = cfg.integer("commutator", "r");
    const int count = cfg.integer("commutator", "count");
    if (r < 2 || count < 1) throw ValidationError("commutator: need r >= 2 and count >= 1");
    std::mt19937_64 rng(cfg.seed);
    for (int i = 0; i < count; ++i) inputs.push_back(random_skew_tracefree(rng, r));
  }
  auto csv = open_output(cfg, "commutator.csv");
  auto mats = open_output(cfg, "commutator.factors.txt");
  csv << "index,r,residual,skew_A,skew_G\n";
  double worst = 0;
  for (size_t i = 0; i < inputs.size(); ++i) {
    const CommutatorFactor f = commutator_factor(inputs[i]);
    const double res = (f.A * f.G - f.G * f.A - inputs[i]).norm();
    const double sa = (f.A + f.A.adjoint()).norm(), sg = (f.G + f.G.adjoint()).norm();
    worst = std::max({worst, res, sa, sg});
    csv << i << ',' << inputs[i].rows() << ',' << fmt(res) << ',' << fmt(sa) << ',' << fmt(sg) << '\n';
    write_matrix(mats, f.A);
    write_matrix(mats, f.G);
  }
  out << "matrices=" << inputs.size() << " max_defect=" << fmt(worst) << " pass=" << (worst <= cfg.tol ? "yes" : "no")
      << '\n';
  return 0;
}

int cmd_torus_ckt(RunConfig& cfg, std::ostream& out) {
  const TorusConfig c = torus_config(cfg);
  const FourierConnection conn = load_connection(cfg.str("torus", "connection"), c.n, c.r);
  const TorusAssembly a = assemble(c, conn);
  const NullSpace ns = sparse_null_space(a.xplus, cfg.tol);
  KernelReport ker;
  ker.basis = ns.basis;
  const TorusIndex idx(c);
  const auto per = static_cast<Eigen::Index>(dims(c.n, c.m).h * c.fdim());
  auto csv = open_output(cfg, "torus_ckt.csv");
  csv << "mode";
  for (int i = 0; i < c.n; ++i) csv << ",k" << i + 1;
  csv << ",weight\n";
  for (size_t mi = 0; mi < idx.modes.size(); ++mi) {
    const double w = ker.basis.middleRows(static_cast<Eigen::Index>(mi) * per, per).squaredNorm();
    if (w <= 1e-24) continue;
    csv << mi;
    for (int k : idx.modes[mi]) csv << ',' << k;
    csv << ',' << fmt(w) << '\n';
  }
  double via_d = -1;
  if (conn.is_unitary()) {
    const TorusAssembly b = assemble_via_D(c, conn);
    via_d = std::max(max_entry_difference(a.xplus, b.xplus), max_entry_difference(a.xminus_direct, b.xminus_direct));
  }
  csv << "# kernel_dim=" << ns.basis.cols() << " adjointness_defect=" << fmt(a.adjointness_defect())
      << " route_difference=" << fmt(via_d) << " dropped_couplings=" << a.dropped_couplings << '\n';
  out << "basis_dim=" << a.xplus.cols() << " kernel_dim=" << ns.basis.cols()
      << " adjointness_defect=" << fmt(a.adjointness_defect()) << " route_difference=" << fmt(via_d)
      << " dropped_couplings=" << a.dropped_couplings << '\n';
  return 0;
}

int cmd_torus_eject(RunConfig& cfg, std::ostream& out) {
  const TorusConfig c = torus_config(cfg);
  const FourierConnection conn0 = load_connection(cfg.str("torus", "connection"), c.n, c.r);
  FourierConnection A(c.n, c.r);
  const std::string pert = cfg.str("eject", "perturbation");
  if (!pert.empty()) {
    A = load_connection(pert, c.n, c.r);
  } else {
    const int comp = cfg.integer("eject", "component");
    const int axis = cfg.integer("eject", "axis");
    if (comp < 0 || comp >= c.n || axis < 0 || axis >= c.n)
      throw ValidationError("eject.component and eject.axis must lie in [0, n)");
    Eigen::MatrixXcd shape = Eigen::MatrixXcd::Identity(c.r, c.r);
    if (c.kind == BundleKind::Endomorphism)
      for (int i = 0; i < c.r; ++i) shape(i, i) = (i % 2 == 0) ? 1.0 : -1.0;
    A = ejection_perturbation(c.n, c.r, cfg.real("eject", "amplitude"), comp, axis, shape);
  }
  const double smax = cfg.real("eject", "s_max");
  const int pts = cfg.integer("eject", "s_points");
  if (pts < 3 || !(smax > 0)) throw ValidationError("eject: need s_points >= 3 and s_max > 0");
  std::vector<double> grid;
  for (int i = 0; i < pts; ++i) grid.push_back(-smax + 2 * smax * i / (pts - 1));
  const ScanResult res = lambda_scan(c, conn0, A, grid, cfg.real("eject", "radius"));
  auto csv = open_output(cfg, "torus_eject.csv");
  write_scan_csv(csv, res);
  if (c.kind == BundleKind::Endomorphism && c.m == 0) {
    double worst = 0;
    const Eigen::VectorXcd one = identity_section(c);
    for (double s : grid) {
      const TorusAssembly as = assemble(c, conn0.plus(A.scaled(s)));
      worst = std::max(worst, (as.xplus * one).squaredNorm() / one.squaredNorm());
    }
    csv << "# identity_rayleigh_max=" << fmt(worst) << '\n';
    out << "identity_rayleigh_max=" << fmt(worst) << '\n';
  }
  out << "predicted_total=" << fmt(res.predicted_total) << " lambda_dot_fit=" << fmt(res.lambda_dot_fit)
      << " lambda_ddot_fit=" << fmt(res.lambda_ddot_fit) << " ratio=" << fmt(res.ratio) << " factor=" << res.factor
      << '\n';
  return 0;
}

int cmd_kato(RunConfig& cfg, std::ostream& out) {
  const int size = cfg.integer("kato", "size");
  const int count = cfg.integer("kato", "count");
  const int kdim = cfg.integer("kato", "kernel_dim");
  const double radius = cfg.real("kato", "radius");
  if (size < 1 || count < 1 || kdim < 0 || kdim > size) throw ValidationError("kato: need 0 <= kernel_dim <= size");
  if (!(radius > 0 && radius < 1)) throw ValidationError("kato.radius must lie in (0, 1)");
  std::mt19937_64 rng(cfg.seed);
  std::vector<LambdaDerivatives> rows;
  double worst_id = 0, worst_pi = 0, worst_conj = 0;
  for (int i = 0; i < count; ++i) {
    const Eigen::MatrixXcd X = random_skew_with_kernel(rng, size, kdim);
    Eigen::MatrixXcd P = random_complex(rng, size, size);
    P = (0.5 * (P - P.adjoint())).eval();
    P /= P.norm();
    const SpectralWindow W = spectral_window(X, radius);
    worst_id = std::max(worst_id, resolvent_identity_check(W));
    worst_pi = std::max(worst_pi, pi_operator(W).norm());
    worst_conj = std::max(worst_conj, conjugation_check(X, P, {-0.05, 0.0, 0.05}, radius));
    rows.push_back(lambda_derivatives(X, P, radius));
  }
  auto csv = open_output(cfg, "kato.csv");
  write_derivatives_csv(csv, rows);
  csv << "# identity_residual=" << fmt(worst_id) << " pi_norm=" << fmt(worst_pi) << " conjugation=" << fmt(worst_conj)
      << '\n';
  out << "instances=" << count << " identity_residual=" << fmt(worst_id) << " pi_norm=" << fmt(worst_pi)
      << " conjugation=" << fmt(worst_conj) << '\n';
  return 0;
}

FourierConnection holonomy_example(const RunConfig& cfg) {
  const std::string ex = cfg.str("holonomy", "example");
  if (ex == "file") {
    const std::string path = cfg.str("holonomy", "connection");
    if (path.empty()) throw ValidationError("holonomy.example=file needs holonomy.connection");
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open connection file " + path);
    return read_fourier_connection(is);
  }
  const cplx I(0, 1);
  if (ex == "diagonal") {
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(2, 2);
    A(0, 0) = I;
    A(1, 1) = 2.0 * I;
    return FourierConnection::constant(FiberConnForm::single(2, A, 0));
  }
  if (ex == "pauli") {
    Eigen::MatrixXcd sx(2, 2), sy(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, -I, I, 0;
    FiberConnForm G(2, 2);
    G.gammas[0] = I * sx;
    G.gammas[1] = I * sy;
    return FourierConnection::constant(G);
  }
  if (ex == "zero") return FourierConnection(2, 2);
  throw ValidationError("holonomy.example must be diagonal, pauli, zero or file");
}

int cmd_holonomy(RunConfig& cfg, std::ostream& out) {
  const FourierConnection conn = holonomy_example(cfg);
  const OpacityReport rep = opacity_probe(conn, cfg.integer("holonomy", "geodesics"), cfg.real("holonomy", "length"),
                                          cfg.integer("holonomy", "steps"), cfg.seed, cfg.tol,
                                          cfg.integer("holonomy", "max_steps"));
  auto csv = open_output(cfg, "holonomy.csv");
  write_probe_csv(csv, rep);
  out << "verdict=" << rep.verdict << " commutant_dim=" << rep.commutant_dim << " projectors=" << rep.projectors.size()
      << " unitarity_defect=" << fmt(rep.max_unitarity_defect) << '\n'
      << rep.message << '\n';
  return 0;
}

int cmd_selftest(RunConfig& cfg, std::ostream& out) {
  const auto checks = selftest_suite(cfg.seed);
  auto csv = open_output(cfg, "selftest.csv");
  csv << "check,pass,detail\n";
  int failed = 0;
  for (const auto& c : checks) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.detail << '\n';
    csv << c.name << ',' << (c.pass ? "yes" : "no") << ",\"" << c.detail << "\"\n";
    if (!c.pass) ++failed;
  }
  out << checks.size() - failed << '/' << checks.size() << " checks passed\n";
  return failed ? 3 : 0;
}

const std::map<std::string, std::string> kTorusDefaults = {
    {"n", "3"}, {"K", "1"}, {"m", "0"}, {"r", "1"}, {"kind", "vector"}, {"connection", ""}};

}  // namespace

std::map<std::string, Command> commands() {
  std::map<std::string, Command> c;
  c["dims"] = {"table of polynomial and harmonic dimensions", {{"dims", {{"n", "3"}, {"mmax", "4"}}}}, false, 0,
               cmd_dims};
  c["harmdecomp"] = {"harmonic decomposition of random or given polynomials",
                     {{"harmdecomp", {{"n", "3"}, {"m", "4"}, {"count", "10"}, {"input", ""}}}},
                     true,
                     1e-12,
                     cmd_harmdecomp};
  c["check-divtype"] = {
      "uniform divergence-type verdict for a symbol family",
      {{"divtype",
        {{"family", "dstar"}, {"n", "3"}, {"m", "2"}, {"model", "tracefree"}, {"r", "2"}, {"k", "1"}, {"samples", "64"}}}},
      false,
      0,
      cmd_divtype};
  c["commutator-factor"] = {"factor trace-free skew-Hermitian matrices as commutators",
                            {{"commutator", {{"r", "3"}, {"count", "10"}, {"input", ""}}}},
                            true,
                            1e-9,
                            cmd_commutator};
  c["torus-ckt"] = {"kernel of the raising operator on the flat torus model", {{"torus", kTorusDefaults}}, true, 1e-12,
                    cmd_torus_ckt};
  c["torus-eject"] = {"eigenvalue scan of a perturbed torus connection",
                      {{"torus", kTorusDefaults},
                       {"eject",
                        {{"amplitude", "1"},
                         {"component", "0"},
                         {"axis", "1"},
                         {"s_max", "0.05"},
                         {"s_points", "9"},
                         {"radius", "-1"},
                         {"perturbation", ""}}}},
                      false,
                      0,
                      cmd_torus_eject};
  c["kato"] = {"resolvent identities and eigenvalue derivatives on random skew-adjoint matrices",
               {{"kato", {{"size", "12"}, {"count", "20"}, {"kernel_dim", "2"}, {"radius", "0.5"}}}},
               false,
               0,
               cmd_kato};
  c["holonomy"] = {"parallel transport and opacity probe",
                   {{"holonomy",
                     {{"example", "diagonal"}, {"connection", ""}, {"geodesics", "8"}, {"length", "5"},
                      {"steps", "64"},
                      {"max_steps", "1048576"}}}},
                   true,
                   1e-6,
                   cmd_holonomy};
  c["selftest"] = {"run the invariant suite", {}, false, 0, cmd_selftest};
  return c;
}

}  // namespace ckt::cli
