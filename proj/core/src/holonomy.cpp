#include "ckt/holonomy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "ckt/errors.hpp"

namespace ckt {

void GeodesicSegment::validate() const {
  if (x0.size() != v.size() || v.size() < 1) throw ValidationError("geodesic: x0 and v must have the same dimension");
  if (std::abs(v.norm() - 1.0) > 1e-12) throw ValidationError("geodesic: direction must be a unit vector");
  if (!(length >= 0)) throw ValidationError("geodesic: length must be nonnegative");
}

namespace {

bool claims_unitary(const FourierConnection& conn) {
  for (const auto& [q, G] : conn.coeffs)
    if (G.unitary) return true;
  return false;
}

Eigen::MatrixXcd rk4(const FourierConnection& conn, const GeodesicSegment& seg, int steps) {
  const int r = conn.r;
  const double h = seg.length / steps;
  auto F = [&](double t, const Eigen::MatrixXcd& C) -> Eigen::MatrixXcd {
    const Eigen::VectorXd x = seg.x0 + t * seg.v;
    return -conn.at(x, seg.v) * C;
  };
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Identity(r, r);
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    const Eigen::MatrixXcd k1 = F(t, C);
    const Eigen::MatrixXcd k2 = F(t + h / 2, C + (h / 2) * k1);
    const Eigen::MatrixXcd k3 = F(t + h / 2, C + (h / 2) * k2);
    const Eigen::MatrixXcd k4 = F(t + h, C + h * k3);
    C += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return C;
}

Eigen::VectorXd random_unit(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  do {
    for (int i = 0; i < n; ++i) v[i] = g(rng);
  } while (v.norm() < 1e-8);
  return v / v.norm();
}

Eigen::VectorXd random_point(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = u(rng);
  return x;
}

}  // namespace

TransportResult transport(const FourierConnection& conn, const GeodesicSegment& seg, int steps, double tol,
                          int max_steps) {
  seg.validate();
  if (seg.v.size() != conn.n) throw ValidationError("transport: segment dimension does not match connection");
  if (steps < 16) throw ValidationError("transport: at least 16 steps required");
  if (claims_unitary(conn) && !conn.is_unitary(1e-12))
    throw ValidationError("transport: connection flagged unitary is not skew-Hermitian");
  TransportResult res;
  Eigen::MatrixXcd coarse = rk4(conn, seg, steps);
  while (true) {
    const Eigen::MatrixXcd fine = rk4(conn, seg, 2 * steps);
    res.error_estimate = (fine - coarse).norm() / 15.0;
    res.C = fine;
    res.steps = 2 * steps;
    if (res.error_estimate <= tol) break;
    if (4 * steps > max_steps)
      throw ConvergenceError("transport: step-halving estimate " + format_double(res.error_estimate) +
                             " above tolerance at " + std::to_string(res.steps) + " steps");
    steps *= 2;
    coarse = fine;
  }
  res.unitarity_defect = (res.C.adjoint() * res.C - Eigen::MatrixXcd::Identity(conn.r, conn.r)).norm();
  return res;
}

EndoField::EndoField(int n_, int r_) : n(n_), r(r_) {}

EndoField EndoField::constant(int n, const Eigen::MatrixXcd& P) {
  if (P.rows() != P.cols()) throw ValidationError("EndoField: square matrix required");
  EndoField f(n, static_cast<int>(P.rows()));
  f.add_mode(std::vector<int>(static_cast<size_t>(n), 0), P);
  return f;
}

void EndoField::add_mode(const std::vector<int>& q, const Eigen::MatrixXcd& M) {
  if (static_cast<int>(q.size()) != n || M.rows() != r || M.cols() != r)
    throw ValidationError("EndoField: mode shape mismatch");
  auto it = modes.find(q);
  if (it == modes.end())
    modes.emplace(q, M);
  else
    it->second += M;
}

Eigen::MatrixXcd EndoField::at(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(r, r);
  for (const auto& [q, M] : modes) {
    double ph = 0;
    for (int i = 0; i < n; ++i) ph += q[static_cast<size_t>(i)] * x[i];
    out += std::exp(cplx(0, ph)) * M;
  }
  return out;
}

Eigen::MatrixXcd EndoField::derivative(const Eigen::Ref<const Eigen::VectorXd>& x,
                                       const Eigen::Ref<const Eigen::VectorXd>& v) const {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(r, r);
  for (const auto& [q, M] : modes) {
    double ph = 0, qv = 0;
    for (int i = 0; i < n; ++i) {
      ph += q[static_cast<size_t>(i)] * x[i];
      qv += q[static_cast<size_t>(i)] * v[i];
    }
    if (qv != 0) out += cplx(0, qv) * std::exp(cplx(0, ph)) * M;
  }
  return out;
}

EndoField EndoField::complement() const {
  EndoField out(n, r);
  for (const auto& [q, M] : modes) out.add_mode(q, -M);
  out.add_mode(std::vector<int>(static_cast<size_t>(n), 0), Eigen::MatrixXcd::Identity(r, r));
  return out;
}

double flow_defect_at(const FourierConnection& conn, const EndoField& P, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& v) {
  const Eigen::MatrixXcd G = conn.at(x, v);
  const Eigen::MatrixXcd Px = P.at(x);
  return (P.derivative(x, v) + G * Px - Px * G).norm();
}

double invariance_defect(const FourierConnection& conn, const EndoField& P, int samples, std::uint64_t seed) {
  if (P.n != conn.n || P.r != conn.r) throw ValidationError("invariance_defect: field shape does not match connection");
  std::mt19937_64 rng(seed);
  double worst = 0;
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd x = random_point(rng, conn.n);
    const Eigen::VectorXd v = random_unit(rng, conn.n);
    const Eigen::MatrixXcd Px = P.at(x);
    if ((Px * Px - Px).norm() > 1e-8 || (Px - Px.adjoint()).norm() > 1e-8)
      throw ValidationError("invariance_defect: field is not a Hermitian projector at a sample point");
    worst = std::max(worst, flow_defect_at(conn, P, x, v));
  }
  return worst;
}

OpacityReport opacity_probe(const FourierConnection& conn, int num_geodesics, double length, int steps,
                            std::uint64_t seed, double tol, int max_steps) {
  if (num_geodesics < 1) throw ValidationError("opacity_probe: at least one geodesic required");
  const int n = conn.n, r = conn.r;
  std::mt19937_64 rng(seed);
  const Eigen::VectorXd base = random_point(rng, n);
  OpacityReport rep;
  rep.tolerance = tol;
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(r, r);
  Eigen::MatrixXcd L(static_cast<Eigen::Index>(num_geodesics) * r * r, r * r);
  for (int j = 0; j < num_geodesics; ++j) {
    GeodesicSegment seg{base, random_unit(rng, n), length};
    const TransportResult tr = transport(conn, seg, steps, 1e-11, max_steps);
    rep.max_unitarity_defect = std::max(rep.max_unitarity_defect, tr.unitarity_defect);
    // vec(C M - M C) with column-major vec
    L.middleRows(static_cast<Eigen::Index>(j) * r * r, r * r) = kron(I, tr.C) - kron(tr.C.transpose(), I);
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(L, Eigen::ComputeFullV);
  rep.singular_values = svd.singularValues();
  const double smax = rep.singular_values.size() ? rep.singular_values[0] : 0.0;
  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index i = 0; i < r * r; ++i) {
    const double s = i < rep.singular_values.size() ? rep.singular_values[i] : 0.0;
    if (s <= tol * smax) null_cols.push_back(i);
  }
  rep.commutant_dim = static_cast<int>(null_cols.size());

  std::normal_distribution<double> g;
  Eigen::VectorXcd comb = Eigen::VectorXcd::Zero(r * r);
  for (Eigen::Index c : null_cols) comb += cplx(g(rng), g(rng)) * svd.matrixV().col(c);
  const Eigen::MatrixXcd M = Eigen::Map<const Eigen::MatrixXcd>(comb.data(), r, r);
  const Eigen::MatrixXcd H = 0.5 * (M + M.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  const double gap_tol = tol * std::max(1.0, H.norm());
  const FourierConnection& c = conn;
  for (Eigen::Index i = 0; i < r;) {
    Eigen::Index j = i + 1;
    while (j < r && es.eigenvalues()[j] - es.eigenvalues()[j - 1] <= gap_tol) ++j;
    const Eigen::MatrixXcd V = es.eigenvectors().middleCols(i, j - i);
    ProbeProjector p;
    p.P = V * V.adjoint();
    p.rank = static_cast<int>(j - i);
    p.eigenvalue = es.eigenvalues().segment(i, j - i).mean();
    p.defect = invariance_defect(c, EndoField::constant(n, p.P), 64, seed + 1);
    rep.projectors.push_back(std::move(p));
    i = j;
  }
  const std::string tau = format_double(tol);
  if (rep.commutant_dim <= 1) {
    rep.verdict = "opaque";
    rep.message = "no invariant subbundle detected at tolerance " + tau;
  } else if (rep.commutant_dim == r * r) {
    rep.verdict = "transparent";
    rep.message = "commutant is all of End(C^" + std::to_string(r) + ") at tolerance " + tau;
  } else {
    rep.verdict = "not-opaque";
    rep.message = "commutant dimension " + std::to_string(rep.commutant_dim) + " at tolerance " + tau;
  }
  return rep;
}

void write_probe_csv(std::ostream& os, const OpacityReport& rep) {
  os << "projector,rank,eigenvalue,defect\n";
  for (size_t i = 0; i < rep.projectors.size(); ++i) {
    const auto& p = rep.projectors[i];
    os << i << ',' << p.rank << ',' << format_double(p.eigenvalue) << ',' << format_double(p.defect) << '\n';
  }
  os << "# verdict=" << rep.verdict << " commutant_dim=" << rep.commutant_dim << " message=\"" << rep.message
     << "\"\n";
}

FrameCheck parallel_frame_check(const TorusConfig& config, const Eigen::MatrixXcd& basis, int samples,
                                std::uint64_t seed) {
  config.validate();
  const TorusIndex idx(config);
  if (basis.rows() != idx.dim(config.m)) throw ValidationError("parallel_frame_check: basis length mismatch");
  const int fd = config.fdim();
  const auto p = basis.cols();
  std::mt19937_64 rng(seed);
  auto values = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
    Eigen::MatrixXcd U(fd, p);
    for (Eigen::Index j = 0; j < p; ++j) U.col(j) = evaluate_section(config, config.m, basis.col(j), x, v);
    return U;
  };
  FrameCheck fc;
  if (p == 0) {
    fc.independent = true;
    return fc;
  }
  const Eigen::VectorXd x0 = random_point(rng, config.n);
  const Eigen::VectorXd v0 = random_unit(rng, config.n);
  const Eigen::MatrixXcd U0 = values(x0, v0);
  const Eigen::MatrixXcd G0 = U0.adjoint() * U0;
  fc.min_singular = Eigen::JacobiSVD<Eigen::MatrixXcd>(U0).singularValues().minCoeff();
  if (p > fd) fc.min_singular = 0;
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd x = random_point(rng, config.n);
    const Eigen::VectorXd v = random_unit(rng, config.n);
    const Eigen::MatrixXcd U = values(x, v);
    fc.gram_drift = std::max(fc.gram_drift, (U.adjoint() * U - G0).norm());
    if (p <= fd) fc.min_singular = std::min(fc.min_singular, Eigen::JacobiSVD<Eigen::MatrixXcd>(U).singularValues().minCoeff());
  }
  fc.independent = fc.min_singular >= 1e-6;
  return fc;
}

SpreadReport eigenvalue_spread_along(const FourierConnection& conn, const EndoField& u, const GeodesicSegment& seg,
                                     int samples) {
  seg.validate();
  if (samples < 2) throw ValidationError("eigenvalue_spread_along: at least two samples required");
  SpreadReport rep;
  rep.length = seg.length;
  Eigen::VectorXd lo, hi;
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd x = seg.x0 + (seg.length * s / (samples - 1)) * seg.v;
    const Eigen::MatrixXcd U = u.at(x);
    if ((U - U.adjoint()).norm() > 1e-10) throw ValidationError("eigenvalue_spread_along: field is not Hermitian");
    rep.defect = std::max(rep.defect, flow_defect_at(conn, u, x, seg.v));
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(U, Eigen::EigenvaluesOnly).eigenvalues();
    if (s == 0) {
      lo = hi = ev;
    } else {
      lo = lo.cwiseMin(ev);
      hi = hi.cwiseMax(ev);
    }
  }
  rep.spread = (hi - lo).maxCoeff();
  if (rep.defect > 0 && rep.length > 0) rep.constant = rep.spread / (rep.defect * rep.length);
  return rep;
}

}  // namespace ckt
