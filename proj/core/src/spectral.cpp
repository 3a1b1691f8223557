#include "ckt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>

#include "ckt/errors.hpp"

namespace ckt {

namespace {

void check_square(const Eigen::MatrixXcd& X, const char* who) {
  if (X.rows() != X.cols()) throw ValidationError(std::string(who) + ": square matrix required");
}

void check_contour(const Eigen::MatrixXcd& X, double radius) {
  if (!(radius > 0)) throw ValidationError("contour radius must be positive");
  if (X.rows() == 0) return;
  const Eigen::VectorXcd ev = X.eigenvalues();
  Eigen::Index best = 0;
  double dist = 1e300;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double d = std::abs(std::abs(ev[i]) - radius);
    if (d < dist) {
      dist = d;
      best = i;
    }
  }
  if (dist < 1e-8)
    throw ValidationError("contour |z| = " + format_double(radius) + " hits the spectrum; nearest eigenvalue " +
                          format_double(ev[best].real()) + (ev[best].imag() < 0 ? "" : "+") +
                          format_double(ev[best].imag()) + "i");
}

struct ContourSums {
  Eigen::MatrixXcd pp, rp, pm, rm;
};

// Sums over the N-th roots of unity scaled by radius, restricted to odd k when odd_only.
void accumulate(const Eigen::MatrixXcd& X, double radius, int N, bool odd_only, ContourSums& s) {
  const Eigen::Index d = X.rows();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(d, d);
  for (int k = odd_only ? 1 : 0; k < N; k += odd_only ? 2 : 1) {
    const cplx z = std::polar(radius, 2 * std::numbers::pi * k / N);
    const Eigen::MatrixXcd Rp = (X + z * I).partialPivLu().inverse();
    const Eigen::MatrixXcd Rm = (z * I - X).partialPivLu().inverse();
    s.pp += z * Rp;
    s.rp += Rp;
    s.pm += z * Rm;
    s.rm += Rm;
  }
}

double rel_change(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

Eigen::MatrixXcd eigenprojector(const Eigen::MatrixXcd& X, double radius) {
  check_square(X, "eigenprojector");
  const Eigen::Index d = X.rows();
  if (d == 0) return X;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(X);
  if (es.info() != Eigen::Success) throw ConvergenceError("eigenprojector: eigensolver failed");
  const Eigen::MatrixXcd& V = es.eigenvectors();
  const Eigen::MatrixXcd Vi = V.partialPivLu().inverse();
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    if (std::abs(es.eigenvalues()[i]) < radius) D(i, i) = 1.0;
  return V * D * Vi;
}

SpectralWindow spectral_window(const Eigen::MatrixXcd& X, double radius, const ContourOptions& opt) {
  check_square(X, "spectral_window");
  check_contour(X, radius);
  const Eigen::Index d = X.rows();
  ContourSums s{Eigen::MatrixXcd::Zero(d, d), Eigen::MatrixXcd::Zero(d, d), Eigen::MatrixXcd::Zero(d, d),
                Eigen::MatrixXcd::Zero(d, d)};
  int N = std::max(4, opt.initial_nodes);
  accumulate(X, radius, N, false, s);
  Eigen::MatrixXcd pp = s.pp / N, rp = s.rp / N;
  bool done = false;
  while (!done) {
    if (2 * N > opt.max_nodes)
      throw ConvergenceError("spectral_window: contour quadrature did not converge with " +
                             std::to_string(opt.max_nodes) + " nodes");
    N *= 2;
    accumulate(X, radius, N, true, s);
    const Eigen::MatrixXcd pp2 = s.pp / N, rp2 = s.rp / N;
    done = rel_change(pp2, pp) <= opt.tol && rel_change(rp2, rp) <= opt.tol;
    pp = pp2;
    rp = rp2;
  }
  SpectralWindow W;
  W.X = X;
  W.radius = radius;
  W.nodes = N;
  W.pi0_plus = pp;
  W.r0_plus = rp;
  W.pi0_minus = s.pm / N;
  W.r0_minus = s.rm / N;
  W.eigenprojector_defect = d ? (eigenprojector(X, radius) - W.pi0_plus).norm() : 0.0;
  return W;
}

double resolvent_identity_check(const SpectralWindow& W) {
  const Eigen::Index d = W.X.rows();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(d, d);
  const auto& X = W.X;
  const auto& Pp = W.pi0_plus;
  const auto& Pm = W.pi0_minus;
  const auto& Rp = W.r0_plus;
  const auto& Rm = W.r0_minus;
  const Eigen::MatrixXcd res[] = {
      X * Rp - (I - Pp),  Rp * X - (I - Pp), -X * Rm - (I - Pm), -Rm * X - (I - Pm),
      Pp * Rp,            Rp * Pp,           Pm * Rm,            Rm * Pm,
      X * Pp,             Pp * X,            X * Pm,             Pm * X,
      Pp * Pp - Pp,       Pm * Pm - Pm,
  };
  double m = 0;
  for (const auto& r : res) m = std::max(m, r.norm());
  return m;
}

Eigen::MatrixXcd pi_operator(const SpectralWindow& W) { return W.r0_plus + W.r0_minus; }

ClusterTrace cluster_trace(const Eigen::MatrixXcd& X, double radius, const ContourOptions& opt) {
  const SpectralWindow W = spectral_window(X, radius, opt);
  ClusterTrace t;
  t.lambda_plus = (-X * W.pi0_plus).trace();
  t.lambda_minus = (X * W.pi0_minus).trace();
  t.count = W.pi0_plus.trace().real();
  return t;
}

LambdaDerivatives lambda_derivatives(const Eigen::MatrixXcd& X, const Eigen::MatrixXcd& P, double radius,
                                     double step) {
  check_square(X, "lambda_derivatives");
  if (P.rows() != X.rows() || P.cols() != X.cols()) throw ValidationError("lambda_derivatives: shape mismatch");
  ContourOptions opt;
  opt.tol = 1e-13;
  const SpectralWindow W = spectral_window(X, radius, opt);
  LambdaDerivatives out;
  out.dot_closed = -(P * W.pi0_plus).trace();
  out.ddot_closed = 2.0 * (W.pi0_plus * P * W.r0_plus * P * W.pi0_plus).trace();

  double h = step;
  if (h <= 0) {
    const Eigen::VectorXcd ev = X.eigenvalues();
    double gap = 1e300;
    for (Eigen::Index i = 0; i < ev.size(); ++i) gap = std::min(gap, std::abs(std::abs(ev[i]) - radius));
    const double pn = std::max(P.norm(), 1e-300);
    h = 0.01 * std::min(gap, radius) / pn;
  }
  out.step = h;
  const double count0 = W.pi0_plus.trace().real();
  cplx lam[5];
  for (int k = -2; k <= 2; ++k) {
    const ClusterTrace t = cluster_trace(X + (k * h) * P, radius, opt);
    if (std::abs(t.count - count0) > 0.5)
      throw ValidationError("lambda_derivatives: eigenvalue cluster crosses the contour within the stencil");
    lam[k + 2] = t.lambda_plus;
  }
  out.dot_fd = (-lam[4] + 8.0 * lam[3] - 8.0 * lam[1] + lam[0]) / (12 * h);
  out.ddot_fd = (-lam[4] + 16.0 * lam[3] - 30.0 * lam[2] + 16.0 * lam[1] - lam[0]) / (12 * h * h);
  return out;
}

double conjugation_check(const Eigen::MatrixXcd& X, const Eigen::MatrixXcd& P, const std::vector<double>& s_grid,
                         double radius) {
  double m = 0;
  for (double s : s_grid) {
    const ClusterTrace t = cluster_trace(X + s * P, radius);
    m = std::max(m, std::abs(std::conj(t.lambda_minus) - t.lambda_plus));
  }
  return m;
}

void write_derivatives_csv(std::ostream& os, const std::vector<LambdaDerivatives>& rows) {
  os << "index,step,dot_closed_re,dot_closed_im,dot_fd_re,dot_fd_im,ddot_closed_re,ddot_closed_im,ddot_fd_re,"
        "ddot_fd_im\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    os << i << ',' << format_double(r.step) << ',' << format_double(r.dot_closed.real()) << ','
       << format_double(r.dot_closed.imag()) << ',' << format_double(r.dot_fd.real()) << ','
       << format_double(r.dot_fd.imag()) << ',' << format_double(r.ddot_closed.real()) << ','
       << format_double(r.ddot_closed.imag()) << ',' << format_double(r.ddot_fd.real()) << ','
       << format_double(r.ddot_fd.imag()) << '\n';
  }
}

}  // namespace ckt
