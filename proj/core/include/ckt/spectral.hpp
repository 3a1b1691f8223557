#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "ckt/polyharm.hpp"

namespace ckt {

struct ContourOptions {
  int initial_nodes = 16;
  int max_nodes = 1 << 14;
  double tol = 1e-11;
};

// Cluster of eigenvalues of X inside |z| < radius.
//   (X + z)^-1 = pi0_plus / z + r0_plus + O(z)
//   (z - X)^-1 = pi0_minus / z + r0_minus + O(z)
struct SpectralWindow {
  Eigen::MatrixXcd X;
  Eigen::MatrixXcd pi0_plus;
  Eigen::MatrixXcd pi0_minus;
  Eigen::MatrixXcd r0_plus;
  Eigen::MatrixXcd r0_minus;
  double radius = 0;
  int nodes = 0;
  // contour projector against the eigenprojector sum
  double eigenprojector_defect = 0;
};

// Throws ValidationError when an eigenvalue lies within 1e-8 of the contour.
SpectralWindow spectral_window(const Eigen::MatrixXcd& X, double radius, const ContourOptions& opt = {});

// Projector onto the eigenvalues inside |z| < radius, from a complex eigendecomposition.
Eigen::MatrixXcd eigenprojector(const Eigen::MatrixXcd& X, double radius);

// Max Frobenius residual of the resolvent identities.
double resolvent_identity_check(const SpectralWindow& W);

Eigen::MatrixXcd pi_operator(const SpectralWindow& W);

// lambda^+ = Tr(-X Pi0^+), lambda^- = Tr(X Pi0^-); count = Tr(Pi0^+).
struct ClusterTrace {
  cplx lambda_plus;
  cplx lambda_minus;
  double count = 0;
};
ClusterTrace cluster_trace(const Eigen::MatrixXcd& X, double radius, const ContourOptions& opt = {});

struct LambdaDerivatives {
  cplx dot_closed;
  cplx ddot_closed;
  cplx dot_fd;
  cplx ddot_fd;
  double step = 0;
};

// Closed forms -Tr(P Pi0^+) and 2 Tr(Pi0^+ P R0^+ P Pi0^+) against a
// five-point stencil of lambda^+(s). step <= 0 picks 0.01 * gap / |P|.
LambdaDerivatives lambda_derivatives(const Eigen::MatrixXcd& X, const Eigen::MatrixXcd& P, double radius,
                                     double step = -1);

// max over s of |conj(lambda_s^-) - lambda_s^+|
double conjugation_check(const Eigen::MatrixXcd& X, const Eigen::MatrixXcd& P, const std::vector<double>& s_grid,
                         double radius);

void write_derivatives_csv(std::ostream& os, const std::vector<LambdaDerivatives>& rows);

}  // namespace ckt
