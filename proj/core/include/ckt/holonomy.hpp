#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ckt/torusmodel.hpp"

namespace ckt {

struct GeodesicSegment {
  Eigen::VectorXd x0;
  Eigen::VectorXd v;  // unit
  double length = 0;

  void validate() const;
};

struct TransportResult {
  Eigen::MatrixXcd C;
  int steps = 0;
  double error_estimate = 0;
  double unitarity_defect = 0;
};

// C' = -Gamma_{x0 + t v}(v) C, C(0) = 1, by RK4. The step count doubles from
// steps until the halving estimate is below tol; ConvergenceError past max_steps.
TransportResult transport(const FourierConnection& conn, const GeodesicSegment& seg, int steps = 64,
                          double tol = 1e-11, int max_steps = 1 << 20);

// Matrix-valued field on the torus, F(x) = sum_q exp(i q.x) modes[q].
struct EndoField {
  int n = 0;
  int r = 0;
  std::map<std::vector<int>, Eigen::MatrixXcd> modes;

  EndoField() = default;
  EndoField(int n_, int r_);
  static EndoField constant(int n, const Eigen::MatrixXcd& P);
  void add_mode(const std::vector<int>& q, const Eigen::MatrixXcd& M);
  Eigen::MatrixXcd at(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // v . d_x F
  Eigen::MatrixXcd derivative(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& v) const;
  EndoField complement() const;  // 1 - F
};

// |v . dP + [Gamma_x(v), P]| at (x, v).
double flow_defect_at(const FourierConnection& conn, const EndoField& P, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& v);

// Max of flow_defect_at over seeded samples of (x, v). P must be a Hermitian
// projector at every sample.
double invariance_defect(const FourierConnection& conn, const EndoField& P, int samples = 64,
                         std::uint64_t seed = 1);

struct ProbeProjector {
  Eigen::MatrixXcd P;
  int rank = 0;
  double eigenvalue = 0;
  double defect = 0;
};

struct OpacityReport {
  int commutant_dim = 0;
  Eigen::VectorXd singular_values;
  std::vector<ProbeProjector> projectors;
  std::string verdict;  // opaque | not-opaque | transparent
  std::string message;
  double tolerance = 0;
  double max_unitarity_defect = 0;
};

OpacityReport opacity_probe(const FourierConnection& conn, int num_geodesics, double length, int steps = 64,
                            std::uint64_t seed = 1, double tol = 1e-6, int max_steps = 1 << 20);

void write_probe_csv(std::ostream& os, const OpacityReport& rep);

struct FrameCheck {
  double gram_drift = 0;
  double min_singular = 0;
  bool independent = false;
};

// Pointwise Gram of the sections given by the columns of basis (degree config.m).
FrameCheck parallel_frame_check(const TorusConfig& config, const Eigen::MatrixXcd& basis, int samples = 100,
                                std::uint64_t seed = 1);

struct SpreadReport {
  double defect = 0;  // max flow defect of u along the segment
  double spread = 0;  // max over eigenvalue index of (max - min)
  double length = 0;
  double constant = 0;  // spread / (defect * length) when defect > 0
};

// Eigenvalue spread of a Hermitian field u sampled along seg.
SpreadReport eigenvalue_spread_along(const FourierConnection& conn, const EndoField& u, const GeodesicSegment& seg,
                                     int samples = 200);

}  // namespace ckt
