#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "secbeam/channels.hpp"
#include "secbeam/config.hpp"
#include "secbeam/model.hpp"

namespace secbeam {

// Relative positivity floor for linearized denominators: subproblems impose
// Phi(w,U) >= kPhiFloorRel * sigma^2 so quadratic-over-linear blocks stay
// well-posed. Inactive at the expansion point, where Phi equals the true
// denominator (>= sigma^2).
inline constexpr double kPhiFloorRel = 1e-6;

// --- scalar bounding inequalities (all in nats) ---------------------------

// Lower bound of ln(1 + |x|^2 / y) from linearizing around (x_n, y_n);
// concave in (x, |x|^2 + y), tight at the expansion pair.
double log_qol_lower(std::complex<double> x, double y, std::complex<double> x_n,
                     double y_n);

// Lower bound of |x|^2 / y (tangent of the jointly convex quotient).
double qol_lower(std::complex<double> x, double y, std::complex<double> x_n,
                 double y_n);

// Upper bound of ln(1 + x): first-order tangent at x_n (concavity).
double log_tangent_upper(double x, double x_n);

// --- expansion point -------------------------------------------------------

// Whether the jamming variable is a precoder U (power ||v^H U||^2) or a
// covariance Ut (power v^H Ut v).
enum class JamForm { precoder, covariance };

// A feasible design together with the cached per-receiver interference
// denominators and SINRs every surrogate is expanded around.
struct ExpansionPoint {
  JamForm mode = JamForm::precoder;
  std::vector<Eigen::VectorXcd> w;  // size G
  Eigen::MatrixXcd U;               // precoder or covariance, per mode

  std::vector<std::vector<double>> chi_s;  // [g][m]
  std::vector<std::vector<double>> chi_e;  // [g][k]
  std::vector<double> chi_p;               // [l]
  std::vector<double> chi_ep;              // [k_p]
  std::vector<std::vector<double>> gam_s;  // SINRs at (w, U)
  std::vector<std::vector<double>> gam_e;
  std::vector<double> gam_p;
  std::vector<double> gam_ep;

  static ExpansionPoint at(const SystemConfig&, const ChannelSet&,
                           const Beamformer&);
  static ExpansionPoint at(const SystemConfig&, const ChannelSet&,
                           const RobustBeamformer&);

  // True when every cached value matches recomputation to `rtol` relative.
  bool consistent(const SystemConfig&, const ChannelSet&,
                  double rtol = 1e-10) const;

  double jam_at(const Eigen::VectorXcd& v) const;  // jamming power seen at v
};

// --- structured surrogate coefficient objects ------------------------------

// Concave lower bound of a log-SINR in nats:
//   value(w, U) = constant + 2 Re{ lin^H w_{lin_group} }
//                 - quad_scale * ( sum_i |probe^H w_i|^2 + jam(probe) )
// lin_group == -1 means no linear term (constant numerator).
struct ConcaveLogLB {
  JamForm mode = JamForm::precoder;
  double constant = 0.0;
  int lin_group = -1;
  Eigen::VectorXcd lin;
  double quad_scale = 0.0;
  Eigen::VectorXcd probe;

  double value(const std::vector<Eigen::VectorXcd>& w,
               const Eigen::MatrixXcd& U) const;
};

// Convex upper bound of a log-SINR in nats:
//   value(w, U) = constant + ratio_scale * num2(w) / Phi(w, U)
// where num2 = |probe^H w_{num_group}|^2 (variable) or num_const2, and Phi is
// the affine lower model of the true interference denominator:
//   Phi = phi_const + sum_i 2 Re{ conj(phi_w[i]) * (probe^H w_i) } + jam part
// (precoder mode: jam part = 2 Re{ phi_jam^H (U^H probe) };
//  covariance mode: jam part = probe^H Ut probe, which is already linear).
struct ConvexLogUB {
  JamForm mode = JamForm::precoder;
  double constant = 0.0;     // ln(1+g_n) - ratio_scale * g_n folded in
  double ratio_scale = 0.0;  // 1 / (1 + g_n)
  int num_group = -1;
  double num_const2 = 0.0;
  Eigen::VectorXcd probe;
  double phi_const = 0.0;
  std::vector<std::complex<double>> phi_w;  // per-group scalar coefficient
  Eigen::VectorXcd phi_jam;                 // precoder mode only
  double phi_floor = 0.0;                   // kPhiFloorRel * sigma^2

  double phi_value(const std::vector<Eigen::VectorXcd>& w,
                   const Eigen::MatrixXcd& U) const;
  double value(const std::vector<Eigen::VectorXcd>& w,
               const Eigen::MatrixXcd& U) const;
};

// --- builders ---------------------------------------------------------------

// Concave lower bound of ln(1 + SINR) for secondary member (g, m).
ConcaveLogLB secondary_rate_lower(const SystemConfig&, const ChannelSet&,
                                  const ExpansionPoint&, int g, int m);
// Convex upper bound of ln(1 + SINR) for eavesdropper k on group g.
ConvexLogUB secondary_eve_upper(const SystemConfig&, const ChannelSet&,
                                const ExpansionPoint&, int g, int k);
// Concave lower bound of ln(1 + SINR) at primary receiver l.
ConcaveLogLB primary_rate_lower(const SystemConfig&, const ChannelSet&,
                                const ExpansionPoint&, int l);
// Convex upper bound of ln(1 + SINR) at primary eavesdropper k.
ConvexLogUB primary_eve_upper(const SystemConfig&, const ChannelSet&,
                              const ExpansionPoint&, int k);

}  // namespace secbeam
