#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

#include "secbeam/config.hpp"
#include "secbeam/model.hpp"

namespace secbeam {

// Inputs consumed by the closed-form chance bounds that certify passive
// eavesdroppers whose channels are i.i.d. CN(0,1). Copied out of
// SystemConfig so the formulas can also be evaluated standalone.
struct ChanceBoundParams {
  int N = 8;                               // ST transmit antennas
  int K_p = 2;                             // eavesdroppers on the primary link
  std::vector<int> K = {2, 2};             // eavesdroppers per secondary group
  double P_p = 100.0;                      // PT transmit power (linear)
  double sigma2_e = 1.0;                   // noise power at every eavesdropper
  double eps_tilde = 0.99;                 // primary chance level
  std::vector<double> eps = {0.99, 0.99};  // secondary chance level per group

  static ChanceBoundParams from_config(const SystemConfig& cfg);
  void validate() const;  // throws ConfigError with a field-specific message
};

// Smallest jamming-covariance eigenvalue that certifies
//   Pr(max over primary-link eavesdroppers of their SINR <= beta) >= eps_tilde.
// Strictly decreasing in beta; negative once beta is large enough that the
// certificate holds for free (any PSD covariance suffices).
double xi_tilde(double beta, const ChanceBoundParams& p);

// Unique beta > 0 with xi_tilde(beta) == target for target > 0, found by
// bisection on [1e-6, 1e6] to a 1e-10 relative interval width. Throws
// std::domain_error if the target is not bracketed on that interval.
double xi_tilde_root(double target, const ChanceBoundParams& p);

// Constant offset in the group-g secondary-eavesdropper certificate:
//   ||w_g||^2 / phi_g <= xi_g + sum_{i != g} ||w_i||^2 + lambda_min(U~)
// implies Pr(max over group-g eavesdroppers of their SINR <= phi_g) >= eps_g.
double xi_g(const ChanceBoundParams& p, int g);

// Monte-Carlo estimate of Pr(max over the K_p primary-link eavesdroppers of
// their SINR <= beta) under the design (w, U~), drawing fresh i.i.d. CN(0,1)
// eavesdropper channels each sample. Deterministic for a fixed seed.
// Requires samples >= 10000.
double mc_primary_chance(const RobustBeamformer& bf, const ChanceBoundParams& p,
                         double beta, int samples = 20000,
                         std::uint64_t seed = 1);

// Same estimator for the group-g secondary eavesdroppers against cap phi_g.
double mc_secondary_chance(const RobustBeamformer& bf,
                           const ChanceBoundParams& p, int g, double phi_g,
                           int samples = 20000, std::uint64_t seed = 1);

// Returns (trace(F*A), trace(F) * lambda_min(A)) for rank-one PSD F and
// Hermitian A; the first component is always >= the second.
std::pair<double, double> trace_eig_lower(const Eigen::MatrixXcd& F,
                                          const Eigen::MatrixXcd& A);

// Returns (trace(G*B), trace(G) * lambda_max(B)); first <= second.
std::pair<double, double> trace_eig_upper(const Eigen::MatrixXcd& G,
                                          const Eigen::MatrixXcd& B);

}  // namespace secbeam
