#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "secbeam/channels.hpp"
#include "secbeam/config.hpp"
#include "secbeam/conic.hpp"
#include "secbeam/model.hpp"
#include "secbeam/sca_perfect.hpp"

namespace secbeam {

// Every auxiliary scalar of the robust (passive-eavesdropper) formulation at
// one accepted iterate. Rates (t, z, phi) are bits/s/Hz; SINR-like variables
// (phi_g, alpha, beta, theta, vartheta) are linear ratios.
struct RobustAux {
  std::vector<double> phi_g;  // per-group certified eavesdropper SINR cap
  std::vector<double> alpha;  // per-PR certified worst-case SINR floor
  double beta = 0.0;          // certified primary-eavesdropper SINR cap
  std::vector<std::vector<double>> mu;     // [l][g] signal-leak caps
  std::vector<double> mu_tilde;            // [l] jamming-leak caps
  std::vector<std::vector<double>> omega;  // [l][g] certificate multipliers
  std::vector<double> omega_tilde;         // [l]
  double theta = 0.0;     // jamming eigenvalue floor, primary certificate
  double rho = 0.0;       // log-domain exponential argument; eta = exp(rho/2)
  double vartheta = 0.0;  // jamming eigenvalue floor, secondary certificate
  std::vector<double> t;  // per-group eavesdropper rate caps (bits)
  double z = 0.0;         // primary eavesdropper rate cap (bits)
  double phi = 0.0;       // guaranteed secondary secrecy objective (bits)

  double eta() const { return std::exp(rho / 2.0); }
};

// Deterministic starting point: isotropic jamming covariance at half power,
// random beams at half power, auxiliaries derived so the chance-certificate
// chain holds with equality.
struct RobustSeed {
  RobustBeamformer bf;
  RobustAux aux;
};
RobustSeed robust_seed(const SystemConfig&, const ChannelSet&,
                       std::uint64_t salt = 0);

// Feasibility search: iterates the convex max-min primary-margin program
// until min_l { log2(1+alpha_l) - z - R_bar_l } >= 0 or the iteration cap /
// a stalled negative margin ends it.
struct RobustInit {
  RunStatus status = RunStatus::numerical_failure;
  RobustBeamformer bf;
  RobustAux aux;
  int iterations = 0;
  double margin_bits = 0.0;               // criterion value at exit
  std::vector<double> margin_trace_bits;  // per-iteration subproblem margins
  bool feasible() const { return status == RunStatus::converged; }
};
RobustInit robust_initialize(const SystemConfig&, const ChannelSet&,
                             std::uint64_t salt = 0);

// One inner convex approximation of the robust max-min problem around
// (design, aux): conic program plus the variable handles needed to read a
// solution back.
struct RobustSubproblem {
  ConicProgram prog;
  std::vector<CVecVar> w;
  HermVar Ut;
  std::vector<int> phi_g, t, alpha;
  std::vector<std::vector<int>> mu, omega;
  std::vector<int> mu_tilde, omega_tilde;
  int beta = -1, theta = -1, rho = -1, exp_rho = -1, vartheta = -1, z = -1,
      phi = -1;

  RobustBeamformer design(const Eigen::VectorXd& x) const;
  RobustAux aux(const Eigen::VectorXd& x) const;
};
RobustSubproblem build_robust_subproblem(const SystemConfig&, const ChannelSet&,
                                         const RobustBeamformer& ep,
                                         const RobustAux& aux_n);

struct RobustSolution {
  RunStatus status = RunStatus::numerical_failure;
  RobustBeamformer bf;
  RobustAux aux;
  double phi_bits = 0.0;
  IterationTrace trace;
};
RobustSolution robust_run(const SystemConfig&, const ChannelSet&,
                          std::uint64_t salt = 0);

// --- certificates, bounds, diagnostics ------------------------------------

// Exact max over ||df|| <= delta of |(f_hat+df)^H w|^2.
double worst_signal_leak(const Eigen::VectorXcd& f_hat, double delta,
                         const Eigen::VectorXcd& w);
// Exact max over the ball of (f_hat+df)^H Ut (f_hat+df): trust-region
// maximum by eigendecomposition plus secular-equation bisection.
double worst_jam_leak(const Eigen::VectorXcd& f_hat, double delta,
                      const Eigen::MatrixXcd& Ut);
// Worst-case PR SINR certified from the exact ball maxima.
double certified_primary_sinr(const SystemConfig&, const ChannelSet&,
                              const RobustBeamformer&, int l);

// Concave lower model of the product beta*theta expanded at sum_n =
// beta_n + theta_n: bound <= beta*theta everywhere, equality on the line
// beta + theta = sum_n (hence at the expansion pair).
double bilinear_lower_bound(double beta, double theta, double sum_n);
// Convex-representable upper model of exp(rho) around rho_n:
// exp(rho_n) / (1 - (rho - rho_n)) for rho - rho_n < 1, +inf beyond; an
// upper bound everywhere in its domain, tight with matching slope at rho_n.
double hyperbolic_exp_upper(double rho, double rho_n);

// Largest relative violation over the deterministic certified-constraint
// system at (design, aux): exact ball leaks vs caps, interference budgets,
// eigenvalue floors, the chance-certificate chain, rate caps, the per-member
// guarantee, and the power budget. Each term is normalized by
// max(1, |scale|), so <= tol means a valid certified iterate.
double robust_constraint_violation(const SystemConfig&, const ChannelSet&,
                                   const RobustBeamformer&, const RobustAux&);

}  // namespace secbeam
