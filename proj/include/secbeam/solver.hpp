#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace secbeam {

// Cone structure for the standard form
//   minimize    c'x
//   subject to  G x + s = h,   s in K
// where K = R+^l x SOC(q_1) x ... x SOC(q_nq) x PSD(s_1) x ... x PSD(s_ns).
// PSD blocks are handled in scaled svec form (off-diagonals times sqrt(2),
// lower triangle, column-major) so that <svec(A), svec(B)> = trace(AB).
struct ConeDims {
  int l = 0;
  std::vector<int> q;
  std::vector<int> s;

  int vec_dim() const;  // length of s/z vectors
  int degree() const;   // barrier degree: l + |q| + sum(s)
};

struct IpmOptions {
  int max_iters = 100;
  double feastol = 1e-7;
  double abstol = 1e-7;
  double reltol = 1e-6;
  double step_frac = 0.99;  // fraction-to-boundary damping
  int refine = 2;           // iterative refinement rounds per KKT solve
  // Perturb the cold-start interior shift; exposes an independent solver
  // configuration for cross-checking answers.
  double init_shift = 0.0;
};

enum class IpmStatus {
  optimal,
  primal_infeasible,
  dual_infeasible,
  iteration_limit,
  numerical_failure,
};

struct IpmResult {
  IpmStatus status = IpmStatus::numerical_failure;
  Eigen::VectorXd x, s, z;
  double pobj = 0.0, dobj = 0.0;
  double gap = 0.0, relgap = 0.0, pres = 0.0, dres = 0.0;
  int iters = 0;
  std::string message;
};

// Dense primal-dual interior-point method on the homogeneous self-dual
// embedding with Nesterov-Todd scaling and Mehrotra predictor-corrector.
// Infeasibility is reported only on a certificate; breakdown is surfaced as
// numerical_failure.
IpmResult solve_conelp(const Eigen::VectorXd& c, const Eigen::MatrixXd& G,
                       const Eigen::VectorXd& h, const ConeDims& dims,
                       const IpmOptions& opts = {});

// svec/smat helpers (exposed for tests).
Eigen::VectorXd sym_to_svec(const Eigen::MatrixXd& M);
Eigen::MatrixXd svec_to_sym(const Eigen::VectorXd& v, int n);

}  // namespace secbeam
