#include "secbeam/sca_robust.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "secbeam/rng.hpp"
#include "secbeam/robust_bounds.hpp"
#include "secbeam/surrogates.hpp"

namespace secbeam {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kInf = std::numeric_limits<double>::infinity();

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch())
      .count();
}

bool sca_trace() {
  static const bool on = std::getenv("SECBEAM_SCA_TRACE") != nullptr;
  return on;
}

// (1 - eps_tilde^{1/K_p})^{1/N}: the constant the primary chance certificate
// compares exp(rho) against.
double chance_root_const(const SystemConfig& cfg) {
  return std::pow(1.0 - std::pow(cfg.eps_tilde, 1.0 / cfg.K_p), 1.0 / cfg.N);
}

// Secondary-rate lower bound with a covariance jamming variable:
// s.value(w, Ut) >= rhs, lowered to ||rows||^2 <= affine bound.
void add_concave_ge_cov(ConicProgram& prog, const std::vector<CVecVar>& w,
                        const HermVar& Ut, const ConcaveLogLB& s,
                        const LinExpr& rhs) {
  LinExpr bound = LinExpr(s.constant) - rhs;
  if (s.lin_group >= 0) bound += 2.0 * re_inner(s.lin, w[s.lin_group]);
  if (s.quad_scale <= 0.0) {
    prog.add_nonneg(bound);
    return;
  }
  bound -= s.quad_scale * herm_quad_form(Ut, s.probe);
  const std::complex<double> root_q(std::sqrt(s.quad_scale), 0.0);
  std::vector<LinExpr> rows;
  for (const auto& wg : w) {
    CLinExpr p = root_q * cvec_inner_conj(s.probe, wg);
    rows.push_back(std::move(p.re));
    rows.push_back(std::move(p.im));
  }
  prog.add_square_le(rows, bound);
}

// ln(1+x) <= ln(1+x_n) + (x - x_n)/(1+x_n) <= ln2 * cap  for variable x.
void add_log_tangent_le(ConicProgram& prog, const LinExpr& x, double x_n,
                        const LinExpr& cap_bits) {
  LinExpr lhs = LinExpr(std::log1p(x_n) - x_n / (1.0 + x_n)) +
                (1.0 / (1.0 + x_n)) * x;
  prog.add_le(lhs, kLn2 * cap_bits);
}

struct BuildMode {
  bool main = false;  // false: feasibility phase (max-min margin)
};

RobustSubproblem build_subproblem(const SystemConfig& cfg, const ChannelSet& ch,
                                  const RobustBeamformer& ep_bf,
                                  const RobustAux& aux_n, BuildMode mode,
                                  int* tau_out) {
  RobustSubproblem sp;
  ConicProgram& prog = sp.prog;
  const int G = cfg.G, L = cfg.L, N = cfg.N;
  const ChanceBoundParams cb = ChanceBoundParams::from_config(cfg);

  for (int g = 0; g < G; ++g)
    sp.w.push_back(add_cvec_var(prog, "w" + std::to_string(g), N));
  sp.Ut = add_herm_var(prog, "Ut", N);

  sp.alpha = prog.add_vars("alpha", L);
  sp.mu.resize(L);
  sp.omega.resize(L);
  for (int l = 0; l < L; ++l) {
    sp.mu[l] = prog.add_vars("mu" + std::to_string(l), G);
    sp.omega[l] = prog.add_vars("omega" + std::to_string(l), G);
  }
  sp.mu_tilde = prog.add_vars("mu_t", L);
  sp.omega_tilde = prog.add_vars("omega_t", L);
  sp.beta = prog.add_var("beta");
  sp.theta = prog.add_var("theta");
  sp.rho = prog.add_var("rho");
  sp.exp_rho = prog.add_var("exp_rho");
  sp.z = prog.add_var("z");
  int tau = -1;
  if (mode.main) {
    sp.phi_g = prog.add_vars("phi_g", G);
    sp.t = prog.add_vars("t", G);
    sp.vartheta = prog.add_var("vartheta");
    sp.phi = prog.add_var("phi");
    prog.set_objective_max(LinExpr::var(sp.phi));
  } else {
    tau = prog.add_var("tau");
    prog.set_objective_max(LinExpr::var(tau));
  }
  if (tau_out) *tau_out = tau;

  if (mode.main) {
    ExpansionPoint ep = ExpansionPoint::at(cfg, ch, ep_bf);
    for (int g = 0; g < G; ++g) {
      for (int m = 0; m < cfg.M[g]; ++m) {
        ConcaveLogLB s = secondary_rate_lower(cfg, ch, ep, g, m);
        add_concave_ge_cov(prog, sp.w, sp.Ut, s,
                           kLn2 * (LinExpr::var(sp.phi) + LinExpr::var(sp.t[g])));
      }
      add_log_tangent_le(prog, LinExpr::var(sp.phi_g[g]), aux_n.phi_g[g],
                         LinExpr::var(sp.t[g]));
      prog.add_nonneg(LinExpr::var(sp.phi_g[g]));
    }
  }

  // Primary eavesdropper rate cap.
  add_log_tangent_le(prog, LinExpr::var(sp.beta), aux_n.beta, LinExpr::var(sp.z));

  // Worst-case PR rate floor and per-PR interference budget. Rows are
  // normalized by their expansion-point magnitudes so the iterate stays
  // well-scaled when alpha or the budget span several orders of magnitude.
  for (int l = 0; l < L; ++l) {
    const double a_n = aux_n.alpha[l];
    const double ph2 = cfg.P_p * std::norm(ch.h_pr(l));
    LinExpr margin_bound =
        LinExpr(std::log1p(a_n) + 1.0 - kLn2 * cfg.R_bar[l]) -
        kLn2 * LinExpr::var(sp.z);
    if (!mode.main) margin_bound -= kLn2 * LinExpr::var(tau);
    prog.add_quadratic_over_linear(
        CLinExpr(std::complex<double>(1.0, 0.0)),
        (1.0 / (1.0 + a_n)) * (LinExpr(1.0) + LinExpr::var(sp.alpha[l])),
        margin_bound);
    prog.add_nonneg(LinExpr::var(sp.alpha[l]));

    LinExpr budget;
    for (int g = 0; g < G; ++g) budget += LinExpr::var(sp.mu[l][g]);
    budget += LinExpr::var(sp.mu_tilde[l]);
    budget += LinExpr(cfg.sigma2_p);
    prog.add_le((a_n / ph2) * budget,
                LinExpr(2.0) - (1.0 / a_n) * LinExpr::var(sp.alpha[l]));

    // A floor on the modeled error radius keeps the certificate multipliers
    // bounded when the configured ball is vanishingly small; certifying a
    // slightly larger ball is always conservative.
    const double delta_l =
        std::max(ch.delta[l], 1e-3 * ch.f_hat[l].norm());
    for (int g = 0; g < G; ++g)
      build_lmi_interference_cap(prog, sp.w[g], LinExpr::var(sp.mu[l][g]),
                                 LinExpr::var(sp.omega[l][g]), ch.f_hat[l],
                                 delta_l);
    build_lmi_jam_cap(prog, sp.Ut, LinExpr::var(sp.mu_tilde[l]),
                      LinExpr::var(sp.omega_tilde[l]), ch.f_hat[l], delta_l);
  }

  // Primary chance-certificate chain: a linear link between rho and beta, a
  // convex upper model of exp(rho), the bilinear lower model of beta*theta,
  // and the jamming eigenvalue floor.
  prog.add_nonneg(LinExpr::var(sp.rho) +
                  (cfg.sigma2_e / (double(N) * cfg.P_p)) * LinExpr::var(sp.beta));
  prog.add_rotated(LinExpr::var(sp.exp_rho),
                   LinExpr(1.0 + aux_n.rho) - LinExpr::var(sp.rho),
                   {LinExpr(std::sqrt(2.0 * std::exp(aux_n.rho)))});
  const double c = chance_root_const(cfg);
  const double sum_n = std::max(1.0, aux_n.beta + aux_n.theta);
  LinExpr bilinear = 0.5 * (LinExpr::var(sp.beta) + LinExpr::var(sp.theta)) -
                     LinExpr(0.25 * sum_n);
  prog.add_square_le({(0.5 / std::sqrt(sum_n)) *
                      (LinExpr::var(sp.beta) - LinExpr::var(sp.theta))},
                     bilinear - (cfg.P_p / (c * sum_n)) * LinExpr::var(sp.exp_rho) +
                         LinExpr(cfg.P_p / sum_n));
  add_lambda_min_floor(prog, sp.Ut, LinExpr::var(sp.theta));
  prog.add_nonneg(LinExpr::var(sp.theta));
  prog.add_nonneg(LinExpr::var(sp.beta));

  if (mode.main) {
    // Secondary chance certificate: quadratic-over-linear in own power with
    // linearized cross-group powers, plus its own eigenvalue floor.
    const double inv_ps = 1.0 / cfg.P_s;
    for (int g = 0; g < G; ++g) {
      LinExpr bound(inv_ps * xi_g(cb, g));
      for (int i = 0; i < G; ++i) {
        if (i == g) continue;
        bound += (2.0 * inv_ps) * re_inner(ep_bf.w[i], sp.w[i]);
        bound -= LinExpr(inv_ps * ep_bf.w[i].squaredNorm());
      }
      bound += inv_ps * LinExpr::var(sp.vartheta);
      std::vector<CLinExpr> nums;
      const std::complex<double> root_inv_ps(std::sqrt(inv_ps), 0.0);
      for (int i = 0; i < N; ++i)
        nums.push_back(root_inv_ps * sp.w[g].entry(i));
      prog.add_quadratic_over_linear(nums, LinExpr::var(sp.phi_g[g]), bound);
    }
    add_lambda_min_floor(prog, sp.Ut, LinExpr::var(sp.vartheta));
    prog.add_nonneg(LinExpr::var(sp.vartheta));
  }

  // Power budget, in units of the budget itself.
  std::vector<LinExpr> pw;
  const double root_inv_ps = 1.0 / std::sqrt(cfg.P_s);
  for (const auto& wg : sp.w)
    for (auto& e : cvec_coords(wg)) pw.push_back(root_inv_ps * std::move(e));
  prog.add_square_le(pw, LinExpr(1.0) - (1.0 / cfg.P_s) * sp.Ut.trace());

  return sp;
}

// Clamp phi_g away from zero so tangents and the chance sampler stay
// well-posed; inactive whenever the group transmits.
double phi_floor(const SystemConfig& cfg) { return kPhiFloorRel * cfg.sigma2_e; }

// Auxiliaries implied by a design: certificate-tight phi_g / t, the exact
// certified alpha, and the rate caps from beta.
void derive_secondary_aux(const SystemConfig& cfg, const ChannelSet& ch,
                          const RobustBeamformer& bf, RobustAux& aux) {
  const ChanceBoundParams cb = ChanceBoundParams::from_config(cfg);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(bf.U_tilde,
                                                     Eigen::EigenvaluesOnly);
  const double lmin = std::max(0.0, es.eigenvalues().minCoeff());
  aux.vartheta = lmin;
  aux.phi_g.resize(cfg.G);
  aux.t.resize(cfg.G);
  double phi = kInf;
  for (int g = 0; g < cfg.G; ++g) {
    double cross = 0.0;
    for (int i = 0; i < cfg.G; ++i)
      if (i != g) cross += bf.w[i].squaredNorm();
    const double den = xi_g(cb, g) + cross + lmin;
    aux.phi_g[g] = std::max(bf.w[g].squaredNorm() / den, phi_floor(cfg));
    aux.t[g] = std::log2(1.0 + aux.phi_g[g]);
    for (int m = 0; m < cfg.M[g]; ++m)
      phi = std::min(phi, rate_bits(sinr_secondary(cfg, ch, bf, g, m)) - aux.t[g]);
  }
  aux.phi = phi;
}

// Orthonormal basis of the subspace orthogonal to the presumed PR channels
// and to the other groups' user channels; beams in it leak into a PR only
// through the CSI error ball.
Eigen::MatrixXcd group_null_basis(const SystemConfig& cfg, const ChannelSet& ch,
                                  int g) {
  int rows = cfg.L;
  for (int i = 0; i < cfg.G; ++i)
    if (i != g) rows += cfg.M[i];
  Eigen::MatrixXcd A(rows, cfg.N);
  int r = 0;
  for (int l = 0; l < cfg.L; ++l) A.row(r++) = ch.f_hat[l].adjoint();
  for (int i = 0; i < cfg.G; ++i) {
    if (i == g) continue;
    for (int m = 0; m < cfg.M[i]; ++m) A.row(r++) = ch.groups[i].h[m].adjoint();
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullV);
  const double cutoff = 1e-10 * svd.singularValues()(0);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > cutoff) ++rank;
  return svd.matrixV().rightCols(cfg.N - rank);
}

// Unit-norm common beam for group g inside `basis`, pointed at the group's
// average channel energy.
Eigen::VectorXcd multicast_direction(const SystemConfig& cfg,
                                     const ChannelSet& ch, int g,
                                     const Eigen::MatrixXcd& basis) {
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(cfg.N, cfg.N);
  for (int m = 0; m < cfg.M[g]; ++m)
    B += ch.groups[g].h[m] * ch.groups[g].h[m].adjoint();
  Eigen::MatrixXcd Mred = basis.adjoint() * B * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Mred);
  Eigen::VectorXcd dir =
      basis * es.eigenvectors().col(es.eigenvalues().size() - 1);
  return dir.normalized();
}

struct ExtractResult {
  RobustBeamformer bf;
  RobustAux aux;
  double objective = 0.0;
};

// Reads a solved subproblem back and re-certifies: alpha is tightened to
// min(subproblem value, exact ball certificate) and z to the exact rate cap
// of the extracted beta.
ExtractResult extract(const SystemConfig& cfg, const ChannelSet& ch,
                      const RobustSubproblem& sp, const SolverResult& res) {
  ExtractResult out;
  out.bf = sp.design(res.x);
  out.aux = sp.aux(res.x);
  out.objective = res.objective;
  out.aux.beta = std::max(out.aux.beta, 1e-12);
  for (int l = 0; l < cfg.L; ++l) {
    const double cert = certified_primary_sinr(cfg, ch, out.bf, l);
    out.aux.alpha[l] = std::max(1e-12, std::min(out.aux.alpha[l], cert));
  }
  out.aux.z = std::log2(1.0 + out.aux.beta);
  for (auto& pg : out.aux.phi_g) pg = std::max(pg, phi_floor(cfg));
  if (!out.aux.t.empty()) {
    for (int g = 0; g < cfg.G; ++g)
      out.aux.t[g] = std::max(out.aux.t[g], std::log2(1.0 + out.aux.phi_g[g]));
    // The guaranteed objective is the exact min margin at the extracted
    // design and caps; actual rates dominate their surrogates, so this never
    // falls below the subproblem objective except through the floors above.
    double phi = kInf;
    for (int g = 0; g < cfg.G; ++g)
      for (int m = 0; m < cfg.M[g]; ++m)
        phi = std::min(phi, rate_bits(sinr_secondary(cfg, ch, out.bf, g, m)) -
                                out.aux.t[g]);
    out.aux.phi = phi;
  }
  return out;
}

double criterion_margin_bits(const SystemConfig& cfg, const RobustAux& aux) {
  double m = kInf;
  for (int l = 0; l < cfg.L; ++l)
    m = std::min(m, std::log2(1.0 + aux.alpha[l]) - aux.z - cfg.R_bar[l]);
  return m;
}

}  // namespace

RobustBeamformer RobustSubproblem::design(const Eigen::VectorXd& x) const {
  RobustBeamformer bf;
  for (const auto& wg : w) bf.w.push_back(cvec_value(wg, x));
  bf.U_tilde = Ut.value(x);
  return bf;
}

RobustAux RobustSubproblem::aux(const Eigen::VectorXd& x) const {
  RobustAux a;
  auto val = [&](int id) { return prog.eval(LinExpr::var(id), x); };
  for (int id : phi_g) a.phi_g.push_back(val(id));
  for (int id : alpha) a.alpha.push_back(val(id));
  a.beta = val(beta);
  for (const auto& row : mu) {
    a.mu.emplace_back();
    for (int id : row) a.mu.back().push_back(val(id));
  }
  for (int id : mu_tilde) a.mu_tilde.push_back(val(id));
  for (const auto& row : omega) {
    a.omega.emplace_back();
    for (int id : row) a.omega.back().push_back(val(id));
  }
  for (int id : omega_tilde) a.omega_tilde.push_back(val(id));
  a.theta = val(theta);
  a.rho = val(rho);
  if (vartheta >= 0) a.vartheta = val(vartheta);
  for (int id : t) a.t.push_back(val(id));
  a.z = val(z);
  if (phi >= 0) a.phi = val(phi);
  return a;
}

namespace {

// Exact certificate set for an arbitrary design: worst-ball leaks, the
// tightest admissible primary-eavesdropper cap for the design's jamming
// floor, and certificate-tight secondary caps.
RobustAux design_aux(const SystemConfig& cfg, const ChannelSet& ch,
                     const RobustBeamformer& bf) {
  RobustAux a;
  const ChanceBoundParams cb = ChanceBoundParams::from_config(cfg);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(bf.U_tilde,
                                                     Eigen::EigenvaluesOnly);
  a.theta = std::max(0.0, es.eigenvalues().minCoeff());
  a.beta = xi_tilde_root(std::max(a.theta, 1e-12), cb);
  a.rho = -a.beta * cfg.sigma2_e / (double(cfg.N) * cfg.P_p);
  a.z = std::log2(1.0 + a.beta);
  a.alpha.resize(cfg.L);
  a.mu.assign(cfg.L, std::vector<double>(cfg.G, 0.0));
  a.mu_tilde.assign(cfg.L, 0.0);
  a.omega.assign(cfg.L, std::vector<double>(cfg.G, 0.0));
  a.omega_tilde.assign(cfg.L, 0.0);
  const double lam_max = es.eigenvalues().cwiseMax(0.0).maxCoeff();
  for (int l = 0; l < cfg.L; ++l) {
    const double delta_l = ch.delta[l];
    for (int g = 0; g < cfg.G; ++g) {
      a.mu[l][g] = worst_signal_leak(ch.f_hat[l], delta_l, bf.w[g]);
      const double wn = bf.w[g].norm();
      a.omega[l][g] =
          wn * wn + (delta_l > 0.0
                         ? std::abs(ch.f_hat[l].dot(bf.w[g])) * wn / delta_l
                         : 0.0);
    }
    a.mu_tilde[l] = worst_jam_leak(ch.f_hat[l], delta_l, bf.U_tilde);
    a.omega_tilde[l] =
        lam_max + (delta_l > 0.0
                       ? std::sqrt((bf.U_tilde * ch.f_hat[l]).squaredNorm()) /
                             delta_l
                       : 0.0);
    a.alpha[l] = certified_primary_sinr(cfg, ch, bf, l);
  }
  derive_secondary_aux(cfg, ch, bf, a);
  return a;
}

// Seed design: random beams and an isotropic jamming covariance, drawn at
// `frac` of the half-and-half power split. Small fractions start the search
// in the low-interference basin, which dominates when the PRs are
// leak-limited; frac = 1 is the balanced split.
RobustSeed make_seed(const SystemConfig& cfg, const ChannelSet& ch,
                     std::uint64_t salt, double frac) {
  RobustSeed s;
  Rng rng(seed_combine({cfg.seed, salt, hash_string("robust-init")}));
  s.bf.w.resize(cfg.G);
  double tot = 0.0;
  for (int g = 0; g < cfg.G; ++g) {
    s.bf.w[g] = Eigen::VectorXcd(cfg.N);
    for (int i = 0; i < cfg.N; ++i) s.bf.w[g](i) = rng.cnormal();
    tot += s.bf.w[g].squaredNorm();
  }
  const double scale = std::sqrt(frac * cfg.P_s / (2.0 * tot));
  for (auto& w : s.bf.w) w *= scale;
  s.bf.U_tilde = (frac * cfg.P_s / (2.0 * cfg.N)) *
                 Eigen::MatrixXcd::Identity(cfg.N, cfg.N);
  s.aux = design_aux(cfg, ch, s.bf);
  return s;
}

// One feasibility-phase descent from a given seed. `budget` caps the number
// of subproblem solves; `solves` accumulates the total spent.
RobustInit initialize_from(const SystemConfig& cfg, const ChannelSet& ch,
                           const RobustSeed& seed, int budget, int* solves) {
  RobustInit out;
  out.bf = seed.bf;
  out.aux = seed.aux;
  out.margin_bits = criterion_margin_bits(cfg, out.aux);
  if (out.margin_bits >= 0.0) {
    out.status = RunStatus::converged;
    return out;
  }

  for (int n = 0; n < budget; ++n) {
    int tau = -1;
    RobustSubproblem sp =
        build_subproblem(cfg, ch, out.bf, out.aux, {.main = false}, &tau);
    SolverResult res = sp.prog.solve();
    out.iterations = ++*solves;
    if (sca_trace())
      std::fprintf(stderr,
                   "[robust-init] iter=%d status=%d margin=%+.6f bits (%s)\n", n,
                   static_cast<int>(res.status), res.objective,
                   res.message.c_str());
    if (res.status != SolveStatus::optimal) {
      out.status = RunStatus::numerical_failure;
      return out;
    }
    out.margin_trace_bits.push_back(res.objective);
    ExtractResult ex = extract(cfg, ch, sp, res);
    out.bf = ex.bf;
    RobustAux next = ex.aux;
    next.phi_g = out.aux.phi_g;  // untouched by the feasibility phase
    next.t = out.aux.t;
    next.vartheta = out.aux.vartheta;
    next.phi = out.aux.phi;
    out.aux = next;
    out.margin_bits = criterion_margin_bits(cfg, out.aux);
    if (sca_trace()) {
      double amin = kInf, leak = 0.0;
      for (int l = 0; l < cfg.L; ++l) {
        amin = std::min(amin, out.aux.alpha[l]);
        double s = out.aux.mu_tilde[l];
        for (int g = 0; g < cfg.G; ++g) s += out.aux.mu[l][g];
        leak = std::max(leak, s);
      }
      std::fprintf(stderr,
                   "[robust-init]   true_margin=%+.4f alpha_min=%.4g beta=%.4g "
                   "theta=%.4g rho=%.4g leak_max=%.4g pow=%.4g\n",
                   out.margin_bits, amin, out.aux.beta, out.aux.theta,
                   out.aux.rho, leak, out.bf.total_power());
    }
    if (out.margin_bits >= 0.0) {
      out.status = RunStatus::converged;
      return out;
    }
    // The margin sequence is nondecreasing, so a flat stretch below zero
    // means the feasibility search has converged to a negative fixed point.
    const int k = static_cast<int>(out.margin_trace_bits.size());
    if (k >= 4 &&
        out.margin_trace_bits[k - 1] - out.margin_trace_bits[k - 4] < 1e-4) {
      out.status = RunStatus::infeasible;
      return out;
    }
  }
  out.status = RunStatus::infeasible;
  return out;
}

}  // namespace

RobustSeed robust_seed(const SystemConfig& cfg, const ChannelSet& ch,
                       std::uint64_t salt) {
  return make_seed(cfg, ch, salt, 1.0);
}

RobustInit robust_initialize(const SystemConfig& cfg, const ChannelSet& ch,
                             std::uint64_t salt) {
  // Every seed carries an exact certificate, so its criterion margin can be
  // read off without a solve. Walk a power ladder from louder to quieter and
  // accept the first feasible seed: the loudest feasible start conditions the
  // main phase best and keeps its beams away from zero.
  constexpr double kLadder[] = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  for (double frac : kLadder) {
    RobustSeed seed = make_seed(cfg, ch, salt, frac);
    if (criterion_margin_bits(cfg, seed.aux) >= 0.0) {
      RobustInit out;
      out.status = RunStatus::converged;
      out.bf = seed.bf;
      out.aux = seed.aux;
      out.margin_bits = criterion_margin_bits(cfg, seed.aux);
      return out;
    }
  }

  // No corner is feasible outright; search from two starting points that
  // bracket the design space. The quiet seed keeps interference below the PR
  // noise floor, the balanced seed starts from the even power split.
  const double quiet_frac = std::clamp(
      cfg.sigma2_p / (cfg.P_s * double(cfg.N)), 1e-6, 1e-3);
  int solves = 0;
  const int budget = cfg.sca.init_max_iterations;
  RobustInit quiet = initialize_from(
      cfg, ch, make_seed(cfg, ch, salt, quiet_frac), budget, &solves);
  if (quiet.status == RunStatus::converged || solves >= budget) {
    quiet.iterations = solves;
    return quiet;
  }
  RobustInit balanced = initialize_from(cfg, ch, make_seed(cfg, ch, salt, 1.0),
                                        budget - solves, &solves);
  if (balanced.status == RunStatus::converged) {
    balanced.iterations = solves;
    return balanced;
  }
  // Neither start reached the criterion; report the better margin, and a
  // numerical failure only if both attempts broke down.
  RobustInit& best = quiet.margin_bits >= balanced.margin_bits &&
                             quiet.status != RunStatus::numerical_failure
                         ? quiet
                         : balanced;
  if (best.status == RunStatus::numerical_failure &&
      (quiet.status == RunStatus::infeasible ||
       balanced.status == RunStatus::infeasible)) {
    best = quiet.status == RunStatus::infeasible ? quiet : balanced;
  }
  best.iterations = solves;
  return best;
}

RobustSubproblem build_robust_subproblem(const SystemConfig& cfg,
                                         const ChannelSet& ch,
                                         const RobustBeamformer& ep,
                                         const RobustAux& aux_n) {
  return build_subproblem(cfg, ch, ep, aux_n, {.main = true}, nullptr);
}

RobustSolution robust_run(const SystemConfig& cfg, const ChannelSet& ch,
                          std::uint64_t salt) {
  RobustSolution out;
  RobustInit init = robust_initialize(cfg, ch, salt);
  out.trace.init_iterations = init.iterations;
  out.bf = init.bf;
  out.aux = init.aux;
  if (!init.feasible()) {
    out.status = init.status == RunStatus::numerical_failure
                     ? RunStatus::numerical_failure
                     : RunStatus::infeasible;
    out.trace.final_status = out.status;
    return out;
  }

  // Warm start: the feasibility phase ends with beams chosen for PR
  // protection only, which is a poor (sometimes zero-gradient) expansion
  // point for the secrecy objective. Evaluate certified closed-form
  // candidates - interference-nulled multicast beams over a power ladder -
  // and start from the best design that keeps the criterion satisfied.
  {
    std::vector<RobustBeamformer> cands;
    std::vector<Eigen::VectorXcd> dirs(cfg.G);
    bool have_dirs = true;
    for (int g = 0; g < cfg.G; ++g) {
      Eigen::MatrixXcd basis = group_null_basis(cfg, ch, g);
      if (basis.cols() == 0) {
        have_dirs = false;
        break;
      }
      dirs[g] = multicast_direction(cfg, ch, g, basis);
    }
    if (have_dirs) {
      for (double frac : {1.0, 0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3}) {
        RobustBeamformer bf;
        bf.U_tilde = Eigen::MatrixXcd::Zero(cfg.N, cfg.N);
        for (int g = 0; g < cfg.G; ++g)
          bf.w.push_back(std::sqrt(frac * cfg.P_s / cfg.G) * dirs[g]);
        cands.push_back(std::move(bf));
      }
    }
    derive_secondary_aux(cfg, ch, out.bf, out.aux);
    double best_phi = out.aux.phi;
    for (auto& bf : cands) {
      RobustAux aux = design_aux(cfg, ch, bf);
      if (criterion_margin_bits(cfg, aux) < 0.0 || aux.phi <= best_phi)
        continue;
      best_phi = aux.phi;
      out.bf = bf;
      out.aux = aux;
    }
  }
  double prev_phi = out.aux.phi;
  out.status = RunStatus::iteration_limit;
  for (int n = 0; n < cfg.sca.max_iterations; ++n) {
    RobustSubproblem sp = build_robust_subproblem(cfg, ch, out.bf, out.aux);
    const double t0 = now_ms();
    SolverResult res = sp.prog.solve();
    const double ms = now_ms() - t0;
    if (sca_trace())
      std::fprintf(stderr, "[robust-main] iter=%d status=%d phi=%+.6f bits (%s)\n",
                   n, static_cast<int>(res.status), res.objective,
                   res.message.c_str());
    out.trace.steps.push_back({n, res.objective, res.status, ms});
    out.trace.iterations = n + 1;
    if (res.status != SolveStatus::optimal) {
      out.status = RunStatus::numerical_failure;
      break;
    }
    ExtractResult ex = extract(cfg, ch, sp, res);
    out.bf = ex.bf;
    out.aux = ex.aux;
    out.phi_bits = ex.aux.phi;
    if (std::abs(ex.aux.phi - prev_phi) <=
        cfg.sca.tolerance * std::max(1.0, std::abs(prev_phi))) {
      out.status = RunStatus::converged;
      break;
    }
    prev_phi = ex.aux.phi;
  }
  if (out.status == RunStatus::converged ||
      out.status == RunStatus::iteration_limit) {
    if (robust_constraint_violation(cfg, ch, out.bf, out.aux) > 1e-5)
      out.status = RunStatus::numerical_failure;
  }
  out.trace.final_status = out.status;
  return out;
}

double worst_signal_leak(const Eigen::VectorXcd& f_hat, double delta,
                         const Eigen::VectorXcd& w) {
  const double base = std::abs(f_hat.dot(w));
  const double r = base + delta * w.norm();
  return r * r;
}

double worst_jam_leak(const Eigen::VectorXcd& f_hat, double delta,
                      const Eigen::MatrixXcd& Ut) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Ut);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  const int n = static_cast<int>(lam.size());
  Eigen::VectorXd a = (es.eigenvectors().adjoint() * f_hat).cwiseAbs();
  const double lmax = lam.maxCoeff();
  const double at_center = (lam.array() * a.array().square()).sum();
  if (lmax <= 0.0 || delta <= 0.0) return at_center;

  const double eig_tol = 1e-12 * std::max(1.0, lmax);
  // Norm of the boundary maximizer's non-top part at multiplier nu > lmax.
  auto partial_norm2 = [&](double nu, bool skip_top) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      if (skip_top && lam(i) >= lmax - eig_tol) continue;
      const double ti = lam(i) * a(i) / (nu - lam(i));
      s += ti * ti;
    }
    return s;
  };
  auto value_at = [&](double nu, bool skip_top, double top_extra2) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
      if (skip_top && lam(i) >= lmax - eig_tol) {
        v += lam(i) * a(i) * a(i);
        continue;
      }
      const double ti = lam(i) * a(i) / (nu - lam(i));
      v += lam(i) * (a(i) + ti) * (a(i) + ti);
    }
    return v + lmax * top_extra2;
  };

  double top_a2 = 0.0;
  for (int i = 0; i < n; ++i)
    if (lam(i) >= lmax - eig_tol) top_a2 += a(i) * a(i);

  const double d2 = delta * delta;
  if (top_a2 > eig_tol * eig_tol) {
    // Regular case: the multiplier equation has a root strictly above lmax.
    double lo = lmax;
    double hi = lmax + std::sqrt((lam.array() * a.array()).square().sum()) / delta +
                1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (partial_norm2(mid, false) > d2)
        lo = mid;
      else
        hi = mid;
    }
    return std::max(at_center, value_at(hi, false, 0.0));
  }
  // Hard case: no component of f_hat on the top eigenspace.
  const double g0 = partial_norm2(lmax, true);
  if (g0 >= d2) {
    double lo = lmax;
    double hi = lmax + std::sqrt((lam.array() * a.array()).square().sum()) / delta +
                1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (partial_norm2(mid, true) > d2)
        lo = mid;
      else
        hi = mid;
    }
    return std::max(at_center, value_at(hi, true, 0.0));
  }
  return std::max(at_center, value_at(lmax, true, d2 - g0));
}

double certified_primary_sinr(const SystemConfig& cfg, const ChannelSet& ch,
                              const RobustBeamformer& bf, int l) {
  const double delta_l = ch.delta[l];
  double den = cfg.sigma2_p;
  for (const auto& wg : bf.w) den += worst_signal_leak(ch.f_hat[l], delta_l, wg);
  if (bf.U_tilde.size() > 0)
    den += worst_jam_leak(ch.f_hat[l], delta_l, bf.U_tilde);
  return cfg.P_p * std::norm(ch.h_pr(l)) / den;
}

double bilinear_lower_bound(double beta, double theta, double sum_n) {
  const double s = beta + theta;
  const double d = beta - theta;
  return 0.25 * (2.0 * sum_n * s - sum_n * sum_n) - 0.25 * d * d;
}

double hyperbolic_exp_upper(double rho, double rho_n) {
  const double d = rho - rho_n;
  if (d >= 1.0) return kInf;
  return std::exp(rho_n) / (1.0 - d);
}

double robust_constraint_violation(const SystemConfig& cfg, const ChannelSet& ch,
                                   const RobustBeamformer& bf,
                                   const RobustAux& aux) {
  const ChanceBoundParams cb = ChanceBoundParams::from_config(cfg);
  double worst = 0.0;
  auto rel = [&](double violation, double scale) {
    worst = std::max(worst, violation / std::max(1.0, std::abs(scale)));
  };

  rel(bf.total_power() - cfg.P_s, cfg.P_s);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(bf.U_tilde,
                                                     Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  rel(-lmin, 1.0);
  rel(aux.theta - lmin, aux.theta);
  rel(-aux.theta, 1.0);
  rel(-aux.beta, 1.0);
  rel(xi_tilde(std::max(aux.beta, 1e-12), cb) - aux.theta, aux.theta);
  rel(std::log2(1.0 + aux.beta) - aux.z, aux.z);

  for (int l = 0; l < cfg.L; ++l) {
    rel(-aux.alpha[l], 1.0);
    const double delta_l = ch.delta[l];
    double budget = cfg.sigma2_p;
    for (int g = 0; g < cfg.G; ++g) {
      rel(worst_signal_leak(ch.f_hat[l], delta_l, bf.w[g]) - aux.mu[l][g],
          aux.mu[l][g]);
      rel(-aux.omega[l][g], 1.0);
      budget += aux.mu[l][g];
    }
    rel(worst_jam_leak(ch.f_hat[l], delta_l, bf.U_tilde) - aux.mu_tilde[l],
        aux.mu_tilde[l]);
    rel(-aux.omega_tilde[l], 1.0);
    budget += aux.mu_tilde[l];
    const double cap = cfg.P_p * std::norm(ch.h_pr(l)) / aux.alpha[l];
    rel(budget - cap, cap);
    rel(aux.z + cfg.R_bar[l] - std::log2(1.0 + aux.alpha[l]),
        aux.z + cfg.R_bar[l]);
  }

  if (!aux.t.empty()) {
    rel(aux.vartheta - lmin, aux.vartheta);
    rel(-aux.vartheta, 1.0);
    for (int g = 0; g < cfg.G; ++g) {
      rel(-aux.phi_g[g], 1.0);
      double cross = 0.0;
      for (int i = 0; i < cfg.G; ++i)
        if (i != g) cross += bf.w[i].squaredNorm();
      const double rhs = xi_g(cb, g) + cross + lmin;
      rel(bf.w[g].squaredNorm() / std::max(aux.phi_g[g], 1e-300) - rhs, rhs);
      rel(std::log2(1.0 + aux.phi_g[g]) - aux.t[g], aux.t[g]);
      for (int m = 0; m < cfg.M[g]; ++m)
        rel(aux.phi + aux.t[g] - rate_bits(sinr_secondary(cfg, ch, bf, g, m)),
            std::abs(aux.phi) + std::abs(aux.t[g]));
    }
  }
  return worst;
}

}  // namespace secbeam
