#include "secbeam/baselines.hpp"

#include <Eigen/SVD>

#include "secbeam/model.hpp"

namespace secbeam {

namespace {

// Orthonormal basis of {x : rows * x = 0}; rank from a relative
// singular-value cutoff of 1e-10.
Eigen::MatrixXcd nullspace_basis(const Eigen::MatrixXcd& rows) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(rows, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? 1e-10 * sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return svd.matrixV().rightCols(rows.cols() - rank);
}

// Pads a precoder back to N columns so downstream consumers see one shape
// regardless of the reduced design space (zero columns add no power).
void pad_precoder(const SystemConfig& cfg, Beamformer& bf) {
  if (bf.U.cols() == cfg.N) return;
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(cfg.N, cfg.N);
  full.leftCols(bf.U.cols()) = bf.U;
  bf.U = std::move(full);
}

}  // namespace

const char* to_string(SchemeId s) {
  switch (s) {
    case SchemeId::Proposed: return "proposed";
    case SchemeId::NoJN: return "no_jn";
    case SchemeId::PartialZF: return "partial_zf";
    case SchemeId::EqualPowerSplit: return "equal_split";
    case SchemeId::NonRobust: return "non_robust";
  }
  return "unknown";
}

SchemeId parse_scheme(const std::string& name) {
  if (name == "proposed") return SchemeId::Proposed;
  if (name == "no_jn") return SchemeId::NoJN;
  if (name == "partial_zf") return SchemeId::PartialZF;
  if (name == "equal_split") return SchemeId::EqualPowerSplit;
  if (name == "non_robust") return SchemeId::NonRobust;
  throw ConfigError("unknown scheme: " + name);
}

ZfBases zf_bases(const SystemConfig& cfg, const ChannelSet& ch) {
  ZfBases out;
  // Common rows: every true ST->PR link.
  std::vector<Eigen::VectorXcd> pr_rows;
  for (int l = 0; l < cfg.L; ++l) pr_rows.push_back(ch.f[l]);

  auto stack = [&](const std::vector<Eigen::VectorXcd>& extra) {
    Eigen::MatrixXcd m(pr_rows.size() + extra.size(), cfg.N);
    int r = 0;
    for (const auto& v : pr_rows) m.row(r++) = v.adjoint();
    for (const auto& v : extra) m.row(r++) = v.adjoint();
    return m;
  };

  std::vector<Eigen::VectorXcd> all_users;
  for (int g = 0; g < cfg.G; ++g)
    for (int m = 0; m < cfg.M[g]; ++m) all_users.push_back(ch.groups[g].h[m]);
  out.V_U = nullspace_basis(stack(all_users));

  out.feasible = out.V_U.cols() > 0;
  out.V_g.resize(cfg.G);
  for (int g = 0; g < cfg.G; ++g) {
    std::vector<Eigen::VectorXcd> others;
    for (int i = 0; i < cfg.G; ++i) {
      if (i == g) continue;
      for (int m = 0; m < cfg.M[i]; ++m) others.push_back(ch.groups[i].h[m]);
    }
    out.V_g[g] = nullspace_basis(stack(others));
    if (out.V_g[g].cols() == 0) out.feasible = false;
  }
  return out;
}

PerfectSolution run_no_jn(const SystemConfig& cfg, const ChannelSet& ch,
                          std::uint64_t salt) {
  PerfectVariant var;
  var.use_jamming = false;
  PerfectSolution sol = run_perfect(cfg, ch, var, salt);
  pad_precoder(cfg, sol.bf);
  return sol;
}

PerfectSolution run_partial_zf(const SystemConfig& cfg, const ChannelSet& ch,
                               std::uint64_t salt) {
  ZfBases zb = zf_bases(cfg, ch);
  if (!zb.feasible) {
    PerfectSolution sol;
    sol.status = RunStatus::infeasible;
    sol.trace.final_status = RunStatus::infeasible;
    return sol;
  }
  PerfectVariant var;
  var.beam_basis = std::move(zb.V_g);
  var.jam_basis = std::move(zb.V_U);
  var.reduce_jam = true;
  PerfectSolution sol = run_perfect(cfg, ch, var, salt);
  pad_precoder(cfg, sol.bf);
  return sol;
}

PerfectSolution run_equal_split(const SystemConfig& cfg, const ChannelSet& ch,
                                std::uint64_t salt) {
  PerfectVariant var;
  var.split_power = true;
  return run_perfect(cfg, ch, var, salt);
}

RobustSolution run_non_robust(const SystemConfig& cfg, const ChannelSet& ch,
                              std::uint64_t salt) {
  ChannelSet nominal = ch;
  nominal.f = ch.f_hat;
  nominal.delta.assign(cfg.L, 0.0);
  RobustSolution sol = robust_run(cfg, nominal, salt);
  if (sol.status != RunStatus::converged &&
      sol.status != RunStatus::iteration_limit)
    return sol;
  // Score against the links that actually exist. The certified z still caps
  // the eavesdropper rate (it does not involve the ST->PR channels), but the
  // primary secrecy targets may break; a design that breaks them earns no
  // secrecy credit.
  for (int l = 0; l < cfg.L; ++l) {
    const double margin =
        rate_bits(sinr_primary(cfg, ch, sol.bf, l)) - sol.aux.z - cfg.R_bar[l];
    if (margin < 0.0) {
      sol.phi_bits = 0.0;
      sol.aux.phi = 0.0;
      break;
    }
  }
  return sol;
}

}  // namespace secbeam
