#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "secbeam/channels.hpp"
#include "secbeam/config.hpp"
#include "secbeam/sca_perfect.hpp"
#include "secbeam/sca_robust.hpp"

namespace secbeam {

// The schemes the experiment harness can evaluate side by side.
enum class SchemeId { Proposed, NoJN, PartialZF, EqualPowerSplit, NonRobust };
const char* to_string(SchemeId s);
SchemeId parse_scheme(const std::string& name);  // throws ConfigError

// Zero-forcing design subspaces. Group-g beams live in the nullspace of
// every ST->PR link and every other group's user channels; the jamming
// precoder additionally avoids this group's users. Bases have orthonormal
// columns (SVD nullspace, relative singular-value cutoff 1e-10).
struct ZfBases {
  bool feasible = false;              // every basis has positive dimension
  std::vector<Eigen::MatrixXcd> V_g;  // N x (N - L - sum_{i != g} M_i)
  Eigen::MatrixXcd V_U;               // N x (N - L - sum_i M_i)
};
ZfBases zf_bases(const SystemConfig&, const ChannelSet&);

// Jamming disabled: the precoder variable is removed from every subproblem
// and the returned design carries an exactly-zero precoder.
PerfectSolution run_no_jn(const SystemConfig&, const ChannelSet&,
                          std::uint64_t salt = 0);

// Beams and jamming restricted to the zero-forcing subspaces; primary
// receivers see no secondary interference at all, so their SINR is exactly
// P_p |h_l|^2 / sigma_p^2. Infeasible when any subspace is empty.
PerfectSolution run_partial_zf(const SystemConfig&, const ChannelSet&,
                               std::uint64_t salt = 0);

// Even power split: sum ||w||^2 <= P_s/2 and ||U||_F^2 <= P_s/2 replace the
// pooled budget.
PerfectSolution run_equal_split(const SystemConfig&, const ChannelSet&,
                                std::uint64_t salt = 0);

// The presumed ST->PR channels are treated as exact (zero error radius) and
// the robust pipeline runs on them; the result is then scored against the
// true channels, and the guaranteed objective is zeroed whenever any primary
// secrecy target breaks under the actual links.
RobustSolution run_non_robust(const SystemConfig&, const ChannelSet&,
                              std::uint64_t salt = 0);

}  // namespace secbeam
