#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "secbeam/channels.hpp"
#include "secbeam/config.hpp"
#include "secbeam/conic.hpp"
#include "secbeam/model.hpp"
#include "secbeam/surrogates.hpp"

namespace secbeam {

// Outcome of one optimization run (shared with the robust variant).
enum class RunStatus { converged, iteration_limit, infeasible, numerical_failure };
const char* to_string(RunStatus s);

struct IterationRecord {
  int iteration = 0;
  double phi_bits = 0.0;  // subproblem objective, bits/s/Hz
  SolveStatus solver_status = SolveStatus::numerical_failure;
  double wall_ms = 0.0;
};

// Objective history of one run. The phi sequence is nondecreasing up to
// 1e-6 slack (each subproblem contains its own expansion point).
struct IterationTrace {
  std::vector<IterationRecord> steps;
  RunStatus final_status = RunStatus::numerical_failure;
  int iterations = 0;       // main-loop subproblem solves
  int init_iterations = 0;  // feasibility-phase subproblem solves
};

// Result of the feasibility search that precedes the main loop.
struct PerfectInit {
  RunStatus status = RunStatus::numerical_failure;
  Beamformer bf;
  int iterations = 0;
  double margin_bits = 0.0;  // final min-l primary slack, >= 0 when feasible
  bool feasible() const { return status == RunStatus::converged; }
};

// Optimal solution of one inner convex subproblem.
struct SubproblemSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  Beamformer bf;
  double phi_bits = 0.0;
  std::vector<double> t_bits;  // per-group eavesdropper rate caps
  double z_bits = 0.0;         // primary eavesdropper rate cap
  std::string message;
};

struct PerfectSolution {
  RunStatus status = RunStatus::numerical_failure;
  Beamformer bf;
  double phi_bits = 0.0;
  std::vector<double> t_bits;
  double z_bits = 0.0;
  IterationTrace trace;
};

// Design-space restriction shared by the comparison schemes: beams may be
// confined to per-group orthonormal bases, the jamming precoder to its own
// basis or removed outright, and the power budget optionally split evenly
// between beams and jamming. Defaults reproduce the unrestricted problem.
struct PerfectVariant {
  std::vector<Eigen::MatrixXcd> beam_basis;  // size G (orthonormal columns);
                                             // empty => full space
  Eigen::MatrixXcd jam_basis;                // N x d; only read when reduce_jam
  bool reduce_jam = false;
  bool use_jamming = true;   // false: the precoder is removed entirely
  bool split_power = false;  // sum||w||^2 <= P_s/2 and ||U||_F^2 <= P_s/2
};

// Searches for a design meeting every primary secrecy target: starts from
// random beams at half power plus an isotropic jamming precoder at half
// power, then iterates the max-min primary-margin convex program until the
// margin is nonnegative. `salt` keys the deterministic starting point.
PerfectInit initialize_perfect(const SystemConfig&, const ChannelSet&,
                               std::uint64_t salt = 0);
PerfectInit initialize_perfect(const SystemConfig&, const ChannelSet&,
                               const PerfectVariant&, std::uint64_t salt = 0);

// One inner approximation of the max-min secrecy problem around `ep`:
// maximize phi subject to the four surrogate families and the power budget,
// all lowered to cones. Every returned rate variable is in bits.
SubproblemSolution solve_perfect_subproblem(const SystemConfig&, const ChannelSet&,
                                            const ExpansionPoint& ep);
SubproblemSolution solve_perfect_subproblem(const SystemConfig&, const ChannelSet&,
                                            const ExpansionPoint& ep,
                                            const PerfectVariant&);

// Full solve: feasibility phase, then successive inner approximations until
// the relative objective change drops below config.sca.tolerance or the
// iteration cap is reached.
PerfectSolution run_perfect(const SystemConfig&, const ChannelSet&,
                            std::uint64_t salt = 0);
PerfectSolution run_perfect(const SystemConfig&, const ChannelSet&,
                            const PerfectVariant&, std::uint64_t salt = 0);

}  // namespace secbeam
