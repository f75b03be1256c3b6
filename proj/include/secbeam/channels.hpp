#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "secbeam/config.hpp"

namespace secbeam {

// Channels touching one secondary group.
struct GroupChannels {
  std::vector<Eigen::VectorXcd> h;  // ST -> SR m (C^N), m = 0..M_g-1
  std::vector<Eigen::VectorXcd> g;  // ST -> group eavesdropper k (C^N), k = 0..K_g-1
  Eigen::VectorXcd f_sr;            // PT -> SR m (scalar each; length M_g)
  Eigen::VectorXcd f_ev;            // PT -> group eavesdropper k (length K_g)
};

// One realization of every link in the network. `f` is the true ST->PR
// channel, `f_hat` the presumed one (f_hat = f - e with ||e|| <= delta_l);
// they coincide when the resolved radius is zero.
struct ChannelSet {
  std::vector<GroupChannels> groups;   // size G
  std::vector<Eigen::VectorXcd> f;     // ST -> PR l (C^N), true
  std::vector<Eigen::VectorXcd> f_hat; // ST -> PR l (C^N), presumed
  std::vector<double> delta;           // resolved CSI error radius per PR
  Eigen::VectorXcd h_pr;               // PT -> PR l (length L)
  std::vector<Eigen::VectorXcd> f_pe;  // ST -> primary eavesdropper k (C^N)
  Eigen::VectorXcd g_pe;               // PT -> primary eavesdropper k (length K_p)

  std::string to_json() const;
  static ChannelSet from_json(const std::string& text);
};

// Draw a full i.i.d. CN(0,1) realization from an RNG stream seeded by
// (config.seed, trial_index). The draw order is fixed (groups in order: SR
// vectors, eavesdropper vectors, PT scalars; then PR links with their error
// vectors; then primary-eavesdropper links) so serialized output is
// reproducible byte-for-byte for a given (seed, trial).
ChannelSet generate_channels(const SystemConfig& cfg, std::uint64_t trial_index);

// Error vector uniform in the complex radius-delta ball: isotropic direction,
// radius delta * u^(1/(2N)) (a complex N-ball is a real 2N-ball).
Eigen::VectorXcd sample_ball_error(class Rng& rng, int n, double delta);

}  // namespace secbeam
