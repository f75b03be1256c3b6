#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace secbeam {

// Thrown on malformed config / channel / manifest input.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScaOptions {
  double tolerance = 1e-3;      // stop when |phi_{n+1}-phi_n| / max(1,|phi_n|) <= tolerance
  int max_iterations = 50;      // main loop cap
  int init_max_iterations = 25; // feasibility-search cap
};

inline double dbm_to_linear(double dbm) {
  // Reference scale: noise power 1 <=> 0 dBm.
  return std::pow(10.0, dbm / 10.0);
}

// Static description of one scenario. Powers are stored in linear units;
// dBm fields in JSON are converted exactly once, at parse time.
struct SystemConfig {
  int N = 8;                              // ST transmit antennas
  int G = 2;                              // secondary multicast groups
  std::vector<int> M = {2, 2};            // SRs per group (size G)
  int L = 2;                              // primary receivers
  int K_p = 2;                            // eavesdroppers on the primary link
  std::vector<int> K = {2, 2};            // eavesdroppers per secondary group (size G)

  double P_p = 100.0;                     // PT transmit power (linear; 20 dBm)
  double P_s = 10.0;                      // ST power budget (linear; 10 dBm)

  // Noise powers per receiver class (secondary users, eavesdroppers, PRs).
  double sigma2_s = 1.0;
  double sigma2_e = 1.0;
  double sigma2_p = 1.0;

  std::vector<double> R_bar = {2.0, 2.0}; // per-PR secrecy QoS (bits/s/Hz, size L)

  // CSI error radii for the ST->PR links. If delta_rel_sq > 0 the radius is
  // resolved per realization as delta_l = sqrt(delta_rel_sq) * ||f_l||;
  // otherwise the absolute per-PR list `delta` is used (empty => all zero).
  std::vector<double> delta;
  double delta_rel_sq = 0.0;

  std::vector<double> eps = {0.99, 0.99}; // secondary chance levels eps_g (size G)
  double eps_tilde = 0.99;                // primary chance level

  std::uint64_t seed = 1;
  ScaOptions sca;

  bool robust() const { return delta_rel_sq > 0.0 || !delta.empty(); }
  int total_sr() const;
  void validate() const;  // throws ConfigError with a field-specific message

  std::string to_json() const;
  static SystemConfig from_json(const std::string& text);
  static SystemConfig from_file(const std::string& path);
};

}  // namespace secbeam
