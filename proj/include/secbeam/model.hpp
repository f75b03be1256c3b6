#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "secbeam/channels.hpp"
#include "secbeam/config.hpp"

namespace secbeam {

// Transmit design in the perfect-CSI problem: one multicast beamformer per
// group plus a jamming-noise precoder U (the jamming covariance is U U^H).
struct Beamformer {
  std::vector<Eigen::VectorXcd> w;  // size G, each C^N
  Eigen::MatrixXcd U;               // N x N (zero columns allowed)

  double total_power() const;
  std::string to_json() const;
  static Beamformer from_json(const std::string& text);
};

// Robust designs optimize the jamming covariance directly.
struct RobustBeamformer {
  std::vector<Eigen::VectorXcd> w;
  Eigen::MatrixXcd U_tilde;  // N x N Hermitian PSD

  double total_power() const;  // sum ||w_g||^2 + tr(U_tilde)
};

// Received jamming power at a receiver with ST-side channel v.
double jam_power(const Eigen::MatrixXcd& U, const Eigen::VectorXcd& v);
double jam_power_cov(const Eigen::MatrixXcd& U_tilde, const Eigen::VectorXcd& v);

// --- SINRs (linear). Indices are 0-based; g = group, m/k = member. ---
double sinr_secondary(const SystemConfig&, const ChannelSet&, const Beamformer&,
                      int g, int m);
double sinr_eve_secondary(const SystemConfig&, const ChannelSet&, const Beamformer&,
                          int g, int k);
double sinr_primary(const SystemConfig&, const ChannelSet&, const Beamformer&, int l);
double sinr_eve_primary(const SystemConfig&, const ChannelSet&, const Beamformer&,
                        int k);

// Covariance-form counterparts (jamming enters as v^H U_tilde v).
double sinr_secondary(const SystemConfig&, const ChannelSet&, const RobustBeamformer&,
                      int g, int m);
double sinr_eve_secondary(const SystemConfig&, const ChannelSet&,
                          const RobustBeamformer&, int g, int k);
double sinr_primary(const SystemConfig&, const ChannelSet&, const RobustBeamformer&,
                    int l);
double sinr_eve_primary(const SystemConfig&, const ChannelSet&,
                        const RobustBeamformer&, int k);

// Primary SINR at an explicit ST->PR channel (used for worst-case / sampled
// evaluations where f differs from the presumed channel).
double sinr_primary_at(const SystemConfig&, const ChannelSet&,
                       const RobustBeamformer&, int l, const Eigen::VectorXcd& f_l);

// --- Secrecy rates (bits/s/Hz). The [x]+ clamp is applied to the difference
// after the max over eavesdroppers, never before. ---
double secrecy_rate_secondary(const SystemConfig&, const ChannelSet&,
                              const Beamformer&, int g, int m);
double secrecy_rate_primary(const SystemConfig&, const ChannelSet&,
                            const Beamformer&, int l);
// min over all (g, m) pairs of secrecy_rate_secondary.
double min_secondary_secrecy(const SystemConfig&, const ChannelSet&,
                             const Beamformer&);

struct FeasibilityReport {
  bool power_ok = false;
  std::vector<bool> primary_ok;  // per PR
  bool ok() const;
};

// Checks the power budget and every PR secrecy constraint within `tol`.
FeasibilityReport check_p1_feasible(const SystemConfig&, const ChannelSet&,
                                    const Beamformer&, double tol = 1e-6);

inline double rate_bits(double sinr) { return std::log2(1.0 + sinr); }

}  // namespace secbeam
