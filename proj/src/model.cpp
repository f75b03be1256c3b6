#include "secbeam/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace secbeam {

using nlohmann::json;

double Beamformer::total_power() const {
  double p = U.size() ? U.squaredNorm() : 0.0;
  for (const auto& wg : w) p += wg.squaredNorm();
  return p;
}

double RobustBeamformer::total_power() const {
  double p = U_tilde.size() ? U_tilde.real().trace() : 0.0;
  for (const auto& wg : w) p += wg.squaredNorm();
  return p;
}

double jam_power(const Eigen::MatrixXcd& U, const Eigen::VectorXcd& v) {
  if (U.size() == 0) return 0.0;
  return (v.adjoint() * U).squaredNorm();
}

double jam_power_cov(const Eigen::MatrixXcd& U_tilde, const Eigen::VectorXcd& v) {
  if (U_tilde.size() == 0) return 0.0;
  return std::real((v.adjoint() * U_tilde * v)(0, 0));
}

namespace {

double abs2(const std::complex<double>& z) { return std::norm(z); }

// Interference from the other groups' beams at a receiver with channel v.
template <typename BF>
double cross_power(const BF& bf, const Eigen::VectorXcd& v, int skip_g) {
  double p = 0.0;
  for (int i = 0; i < static_cast<int>(bf.w.size()); ++i) {
    if (i == skip_g) continue;
    p += abs2(v.dot(bf.w[i]));  // Eigen's dot conjugates the left argument
  }
  return p;
}

double jam_at(const Beamformer& bf, const Eigen::VectorXcd& v) {
  return jam_power(bf.U, v);
}
double jam_at(const RobustBeamformer& bf, const Eigen::VectorXcd& v) {
  return jam_power_cov(bf.U_tilde, v);
}

template <typename BF>
double sinr_secondary_impl(const SystemConfig& cfg, const ChannelSet& ch,
                           const BF& bf, int g, int m) {
  const Eigen::VectorXcd& h = ch.groups[g].h[m];
  double sig = abs2(h.dot(bf.w[g]));
  double den = cross_power(bf, h, g) + jam_at(bf, h) +
               cfg.P_p * abs2(ch.groups[g].f_sr(m)) + cfg.sigma2_s;
  return sig / den;
}

template <typename BF>
double sinr_eve_secondary_impl(const SystemConfig& cfg, const ChannelSet& ch,
                               const BF& bf, int g, int k) {
  const Eigen::VectorXcd& ge = ch.groups[g].g[k];
  double sig = abs2(ge.dot(bf.w[g]));
  double den = cross_power(bf, ge, g) + jam_at(bf, ge) +
               cfg.P_p * abs2(ch.groups[g].f_ev(k)) + cfg.sigma2_e;
  return sig / den;
}

template <typename BF>
double sinr_primary_impl(const SystemConfig& cfg, const ChannelSet& ch, const BF& bf,
                         int l, const Eigen::VectorXcd& f_l) {
  double sig = cfg.P_p * abs2(ch.h_pr(l));
  double den = cross_power(bf, f_l, -1) + jam_at(bf, f_l) + cfg.sigma2_p;
  return sig / den;
}

template <typename BF>
double sinr_eve_primary_impl(const SystemConfig& cfg, const ChannelSet& ch,
                             const BF& bf, int k) {
  const Eigen::VectorXcd& f = ch.f_pe[k];
  double sig = cfg.P_p * abs2(ch.g_pe(k));
  double den = cross_power(bf, f, -1) + jam_at(bf, f) + cfg.sigma2_e;
  return sig / den;
}

}  // namespace

double sinr_secondary(const SystemConfig& c, const ChannelSet& ch, const Beamformer& b,
                      int g, int m) {
  return sinr_secondary_impl(c, ch, b, g, m);
}
double sinr_eve_secondary(const SystemConfig& c, const ChannelSet& ch,
                          const Beamformer& b, int g, int k) {
  return sinr_eve_secondary_impl(c, ch, b, g, k);
}
double sinr_primary(const SystemConfig& c, const ChannelSet& ch, const Beamformer& b,
                    int l) {
  return sinr_primary_impl(c, ch, b, l, ch.f[l]);
}
double sinr_eve_primary(const SystemConfig& c, const ChannelSet& ch,
                        const Beamformer& b, int k) {
  return sinr_eve_primary_impl(c, ch, b, k);
}

double sinr_secondary(const SystemConfig& c, const ChannelSet& ch,
                      const RobustBeamformer& b, int g, int m) {
  return sinr_secondary_impl(c, ch, b, g, m);
}
double sinr_eve_secondary(const SystemConfig& c, const ChannelSet& ch,
                          const RobustBeamformer& b, int g, int k) {
  return sinr_eve_secondary_impl(c, ch, b, g, k);
}
double sinr_primary(const SystemConfig& c, const ChannelSet& ch,
                    const RobustBeamformer& b, int l) {
  return sinr_primary_impl(c, ch, b, l, ch.f[l]);
}
double sinr_eve_primary(const SystemConfig& c, const ChannelSet& ch,
                        const RobustBeamformer& b, int k) {
  return sinr_eve_primary_impl(c, ch, b, k);
}
double sinr_primary_at(const SystemConfig& c, const ChannelSet& ch,
                       const RobustBeamformer& b, int l, const Eigen::VectorXcd& f_l) {
  return sinr_primary_impl(c, ch, b, l, f_l);
}

double secrecy_rate_secondary(const SystemConfig& cfg, const ChannelSet& ch,
                              const Beamformer& bf, int g, int m) {
  double user = rate_bits(sinr_secondary(cfg, ch, bf, g, m));
  double best_eve = 0.0;
  for (int k = 0; k < cfg.K[g]; ++k)
    best_eve = std::max(best_eve, rate_bits(sinr_eve_secondary(cfg, ch, bf, g, k)));
  return std::max(0.0, user - best_eve);
}

double secrecy_rate_primary(const SystemConfig& cfg, const ChannelSet& ch,
                            const Beamformer& bf, int l) {
  double user = rate_bits(sinr_primary(cfg, ch, bf, l));
  double best_eve = 0.0;
  for (int k = 0; k < cfg.K_p; ++k)
    best_eve = std::max(best_eve, rate_bits(sinr_eve_primary(cfg, ch, bf, k)));
  return std::max(0.0, user - best_eve);
}

double min_secondary_secrecy(const SystemConfig& cfg, const ChannelSet& ch,
                             const Beamformer& bf) {
  double worst = std::numeric_limits<double>::infinity();
  for (int g = 0; g < cfg.G; ++g)
    for (int m = 0; m < cfg.M[g]; ++m)
      worst = std::min(worst, secrecy_rate_secondary(cfg, ch, bf, g, m));
  return worst;
}

bool FeasibilityReport::ok() const {
  if (!power_ok) return false;
  return std::all_of(primary_ok.begin(), primary_ok.end(), [](bool b) { return b; });
}

FeasibilityReport check_p1_feasible(const SystemConfig& cfg, const ChannelSet& ch,
                                    const Beamformer& bf, double tol) {
  FeasibilityReport rep;
  rep.power_ok = bf.total_power() <= cfg.P_s + tol;
  rep.primary_ok.resize(cfg.L);
  for (int l = 0; l < cfg.L; ++l)
    rep.primary_ok[l] = secrecy_rate_primary(cfg, ch, bf, l) >= cfg.R_bar[l] - tol;
  return rep;
}

std::string Beamformer::to_json() const {
  json j;
  j["w"] = json::array();
  for (const auto& wg : w) {
    json a = json::array();
    for (int i = 0; i < wg.size(); ++i) a.push_back({wg(i).real(), wg(i).imag()});
    j["w"].push_back(std::move(a));
  }
  json u = json::array();
  for (int r = 0; r < U.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < U.cols(); ++c) row.push_back({U(r, c).real(), U(r, c).imag()});
    u.push_back(std::move(row));
  }
  j["U"] = std::move(u);
  return j.dump();
}

Beamformer Beamformer::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("beamformer: invalid JSON: ") + e.what());
  }
  Beamformer bf;
  for (const auto& a : j.at("w")) {
    Eigen::VectorXcd wg(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      wg(static_cast<int>(i)) = {a[i][0].get<double>(), a[i][1].get<double>()};
    bf.w.push_back(std::move(wg));
  }
  const auto& u = j.at("U");
  int rows = static_cast<int>(u.size());
  int cols = rows ? static_cast<int>(u[0].size()) : 0;
  bf.U.resize(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      bf.U(r, c) = {u[r][c][0].get<double>(), u[r][c][1].get<double>()};
  return bf;
}

}  // namespace secbeam
