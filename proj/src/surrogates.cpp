#include "secbeam/surrogates.hpp"

#include <cmath>
#include <stdexcept>

namespace secbeam {

namespace {
double abs2(const std::complex<double>& z) { return std::norm(z); }
}  // namespace

double log_qol_lower(std::complex<double> x, double y, std::complex<double> x_n,
                     double y_n) {
  if (y <= 0.0 || y_n <= 0.0)
    throw std::invalid_argument("log_qol_lower: denominators must be positive");
  const double a2 = abs2(x_n);
  return std::log1p(a2 / y_n) - a2 / y_n + 2.0 * std::real(std::conj(x_n) * x) / y_n -
         a2 * (abs2(x) + y) / (y_n * (y_n + a2));
}

double qol_lower(std::complex<double> x, double y, std::complex<double> x_n,
                 double y_n) {
  if (y <= 0.0 || y_n <= 0.0)
    throw std::invalid_argument("qol_lower: denominators must be positive");
  return 2.0 * std::real(std::conj(x_n) * x) / y_n - abs2(x_n) * y / (y_n * y_n);
}

double log_tangent_upper(double x, double x_n) {
  if (x < 0.0 || x_n < 0.0)
    throw std::invalid_argument("log_tangent_upper: arguments must be nonnegative");
  return std::log1p(x_n) + (x - x_n) / (1.0 + x_n);
}

// --- expansion point --------------------------------------------------------

namespace {

const Eigen::MatrixXcd& jam_matrix(const Beamformer& bf) { return bf.U; }
const Eigen::MatrixXcd& jam_matrix(const RobustBeamformer& bf) { return bf.U_tilde; }
JamForm jam_form(const Beamformer&) { return JamForm::precoder; }
JamForm jam_form(const RobustBeamformer&) { return JamForm::covariance; }

template <typename BF>
ExpansionPoint make_expansion(const SystemConfig& cfg, const ChannelSet& ch,
                              const BF& bf) {
  ExpansionPoint ep;
  ep.mode = jam_form(bf);
  ep.w = bf.w;
  ep.U = jam_matrix(bf);

  auto jam = [&](const Eigen::VectorXcd& v) { return ep.jam_at(v); };
  auto cross = [&](const Eigen::VectorXcd& v, int skip) {
    double p = 0.0;
    for (int i = 0; i < cfg.G; ++i) {
      if (i == skip) continue;
      p += abs2(v.dot(ep.w[i]));
    }
    return p;
  };

  ep.chi_s.resize(cfg.G);
  ep.chi_e.resize(cfg.G);
  ep.gam_s.resize(cfg.G);
  ep.gam_e.resize(cfg.G);
  for (int g = 0; g < cfg.G; ++g) {
    ep.chi_s[g].resize(cfg.M[g]);
    ep.gam_s[g].resize(cfg.M[g]);
    for (int m = 0; m < cfg.M[g]; ++m) {
      const Eigen::VectorXcd& h = ch.groups[g].h[m];
      double chi = cross(h, g) + jam(h) + cfg.P_p * abs2(ch.groups[g].f_sr(m)) +
                   cfg.sigma2_s;
      ep.chi_s[g][m] = chi;
      ep.gam_s[g][m] = abs2(h.dot(ep.w[g])) / chi;
    }
    ep.chi_e[g].resize(cfg.K[g]);
    ep.gam_e[g].resize(cfg.K[g]);
    for (int k = 0; k < cfg.K[g]; ++k) {
      const Eigen::VectorXcd& ge = ch.groups[g].g[k];
      double chi = cross(ge, g) + jam(ge) + cfg.P_p * abs2(ch.groups[g].f_ev(k)) +
                   cfg.sigma2_e;
      ep.chi_e[g][k] = chi;
      ep.gam_e[g][k] = abs2(ge.dot(ep.w[g])) / chi;
    }
  }
  ep.chi_p.resize(cfg.L);
  ep.gam_p.resize(cfg.L);
  for (int l = 0; l < cfg.L; ++l) {
    const Eigen::VectorXcd& f = ch.f[l];
    double chi = cross(f, -1) + jam(f) + cfg.sigma2_p;
    ep.chi_p[l] = chi;
    ep.gam_p[l] = cfg.P_p * abs2(ch.h_pr(l)) / chi;
  }
  ep.chi_ep.resize(cfg.K_p);
  ep.gam_ep.resize(cfg.K_p);
  for (int k = 0; k < cfg.K_p; ++k) {
    const Eigen::VectorXcd& fe = ch.f_pe[k];
    double chi = cross(fe, -1) + jam(fe) + cfg.sigma2_e;
    ep.chi_ep[k] = chi;
    ep.gam_ep[k] = cfg.P_p * abs2(ch.g_pe(k)) / chi;
  }
  return ep;
}

bool all_close(const std::vector<double>& a, const std::vector<double>& b,
               double rtol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > rtol * std::max(1.0, std::abs(b[i]))) return false;
  return true;
}

bool all_close(const std::vector<std::vector<double>>& a,
               const std::vector<std::vector<double>>& b, double rtol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!all_close(a[i], b[i], rtol)) return false;
  return true;
}

}  // namespace

ExpansionPoint ExpansionPoint::at(const SystemConfig& cfg, const ChannelSet& ch,
                                  const Beamformer& bf) {
  return make_expansion(cfg, ch, bf);
}

ExpansionPoint ExpansionPoint::at(const SystemConfig& cfg, const ChannelSet& ch,
                                  const RobustBeamformer& bf) {
  return make_expansion(cfg, ch, bf);
}

double ExpansionPoint::jam_at(const Eigen::VectorXcd& v) const {
  return mode == JamForm::precoder ? jam_power(U, v) : jam_power_cov(U, v);
}

bool ExpansionPoint::consistent(const SystemConfig& cfg, const ChannelSet& ch,
                                double rtol) const {
  ExpansionPoint fresh;
  if (mode == JamForm::precoder) {
    Beamformer bf{w, U};
    fresh = at(cfg, ch, bf);
    // Cross-check the cached SINRs against the reference model as well.
    for (int g = 0; g < cfg.G; ++g) {
      for (int m = 0; m < cfg.M[g]; ++m)
        if (std::abs(gam_s[g][m] - sinr_secondary(cfg, ch, bf, g, m)) >
            rtol * std::max(1.0, gam_s[g][m]))
          return false;
      for (int k = 0; k < cfg.K[g]; ++k)
        if (std::abs(gam_e[g][k] - sinr_eve_secondary(cfg, ch, bf, g, k)) >
            rtol * std::max(1.0, gam_e[g][k]))
          return false;
    }
    for (int l = 0; l < cfg.L; ++l)
      if (std::abs(gam_p[l] - sinr_primary(cfg, ch, bf, l)) >
          rtol * std::max(1.0, gam_p[l]))
        return false;
    for (int k = 0; k < cfg.K_p; ++k)
      if (std::abs(gam_ep[k] - sinr_eve_primary(cfg, ch, bf, k)) >
          rtol * std::max(1.0, gam_ep[k]))
        return false;
  } else {
    RobustBeamformer bf{w, U};
    fresh = at(cfg, ch, bf);
  }
  return all_close(chi_s, fresh.chi_s, rtol) && all_close(chi_e, fresh.chi_e, rtol) &&
         all_close(chi_p, fresh.chi_p, rtol) &&
         all_close(chi_ep, fresh.chi_ep, rtol) &&
         all_close(gam_s, fresh.gam_s, rtol) && all_close(gam_e, fresh.gam_e, rtol) &&
         all_close(gam_p, fresh.gam_p, rtol) && all_close(gam_ep, fresh.gam_ep, rtol);
}

// --- surrogate evaluation ----------------------------------------------------

double ConcaveLogLB::value(const std::vector<Eigen::VectorXcd>& w,
                           const Eigen::MatrixXcd& U) const {
  double quad = 0.0;
  for (const auto& wi : w) quad += abs2(probe.dot(wi));
  quad += mode == JamForm::precoder ? jam_power(U, probe) : jam_power_cov(U, probe);
  double v = constant - quad_scale * quad;
  if (lin_group >= 0) v += 2.0 * std::real(lin.dot(w[lin_group]));
  return v;
}

double ConvexLogUB::phi_value(const std::vector<Eigen::VectorXcd>& w,
                              const Eigen::MatrixXcd& U) const {
  double phi = phi_const;
  for (std::size_t i = 0; i < w.size(); ++i)
    phi += 2.0 * std::real(std::conj(phi_w[i]) * probe.dot(w[i]));
  if (mode == JamForm::precoder) {
    if (U.size()) phi += 2.0 * std::real((U.adjoint() * probe).dot(phi_jam));
  } else {
    phi += jam_power_cov(U, probe);
  }
  return phi;
}

double ConvexLogUB::value(const std::vector<Eigen::VectorXcd>& w,
                          const Eigen::MatrixXcd& U) const {
  double phi = phi_value(w, U);
  if (phi <= 0.0)
    throw std::domain_error("surrogate: linearized denominator not positive");
  double n2 = num_group >= 0 ? abs2(probe.dot(w[num_group])) : num_const2;
  return constant + ratio_scale * n2 / phi;
}

// --- builders ----------------------------------------------------------------

ConcaveLogLB secondary_rate_lower(const SystemConfig& cfg, const ChannelSet& ch,
                                  const ExpansionPoint& ep, int g, int m) {
  const Eigen::VectorXcd& h = ch.groups[g].h[m];
  const double chi_n = ep.chi_s[g][m];
  const double gam_n = ep.gam_s[g][m];
  const std::complex<double> x_n = h.dot(ep.w[g]);

  ConcaveLogLB s;
  s.mode = ep.mode;
  s.lin_group = g;
  s.lin = h * (x_n / chi_n);
  s.quad_scale = gam_n / (chi_n + abs2(x_n));
  s.probe = h;
  s.constant = std::log1p(gam_n) - gam_n -
               s.quad_scale * (cfg.P_p * abs2(ch.groups[g].f_sr(m)) + cfg.sigma2_s);
  return s;
}

ConcaveLogLB primary_rate_lower(const SystemConfig& cfg, const ChannelSet& ch,
                                const ExpansionPoint& ep, int l) {
  const double chi_n = ep.chi_p[l];
  const double gam_n = ep.gam_p[l];
  const double num = cfg.P_p * abs2(ch.h_pr(l));

  ConcaveLogLB s;
  s.mode = ep.mode;
  s.lin_group = -1;
  s.quad_scale = gam_n / (chi_n + num);
  s.probe = ch.f[l];
  s.constant = std::log1p(gam_n) + gam_n - s.quad_scale * (cfg.sigma2_p + num);
  return s;
}

namespace {

// Shared affine under-estimator of the true interference denominator, expanded
// around ep: every |probe^H w_i|^2 and the precoder jamming power are replaced
// by their tangents; a covariance jamming term is kept exact (already linear).
void fill_phi(ConvexLogUB& s, const ExpansionPoint& ep, int skip_group,
              double const_part) {
  const int G = static_cast<int>(ep.w.size());
  s.phi_w.assign(G, std::complex<double>(0.0, 0.0));
  s.phi_const = const_part;
  for (int i = 0; i < G; ++i) {
    if (i == skip_group) continue;
    s.phi_w[i] = s.probe.dot(ep.w[i]);
    s.phi_const -= abs2(s.phi_w[i]);
  }
  if (ep.mode == JamForm::precoder) {
    s.phi_jam = ep.U.size() ? Eigen::VectorXcd(ep.U.adjoint() * s.probe)
                            : Eigen::VectorXcd::Zero(0).eval();
    s.phi_const -= s.phi_jam.squaredNorm();
  }
}

}  // namespace

ConvexLogUB secondary_eve_upper(const SystemConfig& cfg, const ChannelSet& ch,
                                const ExpansionPoint& ep, int g, int k) {
  const double gam_n = ep.gam_e[g][k];

  ConvexLogUB s;
  s.mode = ep.mode;
  s.ratio_scale = 1.0 / (1.0 + gam_n);
  s.constant = std::log1p(gam_n) - s.ratio_scale * gam_n;
  s.num_group = g;
  s.probe = ch.groups[g].g[k];
  fill_phi(s, ep, g, cfg.P_p * abs2(ch.groups[g].f_ev(k)) + cfg.sigma2_e);
  s.phi_floor = kPhiFloorRel * cfg.sigma2_e;
  return s;
}

ConvexLogUB primary_eve_upper(const SystemConfig& cfg, const ChannelSet& ch,
                              const ExpansionPoint& ep, int k) {
  const double gam_n = ep.gam_ep[k];

  ConvexLogUB s;
  s.mode = ep.mode;
  s.ratio_scale = 1.0 / (1.0 + gam_n);
  s.constant = std::log1p(gam_n) - s.ratio_scale * gam_n;
  s.num_group = -1;
  s.num_const2 = cfg.P_p * abs2(ch.g_pe(k));
  s.probe = ch.f_pe[k];
  fill_phi(s, ep, -1, cfg.sigma2_e);
  s.phi_floor = kPhiFloorRel * cfg.sigma2_e;
  return s;
}

}  // namespace secbeam
