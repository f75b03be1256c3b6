#include "secbeam/robust_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "secbeam/rng.hpp"

namespace secbeam {

ChanceBoundParams ChanceBoundParams::from_config(const SystemConfig& cfg) {
  ChanceBoundParams p;
  p.N = cfg.N;
  p.K_p = cfg.K_p;
  p.K = cfg.K;
  p.P_p = cfg.P_p;
  p.sigma2_e = cfg.sigma2_e;
  p.eps_tilde = cfg.eps_tilde;
  p.eps = cfg.eps;
  p.validate();
  return p;
}

void ChanceBoundParams::validate() const {
  if (N < 1) throw ConfigError("ChanceBoundParams: N must be >= 1");
  if (K_p < 1) throw ConfigError("ChanceBoundParams: K_p must be >= 1");
  for (int k : K)
    if (k < 1) throw ConfigError("ChanceBoundParams: every K_g must be >= 1");
  if (!(P_p > 0.0)) throw ConfigError("ChanceBoundParams: P_p must be > 0");
  if (!(sigma2_e > 0.0))
    throw ConfigError("ChanceBoundParams: sigma2_e must be > 0");
  if (!(eps_tilde > 0.0 && eps_tilde < 1.0))
    throw ConfigError("ChanceBoundParams: eps_tilde must lie in (0,1)");
  if (eps.size() != K.size())
    throw ConfigError("ChanceBoundParams: eps needs one entry per group");
  for (double e : eps)
    if (!(e > 0.0 && e < 1.0))
      throw ConfigError("ChanceBoundParams: every eps_g must lie in (0,1)");
}

double xi_tilde(double beta, const ChanceBoundParams& p) {
  if (!(beta > 0.0))
    throw std::invalid_argument("xi_tilde: beta must be > 0");
  const double n = static_cast<double>(p.N);
  const double tail = 1.0 - std::pow(p.eps_tilde, 1.0 / p.K_p);
  const double num = std::exp(-beta * p.sigma2_e / (n * p.P_p));
  return (num / std::pow(tail, 1.0 / n) - 1.0) * p.P_p / beta;
}

double xi_tilde_root(double target, const ChanceBoundParams& p) {
  if (!(target > 0.0))
    throw std::invalid_argument("xi_tilde_root: target must be > 0");
  double lo = 1e-6;
  double hi = 1e6;
  if (xi_tilde(lo, p) < target || xi_tilde(hi, p) > target)
    throw std::domain_error("xi_tilde_root: target not bracketed on [1e-6, 1e6]");
  // xi_tilde is strictly decreasing, so keep the invariant
  // xi_tilde(lo) >= target >= xi_tilde(hi).
  while (hi - lo > 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (xi_tilde(mid, p) >= target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double xi_g(const ChanceBoundParams& p, int g) {
  if (g < 0 || g >= static_cast<int>(p.K.size()))
    throw std::invalid_argument("xi_g: group index out of range");
  const double n = static_cast<double>(p.N);
  const double kg = static_cast<double>(p.K[g]);
  return (std::exp(p.sigma2_e / (n * p.P_p)) *
              std::pow(p.eps[g], -1.0 / (n * kg)) -
          1.0) *
         p.P_p;
}

namespace {

void check_samples(int samples, const char* who) {
  if (samples < 10000)
    throw std::invalid_argument(std::string(who) + ": samples must be >= 10000");
}

Eigen::VectorXcd draw_cvec(Rng& rng, int n) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.cnormal();
  return v;
}

}  // namespace

double mc_primary_chance(const RobustBeamformer& bf, const ChanceBoundParams& p,
                         double beta, int samples, std::uint64_t seed) {
  check_samples(samples, "mc_primary_chance");
  Rng rng(seed_combine({seed, hash_string("mc-primary-chance")}));
  const bool jam = bf.U_tilde.size() > 0;
  int hits = 0;
  for (int s = 0; s < samples; ++s) {
    double worst = 0.0;
    for (int k = 0; k < p.K_p; ++k) {
      const Eigen::VectorXcd f = draw_cvec(rng, p.N);       // ST -> eavesdropper
      const std::complex<double> g_pt = rng.cnormal();      // PT -> eavesdropper
      double den = p.sigma2_e;
      for (const auto& w : bf.w) den += std::norm(f.dot(w));
      if (jam) den += std::real(f.dot(bf.U_tilde * f));
      worst = std::max(worst, p.P_p * std::norm(g_pt) / den);
    }
    if (worst <= beta) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

double mc_secondary_chance(const RobustBeamformer& bf,
                           const ChanceBoundParams& p, int g, double phi_g,
                           int samples, std::uint64_t seed) {
  check_samples(samples, "mc_secondary_chance");
  if (g < 0 || g >= static_cast<int>(bf.w.size()))
    throw std::invalid_argument("mc_secondary_chance: group index out of range");
  Rng rng(seed_combine({seed, hash_string("mc-secondary-chance"),
                        static_cast<std::uint64_t>(g)}));
  const bool jam = bf.U_tilde.size() > 0;
  const int K_g = p.K[g];
  int hits = 0;
  for (int s = 0; s < samples; ++s) {
    double worst = 0.0;
    for (int k = 0; k < K_g; ++k) {
      const Eigen::VectorXcd st_ch = draw_cvec(rng, p.N);   // ST -> eavesdropper
      const std::complex<double> pt_ch = rng.cnormal();     // PT -> eavesdropper
      double den = p.sigma2_e + p.P_p * std::norm(pt_ch);
      for (std::size_t i = 0; i < bf.w.size(); ++i)
        if (static_cast<int>(i) != g) den += std::norm(st_ch.dot(bf.w[i]));
      if (jam) den += std::real(st_ch.dot(bf.U_tilde * st_ch));
      worst = std::max(worst, std::norm(st_ch.dot(bf.w[g])) / den);
    }
    if (worst <= phi_g) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

std::pair<double, double> trace_eig_lower(const Eigen::MatrixXcd& F,
                                          const Eigen::MatrixXcd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A,
                                                     Eigen::EigenvaluesOnly);
  const double lhs = (F * A).trace().real();
  const double rhs = F.trace().real() * es.eigenvalues().minCoeff();
  return {lhs, rhs};
}

std::pair<double, double> trace_eig_upper(const Eigen::MatrixXcd& G,
                                          const Eigen::MatrixXcd& B) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(B,
                                                     Eigen::EigenvaluesOnly);
  const double lhs = (G * B).trace().real();
  const double rhs = G.trace().real() * es.eigenvalues().maxCoeff();
  return {lhs, rhs};
}

}  // namespace secbeam
