#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "secbeam/channels.hpp"
#include "secbeam/config.hpp"
#include "secbeam/model.hpp"
#include "secbeam/rng.hpp"
#include "secbeam/surrogates.hpp"

using namespace secbeam;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cd = std::complex<double>;

namespace {

SystemConfig small_config() {
  SystemConfig cfg;
  cfg.N = 4;
  cfg.G = 2;
  cfg.M = {1, 2};
  cfg.K = {2, 1};
  cfg.L = 2;
  cfg.K_p = 2;
  cfg.P_p = 50.0;
  cfg.P_s = 10.0;
  cfg.R_bar = {1.0, 1.0};
  cfg.seed = 424242;
  cfg.validate();
  return cfg;
}

Beamformer random_beamformer(const SystemConfig& cfg, std::uint64_t salt,
                             double power) {
  Rng rng(seed_combine({cfg.seed, salt, hash_string("bf")}));
  Beamformer bf;
  bf.w.resize(cfg.G);
  for (int g = 0; g < cfg.G; ++g) {
    bf.w[g] = VectorXcd(cfg.N);
    for (int i = 0; i < cfg.N; ++i) bf.w[g](i) = rng.cnormal();
  }
  bf.U = MatrixXcd(cfg.N, cfg.N);
  for (int i = 0; i < cfg.N; ++i)
    for (int j = 0; j < cfg.N; ++j) bf.U(i, j) = rng.cnormal();
  double scale = std::sqrt(power / bf.total_power());
  for (auto& w : bf.w) w *= scale;
  bf.U *= scale;
  return bf;
}

RobustBeamformer random_robust(const SystemConfig& cfg, std::uint64_t salt,
                               double power) {
  Beamformer bf = random_beamformer(cfg, salt, power);
  RobustBeamformer rb;
  rb.w = bf.w;
  rb.U_tilde = bf.U * bf.U.adjoint();
  double scale = power / rb.total_power();
  for (auto& w : rb.w) w *= std::sqrt(scale);
  rb.U_tilde *= scale;
  return rb;
}

double true_log_secondary(const SystemConfig& c, const ChannelSet& ch,
                          const Beamformer& b, int g, int m) {
  return std::log1p(sinr_secondary(c, ch, b, g, m));
}

}  // namespace

TEST_CASE("quotient-log lower bound holds over random tuples") {
  Rng rng(seed_combine({1, hash_string("inq1")}));
  for (int t = 0; t < 10000; ++t) {
    cd x = rng.cnormal() * (0.1 + 3.0 * rng.uniform());
    cd x_n = rng.cnormal() * (0.1 + 3.0 * rng.uniform());
    double y = 0.05 + 8.0 * rng.uniform();
    double y_n = 0.05 + 8.0 * rng.uniform();
    double truth = std::log1p(std::norm(x) / y);
    CHECK(log_qol_lower(x, y, x_n, y_n) <= truth + 1e-12);
  }
  // Tight at the expansion pair.
  cd x_n(0.7, -1.3);
  double y_n = 2.25;
  CHECK(log_qol_lower(x_n, y_n, x_n, y_n) ==
        doctest::Approx(std::log1p(std::norm(x_n) / y_n)).epsilon(1e-12));
  // Zero expansion numerator collapses the bound to zero.
  CHECK(log_qol_lower(cd(1.0, 2.0), 0.5, cd(0.0, 0.0), 3.0) == 0.0);
  CHECK_THROWS_AS(log_qol_lower(x_n, 0.0, x_n, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(log_qol_lower(x_n, 1.0, x_n, -2.0), std::invalid_argument);
}

TEST_CASE("quotient lower bound holds over random tuples") {
  Rng rng(seed_combine({2, hash_string("inq2")}));
  for (int t = 0; t < 10000; ++t) {
    cd x = rng.cnormal() * (0.1 + 3.0 * rng.uniform());
    cd x_n = rng.cnormal() * (0.1 + 3.0 * rng.uniform());
    double y = 0.05 + 8.0 * rng.uniform();
    double y_n = 0.05 + 8.0 * rng.uniform();
    CHECK(qol_lower(x, y, x_n, y_n) <= std::norm(x) / y + 1e-12);
  }
  cd x_n(-0.4, 0.9);
  double y_n = 0.8;
  CHECK(qol_lower(x_n, y_n, x_n, y_n) ==
        doctest::Approx(std::norm(x_n) / y_n).epsilon(1e-12));
  CHECK(qol_lower(cd(2.0, -1.0), 1.5, cd(0.0, 0.0), 2.0) == 0.0);
  CHECK_THROWS_AS(qol_lower(x_n, -1.0, x_n, 1.0), std::invalid_argument);
}

TEST_CASE("log tangent upper bound holds over random tuples") {
  Rng rng(seed_combine({3, hash_string("inq3")}));
  for (int t = 0; t < 10000; ++t) {
    double x = 20.0 * rng.uniform();
    double x_n = 20.0 * rng.uniform();
    CHECK(log_tangent_upper(x, x_n) >= std::log1p(x) - 1e-12);
  }
  CHECK(log_tangent_upper(3.7, 3.7) == doctest::Approx(std::log1p(3.7)).epsilon(1e-14));
  CHECK_THROWS_AS(log_tangent_upper(-0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(log_tangent_upper(1.0, -0.1), std::invalid_argument);
}

TEST_CASE("expansion point caches match recomputation and the reference model") {
  SystemConfig cfg = small_config();
  ChannelSet ch = generate_channels(cfg, 0);
  Beamformer bf = random_beamformer(cfg, 7, 0.9 * cfg.P_s);
  ExpansionPoint ep = ExpansionPoint::at(cfg, ch, bf);
  CHECK(ep.consistent(cfg, ch, 1e-10));
  for (int g = 0; g < cfg.G; ++g)
    for (int m = 0; m < cfg.M[g]; ++m)
      CHECK(ep.gam_s[g][m] ==
            doctest::Approx(sinr_secondary(cfg, ch, bf, g, m)).epsilon(1e-12));
  for (int l = 0; l < cfg.L; ++l)
    CHECK(ep.gam_p[l] == doctest::Approx(sinr_primary(cfg, ch, bf, l)).epsilon(1e-12));

  RobustBeamformer rb = random_robust(cfg, 8, 0.9 * cfg.P_s);
  ExpansionPoint rep = ExpansionPoint::at(cfg, ch, rb);
  CHECK(rep.mode == JamForm::covariance);
  CHECK(rep.consistent(cfg, ch, 1e-10));
  for (int g = 0; g < cfg.G; ++g)
    for (int k = 0; k < cfg.K[g]; ++k)
      CHECK(rep.gam_e[g][k] ==
            doctest::Approx(sinr_eve_secondary(cfg, ch, rb, g, k)).epsilon(1e-12));

  // A stale cache must be detected.
  ExpansionPoint broken = ep;
  broken.chi_p[0] *= 1.0 + 1e-6;
  CHECK_FALSE(broken.consistent(cfg, ch, 1e-10));
}

TEST_CASE("all four surrogates are tight at their expansion point") {
  SystemConfig cfg = small_config();
  for (std::uint64_t trial = 0; trial < 4; ++trial) {
    ChannelSet ch = generate_channels(cfg, trial);
    Beamformer bf = random_beamformer(cfg, 100 + trial, 0.8 * cfg.P_s);
    ExpansionPoint ep = ExpansionPoint::at(cfg, ch, bf);
    for (int g = 0; g < cfg.G; ++g) {
      for (int m = 0; m < cfg.M[g]; ++m) {
        ConcaveLogLB s = secondary_rate_lower(cfg, ch, ep, g, m);
        CHECK(s.value(ep.w, ep.U) ==
              doctest::Approx(std::log1p(ep.gam_s[g][m])).epsilon(1e-9));
      }
      for (int k = 0; k < cfg.K[g]; ++k) {
        ConvexLogUB s = secondary_eve_upper(cfg, ch, ep, g, k);
        CHECK(s.phi_value(ep.w, ep.U) == doctest::Approx(ep.chi_e[g][k]).epsilon(1e-9));
        CHECK(s.value(ep.w, ep.U) ==
              doctest::Approx(std::log1p(ep.gam_e[g][k])).epsilon(1e-9));
      }
    }
    for (int l = 0; l < cfg.L; ++l) {
      ConcaveLogLB s = primary_rate_lower(cfg, ch, ep, l);
      CHECK(s.value(ep.w, ep.U) ==
            doctest::Approx(std::log1p(ep.gam_p[l])).epsilon(1e-9));
    }
    for (int k = 0; k < cfg.K_p; ++k) {
      ConvexLogUB s = primary_eve_upper(cfg, ch, ep, k);
      CHECK(s.phi_value(ep.w, ep.U) == doctest::Approx(ep.chi_ep[k]).epsilon(1e-9));
      CHECK(s.value(ep.w, ep.U) ==
            doctest::Approx(std::log1p(ep.gam_ep[k])).epsilon(1e-9));
    }

    // Covariance mode: same tightness contract.
    RobustBeamformer rb = random_robust(cfg, 200 + trial, 0.8 * cfg.P_s);
    ExpansionPoint rep = ExpansionPoint::at(cfg, ch, rb);
    ConcaveLogLB s1 = secondary_rate_lower(cfg, ch, rep, 0, 0);
    CHECK(s1.value(rep.w, rep.U) ==
          doctest::Approx(std::log1p(rep.gam_s[0][0])).epsilon(1e-9));
    ConvexLogUB s2 = secondary_eve_upper(cfg, ch, rep, 0, 0);
    CHECK(s2.value(rep.w, rep.U) ==
          doctest::Approx(std::log1p(rep.gam_e[0][0])).epsilon(1e-9));
    ConcaveLogLB s3 = primary_rate_lower(cfg, ch, rep, 0);
    CHECK(s3.value(rep.w, rep.U) ==
          doctest::Approx(std::log1p(rep.gam_p[0])).epsilon(1e-9));
    ConvexLogUB s4 = primary_eve_upper(cfg, ch, rep, 0);
    CHECK(s4.value(rep.w, rep.U) ==
          doctest::Approx(std::log1p(rep.gam_ep[0])).epsilon(1e-9));
  }
}

TEST_CASE("concave surrogates never exceed the true log rates") {
  SystemConfig cfg = small_config();
  ChannelSet ch = generate_channels(cfg, 1);
  Beamformer anchor = random_beamformer(cfg, 11, 0.7 * cfg.P_s);
  ExpansionPoint ep = ExpansionPoint::at(cfg, ch, anchor);

  std::vector<ConcaveLogLB> lo;
  for (int g = 0; g < cfg.G; ++g)
    for (int m = 0; m < cfg.M[g]; ++m) lo.push_back(secondary_rate_lower(cfg, ch, ep, g, m));
  std::vector<ConcaveLogLB> lop;
  for (int l = 0; l < cfg.L; ++l) lop.push_back(primary_rate_lower(cfg, ch, ep, l));

  for (int t = 0; t < 1000; ++t) {
    Beamformer bf = random_beamformer(cfg, 1000 + t, cfg.P_s * (0.05 + 0.95 * ((t % 10) / 10.0)));
    int idx = 0;
    for (int g = 0; g < cfg.G; ++g)
      for (int m = 0; m < cfg.M[g]; ++m) {
        double truth = true_log_secondary(cfg, ch, bf, g, m);
        CHECK(lo[idx++].value(bf.w, bf.U) <= truth + 1e-9);
      }
    for (int l = 0; l < cfg.L; ++l) {
      double truth = std::log1p(sinr_primary(cfg, ch, bf, l));
      CHECK(lop[l].value(bf.w, bf.U) <= truth + 1e-9);
    }
  }
}

TEST_CASE("convex surrogates never fall below the true log rates where valid") {
  SystemConfig cfg = small_config();
  ChannelSet ch = generate_channels(cfg, 2);
  Beamformer anchor = random_beamformer(cfg, 12, 0.7 * cfg.P_s);
  ExpansionPoint ep = ExpansionPoint::at(cfg, ch, anchor);

  std::vector<ConvexLogUB> up;
  for (int g = 0; g < cfg.G; ++g)
    for (int k = 0; k < cfg.K[g]; ++k) up.push_back(secondary_eve_upper(cfg, ch, ep, g, k));
  std::vector<ConvexLogUB> upp;
  for (int k = 0; k < cfg.K_p; ++k) upp.push_back(primary_eve_upper(cfg, ch, ep, k));

  int audited = 0;
  for (int t = 0; t < 5000 && audited < 1000; ++t) {
    Beamformer bf = random_beamformer(cfg, 50000 + t, cfg.P_s * (0.05 + 0.95 * ((t % 10) / 10.0)));
    bool counted = false;
    int idx = 0;
    for (int g = 0; g < cfg.G; ++g)
      for (int k = 0; k < cfg.K[g]; ++k) {
        const ConvexLogUB& s = up[idx++];
        if (s.phi_value(bf.w, bf.U) <= 0.0) continue;
        double truth = std::log1p(sinr_eve_secondary(cfg, ch, bf, g, k));
        CHECK(s.value(bf.w, bf.U) >= truth - 1e-9);
        counted = true;
      }
    for (int k = 0; k < cfg.K_p; ++k) {
      const ConvexLogUB& s = upp[k];
      if (s.phi_value(bf.w, bf.U) <= 0.0) continue;
      double truth = std::log1p(sinr_eve_primary(cfg, ch, bf, k));
      CHECK(s.value(bf.w, bf.U) >= truth - 1e-9);
      counted = true;
    }
    if (counted) ++audited;
  }
  CHECK(audited >= 1000);
}

namespace {

// Central finite difference of `fn` along one real coordinate of (w, U).
template <typename Fn>
double fd_derivative(const Beamformer& base, int g, int i, int uc, bool imag_part,
                     double h, Fn&& fn) {
  Beamformer plus = base, minus = base;
  cd delta = imag_part ? cd(0.0, h) : cd(h, 0.0);
  if (g >= 0) {
    plus.w[g](i) += delta;
    minus.w[g](i) -= delta;
  } else {
    plus.U(i, uc) += delta;
    minus.U(i, uc) -= delta;
  }
  return (fn(plus) - fn(minus)) / (2.0 * h);
}

template <typename SurrFn, typename TruthFn>
void check_tangency(const SystemConfig& cfg, const Beamformer& base, SurrFn surr,
                    TruthFn truth) {
  const double h = 1e-5;
  auto coords_match = [&](int g, int i, int uc, bool im) {
    double ds = fd_derivative(base, g, i, uc, im, h, surr);
    double dt = fd_derivative(base, g, i, uc, im, h, truth);
    CHECK(std::abs(ds - dt) <= 1e-4 * std::max(1.0, std::abs(dt)));
  };
  for (int g = 0; g < cfg.G; ++g)
    for (int i = 0; i < cfg.N; ++i) {
      coords_match(g, i, -1, false);
      coords_match(g, i, -1, true);
    }
  for (int i = 0; i < cfg.N; ++i)
    for (int c = 0; c < cfg.N; ++c) {
      coords_match(-1, i, c, false);
      coords_match(-1, i, c, true);
    }
}

}  // namespace

TEST_CASE("surrogates are first-order tangent to the true logs at expansion") {
  SystemConfig cfg = small_config();
  ChannelSet ch = generate_channels(cfg, 3);
  Beamformer base = random_beamformer(cfg, 21, 0.6 * cfg.P_s);
  ExpansionPoint ep = ExpansionPoint::at(cfg, ch, base);

  {
    ConcaveLogLB s = secondary_rate_lower(cfg, ch, ep, 1, 0);
    check_tangency(
        cfg, base, [&](const Beamformer& b) { return s.value(b.w, b.U); },
        [&](const Beamformer& b) { return std::log1p(sinr_secondary(cfg, ch, b, 1, 0)); });
  }
  {
    ConvexLogUB s = secondary_eve_upper(cfg, ch, ep, 0, 1);
    check_tangency(
        cfg, base, [&](const Beamformer& b) { return s.value(b.w, b.U); },
        [&](const Beamformer& b) {
          return std::log1p(sinr_eve_secondary(cfg, ch, b, 0, 1));
        });
  }
  {
    ConcaveLogLB s = primary_rate_lower(cfg, ch, ep, 1);
    check_tangency(
        cfg, base, [&](const Beamformer& b) { return s.value(b.w, b.U); },
        [&](const Beamformer& b) { return std::log1p(sinr_primary(cfg, ch, b, 1)); });
  }
  {
    ConvexLogUB s = primary_eve_upper(cfg, ch, ep, 0);
    check_tangency(
        cfg, base, [&](const Beamformer& b) { return s.value(b.w, b.U); },
        [&](const Beamformer& b) { return std::log1p(sinr_eve_primary(cfg, ch, b, 0)); });
  }
}

TEST_CASE("covariance-mode surrogates are tangent under Hermitian perturbations") {
  SystemConfig cfg = small_config();
  ChannelSet ch = generate_channels(cfg, 4);
  RobustBeamformer base = random_robust(cfg, 31, 0.6 * cfg.P_s);
  ExpansionPoint ep = ExpansionPoint::at(cfg, ch, base);
  ConcaveLogLB s = secondary_rate_lower(cfg, ch, ep, 0, 0);
  auto surr = [&](const RobustBeamformer& b) { return s.value(b.w, b.U_tilde); };
  auto truth = [&](const RobustBeamformer& b) {
    return std::log1p(sinr_secondary(cfg, ch, b, 0, 0));
  };
  const double h = 1e-5;
  // Perturbations that keep U_tilde Hermitian: real diagonal, symmetric real
  // off-diagonal pair, antisymmetric imaginary pair.
  auto fd_pair = [&](int i, int j, cd dij, cd dji) {
    RobustBeamformer plus = base, minus = base;
    plus.U_tilde(i, j) += dij;
    minus.U_tilde(i, j) -= dij;
    if (i != j) {
      plus.U_tilde(j, i) += dji;
      minus.U_tilde(j, i) -= dji;
    }
    double ds = (surr(plus) - surr(minus)) / (2.0 * h);
    double dt = (truth(plus) - truth(minus)) / (2.0 * h);
    CHECK(std::abs(ds - dt) <= 1e-4 * std::max(1.0, std::abs(dt)));
  };
  for (int i = 0; i < cfg.N; ++i) fd_pair(i, i, cd(h, 0.0), cd(0.0, 0.0));
  fd_pair(0, 1, cd(h, 0.0), cd(h, 0.0));
  fd_pair(1, 3, cd(0.0, h), cd(0.0, -h));
  // w-coordinates too.
  RobustBeamformer plus = base, minus = base;
  plus.w[0](2) += cd(h, 0.0);
  minus.w[0](2) -= cd(h, 0.0);
  double ds = (surr(plus) - surr(minus)) / (2.0 * h);
  double dt = (truth(plus) - truth(minus)) / (2.0 * h);
  CHECK(std::abs(ds - dt) <= 1e-4 * std::max(1.0, std::abs(dt)));
}

TEST_CASE("degenerate links collapse the surrogates as expected") {
  SystemConfig cfg = small_config();
  ChannelSet ch = generate_channels(cfg, 5);
  Beamformer bf = random_beamformer(cfg, 41, 0.5 * cfg.P_s);

  // Zero member channel: the lower bound degenerates to exactly zero.
  ChannelSet zch = ch;
  zch.groups[0].h[0].setZero();
  ExpansionPoint zep = ExpansionPoint::at(cfg, zch, bf);
  ConcaveLogLB s = secondary_rate_lower(cfg, zch, zep, 0, 0);
  CHECK(s.constant == 0.0);
  CHECK(s.quad_scale == 0.0);
  CHECK(s.lin.norm() == 0.0);
  CHECK(s.value(bf.w, bf.U) == 0.0);

  // Zero beam toward the eavesdropper's group: bound collapses to its
  // nonnegative constant, which still upper-bounds ln(1+0) = 0.
  ExpansionPoint ep = ExpansionPoint::at(cfg, ch, bf);
  ConvexLogUB u = secondary_eve_upper(cfg, ch, ep, 0, 0);
  Beamformer bz = bf;
  bz.w[0].setZero();
  CHECK(u.phi_value(bz.w, bz.U) > 0.0);
  double v = u.value(bz.w, bz.U);
  CHECK(v == doctest::Approx(u.constant).epsilon(1e-15));
  CHECK(u.constant >= 0.0);
  CHECK(ep.gam_e[0][0] >= 0.0);

  // Positivity floor metadata.
  CHECK(u.phi_floor == doctest::Approx(1e-6 * cfg.sigma2_e));
  CHECK(u.phi_value(ep.w, ep.U) > u.phi_floor);
}
