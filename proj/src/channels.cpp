#include "secbeam/channels.hpp"

#include <cmath>

#include "json.hpp"
#include "secbeam/rng.hpp"

namespace secbeam {

using nlohmann::json;

namespace {

Eigen::VectorXcd draw_cvec(Rng& rng, int n) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.cnormal();
  return v;
}

json cvec_to_json(const Eigen::VectorXcd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
  return a;
}

Eigen::VectorXcd cvec_from_json(const json& a) {
  Eigen::VectorXcd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    v(static_cast<int>(i)) = {a[i][0].get<double>(), a[i][1].get<double>()};
  return v;
}

}  // namespace

Eigen::VectorXcd sample_ball_error(Rng& rng, int n, double delta) {
  Eigen::VectorXcd dir = draw_cvec(rng, n);
  double nrm = dir.norm();
  if (nrm == 0.0) return Eigen::VectorXcd::Zero(n);
  double u = rng.uniform();
  double radius = delta * std::pow(u, 1.0 / (2.0 * n));
  return (radius / nrm) * dir;
}

ChannelSet generate_channels(const SystemConfig& cfg, std::uint64_t trial_index) {
  cfg.validate();
  Rng rng(seed_combine({cfg.seed, trial_index, hash_string("channels")}));

  ChannelSet ch;
  ch.groups.resize(cfg.G);
  for (int g = 0; g < cfg.G; ++g) {
    GroupChannels& gc = ch.groups[g];
    gc.h.reserve(cfg.M[g]);
    for (int m = 0; m < cfg.M[g]; ++m) gc.h.push_back(draw_cvec(rng, cfg.N));
    gc.g.reserve(cfg.K[g]);
    for (int k = 0; k < cfg.K[g]; ++k) gc.g.push_back(draw_cvec(rng, cfg.N));
    gc.f_sr = draw_cvec(rng, cfg.M[g]);
    gc.f_ev = draw_cvec(rng, cfg.K[g]);
  }

  ch.f.resize(cfg.L);
  ch.f_hat.resize(cfg.L);
  ch.delta.resize(cfg.L);
  for (int l = 0; l < cfg.L; ++l) {
    ch.f[l] = draw_cvec(rng, cfg.N);
    double dl = 0.0;
    if (cfg.delta_rel_sq > 0.0)
      dl = std::sqrt(cfg.delta_rel_sq) * ch.f[l].norm();
    else if (!cfg.delta.empty())
      dl = cfg.delta[l];
    ch.delta[l] = dl;
    if (dl > 0.0)
      ch.f_hat[l] = ch.f[l] - sample_ball_error(rng, cfg.N, dl);
    else
      ch.f_hat[l] = ch.f[l];
  }
  ch.h_pr = draw_cvec(rng, cfg.L);

  ch.f_pe.reserve(cfg.K_p);
  for (int k = 0; k < cfg.K_p; ++k) ch.f_pe.push_back(draw_cvec(rng, cfg.N));
  ch.g_pe = draw_cvec(rng, cfg.K_p);
  return ch;
}

std::string ChannelSet::to_json() const {
  json j;
  j["groups"] = json::array();
  for (const auto& gc : groups) {
    json jg;
    jg["h"] = json::array();
    for (const auto& v : gc.h) jg["h"].push_back(cvec_to_json(v));
    jg["g"] = json::array();
    for (const auto& v : gc.g) jg["g"].push_back(cvec_to_json(v));
    jg["f_sr"] = cvec_to_json(gc.f_sr);
    jg["f_ev"] = cvec_to_json(gc.f_ev);
    j["groups"].push_back(std::move(jg));
  }
  j["f"] = json::array();
  for (const auto& v : f) j["f"].push_back(cvec_to_json(v));
  j["f_hat"] = json::array();
  for (const auto& v : f_hat) j["f_hat"].push_back(cvec_to_json(v));
  j["delta"] = delta;
  j["h_pr"] = cvec_to_json(h_pr);
  j["f_pe"] = json::array();
  for (const auto& v : f_pe) j["f_pe"].push_back(cvec_to_json(v));
  j["g_pe"] = cvec_to_json(g_pe);
  return j.dump();
}

ChannelSet ChannelSet::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("channels: invalid JSON: ") + e.what());
  }
  ChannelSet ch;
  try {
    for (const auto& jg : j.at("groups")) {
      GroupChannels gc;
      for (const auto& v : jg.at("h")) gc.h.push_back(cvec_from_json(v));
      for (const auto& v : jg.at("g")) gc.g.push_back(cvec_from_json(v));
      gc.f_sr = cvec_from_json(jg.at("f_sr"));
      gc.f_ev = cvec_from_json(jg.at("f_ev"));
      ch.groups.push_back(std::move(gc));
    }
    for (const auto& v : j.at("f")) ch.f.push_back(cvec_from_json(v));
    for (const auto& v : j.at("f_hat")) ch.f_hat.push_back(cvec_from_json(v));
    ch.delta = j.at("delta").get<std::vector<double>>();
    ch.h_pr = cvec_from_json(j.at("h_pr"));
    for (const auto& v : j.at("f_pe")) ch.f_pe.push_back(cvec_from_json(v));
    ch.g_pe = cvec_from_json(j.at("g_pe"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("channels: missing/bad field: ") + e.what());
  }
  return ch;
}

}  // namespace secbeam
