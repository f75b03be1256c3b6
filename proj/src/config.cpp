#include "secbeam/config.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace secbeam {

using nlohmann::json;

int SystemConfig::total_sr() const {
  return std::accumulate(M.begin(), M.end(), 0);
}

void SystemConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (N < 1) fail("N must be >= 1");
  if (G < 1) fail("G must be >= 1");
  if (L < 1) fail("L must be >= 1");
  if (K_p < 1) fail("K_p must be >= 1");
  if (static_cast<int>(M.size()) != G) fail("M must list one SR count per group");
  if (static_cast<int>(K.size()) != G) fail("K must list one eavesdropper count per group");
  for (int m : M)
    if (m < 1) fail("every group needs at least one SR");
  for (int k : K)
    if (k < 1) fail("every group needs at least one eavesdropper");
  if (!(P_p > 0.0) || !(P_s > 0.0)) fail("powers must be positive");
  if (!(sigma2_s > 0.0) || !(sigma2_e > 0.0) || !(sigma2_p > 0.0))
    fail("noise powers must be positive");
  if (static_cast<int>(R_bar.size()) != L) fail("R_bar must have one entry per PR");
  for (double r : R_bar)
    if (r < 0.0) fail("R_bar entries must be nonnegative");
  if (!delta.empty() && static_cast<int>(delta.size()) != L)
    fail("delta must be empty or have one entry per PR");
  for (double d : delta)
    if (d < 0.0) fail("delta entries must be nonnegative");
  if (delta_rel_sq < 0.0 || delta_rel_sq >= 1.0)
    fail("delta_rel_sq must lie in [0,1)");
  if (static_cast<int>(eps.size()) != G) fail("eps must have one entry per group");
  for (double e : eps)
    if (!(e > 0.0 && e < 1.0)) fail("eps entries must lie in (0,1)");
  if (!(eps_tilde > 0.0 && eps_tilde < 1.0)) fail("eps_tilde must lie in (0,1)");
  if (!(sca.tolerance > 0.0)) fail("sca.tolerance must be positive");
  if (sca.max_iterations < 1 || sca.init_max_iterations < 1)
    fail("sca iteration caps must be >= 1");
}

std::string SystemConfig::to_json() const {
  json j;
  j["N"] = N;
  j["G"] = G;
  j["M"] = M;
  j["L"] = L;
  j["K_p"] = K_p;
  j["K"] = K;
  j["P_p"] = P_p;
  j["P_s"] = P_s;
  j["sigma2_s"] = sigma2_s;
  j["sigma2_e"] = sigma2_e;
  j["sigma2_p"] = sigma2_p;
  j["R_bar"] = R_bar;
  j["delta"] = delta;
  j["delta_rel_sq"] = delta_rel_sq;
  j["eps"] = eps;
  j["eps_tilde"] = eps_tilde;
  j["seed"] = seed;
  j["sca"] = {{"tolerance", sca.tolerance},
              {"max_iterations", sca.max_iterations},
              {"init_max_iterations", sca.init_max_iterations}};
  return j.dump(2);
}

SystemConfig SystemConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  SystemConfig c;
  try {
    if (j.contains("N")) c.N = j["N"].get<int>();
    if (j.contains("G")) c.G = j["G"].get<int>();
    if (j.contains("M")) c.M = j["M"].get<std::vector<int>>();
    if (j.contains("L")) c.L = j["L"].get<int>();
    if (j.contains("K_p")) c.K_p = j["K_p"].get<int>();
    if (j.contains("K")) c.K = j["K"].get<std::vector<int>>();

    // Power: either linear ("P_s") or dBm ("P_s_dbm"); dBm wins if both given.
    if (j.contains("P_p")) c.P_p = j["P_p"].get<double>();
    if (j.contains("P_p_dbm")) c.P_p = dbm_to_linear(j["P_p_dbm"].get<double>());
    if (j.contains("P_s")) c.P_s = j["P_s"].get<double>();
    if (j.contains("P_s_dbm")) c.P_s = dbm_to_linear(j["P_s_dbm"].get<double>());

    if (j.contains("sigma2_s")) c.sigma2_s = j["sigma2_s"].get<double>();
    if (j.contains("sigma2_e")) c.sigma2_e = j["sigma2_e"].get<double>();
    if (j.contains("sigma2_p")) c.sigma2_p = j["sigma2_p"].get<double>();
    if (j.contains("R_bar")) c.R_bar = j["R_bar"].get<std::vector<double>>();
    if (j.contains("delta")) c.delta = j["delta"].get<std::vector<double>>();
    if (j.contains("delta_rel_sq")) c.delta_rel_sq = j["delta_rel_sq"].get<double>();
    if (j.contains("eps")) c.eps = j["eps"].get<std::vector<double>>();
    if (j.contains("eps_tilde")) c.eps_tilde = j["eps_tilde"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("sca")) {
      const auto& s = j["sca"];
      if (s.contains("tolerance")) c.sca.tolerance = s["tolerance"].get<double>();
      if (s.contains("max_iterations"))
        c.sca.max_iterations = s["max_iterations"].get<int>();
      if (s.contains("init_max_iterations"))
        c.sca.init_max_iterations = s["init_max_iterations"].get<int>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad field type: ") + e.what());
  }

  // Defaults sized off G/L when the lists were not given explicitly.
  if (!j.contains("M")) c.M.assign(c.G, 2);
  if (!j.contains("K")) c.K.assign(c.G, 2);
  if (!j.contains("R_bar")) c.R_bar.assign(c.L, 2.0);
  if (!j.contains("eps")) c.eps.assign(c.G, 0.99);

  c.validate();
  return c;
}

SystemConfig SystemConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace secbeam
