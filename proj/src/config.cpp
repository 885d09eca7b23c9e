#include "panoma/harness.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace panoma {

using nlohmann::json;

namespace {

template <class T> void require_nonempty(const std::vector<T> &v, const char *what) {
  if (v.empty())
    throw std::invalid_argument(std::string(what) + " must not be empty");
}

void check_keys(const json &j, const std::set<std::string> &known, const std::string &where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw std::invalid_argument("unknown config key '" + where + it.key() + "'");
}

template <class T> void read(const json &j, const char *key, T &dst) {
  if (j.contains(key))
    dst = j.at(key).get<T>();
}

} // namespace

void ScenarioConfig::validate() const {
  require_nonempty(f_c_ghz, "f_c_ghz");
  require_nonempty(num_users, "K");
  require_nonempty(num_waveguides, "N");
  require_nonempty(p_max_dbm, "p_max_dbm");
  require_nonempty(schemes, "schemes");
  for (double f : f_c_ghz)
    if (!(f > 0.0))
      throw std::invalid_argument("carrier frequencies must be positive");
  for (int k : num_users)
    if (k < 1)
      throw std::invalid_argument("K must be at least 1");
  for (int n : num_waveguides)
    if (n < 1)
      throw std::invalid_argument("N must be at least 1");
  if (!(spacing > 0.0) || !(height > 0.0) || !(x_max > 0.0) || !(side > 0.0))
    throw std::invalid_argument("spacing, height, x_max and side must be positive");
  if (!(r_min >= 0.0))
    throw std::invalid_argument("r_min must be nonnegative");
  if (drops < 1)
    throw std::invalid_argument("drops must be at least 1");
  if (workers < 1)
    throw std::invalid_argument("workers must be at least 1");
  if (tau_max < 0)
    throw std::invalid_argument("tau_max must be nonnegative");
  if (!(oracle_step > 0.0) || oracle_levels < 2)
    throw std::invalid_argument("oracle step must be positive and levels at least 2");
  material.validate();
}

ScenarioConfig ScenarioConfig::preset(const std::string &figure) {
  ScenarioConfig c;
  c.figure = figure;
  if (figure == "fig3") {
    c.drops = 50;
    return c;
  }
  if (figure == "fig4") {
    c.f_c_ghz = {28.0};
    c.num_users = {4, 6};
    c.num_waveguides = {2, 4, 6, 8};
    c.p_max_dbm = {15.0};
    c.drops = 25;
    c.schemes = {SchemeKind::proposed, SchemeKind::conventional};
    return c;
  }
  throw std::invalid_argument("unknown figure '" + figure + "' (expected fig3 or fig4)");
}

ScenarioConfig config_from_json(const json &j, const std::optional<std::string> &figure) {
  if (!j.is_object())
    throw std::invalid_argument("config must be a JSON object");
  check_keys(j,
             {"figure", "f_c_ghz", "K", "N", "p_max_dbm", "sigma2_dbm", "r_min", "spacing", "height", "x_max", "side",
              "feed_centre_y", "user_x0", "user_y0", "material", "eta_mode", "master_seed", "drops", "schemes",
              "workers", "tau_max", "oracle"},
             "");
  std::string fig = j.value("figure", std::string("fig3"));
  if (figure)
    fig = *figure;
  ScenarioConfig c = ScenarioConfig::preset(fig);

  read(j, "f_c_ghz", c.f_c_ghz);
  read(j, "K", c.num_users);
  read(j, "N", c.num_waveguides);
  read(j, "p_max_dbm", c.p_max_dbm);
  read(j, "sigma2_dbm", c.sigma2_dbm);
  read(j, "r_min", c.r_min);
  read(j, "spacing", c.spacing);
  read(j, "height", c.height);
  read(j, "x_max", c.x_max);
  read(j, "side", c.side);
  read(j, "feed_centre_y", c.feed_centre_y);
  read(j, "user_x0", c.user_x0);
  read(j, "user_y0", c.user_y0);
  read(j, "master_seed", c.master_seed);
  read(j, "drops", c.drops);
  read(j, "workers", c.workers);
  read(j, "tau_max", c.tau_max);
  if (j.contains("material")) {
    const json &m = j.at("material");
    check_keys(m, {"eta_eff", "eps_r", "tan_delta"}, "material.");
    read(m, "eta_eff", c.material.eta_eff);
    read(m, "eps_r", c.material.eps_r);
    read(m, "tan_delta", c.material.tan_delta);
  }
  if (j.contains("eta_mode")) {
    const auto mode = j.at("eta_mode").get<std::string>();
    if (mode == "linear")
      c.eta_mode = EtaMode::linear;
    else if (mode == "squared")
      c.eta_mode = EtaMode::squared;
    else
      throw std::invalid_argument("eta_mode must be 'linear' or 'squared'");
  }
  if (j.contains("schemes")) {
    c.schemes.clear();
    for (const auto &s : j.at("schemes")) {
      const auto name = s.get<std::string>();
      const auto kind = scheme_from_string(name);
      if (!kind)
        throw std::invalid_argument("unknown scheme '" + name + "'");
      c.schemes.push_back(*kind);
    }
  }
  if (j.contains("oracle")) {
    const json &o = j.at("oracle");
    check_keys(o, {"step", "levels"}, "oracle.");
    read(o, "step", c.oracle_step);
    read(o, "levels", c.oracle_levels);
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path &path, const std::optional<std::string> &figure) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error &e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return config_from_json(j, figure);
}

json config_to_json(const ScenarioConfig &c) {
  json schemes = json::array();
  for (auto s : c.schemes)
    schemes.push_back(std::string(to_string(s)));
  return {
      {"figure", c.figure},
      {"f_c_ghz", c.f_c_ghz},
      {"K", c.num_users},
      {"N", c.num_waveguides},
      {"p_max_dbm", c.p_max_dbm},
      {"sigma2_dbm", c.sigma2_dbm},
      {"r_min", c.r_min},
      {"spacing", c.spacing},
      {"height", c.height},
      {"x_max", c.x_max},
      {"side", c.side},
      {"feed_centre_y", c.feed_centre_y},
      {"user_x0", c.user_x0},
      {"user_y0", c.user_y0},
      {"material", {{"eta_eff", c.material.eta_eff}, {"eps_r", c.material.eps_r}, {"tan_delta", c.material.tan_delta}}},
      {"eta_mode", c.eta_mode == EtaMode::linear ? "linear" : "squared"},
      {"master_seed", c.master_seed},
      {"drops", c.drops},
      {"schemes", schemes},
      {"workers", c.workers},
      {"tau_max", c.tau_max},
      {"oracle", {{"step", c.oracle_step}, {"levels", c.oracle_levels}}},
  };
}

std::uint64_t effective_seed(const ScenarioConfig &c) {
  const char *env = std::getenv("PANOMA_SEED");
  if (!env || !*env)
    return c.master_seed;
  std::istringstream in(env);
  std::uint64_t v = 0;
  if (!(in >> v) || !in.eof())
    throw std::invalid_argument(std::string("PANOMA_SEED is not an unsigned integer: ") + env);
  return v;
}

} // namespace panoma
