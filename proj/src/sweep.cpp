#include "panoma/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace panoma {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// 53 random bits into [0, 1); avoids the implementation-defined
// distributions of <random> so drops match across standard libraries.
double unit(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

auto point_key(const SweepPoint &p) { return std::make_tuple(p.f_c_ghz, p.K, p.N, p.p_max_dbm); }

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

std::vector<SweepPoint> sweep_points(const ScenarioConfig &c) {
  std::vector<SweepPoint> out;
  for (double f : c.f_c_ghz)
    for (int K : c.num_users)
      for (int N : c.num_waveguides)
        for (double p : c.p_max_dbm)
          out.push_back({f, K, N, p});
  return out;
}

std::vector<UserPosition> draw_users(const ScenarioConfig &c, int K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<UserPosition> users(static_cast<std::size_t>(K));
  for (auto &u : users) {
    u.x = c.user_x0 + c.side * unit(rng);
    u.y = c.user_y0 + c.side * unit(rng);
  }
  return users;
}

Scenario make_scenario(const ScenarioConfig &c, const SweepPoint &pt, const std::vector<UserPosition> &users) {
  Scenario s;
  s.f_c = pt.f_c_ghz * 1e9;
  s.material = c.material;
  s.eta_mode = c.eta_mode;
  s.r_min = c.r_min;
  s.geom.d = c.height;
  s.geom.x_max = c.x_max;
  s.geom.feed_y = centred_feed_points(static_cast<std::size_t>(pt.N), c.spacing, c.feed_centre_y);
  s.geom.users = users;
  s.noise = NoiseSpec::uniform(users.size(), dbm_to_watt(c.sigma2_dbm));
  s.budget.assign(static_cast<std::size_t>(pt.N), dbm_to_watt(pt.p_max_dbm) / pt.N);
  sort_users_by_strength(s, initial_positions(s));
  s.validate();
  return s;
}

TrialResult run_trial(const ScenarioConfig &c, const SweepPoint &pt, int drop, SchemeKind scheme) {
  TrialResult t;
  t.point = pt;
  t.drop = drop;
  t.scheme = scheme;
  t.seed = derive_seed(effective_seed(c), 0, static_cast<std::uint64_t>(drop));
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Scenario s = make_scenario(c, pt, draw_users(c, pt.K, t.seed));
    t.users = s.geom.users;
    AoCaps caps;
    caps.tau_max = c.tau_max;
    SchemeResult r = run_scheme(s, scheme, caps);
    const bool started = r.status != "infeasible_init";
    t.sum_rate = started ? r.sum_rate : 0.0;
    t.feasible = started && r.feasible;
    t.per_user_rate = std::move(r.per_user_rate);
    t.pin_x = std::move(r.pin_x);
    t.precoders = std::move(r.precoders);
    t.iterations = r.iterations;
    t.status = std::move(r.status);
    t.trace = std::move(r.trace);
  } catch (const std::exception &e) {
    t.status = "error";
    t.error = e.what();
  }
  t.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return t;
}

std::vector<TrialResult> run_sweep(const ScenarioConfig &c) {
  c.validate();
  struct Task {
    SweepPoint point;
    int drop;
    SchemeKind scheme;
  };
  std::vector<Task> tasks;
  for (const auto &pt : sweep_points(c))
    for (int d = 0; d < c.drops; ++d)
      for (auto s : c.schemes)
        tasks.push_back({pt, d, s});

  std::vector<TrialResult> out(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++)
      out[i] = run_trial(c, tasks[i].point, tasks[i].drop, tasks[i].scheme);
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(c.workers), std::max<std::size_t>(tasks.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < n; ++i)
      pool.emplace_back(worker);
    worker();
  }
  return out;
}

std::vector<Aggregate> aggregate(const std::vector<TrialResult> &trials) {
  std::vector<Aggregate> out;
  std::map<std::tuple<double, int, int, double, int>, std::size_t> index;
  std::vector<std::vector<double>> values;
  for (const auto &t : trials) {
    const auto [f, K, N, p] = point_key(t.point);
    const auto key = std::make_tuple(f, K, N, p, static_cast<int>(t.scheme));
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({t.point, t.scheme});
      values.emplace_back();
    }
    values[it->second].push_back(t.sum_rate);
    out[it->second].feasible += t.feasible ? 1 : 0;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto &v = values[i];
    double sum = 0.0;
    for (double x : v)
      sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v)
      ss += (x - mean) * (x - mean);
    out[i].mean = mean;
    out[i].stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    out[i].n = static_cast<int>(v.size());
  }
  return out;
}

const Aggregate &find_aggregate(const std::vector<Aggregate> &agg, const SweepPoint &pt, SchemeKind scheme) {
  for (const auto &a : agg)
    if (a.scheme == scheme && point_key(a.point) == point_key(pt))
      return a;
  throw std::out_of_range("no aggregate for " + std::string(to_string(scheme)) + " at this point");
}

} // namespace panoma
