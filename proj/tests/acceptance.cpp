// Acceptance runner: one PASS/FAIL line per criterion.
//
//   panoma_acceptance [--full] [--only 1,4,7] [--out DIR]
//
// The default is the smoke scale (fig3 with 10 drops, fig4 with 5 drops);
// --full runs 50 and 25 drops.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "panoma/harness.hpp"
#include "panoma/sca.hpp"
#include "panoma/solver_checks.hpp"
#include "support.hpp"

using namespace panoma;

namespace {

struct Options {
  bool full = false;
  std::filesystem::path out = "acceptance_out";
  int workers = 1;
};

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::vector<Eigen::MatrixXcd> outer_products(const PrecoderSet &p) {
  std::vector<Eigen::MatrixXcd> W;
  for (const auto &w : p.w)
    W.push_back(w * w.adjoint());
  return W;
}

Eigen::MatrixXd relaxed_gains(const ChannelMatrix &h, const std::vector<Eigen::MatrixXcd> &W) {
  Eigen::MatrixXd g(h.num_users(), static_cast<Eigen::Index>(W.size()));
  for (Eigen::Index m = 0; m < h.num_users(); ++m) {
    const Eigen::VectorXcd hm = h.user(m);
    for (std::size_t k = 0; k < W.size(); ++k)
      g(m, static_cast<Eigen::Index>(k)) = (hm.adjoint() * W[k] * hm)(0, 0).real();
  }
  return g;
}

// ---------------------------------------------------------------------------

Verdict physics(const Options &) {
  // arbitrary-precision values from tests/oracles/physics_values.py
  const auto ptfe = WaveguideMaterial::ptfe();
  const double a28 = attenuation_constant(ptfe, PhysicalConstants::at(28e9, ptfe.eta_eff));
  const double a6 = attenuation_constant(ptfe, PhysicalConstants::at(6e9, ptfe.eta_eff));
  bool ok = std::abs(a28 - 0.0868) <= 0.001 && std::abs(a6 - 0.0186) <= 0.0005;
  ok = ok && rel(a28, 0.086785695275182317291) < 1e-12 && rel(a6, 0.018596934701824782277) < 1e-12;

  double worst = 0.0;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 100.0);
  for (double f : {6e9, 15e9, 28e9}) {
    const auto pc = PhysicalConstants::at(f, ptfe.eta_eff);
    const double a = attenuation_constant(ptfe, pc);
    for (int i = 0; i < 200; ++i) {
      SystemGeometry g;
      g.feed_y = {45.0, 55.0};
      g.pin_x = {U(rng), U(rng)};
      g.users = {{U(rng), U(rng)}};
      for (std::size_t n = 0; n < 2; ++n) {
        const double lossy = std::norm(channel_coefficient(g, ptfe, pc, 0, n, false));
        const double clean = std::norm(channel_coefficient(g, ptfe, pc, 0, n, true));
        worst = std::max(worst, rel(lossy / clean, std::exp(-2.0 * a * g.pin_x[n])));
      }
    }
  }
  ok = ok && worst < 1e-12;
  return {ok, fmt("alpha(28 GHz)=%.6f alpha(6 GHz)=%.6f Np/m, loss ratio max rel err %.2e", a28, a6, worst)};
}

Verdict rate_engine(const Options &) {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int K = 1 + i % 4, N = 1 + (i / 4) % 3;
    const auto r = testing::random_instance(rng, K, N);
    worst = std::max(worst, rel(sum_rate(r.h, r.p, r.noise), testing::brute_force_sum_rate(r.hv, r.wv, r.noise.sigma2)));
  }
  return {worst < 1e-10, fmt("200 instances, max rel err %.2e", worst)};
}

Verdict solver_battery(const Options &) {
  using namespace conic;
  const auto checks = solver_checks();
  int passed = 0, certified = 0;
  std::string failed;
  for (const auto &c : checks) {
    const auto o = run_check(c, 1e-6);
    bool ok = o.pass;
    if (ok && c.expected != SolveStatus::optimal) {
      const auto sf = to_standard_form(c.program);
      const auto &r = o.result;
      if (c.expected == SolveStatus::infeasible) {
        const Eigen::Map<const Eigen::VectorXd> y(r.y.data(), static_cast<Eigen::Index>(r.y.size()));
        std::vector<double> yd(r.y);
        project_cone(sf.cones, yd, true);
        ok = (sf.A.transpose() * y).norm() < 1e-6 * y.norm() && sf.b.dot(y) < 0.0 &&
             (Eigen::Map<Eigen::VectorXd>(yd.data(), y.size()) - y).norm() < 1e-6 * y.norm();
      } else {
        const Eigen::Map<const Eigen::VectorXd> x(r.x.data(), static_cast<Eigen::Index>(r.x.size()));
        const Eigen::Map<const Eigen::VectorXd> s(r.s.data(), static_cast<Eigen::Index>(r.s.size()));
        std::vector<double> sp(r.s);
        project_cone(sf.cones, sp, false);
        ok = (sf.A * x + s).norm() < 1e-6 * x.norm() && sf.c.dot(x) < 0.0 &&
             (Eigen::Map<Eigen::VectorXd>(sp.data(), s.size()) - s).norm() < 1e-6 * std::max(1.0, s.norm());
      }
      certified += ok;
    }
    if (ok)
      ++passed;
    else
      failed += " " + c.name;
  }
  const int n = static_cast<int>(checks.size());
  return {n >= 12 && passed == n && certified >= 2,
          fmt("%d/%d problems, %d certificates verified%s", passed, n, certified,
              failed.empty() ? "" : (", failed:" + failed).c_str())};
}

Verdict sca_properties(const Options &) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(-50.0, 50.0), L(-8.0, 8.0);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const double v = U(rng), r = U(rng);
    if (taylor_quadratic_bound(v, r) < -0.5 * v * v - 1e-12 * std::max(1.0, 0.5 * v * v))
      ++violations;
    const double g = std::exp(L(rng)), gr = std::exp(L(rng));
    if (linearize_log(gr).at(g) < std::log(g) - 1e-12 * std::max(1.0, std::abs(std::log(g))))
      ++violations;
  }

  // slopes against a fourth-order central difference
  double slope_err = 0.0;
  std::uniform_real_distribution<double> P(0.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    SystemGeometry g;
    g.feed_y = {45.0};
    g.pin_x = {0.0};
    g.users = {{P(rng), P(rng)}};
    const double x = P(rng), h = 1e-3;
    const int sign = i % 2 ? 1 : -1;
    auto f = [&](double t) { return sign * std::log(user_pa_distance(g, 0, 0, t)); };
    const double fd = (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
    const auto e = linearize_log_distance(g, 0, 0, x, sign);
    const double scale = std::max(std::abs(fd), 1.0 / user_pa_distance(g, 0, 0, x));
    slope_err = std::max(slope_err, std::abs(e.slope - fd) / scale);
    const double gr = std::exp(L(rng));
    const double lfd = (-std::log(gr + 2 * h * gr) + 8 * std::log(gr + h * gr) - 8 * std::log(gr - h * gr) +
                        std::log(gr - 2 * h * gr)) /
                       (12 * h * gr);
    slope_err = std::max(slope_err, rel(linearize_log(gr).slope, lfd));
  }

  // accepted iterates of both inner loops on 100 seeded drops
  int instances = 0, regressions = 0, skipped = 0;
  double worst_drop = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int K = 1 + i % 3, N = 1 + (i / 3) % 2;
    const double f = i % 2 ? 6.0 : 28.0, p = 5.0 * (i % 5);
    const Scenario s = testing::small_scenario(1000 + static_cast<std::uint64_t>(i), K, N, f, p);
    const auto link = LinkModel::make(s.f_c, s.material, false, s.eta_mode);
    const auto init = init_scenario(s, link);
    if (!init.feasible) {
      ++skipped;
      continue;
    }
    ++instances;
    SystemGeometry g = s.geom;
    g.pin_x = init.pin_x;
    const auto a1 = run_algorithm1({link.channel(g), s.noise, s.budget, s.r_min, true}, init.precoders);
    double prev = init.sum_rate;
    for (const auto &r : a1.trace)
      if (r.accepted) {
        worst_drop = std::max(worst_drop, prev - r.sum_rate);
        regressions += r.sum_rate < prev - 1e-6;
        prev = r.sum_rate;
      }
    const PlacementProblem pp{s.geom, link, s.noise, outer_products(a1.precoders), s.budget, s.r_min, true,
                              init.pin_x};
    const auto a2 = run_algorithm2(pp, init.pin_x);
    prev = rate_report(model_gains(pp, init.pin_x), s.noise.sigma2).sum_rate;
    for (const auto &r : a2.trace)
      if (r.accepted) {
        worst_drop = std::max(worst_drop, prev - r.sum_rate);
        regressions += r.sum_rate < prev - 1e-6;
        prev = r.sum_rate;
      }
  }
  const bool ok = violations == 0 && slope_err < 1e-6 && regressions == 0 && instances >= 90;
  return {ok, fmt("%d majorant violations in 2e4 points, slope rel err %.2e, %d instances (%d without a feasible "
                  "start), %d regressions, largest accepted drop %.2e",
                  violations, slope_err, instances, skipped, regressions, worst_drop)};
}

Verdict rank_one(const Options &) {
  int solves = 0, randomized = 0, below = 0;
  double min_ret = 1e300, sum_ret = 0.0, max_eig = 0.0, sum_eig = 0.0;
  for (int i = 0; solves < 50 && i < 200; ++i) {
    const int K = 2 + i % 3, N = 2 + (i / 3) % 3;
    const Scenario s = testing::small_scenario(5000 + static_cast<std::uint64_t>(i), K, N, i % 2 ? 6.0 : 28.0,
                                               5.0 * (i % 5));
    const auto link = LinkModel::make(s.f_c, s.material, false, s.eta_mode);
    const auto init = init_scenario(s, link);
    if (!init.feasible)
      continue;
    SystemGeometry g = s.geom;
    g.pin_x = init.pin_x;
    const PrecoderProblem pp{link.channel(g), s.noise, s.budget, s.r_min, true};
    const auto ref = slack_state(gain_table(pp.h, init.precoders), s.noise.sigma2, s.r_min, 0.05);
    const auto sp = build_subproblem1(pp, ref);
    const auto res = conic::solve(sp.program, inner_solver_settings());
    if (!res.ok())
      continue;
    ++solves;
    const auto W = precoder_matrices(sp, res);
    const double implied = rate_report(relaxed_gains(pp.h, W), s.noise.sigma2).sum_rate;
    RecoveryReport rep;
    const auto p = recover_precoders(W, pp, res.objective, RecoveryOptions{}, &rep);
    const double kept = sum_rate(pp.h, p, s.noise) / implied;
    min_ret = std::min(min_ret, kept);
    sum_ret += kept;
    below += kept < 0.99;
    randomized += rep.randomized;
    const double e = *std::max_element(rep.eig_ratio.begin(), rep.eig_ratio.end());
    max_eig = std::max(max_eig, e);
    sum_eig += e;
  }
  return {solves == 50 && below == 0,
          fmt("%d solves, retention min %.4f mean %.4f (%d below 0.99), worst eig ratio max %.3e mean %.3e, "
              "randomization used %d times",
              solves, min_ret, sum_ret / std::max(solves, 1), below, max_eig, sum_eig / std::max(solves, 1),
              randomized)};
}

Verdict oracle_gap(const Options &o) {
  ScenarioConfig c = ScenarioConfig::preset("fig3");
  c.master_seed = 4242;
  std::vector<OracleComparison> rows;
  for (int d = 0; d < 20; ++d) {
    c.oracle_step = 0.25;
    c.oracle_levels = 64;
    rows.push_back(compare_with_oracle(c, {d % 2 ? 6.0 : 28.0, 2, 1, 10.0}, d));
  }
  for (int d = 0; d < 5; ++d) {
    c.oracle_step = 1.0;
    c.oracle_levels = 32;
    rows.push_back(compare_with_oracle(c, {d % 2 ? 6.0 : 28.0, 2, 2, 10.0}, d));
  }
  std::filesystem::create_directories(o.out);
  std::ofstream(o.out / "oracle.csv") << oracle_csv(rows);

  int valid = 0, close = 0, exceed = 0;
  double min_ratio = 1e300, max_ratio = 0.0;
  for (const auto &r : rows) {
    if (r.oracle.sum_rate <= 0.0)
      continue;
    ++valid;
    close += r.ratio >= 0.95;
    min_ratio = std::min(min_ratio, r.ratio);
    max_ratio = std::max(max_ratio, r.ratio);
    // AO may beat the grid only by what projecting it onto the grid costs
    const double allowed =
        r.projected >= 0.0 ? std::max(r.ao.sum_rate - r.projected, 0.0) : 0.01 * r.oracle.sum_rate;
    exceed += r.ao.sum_rate - r.oracle.sum_rate > allowed + 1e-9;
  }
  const bool ok = valid == 25 && close >= 0.8 * valid && exceed == 0;
  return {ok, fmt("%d/%d instances with an oracle point, %d at >= 95%% of it, AO/oracle in [%.4f, %.4f], %d beyond "
                  "projection tolerance",
                  valid, static_cast<int>(rows.size()), close, min_ratio, max_ratio, exceed)};
}

std::vector<TrialResult> sweep_to(const ScenarioConfig &c, const std::filesystem::path &dir) {
  auto trials = run_sweep(c);
  emit_results(trials, dir, false);
  std::ofstream(dir / "config.json") << config_to_json(c).dump(2) << '\n';
  return trials;
}

Verdict fig3(const Options &o) {
  ScenarioConfig c = ScenarioConfig::preset("fig3");
  c.drops = o.full ? 50 : 10;
  c.workers = o.workers;
  const auto agg = aggregate(sweep_to(c, o.out / "fig3"));
  auto mean = [&](double f, double p, SchemeKind k) { return find_aggregate(agg, {f, 6, 2, p}, k).mean; };

  bool monotone = true, upper = true, naive = true, conventional = true;
  std::string conv_miss;
  for (double f : c.f_c_ghz)
    for (std::size_t i = 0; i < c.p_max_dbm.size(); ++i) {
      const double p = c.p_max_dbm[i];
      for (auto k : c.schemes)
        if (i > 0 && mean(f, p, k) < mean(f, c.p_max_dbm[i - 1], k))
          monotone = false;
      upper = upper && mean(f, p, SchemeKind::ideal_pin) >= mean(f, p, SchemeKind::proposed);
      naive = naive && mean(f, p, SchemeKind::proposed) >= mean(f, p, SchemeKind::naive_pin);
      const double gap = mean(f, p, SchemeKind::proposed) - mean(f, p, SchemeKind::conventional);
      if (gap < 0.0) {
        conventional = false;
        conv_miss += fmt(" %g GHz/%g dBm (%+.3f)", f, p, gap);
      }
    }
  double gap6 = 0.0, gap28 = 0.0;
  for (double p : c.p_max_dbm) {
    gap6 += mean(6.0, p, SchemeKind::proposed) - mean(6.0, p, SchemeKind::naive_pin);
    gap28 += mean(28.0, p, SchemeKind::proposed) - mean(28.0, p, SchemeKind::naive_pin);
  }
  gap6 /= static_cast<double>(c.p_max_dbm.size());
  gap28 /= static_cast<double>(c.p_max_dbm.size());
  const bool gap_ok = gap28 > gap6;
  auto yn = [](bool b) { return b ? "yes" : "no"; };
  return {monotone && upper && naive && conventional && gap_ok,
          fmt("%d drops: monotone in P %s, ideal>=proposed %s, proposed>=naive %s, proposed>=conventional %s%s, "
              "mean naive gap 6 GHz %.3f vs 28 GHz %.3f",
              c.drops, yn(monotone), yn(upper), yn(naive), yn(conventional),
              conv_miss.empty() ? "" : (" (short at" + conv_miss + ")").c_str(), gap6, gap28)};
}

Verdict fig4(const Options &o) {
  ScenarioConfig c = ScenarioConfig::preset("fig4");
  c.drops = o.full ? 25 : 5;
  c.workers = o.workers;
  const auto agg = aggregate(sweep_to(c, o.out / "fig4"));
  auto mean = [&](int K, int N) { return find_aggregate(agg, {28.0, K, N, 15.0}, SchemeKind::proposed).mean; };

  bool monotone = true, saturates = true, more_users = true;
  std::string curve;
  for (int K : c.num_users) {
    curve += fmt(" K=%d:", K);
    for (std::size_t i = 0; i < c.num_waveguides.size(); ++i) {
      const int N = c.num_waveguides[i];
      curve += fmt(" %.3f", mean(K, N));
      if (i > 0 && mean(K, N) < mean(K, c.num_waveguides[i - 1]))
        monotone = false;
    }
    saturates = saturates && mean(K, 8) - mean(K, 6) < mean(K, 4) - mean(K, 2);
  }
  for (int N : c.num_waveguides)
    more_users = more_users && mean(6, N) >= mean(4, N);
  auto yn = [](bool b) { return b ? "yes" : "no"; };
  return {monotone && saturates && more_users,
          fmt("%d drops, proposed means%s; nondecreasing in N %s, 6->8 step below 2->4 step %s, K=6>=K=4 %s",
              c.drops, curve.c_str(), yn(monotone), yn(saturates), yn(more_users))};
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict reproducibility(const Options &o) {
  ScenarioConfig c = ScenarioConfig::preset("fig3");
  c.num_users = {4};
  c.p_max_dbm = {0.0, 20.0};
  c.drops = 2;
  c.master_seed = 31337;
  const auto a = o.out / "repro_a", b = o.out / "repro_b";
  c.workers = 1;
  sweep_to(c, a);
  c.workers = std::max(2, o.workers);
  sweep_to(c, b);
  int same = 0, files = 0;
  for (const char *f : {"trials.csv", "summary.csv"}) {
    ++files;
    const auto x = slurp(a / f), y = slurp(b / f);
    same += !x.empty() && x == y;
  }
  ScenarioConfig oc = ScenarioConfig::preset("fig3");
  oc.oracle_step = 1.0;
  auto oracle_rows = [&] { return oracle_csv({compare_with_oracle(oc, {6.0, 2, 1, 10.0}, 0)}); };
  ++files;
  same += oracle_rows() == oracle_rows();
  return {same == files, fmt("%d/%d result files byte-identical across reruns (1 vs %d workers)", same, files,
                             c.workers)};
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"acceptance checks"};
  Options opt;
  std::string only;
  app.add_flag("--full", opt.full, "full drop counts instead of the smoke scale");
  app.add_option("--only", only, "comma-separated criterion numbers");
  app.add_option("--out", opt.out, "directory for sweep outputs");
  opt.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--workers", opt.workers, "sweep threads");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected;
  std::stringstream ss(only);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty())
      selected.insert(std::stoi(tok));

  const std::vector<std::pair<std::string, std::function<Verdict(const Options &)>>> criteria{
      {"physics", physics},
      {"rate engine", rate_engine},
      {"conic solver", solver_battery},
      {"sca properties", sca_properties},
      {"rank-one recovery", rank_one},
      {"oracle gap", oracle_gap},
      {"power sweep", fig3},
      {"antenna sweep", fig4},
      {"reproducibility", reproducibility},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id))
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second(opt);
    } catch (const std::exception &e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.pass;
    std::printf("C%d %s %s: %s [%.1f s]\n", id, v.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), v.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
