#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "panoma/harness.hpp"
#include "panoma/solver_checks.hpp"

using namespace panoma;

namespace {

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty())
      out.push_back(item);
  return out;
}

struct Common {
  std::string config;
  std::string figure;
  int seeds = 0;
  std::string out = "results";
  std::string schemes;
  int workers = 0;
};

ScenarioConfig resolve(const Common &o) {
  const std::optional<std::string> fig = o.figure.empty() ? std::nullopt : std::optional(o.figure);
  ScenarioConfig c = o.config.empty() ? ScenarioConfig::preset(fig.value_or("fig3")) : load_config(o.config, fig);
  if (o.seeds > 0)
    c.drops = o.seeds;
  if (o.workers > 0)
    c.workers = o.workers;
  if (!o.schemes.empty()) {
    c.schemes.clear();
    for (const auto &name : split_list(o.schemes)) {
      const auto k = scheme_from_string(name);
      if (!k)
        throw std::invalid_argument("unknown scheme '" + name + "'");
      c.schemes.push_back(*k);
    }
  }
  c.master_seed = effective_seed(c);
  c.validate();
  return c;
}

int cmd_run(const Common &o, bool traces) {
  const ScenarioConfig c = resolve(o);
  std::fprintf(stderr, "%zu points x %d drops x %zu schemes, %d worker(s)\n", sweep_points(c).size(), c.drops,
               c.schemes.size(), c.workers);
  const auto trials = run_sweep(c);
  emit_results(trials, o.out, traces);
  {
    std::ofstream cfg(std::filesystem::path(o.out) / "config.json");
    cfg << config_to_json(c).dump(2) << "\n";
  }
  int errors = 0;
  for (const auto &t : trials)
    if (!t.error.empty()) {
      ++errors;
      std::fprintf(stderr, "drop %d %s: %s\n", t.drop, std::string(to_string(t.scheme)).c_str(), t.error.c_str());
    }
  std::cout << aggregate_csv(aggregate(trials));
  return errors ? 2 : 0;
}

int cmd_oracle(const Common &o) {
  const ScenarioConfig c = resolve(o);
  std::vector<OracleComparison> rows;
  for (const auto &pt : sweep_points(c)) {
    if (pt.N > 2 || pt.K > 2)
      throw std::invalid_argument("oracle needs N <= 2 and K <= 2 at every sweep point");
    for (int d = 0; d < c.drops; ++d)
      rows.push_back(compare_with_oracle(c, pt, d));
  }
  std::filesystem::create_directories(o.out);
  const auto path = std::filesystem::path(o.out) / "oracle.csv";
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error("cannot open " + path.string());
  const auto text = oracle_csv(rows);
  f << text;
  std::cout << text;
  return 0;
}

int cmd_validate() {
  int failed = 0;
  for (const auto &c : conic::solver_checks()) {
    const auto o = conic::run_check(c);
    std::printf("%-16s %-5s status=%s expected=%s obj=%.9g err=%.2e iters=%d\n", c.name.c_str(), o.pass ? "ok" : "FAIL",
                std::string(conic::to_string(o.result.status)).c_str(), std::string(conic::to_string(c.expected)).c_str(),
                o.result.objective, o.error, o.result.iterations);
    failed += o.pass ? 0 : 1;
  }
  return failed ? 1 : 0;
}

void add_common(CLI::App *app, Common &o) {
  app->add_option("--config", o.config, "JSON scenario config");
  app->add_option("--figure", o.figure, "preset: fig3 or fig4")->check(CLI::IsMember({"fig3", "fig4"}));
  app->add_option("--seeds", o.seeds, "number of user drops");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--scheme", o.schemes, "comma-separated schemes");
  app->add_option("--workers", o.workers, "worker threads");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Pinching-antenna NOMA sum-rate experiments"};
  app.require_subcommand(1);

  Common run_opts, oracle_opts;
  bool no_traces = false;
  auto *run = app.add_subcommand("run", "sweep the schemes over the configured points");
  add_common(run, run_opts);
  run->add_flag("--no-traces", no_traces, "skip the per-trial JSON files");
  auto *oracle = app.add_subcommand("oracle", "compare the proposed scheme with the grid oracle");
  add_common(oracle, oracle_opts);
  auto *validate = app.add_subcommand("validate-solver", "solve the conic programs with known answers");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run)
      return cmd_run(run_opts, !no_traces);
    if (*oracle)
      return cmd_oracle(oracle_opts);
    if (*validate)
      return cmd_validate();
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
