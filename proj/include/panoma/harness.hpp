#pragma once

// Experiment harness: scenario configuration, seeded user drops, sweeps
// over (carrier, K, N, power) points, the brute-force grid oracle and
// result files.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "panoma/ao.hpp"

namespace panoma {

struct ScenarioConfig {
  std::string figure = "fig3"; // label; also selects the preset grids
  std::vector<double> f_c_ghz{6.0, 28.0};
  std::vector<int> num_users{6};
  std::vector<int> num_waveguides{2};
  std::vector<double> p_max_dbm{0.0, 5.0, 10.0, 15.0, 20.0};
  double sigma2_dbm = -90.0;
  double r_min = 0.5;
  double spacing = 10.0;
  double height = 3.0;
  double x_max = 100.0;
  double side = 100.0;
  double feed_centre_y = 50.0;
  double user_x0 = 0.0; // lower-left corner of the user square
  double user_y0 = 0.0;
  WaveguideMaterial material;
  EtaMode eta_mode = EtaMode::linear;
  std::uint64_t master_seed = 1;
  int drops = 10;
  std::vector<SchemeKind> schemes{SchemeKind::proposed, SchemeKind::ideal_pin, SchemeKind::naive_pin,
                                  SchemeKind::conventional};
  int workers = 1;
  int tau_max = 20;

  // oracle
  double oracle_step = 0.25;
  int oracle_levels = 64;

  /// Throws std::invalid_argument on empty axes or out-of-range values.
  void validate() const;

  /// Defaults for "fig3" or "fig4". Throws on any other name.
  static ScenarioConfig preset(const std::string &figure);
};

/// Preset named by the file's "figure" key (or `figure` when given), then
/// every key present in the file. Unknown keys are an error.
ScenarioConfig config_from_json(const nlohmann::json &j, const std::optional<std::string> &figure = {});
ScenarioConfig load_config(const std::filesystem::path &path, const std::optional<std::string> &figure = {});
nlohmann::json config_to_json(const ScenarioConfig &c);

/// Master seed from PANOMA_SEED when set, else the configured one.
std::uint64_t effective_seed(const ScenarioConfig &c);

/// Counter-based split: independent stream per (master, stream, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

struct SweepPoint {
  double f_c_ghz = 28.0;
  int K = 6;
  int N = 2;
  double p_max_dbm = 10.0;
};

std::vector<SweepPoint> sweep_points(const ScenarioConfig &c);

/// K users uniform over the user square, drawn in sequence from the seed:
/// every carrier, power and N sees the same users, and a drop with more
/// users extends the smaller one.
std::vector<UserPosition> draw_users(const ScenarioConfig &c, int K, std::uint64_t seed);

/// Scenario for one point and drop, users already in SIC order.
Scenario make_scenario(const ScenarioConfig &c, const SweepPoint &pt, const std::vector<UserPosition> &users);

struct TrialResult {
  SweepPoint point;
  int drop = 0;
  std::uint64_t seed = 0;
  std::vector<UserPosition> users; // SIC order
  SchemeKind scheme = SchemeKind::proposed;
  double sum_rate = 0.0; // on the scheme's evaluation channel; 0 without a feasible start
  bool feasible = false;
  std::vector<double> per_user_rate;
  std::vector<double> pin_x;
  PrecoderSet precoders;
  int iterations = 0;
  std::string status;
  std::string error; // exception text when the trial threw
  double wall_seconds = 0.0;
  AoTrace trace;
};

TrialResult run_trial(const ScenarioConfig &c, const SweepPoint &pt, int drop, SchemeKind scheme);

/// Every point x drop x scheme on a pool of c.workers threads. Results are
/// ordered by (point, drop, scheme) whatever the completion order.
std::vector<TrialResult> run_sweep(const ScenarioConfig &c);

struct Aggregate {
  SweepPoint point;
  SchemeKind scheme = SchemeKind::proposed;
  double mean = 0.0;
  double stddev = 0.0; // sample standard deviation
  int n = 0;
  int feasible = 0;
};

std::vector<Aggregate> aggregate(const std::vector<TrialResult> &trials);

/// Looks up the aggregate for a point and scheme; throws when absent.
const Aggregate &find_aggregate(const std::vector<Aggregate> &agg, const SweepPoint &pt, SchemeKind scheme);

std::string trials_csv(const std::vector<TrialResult> &trials);
std::string aggregate_csv(const std::vector<Aggregate> &agg);
nlohmann::json trial_json(const TrialResult &t);

/// trials.csv, summary.csv and traces/<point>_<drop>_<scheme>.json under dir.
/// Throws std::runtime_error naming the file on I/O failure.
void emit_results(const std::vector<TrialResult> &trials, const std::filesystem::path &dir, bool traces = true);

// ---------------------------------------------------------------------------
// Oracle

struct OracleOptions {
  double step = 0.25;
  int levels = 64;
  bool keep_grid = false;
};

struct OracleGridPoint {
  std::vector<double> pin_x;
  double best = 0.0; // best feasible sum-rate at these positions, -1 if none
};

struct OracleResult {
  double sum_rate = -1.0; // -1 when no grid point is feasible
  std::vector<double> pin_x;
  std::vector<double> split; // per waveguide, share of user 0 (K = 2) or 1 (K = 1)
  PrecoderSet precoders;
  long evaluated = 0;
  std::vector<OracleGridPoint> grid;
};

/// Exhaustive search for N <= 2, K <= 2: positions on a `step` grid over
/// [0, x_max]; on each waveguide the full budget is split between the users
/// in `levels` steps and every user's entry takes the phase of its own
/// channel. Only points meeting the ordering and minimum-rate constraints
/// count. Throws std::invalid_argument for larger instances.
OracleResult oracle_grid(const Scenario &s, const LinkModel &link, const OracleOptions &opt = {});

/// Oracle-family member closest to given precoders at positions rounded to
/// the oracle grid: phases reset to each user's own channel and the power
/// split moved to the feasible level nearest the rounded one. Returns its
/// sum-rate, or -1 when no split is feasible there.
double oracle_projection(const Scenario &s, const LinkModel &link, const std::vector<double> &pin_x,
                         const PrecoderSet &p, const OracleOptions &opt = {});

struct OracleComparison {
  SweepPoint point;
  int drop = 0;
  std::uint64_t seed = 0;
  OracleResult oracle;
  TrialResult ao;          // proposed scheme on the same drop
  double projected = -1.0; // oracle_projection of the AO solution
  double ratio = 0.0;      // AO / oracle, 0 when the oracle found nothing
};

/// Oracle and the proposed scheme on one drop. Grid settings come from the config.
OracleComparison compare_with_oracle(const ScenarioConfig &c, const SweepPoint &pt, int drop);

std::string oracle_csv(const std::vector<OracleComparison> &rows);

} // namespace panoma
