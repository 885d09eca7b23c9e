#pragma once

// Alternating optimisation of precoders and PA positions, and the four
// schemes compared in the experiments.

#include <optional>
#include <string>
#include <vector>

#include "panoma/physics.hpp"
#include "panoma/rates.hpp"
#include "panoma/sca.hpp"

namespace panoma {

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

/// One drop: geometry (pin_x ignored), carrier, guide material and budgets.
/// Users must already be in their SIC order (ascending channel strength).
struct Scenario {
  SystemGeometry geom;
  double f_c = 28e9;
  WaveguideMaterial material;
  EtaMode eta_mode = EtaMode::linear;
  NoiseSpec noise;
  std::vector<double> budget; // P_n^max, watts
  double r_min = 0.5;

  void validate() const;
  std::size_t num_users() const { return geom.num_users(); }
  std::size_t num_waveguides() const { return geom.num_waveguides(); }
};

/// Reorders users by ascending lossless channel norm with every PA at
/// `pin_x`; returns the permutation applied (new index -> old index).
std::vector<std::size_t> sort_users_by_strength(Scenario &s, const std::vector<double> &pin_x);

/// Median user x clipped to [0, x_max], repeated for every waveguide.
std::vector<double> initial_positions(const Scenario &s);

enum class SchemeKind { proposed, ideal_pin, naive_pin, conventional };
std::string_view to_string(SchemeKind k);
std::optional<SchemeKind> scheme_from_string(std::string_view s);

struct InitResult {
  std::vector<double> pin_x;
  PrecoderSet precoders;
  bool feasible = false;
  double sum_rate = 0.0;
  double ladder_ratio = 0.0;
};

/// Constructive point at given positions: every user shares a direction
/// matched to one user's channel phases, with geometric power shares rho^k.
/// All reference users and 40 values of rho are tried; the best feasible
/// sum-rate wins, else the largest worst-case minimum-rate slack.
InitResult constructive_precoders(const ChannelMatrix &h, const Scenario &s, const std::vector<double> &pin_x);

/// Best constructive point over common positions: initial_positions, a
/// 21-point grid over [0, x_max] and every user's x. Feasible points rank by
/// sum-rate; with none feasible the initial_positions point is returned.
InitResult init_scenario(const Scenario &s, const LinkModel &link);

struct HalfStep {
  int outer = 0;
  std::string kind; // "init", "precoder", "placement"
  double sum_rate = 0.0;
  bool accepted = false;
  int inner_iterations = 0;
  std::string inner_status;
};

struct AoCaps {
  int tau_max = 20;
  double rel_tol = 1e-3;
  double accept_tol = 1e-9;
  int backtracks = 3;
  InnerCaps inner;
};

struct AoTrace {
  std::vector<HalfStep> steps;
  std::vector<double> accepted_rates; // one per accepted outer iteration, starting with the first precoder fit
  std::vector<double> pin_x;
  PrecoderSet precoders;
  double sum_rate = 0.0;
  int outer_iterations = 0;
  std::string status;
  bool randomized = false;
  double worst_eig_ratio = 0.0;
  std::vector<IterationRecord> inner_trace; // concatenated inner-loop records
};

/// Alternates the precoder and placement loops on `link`. `enforce_ordering`
/// toggles the channel-ordering rows in both subproblems.
AoTrace run_ao(const Scenario &s, const LinkModel &link, bool enforce_ordering, const AoCaps &caps = {});

struct SchemeResult {
  SchemeKind kind = SchemeKind::proposed;
  double sum_rate = 0.0;          // evaluated on the scheme's evaluation channel
  double internal_sum_rate = 0.0; // on the channel the optimiser used
  std::vector<double> per_user_rate;
  std::vector<double> pin_x;
  PrecoderSet precoders;
  bool feasible = false;
  int iterations = 0;
  std::string status;
  AoTrace trace;
};

SchemeResult run_scheme(const Scenario &s, SchemeKind kind, const AoCaps &caps = {});

/// Channel a scheme is scored on. pin_x is ignored for the fixed array.
ChannelMatrix evaluation_channel(const Scenario &s, SchemeKind kind, const std::vector<double> &pin_x);

} // namespace panoma
