#pragma once

// Successive convex approximation for the two alternating blocks:
// precoders with the PA positions fixed, and PA positions with the
// precoders fixed. Both share the same rate surrogate built from slack
// variables xi (interference plus noise seen by a decoder) and r
// (1 + worst SINR of a message).

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "panoma/conic.hpp"
#include "panoma/physics.hpp"
#include "panoma/rates.hpp"

namespace panoma {

/// Affine majorant of -0.5 v^2 taken at v_ref.
double taylor_quadratic_bound(double v, double v_ref);
conic::LinExpr taylor_quadratic_bound(const conic::LinExpr &v, double v_ref);

/// First-order expansion value + slope * (x - x_ref).
struct Expansion {
  double x_ref = 0.0;
  double value = 0.0;
  double slope = 0.0;

  double at(double x) const { return value + slope * (x - x_ref); }
};

/// Expansion of sign * ln d(user k, PA on waveguide n) in the PA coordinate.
/// sign must be +1 or -1.
Expansion linearize_log_distance(const SystemGeometry &geom, std::size_t k, std::size_t n,
                                 double x_ref, int sign);

/// Expansion of ln(g) at g_ref (an upper bound since ln is concave).
Expansion linearize_log(double g_ref);

// ---------------------------------------------------------------------------
// Shared rate surrogate

/// Slack reference point. xi[k][m - k] for messages k < K-1 and decoders
/// m = k..K-1, in watts; r[k] for every user.
struct Sub1State {
  std::vector<std::vector<double>> xi;
  std::vector<double> r;
  int iteration = 0;

  /// Throws std::invalid_argument on a non-positive xi or a size mismatch.
  void validate(std::size_t K) const;
};

/// Evaluates the slack definitions at a gain table. xi is inflated by
/// (1 + padding) where that keeps every r at or above 2^r_min; r is then
/// 1 + min over decoders of gain / xi.
Sub1State slack_state(const Eigen::MatrixXd &gains, const std::vector<double> &sigma2, double r_min,
                      double padding);

/// Sum of log2 r, i.e. the surrogate objective at a reference point.
double surrogate_value(const Sub1State &s);

// ---------------------------------------------------------------------------
// Precoder subproblem

struct PrecoderProblem {
  ChannelMatrix h;
  NoiseSpec noise;
  std::vector<double> budget;
  double r_min = 0.5;
  bool enforce_ordering = true;
};

struct Sub1Program {
  conic::ConicProgram program;
  double power_ref = 1.0; // W_k = power_ref * (value of block "W<k>")
};

/// Throws std::invalid_argument when the reference is not strictly positive
/// or does not match the problem size.
Sub1Program build_subproblem1(const PrecoderProblem &pp, const Sub1State &state);

/// Reads the K precoder matrices (in watts) out of a solved program.
std::vector<Eigen::MatrixXcd> precoder_matrices(const Sub1Program &sp, const conic::SolveResult &res);

struct RankOne {
  Eigen::VectorXcd w;
  double eig_ratio = 0.0; // lambda_2 / lambda_1
  bool zero = false;      // all-zero input
};

/// w = sqrt(lambda_1) u_1. Eigenvalues down to -1e-9 are clipped to zero.
RankOne extract_rank_one(const Eigen::MatrixXcd &W, double tol_ratio = 1e-6);

struct RecoveryReport {
  std::vector<double> eig_ratio;
  bool randomized = false;
  bool feasible = false;
  double sum_rate = 0.0;
  double retention = 1.0; // sum_rate / surrogate objective
};

struct RecoveryOptions {
  double tol_ratio = 1e-6;
  int samples = 200;
  std::uint64_t seed = 0x5eed;
};

/// Turns SDR matrices into precoders. If any matrix is not numerically
/// rank one, Gaussian randomization picks the best feasible candidate.
/// Every candidate is scaled down uniformly to respect the power budgets.
PrecoderSet recover_precoders(const std::vector<Eigen::MatrixXcd> &W, const PrecoderProblem &pp,
                              double surrogate, const RecoveryOptions &opt, RecoveryReport *report = nullptr);

// ---------------------------------------------------------------------------
// Inner loops

struct IterationRecord {
  int iteration = 0;
  double surrogate = 0.0; // solver objective
  double sum_rate = 0.0;  // objective the loop accepts on
  double true_rate = 0.0; // rate on the actual channel with current precoders
  bool accepted = false;
  std::string solver_status;
  int solver_iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  double trust_radius = 0.0; // placement loop only
  double eig_ratio = 0.0;    // precoder loop only: worst lambda_2 / lambda_1
  bool randomized = false;
  double blend = 1.0; // precoder loop only: weight of the relaxed solution used
};

std::string to_json_lines(const std::vector<IterationRecord> &trace);

enum class InnerStatus { converged, max_iter, stalled, solver_failure, infeasible_start };
std::string_view to_string(InnerStatus s);

/// Solver settings for the inner loops: every candidate is re-checked on
/// the exact model, so the subproblems are solved to 1e-5 / 1e-6.
conic::SolverSettings inner_solver_settings();

struct InnerCaps {
  int t_max = 30;
  double rel_tol = 5e-4;
  double accept_tol = 1e-9;
  double init_padding = 0.05;
  double trust_radius = 2.0;
  double trust_floor = 0.01;
  double trust_cap = 16.0; // placement steps that reach the radius double it up to this
  /// solutions stopped at the iteration cap are still used when both
  /// relative residuals are below this
  double usable_residual = 1e-4;
  /// smallest weight of the relaxed solution tried when its extraction loses rate
  double min_blend = 0.1;
  RecoveryOptions recovery;
  conic::SolverSettings solver = inner_solver_settings();
};

struct Alg1Result {
  PrecoderSet precoders;
  Sub1State state;
  double sum_rate = 0.0;
  InnerStatus status = InnerStatus::max_iter;
  std::vector<IterationRecord> trace;
  bool randomized = false;
  double worst_eig_ratio = 0.0;
  double worst_retention = 1.0;
};

/// Precoder SCA from feasible starting precoders. The returned precoders are
/// the best accepted iterate (the start if nothing was accepted).
Alg1Result run_algorithm1(const PrecoderProblem &pp, const PrecoderSet &start, const InnerCaps &caps = {});

// ---------------------------------------------------------------------------
// Placement subproblem

/// Placement with the precoders fixed. Channel phases are frozen at
/// `phase_x`: the modelled coefficient on waveguide n has the magnitude of
/// the true channel at the candidate positions and the phase it had at
/// phase_x. At phase_x the model equals the true channel.
struct PlacementProblem {
  SystemGeometry geom; // pin_x is ignored; positions come from the state
  LinkModel link;
  NoiseSpec noise;
  std::vector<Eigen::MatrixXcd> W; // fixed precoder matrices (watts)
  std::vector<double> budget;
  double r_min = 0.5;
  bool enforce_ordering = true;
  std::vector<double> phase_x;
};

/// Modelled gain table at positions x.
Eigen::MatrixXd model_gains(const PlacementProblem &pp, const std::vector<double> &x);

/// Path factor eta exp(-alpha (x_i + x_q)) / (d_ki d_kq) for the pair (i, q).
double pair_path_factor(const PlacementProblem &pp, std::size_t k, std::size_t i, std::size_t q,
                        const std::vector<double> &x);

struct Sub2State {
  std::vector<double> x;
  std::vector<std::vector<double>> tau;   // [k][pair], pairs i <= q in row-major order
  std::vector<std::vector<double>> gamma; // same layout
  Sub1State slack;
  int iteration = 0;
  double trust_radius = 2.0;
};

/// Reference point at x with tau = gamma = the path factors and slack
/// definitions evaluated on the modelled gains.
Sub2State placement_state(const PlacementProblem &pp, const std::vector<double> &x, double trust_radius);

struct Sub2Program {
  conic::ConicProgram program;
};

/// Throws std::invalid_argument when the reference lies outside [0, x_max]
/// or has non-positive tau/gamma.
Sub2Program build_subproblem2(const PlacementProblem &pp, const Sub2State &state);

/// New positions from a solved placement program.
std::vector<double> placement_positions(const Sub2State &state, const Sub2Program &sp,
                                        const conic::SolveResult &res, double x_max);

struct Alg2Result {
  std::vector<double> x;
  double sum_rate = 0.0; // modelled sum-rate at x
  InnerStatus status = InnerStatus::max_iter;
  std::vector<IterationRecord> trace;
};

Alg2Result run_algorithm2(const PlacementProblem &pp, const std::vector<double> &x0, const InnerCaps &caps = {});

} // namespace panoma
