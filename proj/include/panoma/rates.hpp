#pragma once

// NOMA downlink rates under successive interference cancellation.
//
// Users are indexed 0..K-1 in ascending channel strength; user m decodes and
// cancels the messages of every user b < m before decoding its own, and
// treats messages b > m as interference. All indices here are zero-based.

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "panoma/physics.hpp"

namespace panoma {

struct PrecoderSet {
  std::vector<Eigen::VectorXcd> w;                  // K vectors of length N
  std::optional<std::vector<Eigen::MatrixXcd>> W;   // SDR form, K Hermitian N x N
  std::vector<double> budget;                       // P_n^max (W), length N

  std::size_t num_users() const { return w.size(); }
  Eigen::Index num_waveguides() const { return budget.empty() ? 0 : static_cast<Eigen::Index>(budget.size()); }

  /// Sum over users of |w_{k,n}|^2 for every waveguide n.
  Eigen::VectorXd waveguide_power() const;

  /// Zero precoders for K users on N waveguides.
  static PrecoderSet zeros(std::size_t K, std::vector<double> budget);
};

struct NoiseSpec {
  std::vector<double> sigma2; // per-user noise variance (W)

  static NoiseSpec uniform(std::size_t K, double sigma2) { return {std::vector<double>(K, sigma2)}; }
  void validate(std::size_t K) const;
};

/// |h_m^H w_k|^2 for every receiver m (row) and message k (column).
Eigen::MatrixXd gain_table(const ChannelMatrix &h, const PrecoderSet &p);

struct RateReport {
  Eigen::MatrixXd sinr;            // (k, m) = SINR of message k at decoder m, m >= k; NaN below
  std::vector<double> per_user_rate;
  double sum_rate = 0.0;
  std::vector<int> binding_decoder; // argmin decoder per message (K-1 maps to itself)
};

/// SINR at decoder m for the message of user k. Throws std::invalid_argument
/// when m < k since that decoder never sees message k.
double sinr(const ChannelMatrix &h, const PrecoderSet &p, const NoiseSpec &noise, int k, int m);

double user_rate(const ChannelMatrix &h, const PrecoderSet &p, const NoiseSpec &noise, int k);

double sum_rate(const ChannelMatrix &h, const PrecoderSet &p, const NoiseSpec &noise);

/// Full table. Works from a precomputed gain table so callers that model the
/// gains differently (the placement surrogate) share the same rate logic.
RateReport rate_report(const Eigen::MatrixXd &gains, const std::vector<double> &sigma2);
RateReport rate_report(const ChannelMatrix &h, const PrecoderSet &p, const NoiseSpec &noise);

struct OrderingReport {
  std::vector<bool> satisfied;                                 // per receiver
  std::vector<std::optional<std::pair<int, int>>> first_violation; // (m-1, m) pair
  bool all() const;
};

/// Checks |h_k^H w_0|^2 >= ... >= |h_k^H w_{K-1}|^2 for each receiver k, up to
/// an additive tolerance on the gains.
OrderingReport ordering_satisfied(const ChannelMatrix &h, const PrecoderSet &p, double tolerance);
OrderingReport ordering_satisfied(const Eigen::MatrixXd &gains, double tolerance);

/// Feasibility tolerances. Gains are compared in units of the receiver's
/// noise power and relative to its largest gain, powers relative to budget.
struct FeasibilityTolerance {
  double gain_rel = 1e-6;
  double power_rel = 1e-7;
  double rate_abs = 1e-6;
  double position_abs = 1e-9;
};

struct FeasibilityReport {
  std::vector<double> c1_slack; // per receiver: min_m gain(m-1) - gain(m), in noise units
  std::vector<double> c1_scale; // per receiver: largest gain in noise units (>= 1)
  std::vector<double> c2_slack; // per waveguide: P_n^max - power (W)
  std::vector<double> c3_slack; // per user: R_k - R_min (bit/s/Hz)
  std::vector<double> c4_slack; // per waveguide: min(x, x_max - x) (m)

  bool c1_ok(const FeasibilityTolerance &tol = {}) const;
  bool c2_ok(const std::vector<double> &budget, const FeasibilityTolerance &tol = {}) const;
  bool c3_ok(const FeasibilityTolerance &tol = {}) const;
  bool c4_ok(const FeasibilityTolerance &tol = {}) const;
  bool feasible(const std::vector<double> &budget, const FeasibilityTolerance &tol = {},
                bool require_ordering = true) const;
};

FeasibilityReport check_feasibility(const SystemGeometry &geom, const ChannelMatrix &h,
                                    const PrecoderSet &p, const NoiseSpec &noise, double r_min,
                                    double x_max);

/// Same report from a gain table; c4 is left empty.
FeasibilityReport check_gain_feasibility(const Eigen::MatrixXd &gains, const PrecoderSet &p,
                                         const std::vector<double> &sigma2, double r_min);

} // namespace panoma
