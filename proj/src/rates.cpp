#include "panoma/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace panoma {

Eigen::VectorXd PrecoderSet::waveguide_power() const {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(num_waveguides());
  for (const auto &wk : w)
    p += wk.cwiseAbs2();
  return p;
}

PrecoderSet PrecoderSet::zeros(std::size_t K, std::vector<double> budget) {
  PrecoderSet p;
  const auto N = static_cast<Eigen::Index>(budget.size());
  p.w.assign(K, Eigen::VectorXcd::Zero(N));
  p.budget = std::move(budget);
  return p;
}

void NoiseSpec::validate(std::size_t K) const {
  if (sigma2.size() != K)
    throw std::invalid_argument("noise spec must list one variance per user");
  for (double s : sigma2)
    if (!(s > 0.0))
      throw std::invalid_argument("noise variances must be positive");
}

Eigen::MatrixXd gain_table(const ChannelMatrix &h, const PrecoderSet &p) {
  const auto K = h.num_users();
  if (static_cast<Eigen::Index>(p.w.size()) != K)
    throw std::invalid_argument("precoder count does not match user count");
  Eigen::MatrixXd g(K, K);
  for (Eigen::Index m = 0; m < K; ++m) {
    const Eigen::VectorXcd hm = h.user(m);
    for (Eigen::Index k = 0; k < K; ++k)
      g(m, k) = std::norm(hm.dot(p.w[static_cast<std::size_t>(k)])); // dot conjugates hm
  }
  return g;
}

namespace {

double sinr_from_gains(const Eigen::MatrixXd &g, const std::vector<double> &sigma2, int k, int m) {
  const int K = static_cast<int>(g.rows());
  double interference = 0.0;
  for (int b = k + 1; b < K; ++b)
    interference += g(m, b);
  return g(m, k) / (interference + sigma2[static_cast<std::size_t>(m)]);
}

} // namespace

double sinr(const ChannelMatrix &h, const PrecoderSet &p, const NoiseSpec &noise, int k, int m) {
  const int K = static_cast<int>(h.num_users());
  if (k < 0 || m < 0 || k >= K || m >= K)
    throw std::out_of_range("user index out of range");
  if (m < k)
    throw std::invalid_argument("decoder index precedes message index in SIC order");
  return sinr_from_gains(gain_table(h, p), noise.sigma2, k, m);
}

RateReport rate_report(const Eigen::MatrixXd &g, const std::vector<double> &sigma2) {
  const int K = static_cast<int>(g.rows());
  RateReport r;
  r.sinr = Eigen::MatrixXd::Constant(K, K, std::numeric_limits<double>::quiet_NaN());
  r.per_user_rate.assign(static_cast<std::size_t>(K), 0.0);
  r.binding_decoder.assign(static_cast<std::size_t>(K), 0);
  for (int k = 0; k < K; ++k) {
    double worst = std::numeric_limits<double>::infinity();
    int arg = k;
    for (int m = k; m < K; ++m) {
      const double s = sinr_from_gains(g, sigma2, k, m);
      r.sinr(k, m) = s;
      if (s < worst) { // strict: ties keep the smallest decoder index
        worst = s;
        arg = m;
      }
    }
    if (k == K - 1) {
      worst = r.sinr(k, k);
      arg = k;
    }
    r.binding_decoder[static_cast<std::size_t>(k)] = arg;
    r.per_user_rate[static_cast<std::size_t>(k)] = std::log2(1.0 + worst);
    r.sum_rate += r.per_user_rate[static_cast<std::size_t>(k)];
  }
  return r;
}

RateReport rate_report(const ChannelMatrix &h, const PrecoderSet &p, const NoiseSpec &noise) {
  noise.validate(static_cast<std::size_t>(h.num_users()));
  return rate_report(gain_table(h, p), noise.sigma2);
}

double user_rate(const ChannelMatrix &h, const PrecoderSet &p, const NoiseSpec &noise, int k) {
  if (k < 0 || k >= h.num_users())
    throw std::out_of_range("user index out of range");
  return rate_report(h, p, noise).per_user_rate[static_cast<std::size_t>(k)];
}

double sum_rate(const ChannelMatrix &h, const PrecoderSet &p, const NoiseSpec &noise) {
  return rate_report(h, p, noise).sum_rate;
}

bool OrderingReport::all() const {
  return std::all_of(satisfied.begin(), satisfied.end(), [](bool b) { return b; });
}

OrderingReport ordering_satisfied(const Eigen::MatrixXd &g, double tolerance) {
  const auto K = g.rows();
  OrderingReport rep;
  rep.satisfied.assign(static_cast<std::size_t>(K), true);
  rep.first_violation.assign(static_cast<std::size_t>(K), std::nullopt);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index m = 1; m < K; ++m) {
      if (g(k, m - 1) - g(k, m) < -tolerance) {
        rep.satisfied[static_cast<std::size_t>(k)] = false;
        rep.first_violation[static_cast<std::size_t>(k)] =
            std::make_pair(static_cast<int>(m - 1), static_cast<int>(m));
        break;
      }
    }
  }
  return rep;
}

OrderingReport ordering_satisfied(const ChannelMatrix &h, const PrecoderSet &p, double tolerance) {
  return ordering_satisfied(gain_table(h, p), tolerance);
}

FeasibilityReport check_gain_feasibility(const Eigen::MatrixXd &g, const PrecoderSet &p,
                                         const std::vector<double> &sigma2, double r_min) {
  const auto K = g.rows();
  FeasibilityReport rep;
  for (Eigen::Index k = 0; k < K; ++k) {
    const double s2 = sigma2[static_cast<std::size_t>(k)];
    double slack = std::numeric_limits<double>::infinity();
    for (Eigen::Index m = 1; m < K; ++m)
      slack = std::min(slack, (g(k, m - 1) - g(k, m)) / s2);
    if (K == 1)
      slack = 0.0;
    rep.c1_slack.push_back(slack);
    rep.c1_scale.push_back(std::max(1.0, g.row(k).maxCoeff() / s2));
  }
  const Eigen::VectorXd power = p.waveguide_power();
  for (std::size_t n = 0; n < p.budget.size(); ++n)
    rep.c2_slack.push_back(p.budget[n] - power(static_cast<Eigen::Index>(n)));
  const auto rates = rate_report(g, sigma2);
  for (double r : rates.per_user_rate)
    rep.c3_slack.push_back(r - r_min);
  return rep;
}

FeasibilityReport check_feasibility(const SystemGeometry &geom, const ChannelMatrix &h,
                                    const PrecoderSet &p, const NoiseSpec &noise, double r_min,
                                    double x_max) {
  noise.validate(static_cast<std::size_t>(h.num_users()));
  auto rep = check_gain_feasibility(gain_table(h, p), p, noise.sigma2, r_min);
  for (double x : geom.pin_x)
    rep.c4_slack.push_back(std::min(x, x_max - x));
  return rep;
}

bool FeasibilityReport::c1_ok(const FeasibilityTolerance &tol) const {
  for (std::size_t k = 0; k < c1_slack.size(); ++k)
    if (c1_slack[k] < -tol.gain_rel * c1_scale[k])
      return false;
  return true;
}

bool FeasibilityReport::c2_ok(const std::vector<double> &budget, const FeasibilityTolerance &tol) const {
  for (std::size_t n = 0; n < c2_slack.size(); ++n)
    if (c2_slack[n] < -tol.power_rel * budget[n] - 1e-15)
      return false;
  return true;
}

bool FeasibilityReport::c3_ok(const FeasibilityTolerance &tol) const {
  return std::all_of(c3_slack.begin(), c3_slack.end(),
                     [&](double s) { return s >= -tol.rate_abs; });
}

bool FeasibilityReport::c4_ok(const FeasibilityTolerance &tol) const {
  return std::all_of(c4_slack.begin(), c4_slack.end(),
                     [&](double s) { return s >= -tol.position_abs; });
}

bool FeasibilityReport::feasible(const std::vector<double> &budget, const FeasibilityTolerance &tol,
                                 bool require_ordering) const {
  return (!require_ordering || c1_ok(tol)) && c2_ok(budget, tol) && c3_ok(tol) && c4_ok(tol);
}

} // namespace panoma
