#include <cmath>
#include <random>
#include <stdexcept>

#include "sca_internal.hpp"

namespace panoma {

RankOne extract_rank_one(const Eigen::MatrixXcd &W, double tol_ratio) {
  (void)tol_ratio;
  if (W.rows() != W.cols())
    throw std::invalid_argument("rank-one extraction needs a square matrix");
  const auto n = W.rows();
  RankOne out;
  out.w = Eigen::VectorXcd::Zero(n);
  if (n == 0 || W.cwiseAbs().maxCoeff() == 0.0) {
    out.zero = true;
    return out;
  }
  const Eigen::MatrixXcd H = 0.5 * (W + W.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0); // ascending
  const double l1 = lam(n - 1);
  if (!(l1 > 0.0)) {
    out.zero = true;
    return out;
  }
  out.eig_ratio = n > 1 ? lam(n - 2) / l1 : 0.0;
  Eigen::VectorXcd u = es.eigenvectors().col(n - 1);
  // fix the global phase: largest entry real and positive
  Eigen::Index big = 0;
  u.cwiseAbs().maxCoeff(&big);
  u *= std::polar(1.0, -std::arg(u(big)));
  out.w = std::sqrt(l1) * u;
  return out;
}

namespace {

struct Candidate {
  PrecoderSet p;
  bool feasible = false;
  double rate = 0.0;
};

Candidate evaluate(std::vector<Eigen::VectorXcd> w, const PrecoderProblem &pp) {
  Candidate c;
  c.p.w = std::move(w);
  c.p.budget = pp.budget;
  const Eigen::VectorXd power = c.p.waveguide_power();
  double scale = 1.0;
  for (Eigen::Index n = 0; n < power.size(); ++n)
    if (power(n) > pp.budget[static_cast<std::size_t>(n)])
      scale = std::min(scale, std::sqrt(pp.budget[static_cast<std::size_t>(n)] / power(n)));
  if (scale < 1.0)
    for (auto &wk : c.p.w)
      wk *= scale;
  const Eigen::MatrixXd g = gain_table(pp.h, c.p);
  const auto rep = check_gain_feasibility(g, c.p, pp.noise.sigma2, pp.r_min);
  c.feasible = rep.feasible(pp.budget, {}, pp.enforce_ordering);
  c.rate = rate_report(g, pp.noise.sigma2).sum_rate;
  return c;
}

} // namespace

PrecoderSet recover_precoders(const std::vector<Eigen::MatrixXcd> &W, const PrecoderProblem &pp, double surrogate,
                              const RecoveryOptions &opt, RecoveryReport *report) {
  const std::size_t K = W.size();
  std::vector<RankOne> dom;
  dom.reserve(K);
  bool need_random = false;
  for (const auto &Wk : W) {
    dom.push_back(extract_rank_one(Wk, opt.tol_ratio));
    need_random = need_random || dom.back().eig_ratio > opt.tol_ratio;
  }
  std::vector<Eigen::VectorXcd> w0;
  for (const auto &d : dom)
    w0.push_back(d.w);
  Candidate best = evaluate(w0, pp);

  if (need_random) {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    std::vector<Eigen::MatrixXcd> factor(K);
    for (std::size_t k = 0; k < K; ++k) {
      if (dom[k].eig_ratio <= opt.tol_ratio)
        continue;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (W[k] + W[k].adjoint()));
      factor[k] = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }
    for (int s = 0; s < opt.samples; ++s) {
      std::vector<Eigen::VectorXcd> w = w0;
      for (std::size_t k = 0; k < K; ++k) {
        if (factor[k].size() == 0)
          continue;
        Eigen::VectorXcd g(factor[k].cols());
        for (auto &v : g)
          v = {normal(rng), normal(rng)};
        w[k] = factor[k] * g;
      }
      Candidate c = evaluate(std::move(w), pp);
      if ((c.feasible && !best.feasible) || (c.feasible == best.feasible && c.rate > best.rate))
        best = std::move(c);
    }
  }

  if (report) {
    report->eig_ratio.clear();
    for (const auto &d : dom)
      report->eig_ratio.push_back(d.eig_ratio);
    report->randomized = need_random;
    report->feasible = best.feasible;
    report->sum_rate = best.rate;
    report->retention = surrogate > 0.0 ? best.rate / surrogate : 1.0;
  }
  return best.p;
}

} // namespace panoma
