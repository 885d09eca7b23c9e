#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sca_internal.hpp"

namespace panoma {

namespace {

std::string w_name(std::size_t k) { return "W" + std::to_string(k); }

} // namespace

Sub1Program build_subproblem1(const PrecoderProblem &pp, const Sub1State &state) {
  const auto K = static_cast<std::size_t>(pp.h.num_users());
  const auto N = static_cast<int>(pp.h.num_waveguides());
  if (K == 0 || N == 0)
    throw std::invalid_argument("precoder subproblem needs at least one user and one waveguide");
  if (pp.budget.size() != static_cast<std::size_t>(N))
    throw std::invalid_argument("one power budget per waveguide expected");
  pp.noise.validate(K);
  state.validate(K);

  Sub1Program out;
  out.power_ref = *std::max_element(pp.budget.begin(), pp.budget.end());
  if (!(out.power_ref > 0.0))
    throw std::invalid_argument("power budgets must be positive");

  conic::ProgramBuilder pb("precoder-sca");
  std::vector<int> Wb;
  for (std::size_t k = 0; k < K; ++k)
    Wb.push_back(pb.add_hermitian(w_name(k), N));

  std::vector<Eigen::MatrixXcd> H(K);
  std::vector<double> hnorm2(K);
  for (std::size_t k = 0; k < K; ++k) {
    const Eigen::VectorXcd hk = pp.h.user(static_cast<Eigen::Index>(k));
    H[k] = hk * hk.adjoint();
    hnorm2[k] = hk.squaredNorm();
  }

  for (std::size_t k = 0; k < K; ++k)
    pb.add_hermitian_psd(Wb[k], "psd_" + std::to_string(k));
  for (int n = 0; n < N; ++n) {
    conic::LinExpr used;
    for (std::size_t k = 0; k < K; ++k)
      used += pb.re(Wb[k], n, n);
    pb.add_nonneg(conic::LinExpr(pp.budget[static_cast<std::size_t>(n)] / out.power_ref) - used,
                  "power_" + std::to_string(n));
  }
  if (pp.enforce_ordering) {
    for (std::size_t k = 0; k < K; ++k) {
      if (!(hnorm2[k] > 0.0))
        continue;
      for (std::size_t m = 1; m < K; ++m)
        pb.add_nonneg((pb.trace_product(Wb[m - 1], H[k]) - pb.trace_product(Wb[m], H[k])) * (1.0 / hnorm2[k]),
                      "order_" + std::to_string(k) + "_" + std::to_string(m));
    }
  }

  const auto &s2 = pp.noise.sigma2;
  const double pref = out.power_ref;
  auto gain = [&](int m, int k) {
    return pb.trace_product(Wb[static_cast<std::size_t>(k)], H[static_cast<std::size_t>(m)]) *
           (pref / s2[static_cast<std::size_t>(m)]);
  };
  const conic::LinExpr obj = detail::add_rate_surrogate(pb, static_cast<int>(K), state, s2, pp.r_min, gain, gain);
  pb.maximize(obj);
  out.program = pb.build();
  return out;
}

std::vector<Eigen::MatrixXcd> precoder_matrices(const Sub1Program &sp, const conic::SolveResult &res) {
  std::vector<Eigen::MatrixXcd> W;
  for (std::size_t k = 0;; ++k) {
    const auto name = w_name(k);
    const auto &blocks = sp.program.blocks();
    const auto it = std::find_if(blocks.begin(), blocks.end(), [&](const conic::VarBlock &b) { return b.name == name; });
    if (it == blocks.end())
      break;
    const auto v = res.values(sp.program, name);
    if (v.empty())
      throw std::invalid_argument("solve result carries no primal values");
    W.push_back(conic::hermitian_from_values(v, it->dim) * sp.power_ref);
  }
  return W;
}

Alg1Result run_algorithm1(const PrecoderProblem &pp, const PrecoderSet &start, const InnerCaps &caps) {
  Alg1Result out;
  out.precoders = start;
  const auto &s2 = pp.noise.sigma2;
  Eigen::MatrixXd g = gain_table(pp.h, start);
  out.sum_rate = rate_report(g, s2).sum_rate;
  if (!check_gain_feasibility(g, start, s2, pp.r_min).feasible(pp.budget, {}, pp.enforce_ordering)) {
    out.status = InnerStatus::infeasible_start;
    out.state = slack_state(g, s2, pp.r_min, 0.0);
    return out;
  }

  Sub1State ref = slack_state(g, s2, pp.r_min, caps.init_padding);
  out.state = ref;
  conic::SolverSettings settings = caps.solver;
  out.status = InnerStatus::max_iter;

  for (int t = 1; t <= caps.t_max; ++t) {
    IterationRecord rec;
    rec.iteration = t;
    const auto sp = build_subproblem1(pp, ref);
    const auto res = conic::solve(sp.program, settings);
    detail::fill_solver_info(rec, res);
    if (!detail::usable(res, caps.usable_residual)) {
      out.trace.push_back(rec);
      out.status = InnerStatus::solver_failure;
      break;
    }
    settings.warm_start = conic::WarmStart{res.x, res.y, res.s};

    RecoveryReport rr;
    const auto W = precoder_matrices(sp, res);
    PrecoderSet cand = recover_precoders(W, pp, res.objective, caps.recovery, &rr);
    // A relaxation that is not rank one can lose rate in the extraction;
    // retreat towards the current point before giving up.
    for (double theta = 0.5; theta >= caps.min_blend && !(rr.feasible && rr.sum_rate >= out.sum_rate - caps.accept_tol);
         theta *= 0.5) {
      std::vector<Eigen::MatrixXcd> mix(W.size());
      for (std::size_t k = 0; k < W.size(); ++k)
        mix[k] = theta * W[k] + (1.0 - theta) * out.precoders.w[k] * out.precoders.w[k].adjoint();
      RecoveryReport rb;
      PrecoderSet pb = recover_precoders(mix, pp, res.objective, caps.recovery, &rb);
      if (rb.feasible && rb.sum_rate > rr.sum_rate) {
        cand = std::move(pb);
        rb.eig_ratio = rr.eig_ratio;
        rb.randomized = rb.randomized || rr.randomized;
        rb.retention = rr.retention;
        rr = std::move(rb);
        rec.blend = theta;
      }
    }
    rec.sum_rate = rr.sum_rate;
    rec.true_rate = rr.sum_rate;
    rec.randomized = rr.randomized;
    rec.eig_ratio = rr.eig_ratio.empty() ? 0.0 : *std::max_element(rr.eig_ratio.begin(), rr.eig_ratio.end());
    out.randomized = out.randomized || rr.randomized;
    out.worst_eig_ratio = std::max(out.worst_eig_ratio, rec.eig_ratio);
    out.worst_retention = std::min(out.worst_retention, rr.retention);

    rec.accepted = rr.feasible && rr.sum_rate >= out.sum_rate - caps.accept_tol;
    out.trace.push_back(rec);
    if (!rec.accepted) {
      out.status = InnerStatus::stalled;
      break;
    }
    const double change = std::abs(rr.sum_rate - out.sum_rate) / std::max(std::abs(out.sum_rate), 1e-12);
    out.precoders = std::move(cand);
    out.sum_rate = rr.sum_rate;
    g = gain_table(pp.h, out.precoders);
    ref = slack_state(g, s2, pp.r_min, 0.0);
    ref.iteration = t;
    out.state = ref;
    if (change < caps.rel_tol) {
      out.status = InnerStatus::converged;
      break;
    }
  }
  return out;
}

} // namespace panoma
