#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sca_internal.hpp"

namespace panoma {

namespace {

struct Pair {
  std::size_t i, q;
};

std::vector<Pair> waveguide_pairs(std::size_t N) {
  std::vector<Pair> p;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t q = i; q < N; ++q)
      p.push_back({i, q});
  return p;
}

// coef[k][m][pair]: weight of the path factor of receiver k's pair in the
// gain of message m, with the phases frozen at pp.phase_x.
using Coefs = std::vector<std::vector<std::vector<double>>>;

Coefs pair_coefficients(const PlacementProblem &pp, const std::vector<Pair> &pairs) {
  SystemGeometry g = pp.geom;
  g.pin_x = pp.phase_x;
  const ChannelMatrix h = pp.link.channel(g);
  const auto K = static_cast<std::size_t>(h.num_users());
  Coefs c(K, std::vector<std::vector<double>>(pp.W.size(), std::vector<double>(pairs.size())));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t m = 0; m < pp.W.size(); ++m) {
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [i, q] = pairs[p];
        const auto ii = static_cast<Eigen::Index>(i), qq = static_cast<Eigen::Index>(q);
        const double dphi = std::arg(h.h(static_cast<Eigen::Index>(k), qq)) -
                            std::arg(h.h(static_cast<Eigen::Index>(k), ii));
        const double v = (pp.W[m](ii, qq) * std::polar(1.0, dphi)).real();
        c[k][m][p] = (i == q) ? v : 2.0 * v;
      }
    }
  }
  return c;
}

void check_positions(const PlacementProblem &pp, const std::vector<double> &x) {
  if (x.size() != pp.geom.num_waveguides())
    throw std::invalid_argument("one PA position per waveguide expected");
  for (double v : x)
    if (!(v >= -1e-9 && v <= pp.geom.x_max + 1e-9))
      throw std::invalid_argument("PA position outside [0, x_max]");
}

} // namespace

double pair_path_factor(const PlacementProblem &pp, std::size_t k, std::size_t i, std::size_t q,
                        const std::vector<double> &x) {
  const double alpha = pp.link.effective_alpha();
  const double di = user_pa_distance(pp.geom, k, i, x.at(i));
  const double dq = user_pa_distance(pp.geom, k, q, x.at(q));
  return pp.link.pc.eta * std::exp(-alpha * (x[i] + x[q])) / (di * dq);
}

Eigen::MatrixXd model_gains(const PlacementProblem &pp, const std::vector<double> &x) {
  const auto pairs = waveguide_pairs(pp.geom.num_waveguides());
  const auto c = pair_coefficients(pp, pairs);
  const auto K = pp.geom.num_users();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(pp.W.size()));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const double P = pair_path_factor(pp, k, pairs[p].i, pairs[p].q, x);
      for (std::size_t m = 0; m < pp.W.size(); ++m)
        g(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) += c[k][m][p] * P;
    }
  return g.cwiseMax(0.0);
}

Sub2State placement_state(const PlacementProblem &pp, const std::vector<double> &x, double trust_radius) {
  check_positions(pp, x);
  const auto pairs = waveguide_pairs(pp.geom.num_waveguides());
  Sub2State s;
  s.x = x;
  s.trust_radius = trust_radius;
  for (std::size_t k = 0; k < pp.geom.num_users(); ++k) {
    std::vector<double> f;
    for (const auto &pr : pairs)
      f.push_back(pair_path_factor(pp, k, pr.i, pr.q, x));
    s.tau.push_back(f);
    s.gamma.push_back(std::move(f));
  }
  s.slack = slack_state(model_gains(pp, x), pp.noise.sigma2, pp.r_min, 0.0);
  return s;
}

Sub2Program build_subproblem2(const PlacementProblem &pp, const Sub2State &st) {
  using conic::LinExpr;
  const std::size_t N = pp.geom.num_waveguides();
  const std::size_t K = pp.geom.num_users();
  if (pp.W.size() != K)
    throw std::invalid_argument("one fixed precoder matrix per user expected");
  check_positions(pp, st.x);
  if (!(st.trust_radius >= 0.0))
    throw std::invalid_argument("trust radius must be nonnegative");
  const auto pairs = waveguide_pairs(N);
  if (st.tau.size() != K || st.gamma.size() != K)
    throw std::invalid_argument("tau/gamma references must cover every user");
  for (std::size_t k = 0; k < K; ++k) {
    if (st.tau[k].size() != pairs.size() || st.gamma[k].size() != pairs.size())
      throw std::invalid_argument("tau/gamma references must cover every waveguide pair");
    for (std::size_t p = 0; p < pairs.size(); ++p)
      if (!(st.tau[k][p] > 0.0) || !(st.gamma[k][p] > 0.0))
        throw std::invalid_argument("tau/gamma references must be positive");
  }
  pp.noise.validate(K);

  const auto c = pair_coefficients(pp, pairs);
  const double alpha = pp.link.effective_alpha();
  const double ln_eta = std::log(pp.link.pc.eta);
  const double delta = st.trust_radius;
  const double xmax = pp.geom.x_max;

  conic::ProgramBuilder pb("placement-sca");
  const int z = pb.add_vector("z", static_cast<int>(N));
  const int tau = pb.add_vector("tau", static_cast<int>(K * pairs.size()));
  const int gam = pb.add_vector("gamma", static_cast<int>(K * pairs.size()));

  std::vector<LinExpr> x(N);
  for (std::size_t n = 0; n < N; ++n) {
    const int ni = static_cast<int>(n);
    x[n] = LinExpr(st.x[n]) + pb.var(z, ni) * delta;
    pb.add_nonneg(LinExpr(1.0) - pb.var(z, ni), "trust_hi_" + std::to_string(n));
    pb.add_nonneg(LinExpr(1.0) + pb.var(z, ni), "trust_lo_" + std::to_string(n));
    pb.add_nonneg(x[n] * (1.0 / xmax), "box_lo_" + std::to_string(n));
    pb.add_nonneg((LinExpr(xmax) - x[n]) * (1.0 / xmax), "box_hi_" + std::to_string(n));
  }

  // ln of the path factor with the -ln d terms linearised at the reference
  auto log_path = [&](std::size_t k, const Pair &pr) {
    LinExpr e(ln_eta);
    for (std::size_t n : {pr.i, pr.q}) {
      const auto ex = linearize_log_distance(pp.geom, k, n, st.x[n], -1);
      e += (x[n] - st.x[n]) * ex.slope + ex.value;
      e -= x[n] * alpha;
    }
    return e;
  };

  auto tau_var = [&](std::size_t k, std::size_t p) { return pb.var(tau, static_cast<int>(k * pairs.size() + p)); };
  auto gam_var = [&](std::size_t k, std::size_t p) { return pb.var(gam, static_cast<int>(k * pairs.size() + p)); };

  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const LinExpr L = log_path(k, pairs[p]);
      const std::string tag = std::to_string(k) + "_" + std::to_string(pairs[p].i) + "_" + std::to_string(pairs[p].q);
      // tau >= exp(L), normalised by its reference
      pb.add_exp(L - std::log(st.tau[k][p]), 1.0, tau_var(k, p), "path_upper_" + tag);
      // f_sca(ln gamma) <= L
      const auto lg = linearize_log(st.gamma[k][p]);
      pb.add_nonneg(L - lg.value - (gam_var(k, p) - 1.0), "path_lower_" + tag);
    }

  // bounds on the modelled gain of message m at receiver k, in noise units
  auto bound = [&](int k, int m, bool lower) {
    const auto ku = static_cast<std::size_t>(k), mu = static_cast<std::size_t>(m);
    LinExpr e;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const double cf = c[ku][mu][p];
      if (cf == 0.0)
        continue;
      const bool use_gamma = (cf > 0.0) == lower;
      if (use_gamma)
        e += gam_var(ku, p) * (cf * st.gamma[ku][p]);
      else
        e += tau_var(ku, p) * (cf * st.tau[ku][p]);
    }
    return e * (1.0 / pp.noise.sigma2[ku]);
  };
  auto lower = [&](int m, int k) { return bound(m, k, true); };
  auto upper = [&](int m, int k) { return bound(m, k, false); };

  if (pp.enforce_ordering) {
    const Eigen::MatrixXd g = model_gains(pp, st.x);
    for (std::size_t k = 0; k < K; ++k) {
      const double scale = std::max(1.0, g.row(static_cast<Eigen::Index>(k)).maxCoeff() / pp.noise.sigma2[k]);
      for (std::size_t m = 1; m < K; ++m)
        pb.add_nonneg((lower(static_cast<int>(k), static_cast<int>(m - 1)) -
                       upper(static_cast<int>(k), static_cast<int>(m))) * (1.0 / scale),
                      "order_" + std::to_string(k) + "_" + std::to_string(m));
    }
  }

  pb.maximize(detail::add_rate_surrogate(pb, static_cast<int>(K), st.slack, pp.noise.sigma2, pp.r_min, lower, upper));
  return {pb.build()};
}

std::vector<double> placement_positions(const Sub2State &st, const Sub2Program &sp, const conic::SolveResult &res,
                                        double x_max) {
  const auto z = res.values(sp.program, "z");
  if (z.size() != st.x.size())
    throw std::invalid_argument("solve result carries no position values");
  std::vector<double> x(st.x.size());
  for (std::size_t n = 0; n < x.size(); ++n)
    x[n] = std::clamp(st.x[n] + st.trust_radius * std::clamp(z[n], -1.0, 1.0), 0.0, x_max);
  return x;
}

Alg2Result run_algorithm2(const PlacementProblem &pp, const std::vector<double> &x0, const InnerCaps &caps) {
  Alg2Result out;
  out.x = x0;
  for (double &v : out.x)
    v = std::clamp(v, 0.0, pp.geom.x_max);
  const auto &s2 = pp.noise.sigma2;
  const PrecoderSet fixed = detail::precoders_from_matrices(pp.W, pp.budget);

  auto assess = [&](const std::vector<double> &x, double &rate) {
    const Eigen::MatrixXd g = model_gains(pp, x);
    rate = rate_report(g, s2).sum_rate;
    return check_gain_feasibility(g, fixed, s2, pp.r_min).feasible(pp.budget, {}, pp.enforce_ordering);
  };
  auto true_rate = [&](const std::vector<double> &x) {
    SystemGeometry g = pp.geom;
    g.pin_x = x;
    return rate_report(detail::matrix_gain_table(pp.link.channel(g), pp.W), s2).sum_rate;
  };

  if (!assess(out.x, out.sum_rate)) {
    out.status = InnerStatus::infeasible_start;
    return out;
  }

  double delta = caps.trust_radius;
  conic::SolverSettings settings = caps.solver;
  out.status = InnerStatus::max_iter;
  for (int t = 1; t <= caps.t_max; ++t) {
    IterationRecord rec;
    rec.iteration = t;
    rec.trust_radius = delta;
    auto st = placement_state(pp, out.x, delta);
    st.iteration = t - 1;
    const auto sp = build_subproblem2(pp, st);
    const auto res = conic::solve(sp.program, settings);
    detail::fill_solver_info(rec, res);
    if (!detail::usable(res, caps.usable_residual)) {
      settings.warm_start.reset();
      out.trace.push_back(rec);
      delta *= 0.5;
      if (delta < caps.trust_floor) {
        out.status = InnerStatus::solver_failure;
        break;
      }
      continue;
    }
    settings.warm_start = conic::WarmStart{res.x, res.y, res.s};

    const auto xn = placement_positions(st, sp, res, pp.geom.x_max);
    double rate = 0.0;
    const bool feasible = assess(xn, rate);
    rec.sum_rate = rate;
    rec.true_rate = true_rate(xn);
    rec.accepted = feasible && rate >= out.sum_rate - caps.accept_tol;
    out.trace.push_back(rec);
    if (!rec.accepted) {
      delta *= 0.5;
      if (delta < caps.trust_floor) {
        out.status = InnerStatus::stalled;
        break;
      }
      continue;
    }
    double step = 0.0;
    for (std::size_t n = 0; n < xn.size(); ++n)
      step = std::max(step, std::abs(xn[n] - out.x[n]));
    const double change = std::abs(rate - out.sum_rate) / std::max(std::abs(out.sum_rate), 1e-12);
    out.x = xn;
    out.sum_rate = rate;
    if (step >= 0.99 * delta)
      delta = std::min(2.0 * delta, std::max(caps.trust_cap, caps.trust_radius));
    if (change < caps.rel_tol) {
      out.status = InnerStatus::converged;
      break;
    }
  }
  return out;
}

} // namespace panoma
