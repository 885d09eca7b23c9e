#include "panoma/ao.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace panoma {

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

void Scenario::validate() const {
  SystemGeometry g = geom;
  g.pin_x.assign(g.num_waveguides(), 0.0); // positions are decided by the schemes
  g.validate();
  material.validate();
  if (!(f_c > 0.0))
    throw std::invalid_argument("carrier frequency must be positive");
  noise.validate(geom.num_users());
  if (budget.size() != geom.num_waveguides())
    throw std::invalid_argument("one power budget per waveguide expected");
  for (double p : budget)
    if (!(p > 0.0))
      throw std::invalid_argument("power budgets must be positive");
}

std::vector<std::size_t> sort_users_by_strength(Scenario &s, const std::vector<double> &pin_x) {
  SystemGeometry g = s.geom;
  g.pin_x = pin_x;
  const auto link = LinkModel::make(s.f_c, s.material, true, s.eta_mode);
  const ChannelMatrix h = link.channel(g);
  std::vector<std::size_t> perm(s.num_users());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> norm(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k)
    norm[k] = h.h.row(static_cast<Eigen::Index>(k)).norm();
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return norm[a] < norm[b]; });
  std::vector<UserPosition> users;
  std::vector<double> sigma2;
  for (std::size_t k : perm) {
    users.push_back(s.geom.users[k]);
    sigma2.push_back(s.noise.sigma2[k]);
  }
  s.geom.users = std::move(users);
  s.noise.sigma2 = std::move(sigma2);
  return perm;
}

std::vector<double> initial_positions(const Scenario &s) {
  std::vector<double> xs;
  for (const auto &u : s.geom.users)
    xs.push_back(u.x);
  double med = 0.0;
  if (!xs.empty()) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    med = n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
  }
  return std::vector<double>(s.num_waveguides(), std::clamp(med, 0.0, s.geom.x_max));
}

std::string_view to_string(SchemeKind k) {
  switch (k) {
  case SchemeKind::proposed: return "proposed";
  case SchemeKind::ideal_pin: return "ideal_pin";
  case SchemeKind::naive_pin: return "naive_pin";
  case SchemeKind::conventional: return "conventional";
  }
  return "?";
}

std::optional<SchemeKind> scheme_from_string(std::string_view s) {
  for (auto k : {SchemeKind::proposed, SchemeKind::ideal_pin, SchemeKind::naive_pin, SchemeKind::conventional})
    if (to_string(k) == s)
      return k;
  return std::nullopt;
}

namespace {

constexpr int kLadderPoints = 40;
constexpr int kFallbackGrid = 20;

// Every user shares one direction, matched to the phases of user `ref`'s
// channel, with power shares proportional to rho^k.
PrecoderSet ladder(const ChannelMatrix &h, const std::vector<double> &budget, Eigen::Index ref, double rho) {
  const auto K = static_cast<std::size_t>(h.num_users());
  const auto N = h.num_waveguides();
  Eigen::VectorXcd v(N);
  for (Eigen::Index n = 0; n < N; ++n)
    v(n) = std::polar(std::sqrt(budget[static_cast<std::size_t>(n)]), std::arg(h.h(ref, n)));
  std::vector<double> share(K);
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    total += share[k] = std::pow(rho, static_cast<double>(k));
  PrecoderSet p = PrecoderSet::zeros(K, budget);
  for (std::size_t k = 0; k < K; ++k)
    p.w[k] = v * std::sqrt(share[k] / total);
  return p;
}

std::vector<Eigen::MatrixXcd> outer_products(const PrecoderSet &p) {
  std::vector<Eigen::MatrixXcd> W;
  for (const auto &w : p.w)
    W.push_back(w * w.adjoint());
  return W;
}

bool feasible_on(const ChannelMatrix &h, const PrecoderSet &p, const Scenario &s, bool enforce_ordering,
                 double *rate) {
  const Eigen::MatrixXd g = gain_table(h, p);
  if (rate)
    *rate = rate_report(g, s.noise.sigma2).sum_rate;
  return check_gain_feasibility(g, p, s.noise.sigma2, s.r_min).feasible(s.budget, {}, enforce_ordering);
}

} // namespace

InitResult constructive_precoders(const ChannelMatrix &h, const Scenario &s, const std::vector<double> &pin_x) {
  InitResult out;
  out.pin_x = pin_x;
  const auto K = h.num_users();
  if (K == 0)
    throw std::invalid_argument("scenario has no users");
  double best_slack = -std::numeric_limits<double>::infinity();
  const double lo = std::log(1e-3), hi = std::log(0.999);
  const int points = K == 1 ? 1 : kLadderPoints;
  for (Eigen::Index ref = 0; ref < K; ++ref) {
    for (int i = 0; i < points; ++i) {
      const double rho = std::exp(lo + (hi - lo) * i / (kLadderPoints - 1));
      PrecoderSet p = ladder(h, s.budget, ref, rho);
      const Eigen::MatrixXd g = gain_table(h, p);
      const auto rep = check_gain_feasibility(g, p, s.noise.sigma2, s.r_min);
      const double slack = *std::min_element(rep.c3_slack.begin(), rep.c3_slack.end());
      const bool feasible = rep.feasible(s.budget);
      const double rate = rate_report(g, s.noise.sigma2).sum_rate;
      // feasible points rank by sum-rate, the rest by their worst slack
      const bool better = feasible ? (!out.feasible || rate > out.sum_rate) : (!out.feasible && slack > best_slack);
      if (better) {
        best_slack = std::max(best_slack, slack);
        out.precoders = std::move(p);
        out.ladder_ratio = rho;
        out.feasible = feasible;
        out.sum_rate = rate;
      }
    }
  }
  return out;
}

namespace {

std::vector<std::vector<double>> fallback_positions(const Scenario &s) {
  std::vector<double> xs;
  for (int i = 0; i <= kFallbackGrid; ++i)
    xs.push_back(s.geom.x_max * i / kFallbackGrid);
  for (const auto &u : s.geom.users)
    xs.push_back(std::clamp(u.x, 0.0, s.geom.x_max));
  std::vector<std::vector<double>> out;
  for (double x : xs)
    out.emplace_back(s.num_waveguides(), x);
  return out;
}

} // namespace

InitResult init_scenario(const Scenario &s, const LinkModel &link) {
  s.validate();
  SystemGeometry g = s.geom;
  g.pin_x = initial_positions(s);
  InitResult best = constructive_precoders(link.channel(g), s, g.pin_x);
  for (const auto &x : fallback_positions(s)) {
    g.pin_x = x;
    InitResult cand = constructive_precoders(link.channel(g), s, x);
    if (cand.feasible && (!best.feasible || cand.sum_rate > best.sum_rate))
      best = std::move(cand);
  }
  return best;
}

AoTrace run_ao(const Scenario &s, const LinkModel &link, bool enforce_ordering, const AoCaps &caps) {
  AoTrace tr;
  const InitResult init = init_scenario(s, link);
  tr.pin_x = init.pin_x;
  tr.precoders = init.precoders;
  tr.sum_rate = init.sum_rate;
  tr.steps.push_back({0, "init", init.sum_rate, init.feasible, 0, init.feasible ? "feasible" : "infeasible"});
  if (!init.feasible) {
    tr.status = "infeasible_init";
    return tr;
  }
  if (caps.tau_max <= 0) {
    tr.status = "init_only";
    return tr;
  }

  auto channel_at = [&](const std::vector<double> &x) {
    SystemGeometry g = s.geom;
    g.pin_x = x;
    return link.channel(g);
  };
  auto problem_at = [&](const std::vector<double> &x) {
    return PrecoderProblem{channel_at(x), s.noise, s.budget, s.r_min, enforce_ordering};
  };
  auto absorb = [&](const auto &inner) {
    tr.inner_trace.insert(tr.inner_trace.end(), inner.trace.begin(), inner.trace.end());
  };

  {
    const auto a1 = run_algorithm1(problem_at(tr.pin_x), tr.precoders, caps.inner);
    absorb(a1);
    tr.randomized = a1.randomized;
    tr.worst_eig_ratio = a1.worst_eig_ratio;
    tr.precoders = a1.precoders;
    tr.sum_rate = a1.sum_rate;
    tr.steps.push_back({0, "precoder", a1.sum_rate, true, static_cast<int>(a1.trace.size()),
                        std::string(to_string(a1.status))});
    tr.accepted_rates.push_back(a1.sum_rate);
  }

  tr.status = "max_iter";
  for (int outer = 1; outer <= caps.tau_max; ++outer) {
    tr.outer_iterations = outer;
    PlacementProblem qp{s.geom, link, s.noise, outer_products(tr.precoders), s.budget, s.r_min, enforce_ordering,
                        tr.pin_x};
    const auto a2 = run_algorithm2(qp, tr.pin_x, caps.inner);
    absorb(a2);
    const bool moved = a2.x != tr.pin_x;
    tr.steps.push_back({outer, "placement", a2.sum_rate, moved, static_cast<int>(a2.trace.size()),
                        std::string(to_string(a2.status))});
    if (!moved) {
      tr.status = "converged";
      break;
    }

    bool accepted = false;
    std::vector<double> xc = a2.x;
    for (int bt = 0; bt <= caps.backtracks && !accepted; ++bt) {
      if (bt > 0)
        for (std::size_t n = 0; n < xc.size(); ++n)
          xc[n] = tr.pin_x[n] + 0.5 * (xc[n] - tr.pin_x[n]);
      const auto pp = problem_at(xc);
      // warm start from the current precoders when they stay feasible,
      // otherwise from the constructive point at the new positions
      PrecoderSet start;
      double r_keep = 0.0;
      const bool keep_ok = feasible_on(pp.h, tr.precoders, s, enforce_ordering, &r_keep);
      const InitResult fresh = constructive_precoders(pp.h, s, xc);
      if (keep_ok && (!fresh.feasible || r_keep >= fresh.sum_rate))
        start = tr.precoders;
      else if (fresh.feasible)
        start = fresh.precoders;
      else
        continue;
      const auto a1 = run_algorithm1(pp, start, caps.inner);
      absorb(a1);
      const bool ok = a1.sum_rate >= tr.sum_rate - caps.accept_tol &&
                      feasible_on(pp.h, a1.precoders, s, enforce_ordering, nullptr);
      tr.steps.push_back({outer, "precoder", a1.sum_rate, ok, static_cast<int>(a1.trace.size()),
                          std::string(to_string(a1.status))});
      if (!ok)
        continue;
      accepted = true;
      const double change = std::abs(a1.sum_rate - tr.sum_rate) / std::max(std::abs(tr.sum_rate), 1e-12);
      tr.pin_x = xc;
      tr.precoders = a1.precoders;
      tr.sum_rate = a1.sum_rate;
      tr.randomized = tr.randomized || a1.randomized;
      tr.worst_eig_ratio = std::max(tr.worst_eig_ratio, a1.worst_eig_ratio);
      tr.accepted_rates.push_back(a1.sum_rate);
      if (change < caps.rel_tol)
        tr.status = "converged";
    }
    if (!accepted) {
      tr.status = "converged";
      break;
    }
    if (tr.status == "converged")
      break;
  }
  return tr;
}

ChannelMatrix evaluation_channel(const Scenario &s, SchemeKind kind, const std::vector<double> &pin_x) {
  SystemGeometry g = s.geom;
  g.pin_x = pin_x;
  switch (kind) {
  case SchemeKind::conventional:
    g.pin_x = initial_positions(s); // no PAs; only the feeds matter
    return conventional_array_channel(g, PhysicalConstants::at(s.f_c, s.material.eta_eff, s.eta_mode));
  case SchemeKind::ideal_pin:
    return LinkModel::make(s.f_c, s.material, true, s.eta_mode).channel(g);
  case SchemeKind::proposed:
  case SchemeKind::naive_pin:
    break;
  }
  return LinkModel::make(s.f_c, s.material, false, s.eta_mode).channel(g);
}

SchemeResult run_scheme(const Scenario &s, SchemeKind kind, const AoCaps &caps) {
  s.validate();
  SchemeResult out;
  out.kind = kind;

  if (kind == SchemeKind::conventional) {
    SystemGeometry g = s.geom;
    g.pin_x = initial_positions(s);
    const ChannelMatrix h = evaluation_channel(s, kind, g.pin_x);
    const InitResult init = constructive_precoders(h, s, {});
    out.precoders = init.precoders;
    out.internal_sum_rate = init.sum_rate;
    out.status = init.feasible ? "init_only" : "infeasible_init";
    out.trace.steps.push_back({0, "init", init.sum_rate, init.feasible, 0, out.status});
    if (init.feasible && caps.tau_max > 0) {
      const auto a1 = run_algorithm1(PrecoderProblem{h, s.noise, s.budget, s.r_min, true}, init.precoders, caps.inner);
      out.precoders = a1.precoders;
      out.internal_sum_rate = a1.sum_rate;
      out.iterations = static_cast<int>(a1.trace.size());
      out.status = std::string(to_string(a1.status));
      out.trace.inner_trace = a1.trace;
      out.trace.randomized = a1.randomized;
      out.trace.worst_eig_ratio = a1.worst_eig_ratio;
      out.trace.steps.push_back({0, "precoder", a1.sum_rate, true, out.iterations, out.status});
      out.trace.accepted_rates.push_back(a1.sum_rate);
    }
    out.trace.precoders = out.precoders;
    out.trace.sum_rate = out.internal_sum_rate;
    out.trace.status = out.status;
    const auto rep = rate_report(h, out.precoders, s.noise);
    out.sum_rate = rep.sum_rate;
    out.per_user_rate = rep.per_user_rate;
    out.feasible = check_gain_feasibility(gain_table(h, out.precoders), out.precoders, s.noise.sigma2, s.r_min)
                       .feasible(s.budget);
    return out;
  }

  const bool lossless_opt = kind != SchemeKind::proposed;
  const bool ordering = kind != SchemeKind::naive_pin;
  const auto link = LinkModel::make(s.f_c, s.material, lossless_opt, s.eta_mode);
  out.trace = run_ao(s, link, ordering, caps);
  out.pin_x = out.trace.pin_x;
  out.precoders = out.trace.precoders;
  out.internal_sum_rate = out.trace.sum_rate;
  out.iterations = out.trace.outer_iterations;
  out.status = out.trace.status;

  SystemGeometry g = s.geom;
  g.pin_x = out.pin_x;
  const ChannelMatrix h = evaluation_channel(s, kind, out.pin_x);
  const auto rep = rate_report(h, out.precoders, s.noise);
  out.sum_rate = rep.sum_rate;
  out.per_user_rate = rep.per_user_rate;
  out.feasible = check_feasibility(g, h, out.precoders, s.noise, s.r_min, s.geom.x_max).feasible(s.budget, {}, ordering);
  return out;
}

} // namespace panoma
