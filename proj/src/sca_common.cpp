#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "sca_internal.hpp"

namespace panoma {

double taylor_quadratic_bound(double v, double v_ref) {
  return -0.5 * v_ref * v_ref - v_ref * (v - v_ref);
}

conic::LinExpr taylor_quadratic_bound(const conic::LinExpr &v, double v_ref) {
  return v * -v_ref + conic::LinExpr(0.5 * v_ref * v_ref);
}

Expansion linearize_log_distance(const SystemGeometry &geom, std::size_t k, std::size_t n, double x_ref,
                                 int sign) {
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("sign must be +1 or -1");
  const double d = user_pa_distance(geom, k, n, x_ref);
  const double dx = x_ref - geom.users.at(k).x;
  return {x_ref, sign * std::log(d), sign * dx / (d * d)};
}

Expansion linearize_log(double g_ref) {
  if (!(g_ref > 0.0))
    throw std::invalid_argument("log expansion needs a positive reference");
  return {g_ref, std::log(g_ref), 1.0 / g_ref};
}

void Sub1State::validate(std::size_t K) const {
  if (r.size() != K)
    throw std::invalid_argument("slack state must hold one r per user");
  if (xi.size() != (K == 0 ? 0 : K - 1))
    throw std::invalid_argument("slack state must hold xi rows for every user but the strongest");
  for (std::size_t k = 0; k < xi.size(); ++k) {
    if (xi[k].size() != K - k)
      throw std::invalid_argument("xi row has the wrong number of decoders");
    for (double v : xi[k])
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("xi reference must be positive and finite");
  }
  for (double v : r)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("r reference must be positive and finite");
}

Sub1State slack_state(const Eigen::MatrixXd &g, const std::vector<double> &sigma2, double r_min,
                      double padding) {
  const int K = static_cast<int>(g.rows());
  const double r_floor = std::exp2(r_min);
  Sub1State s;
  s.r.assign(static_cast<std::size_t>(K), 1.0);
  for (int k = 0; k + 1 < K; ++k) {
    std::vector<double> base(static_cast<std::size_t>(K - k));
    double worst = std::numeric_limits<double>::infinity();
    for (int m = k; m < K; ++m) {
      const double s2 = sigma2[static_cast<std::size_t>(m)];
      double interf = 0.0;
      for (int b = k + 1; b < K; ++b)
        interf += g(m, b) / s2;
      base[static_cast<std::size_t>(m - k)] = interf + 1.0;
      worst = std::min(worst, (g(m, k) / s2) / (interf + 1.0));
    }
    double eps = padding;
    if (r_floor > 1.0)
      eps = std::min(eps, worst / (r_floor - 1.0) - 1.0);
    eps = std::max(eps, 0.0);
    std::vector<double> xi(base.size());
    for (std::size_t j = 0; j < base.size(); ++j)
      xi[j] = base[j] * (1.0 + eps) * sigma2[static_cast<std::size_t>(k) + j];
    s.xi.push_back(std::move(xi));
    s.r[static_cast<std::size_t>(k)] = 1.0 + worst / (1.0 + eps);
  }
  if (K > 0)
    s.r.back() = 1.0 + g(K - 1, K - 1) / sigma2[static_cast<std::size_t>(K - 1)];
  return s;
}

double surrogate_value(const Sub1State &s) {
  double v = 0.0;
  for (double r : s.r)
    v += std::log2(r);
  return v;
}

conic::SolverSettings inner_solver_settings() {
  conic::SolverSettings s;
  s.tol_primal = 1e-5;
  s.tol_dual = 1e-5;
  s.tol_gap = 1e-6;
  s.max_iter = 8000;
  return s;
}

std::string_view to_string(InnerStatus s) {
  switch (s) {
  case InnerStatus::converged: return "converged";
  case InnerStatus::max_iter: return "max_iter";
  case InnerStatus::stalled: return "stalled";
  case InnerStatus::solver_failure: return "solver_failure";
  case InnerStatus::infeasible_start: return "infeasible_start";
  }
  return "?";
}

std::string to_json_lines(const std::vector<IterationRecord> &trace) {
  std::string out;
  for (const auto &r : trace) {
    nlohmann::json j = {{"iteration", r.iteration},
                        {"surrogate", r.surrogate},
                        {"sum_rate", r.sum_rate},
                        {"true_rate", r.true_rate},
                        {"accepted", r.accepted},
                        {"solver_status", r.solver_status},
                        {"solver_iterations", r.solver_iterations},
                        {"primal_residual", r.primal_residual},
                        {"dual_residual", r.dual_residual},
                        {"gap", r.gap},
                        {"trust_radius", r.trust_radius},
                        {"eig_ratio", r.eig_ratio},
                        {"randomized", r.randomized},
                        {"blend", r.blend}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

namespace detail {

int xi_count(int K) { return K * (K + 1) / 2 - 1 > 0 ? K * (K + 1) / 2 - 1 : 0; }

int xi_index(int K, int k, int m) {
  // rows k = 0..K-2 hold K - k entries each
  return k * K - k * (k - 1) / 2 + (m - k);
}

conic::LinExpr add_rate_surrogate(conic::ProgramBuilder &pb, int K, const Sub1State &ref,
                                  const std::vector<double> &sigma2, double r_min,
                                  const GainExpr &signal_lower, const GainExpr &gain_upper) {
  using conic::LinExpr;
  const int r_blk = pb.add_vector("r", K);
  const int t_blk = pb.add_vector("t", K);
  const int nxi = xi_count(K);
  const int xi_blk = nxi > 0 ? pb.add_vector("xi", nxi) : -1;

  for (int k = 0; k + 1 < K; ++k) {
    const double b = ref.r[static_cast<std::size_t>(k)];
    const LinExpr r_hat = pb.var(r_blk, k);
    for (int m = k; m < K; ++m) {
      const double a = ref.xi[static_cast<std::size_t>(k)][static_cast<std::size_t>(m - k)] /
                       sigma2[static_cast<std::size_t>(m)];
      const LinExpr xi_hat = pb.var(xi_blk, xi_index(K, k, m));
      // xi r - xi <= S  with xi = a xi_hat, r = b r_hat:
      //   0.5 (xi_hat + r_hat)^2 - 0.5 xi_hat^2 - 0.5 r_hat^2 <= (S + a xi_hat) / (a b)
      const LinExpr rhs = signal_lower(m, k) * (1.0 / (a * b)) + xi_hat * (1.0 / b) +
                          taylor_quadratic_bound(xi_hat, 1.0) * -1.0 + taylor_quadratic_bound(r_hat, 1.0) * -1.0;
      pb.add_soc({rhs + 0.5, xi_hat + r_hat, rhs - 0.5},
                 "sinr_" + std::to_string(k) + "_at_" + std::to_string(m));
      LinExpr interf(1.0);
      for (int q = k + 1; q < K; ++q)
        interf += gain_upper(m, q);
      pb.add_nonneg(xi_hat - interf * (1.0 / a), "interference_" + std::to_string(k) + "_at_" + std::to_string(m));
    }
  }
  if (K > 0) {
    const double b = ref.r.back();
    pb.add_nonneg((signal_lower(K - 1, K - 1) + 1.0) * (1.0 / b) - pb.var(r_blk, K - 1), "strongest_user");
  }
  LinExpr obj;
  const double r_floor = std::exp2(r_min);
  for (int k = 0; k < K; ++k) {
    const double b = ref.r[static_cast<std::size_t>(k)];
    pb.add_nonneg(pb.var(r_blk, k) - r_floor / b, "min_rate_" + std::to_string(k));
    pb.add_log_epigraph(pb.var(t_blk, k), pb.var(r_blk, k), "log_rate_" + std::to_string(k));
    obj += (pb.var(t_blk, k) + std::log(b)) * (1.0 / std::numbers::ln2);
  }
  return obj;
}

bool usable(const conic::SolveResult &res, double residual) {
  if (res.ok())
    return true;
  return res.status == conic::SolveStatus::max_iter && res.primal_residual <= residual &&
         res.dual_residual <= residual && !res.x.empty();
}

void fill_solver_info(IterationRecord &rec, const conic::SolveResult &res) {
  rec.solver_status = std::string(conic::to_string(res.status));
  rec.solver_iterations = res.iterations;
  rec.primal_residual = res.primal_residual;
  rec.dual_residual = res.dual_residual;
  rec.gap = res.gap;
  rec.surrogate = res.objective;
}

Eigen::MatrixXd matrix_gain_table(const ChannelMatrix &h, const std::vector<Eigen::MatrixXcd> &W) {
  const auto K = h.num_users();
  Eigen::MatrixXd g(K, static_cast<Eigen::Index>(W.size()));
  for (Eigen::Index m = 0; m < K; ++m) {
    const Eigen::VectorXcd hm = h.user(m);
    for (std::size_t k = 0; k < W.size(); ++k)
      g(m, static_cast<Eigen::Index>(k)) = std::abs(hm.dot(W[k] * hm));
  }
  return g;
}

PrecoderSet precoders_from_matrices(const std::vector<Eigen::MatrixXcd> &W, std::vector<double> budget) {
  PrecoderSet p = PrecoderSet::zeros(W.size(), std::move(budget));
  for (std::size_t k = 0; k < W.size(); ++k)
    p.w[k] = extract_rank_one(W[k], 1.0).w;
  return p;
}

} // namespace detail
} // namespace panoma
