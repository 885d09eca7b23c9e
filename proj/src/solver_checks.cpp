#include "panoma/solver_checks.hpp"

#include <cmath>
#include <numbers>

namespace panoma::conic {

namespace {

SolverCheck optimal(std::string name, const ProgramBuilder &pb, double obj) {
  return {std::move(name), pb.build(), SolveStatus::optimal, obj};
}

SolverCheck status_only(std::string name, const ProgramBuilder &pb, SolveStatus st) {
  return {std::move(name), pb.build(), st, 0.0};
}

} // namespace

std::vector<SolverCheck> solver_checks() {
  std::vector<SolverCheck> out;
  {
    // vertex of a 2-d polytope
    ProgramBuilder pb("lp-vertex");
    const int x = pb.add_scalar("x"), y = pb.add_scalar("y");
    pb.add_nonneg(pb.var(x));
    pb.add_nonneg(pb.var(y));
    pb.add_nonneg(4.0 - pb.var(x) - 2.0 * pb.var(y));
    pb.add_nonneg(6.0 - 3.0 * pb.var(x) - pb.var(y));
    pb.maximize(pb.var(x) + pb.var(y));
    out.push_back(optimal("lp-vertex", pb, 2.8));
  }
  {
    ProgramBuilder pb("lp-simplex");
    const int x = pb.add_vector("x", 3);
    pb.add_zero(pb.var(x, 0) + pb.var(x, 1) + pb.var(x, 2) - 1.0);
    for (int i = 0; i < 3; ++i)
      pb.add_nonneg(pb.var(x, i));
    pb.minimize(pb.var(x, 0) * 3.0 + pb.var(x, 1) + pb.var(x, 2) * 2.0);
    out.push_back(optimal("lp-simplex", pb, 1.0));
  }
  {
    ProgramBuilder pb("lp-infeasible");
    const int x = pb.add_scalar("x");
    pb.add_nonneg(pb.var(x) - 1.0);
    pb.add_nonneg(-pb.var(x));
    pb.minimize(pb.var(x));
    out.push_back(status_only("lp-infeasible", pb, SolveStatus::infeasible));
  }
  {
    ProgramBuilder pb("lp-unbounded");
    const int x = pb.add_scalar("x"), y = pb.add_scalar("y");
    pb.add_nonneg(pb.var(x));
    pb.add_nonneg(pb.var(x) - pb.var(y));
    pb.maximize(pb.var(x) + pb.var(y));
    out.push_back(status_only("lp-unbounded", pb, SolveStatus::unbounded));
  }
  {
    // min x + y over the unit disc
    ProgramBuilder pb("soc-disc");
    const int x = pb.add_scalar("x"), y = pb.add_scalar("y");
    pb.add_soc({LinExpr(1.0), pb.var(x), pb.var(y)});
    pb.minimize(pb.var(x) + pb.var(y));
    out.push_back(optimal("soc-disc", pb, -std::numbers::sqrt2));
  }
  {
    ProgramBuilder pb("soc-chord");
    const int x = pb.add_scalar("x");
    pb.add_soc({LinExpr(2.0), pb.var(x), LinExpr(1.0)});
    pb.maximize(pb.var(x));
    out.push_back(optimal("soc-chord", pb, std::sqrt(3.0)));
  }
  {
    // t >= x^2 as ||(t - 1, 2x)|| <= t + 1, with x >= 3
    ProgramBuilder pb("soc-parabola");
    const int t = pb.add_scalar("t"), x = pb.add_scalar("x");
    pb.add_soc({pb.var(t) + 1.0, pb.var(t) - 1.0, 2.0 * pb.var(x)});
    pb.add_nonneg(pb.var(x) - 3.0);
    pb.minimize(pb.var(t));
    out.push_back(optimal("soc-parabola", pb, 9.0));
  }
  {
    ProgramBuilder pb("soc-infeasible");
    const int x = pb.add_scalar("x"), y = pb.add_scalar("y");
    pb.add_soc({LinExpr(1.0), pb.var(x), pb.var(y)});
    pb.add_nonneg(pb.var(x) - 2.0);
    pb.minimize(pb.var(y));
    out.push_back(status_only("soc-infeasible", pb, SolveStatus::infeasible));
  }
  {
    ProgramBuilder pb("exp-log");
    const int t = pb.add_scalar("t"), r = pb.add_scalar("r");
    pb.add_log_epigraph(pb.var(t), pb.var(r));
    pb.add_nonneg(std::exp(2.0) - pb.var(r));
    pb.maximize(pb.var(t));
    out.push_back(optimal("exp-log", pb, 2.0));
  }
  {
    ProgramBuilder pb("exp-e");
    const int z = pb.add_scalar("z");
    pb.add_exp(LinExpr(1.0), LinExpr(1.0), pb.var(z));
    pb.minimize(pb.var(z));
    out.push_back(optimal("exp-e", pb, std::numbers::e));
  }
  {
    // max ln r1 + ln r2 with r1 + r2 <= 4
    ProgramBuilder pb("exp-logsum");
    const int t = pb.add_vector("t", 2), r = pb.add_vector("r", 2);
    pb.add_log_epigraph(pb.var(t, 0), pb.var(r, 0));
    pb.add_log_epigraph(pb.var(t, 1), pb.var(r, 1));
    pb.add_nonneg(4.0 - pb.var(r, 0) - pb.var(r, 1));
    pb.maximize(pb.var(t, 0) + pb.var(t, 1));
    out.push_back(optimal("exp-logsum", pb, 2.0 * std::log(2.0)));
  }
  {
    // relative entropy: min x ln(x / y) - x with y = 2 has minimum -2 at x = 2;
    // u >= x ln(x / y) is (-u, x, y) in the exponential cone
    ProgramBuilder pb("exp-relent");
    const int u = pb.add_scalar("u"), x = pb.add_scalar("x");
    pb.add_exp(-pb.var(u), pb.var(x), LinExpr(2.0));
    pb.minimize(pb.var(u) - pb.var(x));
    out.push_back(optimal("exp-relent", pb, -2.0));
  }
  {
    // smallest eigenvalue of [[2, 1], [1, 2]]
    ProgramBuilder pb("psd-eig");
    const int x = pb.add_vector("X", 3); // lower triangle (00, 10, 11)
    pb.add_psd({pb.var(x, 0), pb.var(x, 1), pb.var(x, 2)}, 2);
    pb.add_zero(pb.var(x, 0) + pb.var(x, 2) - 1.0);
    pb.minimize(2.0 * pb.var(x, 0) + 2.0 * pb.var(x, 1) + 2.0 * pb.var(x, 2));
    out.push_back(optimal("psd-eig", pb, 1.0));
  }
  {
    ProgramBuilder pb("psd-corr");
    const int x = pb.add_scalar("x");
    pb.add_psd({LinExpr(1.0), pb.var(x), LinExpr(1.0)}, 2);
    pb.maximize(pb.var(x));
    out.push_back(optimal("psd-corr", pb, 1.0));
  }
  {
    // smallest eigenvalue of the Hermitian [[2, i], [-i, 2]]
    ProgramBuilder pb("psd-hermitian");
    const int X = pb.add_hermitian("X", 2);
    pb.add_hermitian_psd(X);
    pb.add_zero(pb.re(X, 0, 0) + pb.re(X, 1, 1) - 1.0);
    Eigen::MatrixXcd H(2, 2);
    H << 2.0, std::complex<double>(0, 1), std::complex<double>(0, -1), 2.0;
    pb.minimize(pb.trace_product(X, H));
    out.push_back(optimal("psd-hermitian", pb, 1.0));
  }
  {
    // log of a disc-bounded variable
    ProgramBuilder pb("mixed-log-disc");
    const int t = pb.add_scalar("t"), x = pb.add_scalar("x"), y = pb.add_scalar("y");
    pb.add_soc({LinExpr(3.0), pb.var(x), pb.var(y)});
    pb.add_log_epigraph(pb.var(t), pb.var(x));
    pb.maximize(pb.var(t));
    out.push_back(optimal("mixed-log-disc", pb, std::log(3.0)));
  }
  return out;
}

CheckOutcome run_check(const SolverCheck &c, double tol, const SolverSettings &settings) {
  CheckOutcome o;
  o.result = solve(c.program, settings);
  if (o.result.status != c.expected)
    return o;
  if (c.expected == SolveStatus::optimal) {
    o.error = std::abs(o.result.objective - c.objective);
    o.pass = o.error <= tol;
  } else {
    o.pass = true;
  }
  return o;
}

} // namespace panoma::conic
