#include "panoma/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "panoma/cones.hpp"

namespace panoma::conic {

std::string_view to_string(SolveStatus s) {
  switch (s) {
  case SolveStatus::optimal: return "optimal";
  case SolveStatus::infeasible: return "infeasible";
  case SolveStatus::unbounded: return "unbounded";
  case SolveStatus::max_iter: return "max_iter";
  case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "?";
}

std::vector<double> SolveResult::values(const ConicProgram &p, std::string_view name) const {
  const auto &b = p.block(name);
  if (x.size() < static_cast<std::size_t>(b.offset + b.size))
    return {};
  return {x.begin() + b.offset, x.begin() + b.offset + b.size};
}

double SolveResult::value(const ConicProgram &p, std::string_view name, int i) const {
  const auto &b = p.block(name);
  if (i < 0 || i >= b.size)
    throw std::out_of_range("index out of range in block " + b.name);
  if (x.size() < static_cast<std::size_t>(b.offset + b.size))
    return std::numeric_limits<double>::quiet_NaN();
  return x[static_cast<std::size_t>(b.offset + i)];
}

namespace {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

constexpr double kMinScale = 1e-4;
constexpr double kMaxScale = 1e4;
constexpr int kRuizPasses = 25;
constexpr double kSafeguardFactor = 1.0;
constexpr int kMaxIdleRestarts = 3;
constexpr int kRescaleWindow = 100;
constexpr double kRescaleTrigger = 2.0;
constexpr double kMinAdaptiveScale = 1e-6;
constexpr double kMaxAdaptiveScale = 1e6;

struct Equilibration {
  VectorXd D; // rows
  VectorXd E; // columns
  double sb = 1.0;
  double sc = 1.0;
};

// Row groups that must share one scale factor so the cone is preserved.
std::vector<int> row_groups(const ConeDims &k, int m) {
  std::vector<int> g(static_cast<std::size_t>(m));
  int row = 0, id = 0;
  for (int i = 0; i < k.zero + k.nonneg; ++i)
    g[static_cast<std::size_t>(row++)] = id++;
  auto block = [&](int len) {
    for (int i = 0; i < len; ++i)
      g[static_cast<std::size_t>(row++)] = id;
    ++id;
  };
  for (int q : k.soc)
    block(q);
  for (int s : k.psd)
    block(svec_size(s));
  for (int e = 0; e < k.exp; ++e)
    block(3);
  return g;
}

Equilibration equilibrate(SpMat &A, VectorXd &b, VectorXd &c, const ConeDims &k, const SolverSettings &st) {
  const auto m = A.rows(), n = A.cols();
  Equilibration eq{VectorXd::Ones(m), VectorXd::Ones(n)};
  if (st.normalize) {
    const auto groups = row_groups(k, static_cast<int>(m));
    const int ngroups = groups.empty() ? 0 : groups.back() + 1;
    for (int pass = 0; pass < kRuizPasses; ++pass) {
      VectorXd rmax = VectorXd::Zero(ngroups), cmax = VectorXd::Zero(n);
      for (int j = 0; j < A.outerSize(); ++j)
        for (SpMat::InnerIterator it(A, j); it; ++it) {
          const double a = std::abs(it.value());
          auto &r = rmax(groups[static_cast<std::size_t>(it.row())]);
          r = std::max(r, a);
          cmax(j) = std::max(cmax(j), a);
        }
      VectorXd dr(m), dc(n);
      for (Eigen::Index i = 0; i < m; ++i) {
        const double v = rmax(groups[static_cast<std::size_t>(i)]);
        dr(i) = v > 0.0 ? 1.0 / std::sqrt(std::clamp(v, kMinScale, kMaxScale)) : 1.0;
      }
      for (Eigen::Index j = 0; j < n; ++j)
        dc(j) = cmax(j) > 0.0 ? 1.0 / std::sqrt(std::clamp(cmax(j), kMinScale, kMaxScale)) : 1.0;
      for (int j = 0; j < A.outerSize(); ++j)
        for (SpMat::InnerIterator it(A, j); it; ++it)
          it.valueRef() *= dr(it.row()) * dc(j);
      eq.D.array() *= dr.array();
      eq.E.array() *= dc.array();
    }
  }
  b.array() *= eq.D.array();
  c.array() *= eq.E.array();
  eq.sb = 1.0 / std::max(b.norm(), kMinScale);
  eq.sc = 1.0 / std::max(c.norm(), kMinScale);
  b *= eq.sb;
  c *= eq.sc;
  return eq;
}

struct Residuals {
  double pres = std::numeric_limits<double>::infinity();
  double dres = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  double pobj = 0.0;
};

class Anderson {
public:
  Anderson(Eigen::Index dim, int memory)
      : mem_(memory), S_(dim, std::max(memory, 1)), Y_(dim, std::max(memory, 1)),
        G_(Eigen::MatrixXd::Zero(std::max(memory, 1), std::max(memory, 1))) {}

  void reset() {
    cols_ = 0;
    next_ = 0;
    have_prev_ = false;
  }

  // Records (z, g) and returns the extrapolated point, or nullopt when no
  // history is available yet. Least squares through the Gram matrix of the
  // residual differences, updated one column at a time.
  std::optional<VectorXd> push(const VectorXd &z, const VectorXd &g) {
    if (mem_ <= 0)
      return std::nullopt;
    if (have_prev_) {
      S_.col(next_) = z - zprev_;
      Y_.col(next_) = g - gprev_;
      cols_ = std::min(cols_ + 1, mem_);
      const VectorXd row = Y_.leftCols(cols_).transpose() * Y_.col(next_);
      G_.row(next_).head(cols_) = row.transpose();
      G_.col(next_).head(cols_) = row;
      next_ = (next_ + 1) % mem_;
    }
    zprev_ = z;
    gprev_ = g;
    have_prev_ = true;
    if (cols_ == 0)
      return std::nullopt;
    Eigen::MatrixXd G = G_.topLeftCorner(cols_, cols_);
    const double ridge = 1e-10 * std::max(G.trace(), 1e-300);
    G.diagonal().array() += ridge;
    const VectorXd gamma = G.ldlt().solve(Y_.leftCols(cols_).transpose() * g);
    if (!gamma.allFinite())
      return std::nullopt;
    return VectorXd(z + g - (S_.leftCols(cols_) + Y_.leftCols(cols_)) * gamma);
  }

private:
  int mem_;
  Eigen::MatrixXd S_, Y_, G_;
  VectorXd zprev_, gprev_;
  int cols_ = 0, next_ = 0;
  bool have_prev_ = false;
};

// Douglas-Rachford splitting on the homogeneous embedding
//   0 in M u + N_C(u),  u = (x, y, tau),  C = R^n x K* x R_+,
// in the metric R = diag(rho_x I, R_y, 1). R_y is uniform on every cone
// block, so the Euclidean cone projection is also the R-projection.
class HsdeAdmm {
public:
  HsdeAdmm(const StandardForm &sf, const SolverSettings &st) : sf_(sf), st_(st) {
    n_ = static_cast<int>(sf.A.cols());
    m_ = static_cast<int>(sf.A.rows());
    l_ = n_ + m_ + 1;
    A_ = sf.A;
    b_ = sf.b;
    c_ = sf.c;
    eq_ = equilibrate(A_, b_, c_, sf.cones, st);
    bnorm_ = sf.b.norm();
    cnorm_ = sf.c.norm();
    h_.resize(n_ + m_);
    h_ << c_, b_;
    scale_ = st.scale;
    factor();
  }

  SolveResult run();

private:
  struct Point {
    VectorXd w, u, v; // u and v are the projected pair produced from w
  };

  void set_metric() {
    r_.resize(l_);
    r_.head(n_).setConstant(st_.rho_x);
    for (int i = 0; i < m_; ++i)
      r_(n_ + i) = i < sf_.cones.zero ? 1.0 / (1000.0 * scale_) : 1.0 / scale_;
    r_(l_ - 1) = 1.0;
  }

  void factor() {
    set_metric();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n_ + m_ + 2 * A_.nonZeros()));
    for (int i = 0; i < n_; ++i)
      trip.emplace_back(i, i, r_(i));
    for (int i = 0; i < m_; ++i)
      trip.emplace_back(n_ + i, n_ + i, -r_(n_ + i));
    for (int j = 0; j < A_.outerSize(); ++j)
      for (SpMat::InnerIterator it(A_, j); it; ++it) {
        trip.emplace_back(n_ + static_cast<int>(it.row()), j, it.value());
        trip.emplace_back(j, n_ + static_cast<int>(it.row()), it.value());
      }
    SpMat kkt(n_ + m_, n_ + m_);
    kkt.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed_) {
      ldlt_.analyzePattern(kkt);
      analyzed_ = true;
    }
    ldlt_.factorize(kkt);
    factor_ok_ = ldlt_.info() == Eigen::Success;
    if (factor_ok_) {
      p_ = solve_kkt(h_);
      hp_ = h_.dot(p_);
      factor_ok_ = std::isfinite(hp_) && 1.0 + hp_ > 0.0;
    }
  }

  // (R + M_xy)^{-1} r through the quasi-definite form.
  VectorXd solve_kkt(const VectorXd &r) const {
    VectorXd rhs(n_ + m_);
    rhs.head(n_) = r.head(n_);
    rhs.tail(m_) = -r.tail(m_);
    return ldlt_.solve(rhs);
  }

  // One relaxed splitting step from w.
  Point step(const VectorXd &w) const {
    const VectorXd rw = r_.cwiseProduct(w);
    const VectorXd q = solve_kkt(rw.head(n_ + m_));
    const double tau = (rw(l_ - 1) + h_.dot(q)) / (r_(l_ - 1) + hp_);
    VectorXd ut(l_);
    ut.head(n_ + m_) = q - tau * p_;
    ut(l_ - 1) = tau;

    Point out;
    const VectorXd z = 2.0 * ut - w;
    out.u = z;
    project_cone(sf_.cones, std::span<double>(out.u.data() + n_, static_cast<std::size_t>(m_)), true);
    out.u(l_ - 1) = std::max(out.u(l_ - 1), 0.0);
    out.v = r_.cwiseProduct(out.u - z);
    out.v.head(n_).setZero();
    out.w = w + st_.relaxation * (out.u - ut);
    return out;
  }

  void unscale(const VectorXd &u, const VectorXd &v, double tau, VectorXd &x, VectorXd &y, VectorXd &s) const {
    x = eq_.E.cwiseProduct(u.head(n_)) / (eq_.sb * tau);
    y = eq_.D.cwiseProduct(u.segment(n_, m_)) / (eq_.sc * tau);
    s = v.segment(n_, m_).cwiseQuotient(eq_.D) / (eq_.sb * tau);
  }

  Residuals residuals(const VectorXd &x, const VectorXd &y, const VectorXd &s) const {
    Residuals r;
    const VectorXd pr = sf_.A * x + s - sf_.b;
    const VectorXd dr = sf_.A.transpose() * y + sf_.c;
    const double cx = sf_.c.dot(x), by = sf_.b.dot(y);
    r.pres = pr.norm() / (1.0 + bnorm_);
    r.dres = dr.norm() / (1.0 + cnorm_);
    r.gap = std::abs(cx + by) / (1.0 + std::abs(cx) + std::abs(by));
    r.pobj = cx;
    return r;
  }

  SolveResult finish(SolveStatus status, const VectorXd &x, const VectorXd &y, const VectorXd &s,
                     const Residuals &r, int iters) const {
    SolveResult out;
    out.status = status;
    out.x.assign(x.data(), x.data() + x.size());
    out.y.assign(y.data(), y.data() + y.size());
    out.s.assign(s.data(), s.data() + s.size());
    out.objective = sf_.objective_sign * r.pobj + sf_.objective_offset;
    out.primal_residual = r.pres;
    out.dual_residual = r.dres;
    out.gap = r.gap;
    out.iterations = iters;
    out.restarts = restarts_;
    return out;
  }

  // Returns a status if the pair certifies infeasibility or unboundedness.
  std::optional<SolveResult> certificate(const Point &pt, int iters) const {
    const double tau = pt.u(l_ - 1), kappa = pt.v(l_ - 1);
    if (!(kappa > tau))
      return std::nullopt;
    VectorXd x, y, s;
    unscale(pt.u, pt.v, 1.0, x, y, s);
    const double by = sf_.b.dot(y);
    if (by < 0.0) {
      const VectorXd yh = y / -by;
      const double res = (sf_.A.transpose() * yh).norm();
      if (res <= st_.tol_infeasible) {
        Residuals r;
        r.dres = res;
        r.pobj = std::numeric_limits<double>::quiet_NaN();
        auto out = finish(SolveStatus::infeasible, VectorXd::Constant(n_, std::numeric_limits<double>::quiet_NaN()),
                          yh, VectorXd::Zero(m_), r, iters);
        out.objective = sf_.objective_sign > 0 ? std::numeric_limits<double>::infinity()
                                               : -std::numeric_limits<double>::infinity();
        return out;
      }
    }
    const double cx = sf_.c.dot(x);
    if (cx < 0.0) {
      const VectorXd xh = x / -cx, sh = s / -cx;
      const double res = (sf_.A * xh + sh).norm();
      if (res <= st_.tol_infeasible) {
        Residuals r;
        r.pres = res;
        r.pobj = -std::numeric_limits<double>::infinity();
        auto out = finish(SolveStatus::unbounded, xh, VectorXd::Constant(m_, std::numeric_limits<double>::quiet_NaN()),
                          sh, r, iters);
        out.objective = sf_.objective_sign > 0 ? -std::numeric_limits<double>::infinity()
                                               : std::numeric_limits<double>::infinity();
        return out;
      }
    }
    return std::nullopt;
  }

  // w that reproduces the pair (u, v) at a fixed point.
  VectorXd w_from(const VectorXd &u, const VectorXd &v) const { return u + v.cwiseQuotient(r_); }

  VectorXd initial_w() const {
    VectorXd u = VectorXd::Zero(l_), v = VectorXd::Zero(l_);
    u(l_ - 1) = 1.0;
    v(l_ - 1) = 1.0;
    if (st_.warm_start && st_.warm_start->x.size() == static_cast<std::size_t>(n_) &&
        st_.warm_start->y.size() == static_cast<std::size_t>(m_) &&
        st_.warm_start->s.size() == static_cast<std::size_t>(m_)) {
      const auto &ws = *st_.warm_start;
      VectorXd uw = u, vw = VectorXd::Zero(l_);
      for (int j = 0; j < n_; ++j)
        uw(j) = ws.x[static_cast<std::size_t>(j)] * eq_.sb / eq_.E(j);
      for (int i = 0; i < m_; ++i) {
        uw(n_ + i) = ws.y[static_cast<std::size_t>(i)] * eq_.sc / eq_.D(i);
        vw(n_ + i) = ws.s[static_cast<std::size_t>(i)] * eq_.sb * eq_.D(i);
      }
      if (uw.allFinite() && vw.allFinite())
        return w_from(uw, vw);
    }
    return w_from(u, v);
  }

  const StandardForm &sf_;
  const SolverSettings &st_;
  int n_ = 0, m_ = 0, l_ = 0;
  SpMat A_;
  VectorXd b_, c_, h_, p_, r_;
  double hp_ = 0.0, bnorm_ = 0.0, cnorm_ = 0.0, scale_ = 1.0;
  Equilibration eq_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  bool analyzed_ = false;
  bool factor_ok_ = false;
  int restarts_ = 0;
};

SolveResult HsdeAdmm::run() {
  const VectorXd nan_n = VectorXd::Constant(n_, std::numeric_limits<double>::quiet_NaN());
  const VectorXd nan_m = VectorXd::Constant(m_, std::numeric_limits<double>::quiet_NaN());
  if (!factor_ok_)
    return finish(SolveStatus::numerical_failure, nan_n, nan_m, nan_m, Residuals{}, 0);

  Anderson aa(l_, st_.anderson_memory);
  VectorXd w = initial_w();
  Point pt = step(w);
  VectorXd g = pt.w - w;
  double gnorm = g.norm();

  VectorXd best_u = pt.u, best_v = pt.v;
  double best_metric = std::numeric_limits<double>::infinity();
  double stall_ref = std::numeric_limits<double>::infinity();
  int stall_start = 0, idle_restarts = 0;
  VectorXd bx, by, bs;
  Residuals best_r;

  double log_sum = 0.0;
  int log_count = 0, last_rescale = 0;
  int done = st_.max_iter;

  for (int it = 1; it <= st_.max_iter; ++it) {
    if (!pt.w.allFinite() || !pt.u.allFinite())
      return bx.size() ? finish(SolveStatus::numerical_failure, bx, by, bs, best_r, it)
                       : finish(SolveStatus::numerical_failure, nan_n, nan_m, nan_m, Residuals{}, it);

    if (it % st_.check_interval == 0 || it == st_.max_iter) {
      const double tau = pt.u(l_ - 1);
      if (tau > 0.0) {
        VectorXd x, y, s;
        unscale(pt.u, pt.v, tau, x, y, s);
        const auto r = residuals(x, y, s);
        const double metric = std::max({r.pres, r.dres, r.gap});
        if (r.pres <= st_.tol_primal && r.dres <= st_.tol_dual && r.gap <= st_.tol_gap)
          return finish(SolveStatus::optimal, x, y, s, r, it);
        if (r.pres > 0.0 && r.dres > 0.0) {
          log_sum += std::log(r.pres / r.dres);
          ++log_count;
        }
        if (metric < best_metric) {
          best_metric = metric;
          best_u = pt.u;
          best_v = pt.v;
          bx = x;
          by = y;
          bs = s;
          best_r = r;
        }
      }
      if (auto cert = certificate(pt, it))
        return *cert;

      bool reset = false;
      if (st_.adaptive_scale && log_count > 0) {
        if (it - last_rescale >= kRescaleWindow) {
          const double ratio = std::sqrt(std::exp(log_sum / log_count));
          log_sum = 0.0;
          log_count = 0;
          last_rescale = it;
          if (ratio > kRescaleTrigger || ratio < 1.0 / kRescaleTrigger) {
            const double old = scale_;
            scale_ = std::clamp(scale_ * ratio, kMinAdaptiveScale, kMaxAdaptiveScale);
            if (scale_ != old) {
              factor();
              if (!factor_ok_)
                return bx.size() ? finish(SolveStatus::numerical_failure, bx, by, bs, best_r, it)
                                 : finish(SolveStatus::numerical_failure, nan_n, nan_m, nan_m, Residuals{}, it);
              w = w_from(pt.u, pt.v);
              reset = true;
            }
          }
        }
      }

      if (!reset) {
        const double now = best_metric;
        if (stall_ref - now > st_.stall_improvement) {
          idle_restarts = 0;
          stall_ref = now;
          stall_start = it;
        } else if (it - stall_start >= st_.stall_window) {
          ++restarts_;
          if (++idle_restarts > kMaxIdleRestarts) {
            done = it;
            break;
          }
          w = w_from(best_u, best_v);
          stall_start = it;
          reset = true;
        }
      }
      if (reset) {
        aa.reset();
        pt = step(w);
        g = pt.w - w;
        gnorm = g.norm();
        continue;
      }
    }

    auto next = aa.push(w, g);
    const bool accelerated = next.has_value();
    const Point plain = pt;
    w = accelerated ? std::move(*next) : pt.w;
    pt = step(w);
    VectorXd gn = pt.w - w;
    const double gn_norm = gn.norm();
    if (accelerated && !(gn_norm <= kSafeguardFactor * gnorm)) {
      aa.reset();
      w = plain.w;
      pt = step(w);
      gn = pt.w - w;
      g = std::move(gn);
      gnorm = g.norm();
      continue;
    }
    g = std::move(gn);
    gnorm = gn_norm;
  }

  if (bx.size() == 0)
    return finish(SolveStatus::max_iter, nan_n, nan_m, nan_m, Residuals{}, done);
  return finish(SolveStatus::max_iter, bx, by, bs, best_r, done);
}

} // namespace

SolveResult solve(const ConicProgram &p, const SolverSettings &settings) {
  const auto sf = to_standard_form(p);
  if (sf.A.rows() == 0) {
    // No constraints: bounded only if the objective is constant.
    SolveResult out;
    out.x.assign(static_cast<std::size_t>(p.num_vars()), 0.0);
    if (sf.c.size() == 0 || sf.c.cwiseAbs().maxCoeff() == 0.0) {
      out.status = SolveStatus::optimal;
      out.objective = sf.objective_offset;
    } else {
      out.status = SolveStatus::unbounded;
      out.objective = p.objective().sense == Sense::maximize ? std::numeric_limits<double>::infinity()
                                                             : -std::numeric_limits<double>::infinity();
    }
    return out;
  }
  HsdeAdmm admm(sf, settings);
  return admm.run();
}

} // namespace panoma::conic
