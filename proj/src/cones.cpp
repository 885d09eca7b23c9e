#include "panoma/cones.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace panoma::conic {

namespace {
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kRhoLimit = 500.0;
} // namespace

void project_nonneg(std::span<double> v) {
  for (double &x : v)
    x = std::max(x, 0.0);
}

void project_soc(std::span<double> v) {
  if (v.empty())
    return;
  const double t = v[0];
  double nx2 = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i)
    nx2 += v[i] * v[i];
  const double nx = std::sqrt(nx2);
  if (nx <= t)
    return;
  if (nx <= -t) {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  const double a = 0.5 * (t + nx);
  v[0] = a;
  const double f = a / nx;
  for (std::size_t i = 1; i < v.size(); ++i)
    v[i] *= f;
}

int svec_size(int n) { return n * (n + 1) / 2; }

Eigen::MatrixXd smat(std::span<const double> v, int n) {
  Eigen::MatrixXd m(n, n);
  std::size_t idx = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) {
      const double val = (i == j) ? v[idx] : v[idx] / kSqrt2;
      m(i, j) = val;
      m(j, i) = val;
      ++idx;
    }
  return m;
}

Eigen::VectorXd svec(const Eigen::MatrixXd &m) {
  const auto n = static_cast<int>(m.rows());
  Eigen::VectorXd v(svec_size(n));
  Eigen::Index idx = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i)
      v(idx++) = (i == j) ? m(i, j) : kSqrt2 * 0.5 * (m(i, j) + m(j, i));
  return v;
}

void project_psd(std::span<double> v, int n) {
  if (n == 1) {
    v[0] = std::max(v[0], 0.0);
    return;
  }
  const Eigen::MatrixXd m = smat(v, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd lam = es.eigenvalues();
  if (lam.minCoeff() >= 0.0)
    return;
  const Eigen::MatrixXd &U = es.eigenvectors();
  const Eigen::MatrixXd p = U * lam.cwiseMax(0.0).asDiagonal() * U.transpose();
  const Eigen::VectorXd out = svec(p);
  std::copy(out.data(), out.data() + out.size(), v.begin());
}

bool in_exp_cone(const double *v, double tol) {
  const double r = v[0], s = v[1], t = v[2];
  if (s > 0.0)
    return s * std::exp(r / s) - t <= tol;
  return r <= tol && std::abs(s) <= tol && t >= -tol;
}

bool in_exp_dual_cone(const double *v, double tol) {
  const double u = v[0], w = v[1], z = v[2];
  if (u < 0.0)
    return -u * std::exp(w / u) - std::numbers::e * z <= tol;
  return std::abs(u) <= tol && w >= -tol && z >= -tol;
}

namespace {

// Stationarity residual of the boundary projection, parametrised by
// rho = x / y of the boundary point (rho, 1, exp(rho)) * scale.
struct ExpRoot {
  double r0, s0, t0;

  double value(double rho) const {
    const double e = std::exp(rho);
    return e * ((rho - 1.0) * r0 + s0) - (r0 - rho * s0) / e - t0 * (rho * rho - rho + 1.0);
  }
  double slope(double rho) const {
    const double e = std::exp(rho);
    return e * ((rho - 1.0) * r0 + s0) + e * r0 + (r0 - rho * s0) / e + s0 / e -
           t0 * (2.0 * rho - 1.0);
  }
};

double solve_bracketed(const ExpRoot &f, double lo, double hi) {
  double flo = f.value(lo);
  double fhi = f.value(hi);
  if (flo > 0.0 && fhi > 0.0)
    return lo;
  if (flo < 0.0 && fhi < 0.0)
    return hi;
  double rho = 0.5 * (lo + hi);
  double dx_old = hi - lo;
  for (int it = 0; it < 300; ++it) {
    const double val = f.value(rho);
    if (val == 0.0)
      return rho;
    if (val < 0.0)
      lo = rho;
    else
      hi = rho;
    const double der = f.slope(rho);
    double next = rho - val / der;
    // Newton only while it lands inside the bracket and halves the step
    if (!(der > 0.0) || !(next > lo && next < hi) || std::abs(2.0 * val) > std::abs(dx_old * der))
      next = 0.5 * (lo + hi);
    dx_old = std::abs(next - rho);
    if (dx_old <= 1e-15 * std::max(1.0, std::abs(rho)) || hi - lo < 1e-15 * std::max(1.0, std::abs(rho)))
      return next;
    rho = next;
  }
  return rho;
}

double dist2(const double *a, const double *b) {
  return (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
         (a[2] - b[2]) * (a[2] - b[2]);
}

} // namespace

void project_exp(std::span<double> v) {
  const double r0 = v[0], s0 = v[1], t0 = v[2];

  if ((s0 > 0.0 && s0 * std::exp(r0 / s0) <= t0) || (r0 <= 0.0 && s0 == 0.0 && t0 >= 0.0))
    return;
  if ((r0 > 0.0 && r0 * std::exp(s0 / r0) + std::numbers::e * t0 <= 0.0) ||
      (r0 == 0.0 && s0 <= 0.0 && t0 <= 0.0)) {
    v[0] = v[1] = v[2] = 0.0;
    return;
  }
  if (r0 <= 0.0 && s0 <= 0.0) {
    v[1] = 0.0;
    v[2] = std::max(t0, 0.0);
    return;
  }

  const ExpRoot f{r0, s0, t0};
  double lo, hi;
  if (r0 > 0.0 && s0 > 0.0) {
    lo = 1.0 - s0 / r0;
    hi = r0 / s0;
  } else if (r0 > 0.0) {
    lo = 1.0 - s0 / r0;
    hi = lo + 1.0;
    while (f.value(hi) < 0.0 && hi < kRhoLimit)
      hi = lo + 2.0 * (hi - lo);
  } else {
    hi = r0 / s0;
    lo = hi - 1.0;
    while (f.value(lo) > 0.0 && lo > -kRhoLimit)
      lo = hi - 2.0 * (hi - lo);
  }
  lo = std::max(lo, -kRhoLimit);
  hi = std::min(hi, kRhoLimit);

  const double orig[3] = {r0, s0, t0};
  double best[3] = {0.0, 0.0, 0.0};
  double best_d = dist2(orig, best);
  const double ray[3] = {std::min(r0, 0.0), 0.0, std::max(t0, 0.0)};
  if (dist2(orig, ray) < best_d) {
    std::copy(ray, ray + 3, best);
    best_d = dist2(orig, ray);
  }
  if (s0 > 0.0) {
    const double lift[3] = {r0, s0, std::max(t0, s0 * std::exp(r0 / s0))};
    if (std::isfinite(lift[2]) && dist2(orig, lift) < best_d) {
      std::copy(lift, lift + 3, best);
      best_d = dist2(orig, lift);
    }
  }
  if (lo < hi) {
    const double rho = solve_bracketed(f, lo, hi);
    const double scale = ((rho - 1.0) * r0 + s0) / (rho * rho - rho + 1.0);
    if (scale > 0.0 && std::isfinite(scale)) {
      const double cand[3] = {scale * rho, scale, scale * std::exp(rho)};
      if (std::isfinite(cand[2]) && dist2(orig, cand) < best_d)
        std::copy(cand, cand + 3, best);
    }
  }
  std::copy(best, best + 3, v.begin());
}

void project_exp_dual(std::span<double> v) {
  double neg[3] = {-v[0], -v[1], -v[2]};
  project_exp(std::span<double>(neg, 3));
  v[0] += neg[0];
  v[1] += neg[1];
  v[2] += neg[2];
}

} // namespace panoma::conic
