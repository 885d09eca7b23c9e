#include "panoma/harness.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>

namespace panoma {

namespace {

using cd = std::complex<double>;

std::vector<double> position_grid(double x_max, double step) {
  std::vector<double> xs;
  const auto n = static_cast<long>(std::floor(x_max / step + 1e-9));
  for (long i = 0; i <= n; ++i)
    xs.push_back(static_cast<double>(i) * step);
  if (xs.back() < x_max - 1e-9)
    xs.push_back(x_max);
  return xs;
}

double level(int l, int levels) { return static_cast<double>(l) / (levels - 1); }

// Sum-rate of one family member, or -1 when it breaks the ordering or the
// minimum-rate constraints. Tolerances follow FeasibilityTolerance.
class FamilyEvaluator {
public:
  FamilyEvaluator(const Scenario &s, const ChannelMatrix &h) : s_(s), K_(h.num_users()), N_(h.num_waveguides()) {
    // c[m][k][n] = conj(h_mn) e^{j arg h_kn} sqrt(P_n)
    for (Eigen::Index m = 0; m < K_; ++m)
      for (Eigen::Index k = 0; k < K_; ++k)
        for (Eigen::Index n = 0; n < N_; ++n) {
          const double p = std::sqrt(s.budget[static_cast<std::size_t>(n)]);
          c_[m][k][n] = std::conj(h.h(m, n)) * std::polar(p, std::arg(h.h(k, n)));
        }
  }

  double operator()(const double *split) const {
    double g[2][2] = {};
    for (Eigen::Index m = 0; m < K_; ++m)
      for (Eigen::Index k = 0; k < K_; ++k) {
        cd acc = 0.0;
        for (Eigen::Index n = 0; n < N_; ++n) {
          const double share = K_ == 1 ? 1.0 : (k == 0 ? split[n] : 1.0 - split[n]);
          acc += c_[m][k][n] * std::sqrt(share);
        }
        g[m][k] = std::norm(acc);
      }
    const auto &s2 = s_.noise.sigma2;
    const FeasibilityTolerance tol;
    if (K_ == 1) {
      const double r = std::log2(1.0 + g[0][0] / s2[0]);
      return r >= s_.r_min - tol.rate_abs ? r : -1.0;
    }
    for (int k = 0; k < 2; ++k) {
      const double scale = std::max(1.0, std::max(g[k][0], g[k][1]) / s2[k]);
      if ((g[k][0] - g[k][1]) / s2[k] < -tol.gain_rel * scale)
        return -1.0;
    }
    const double r0 = std::log2(1.0 + std::min(g[0][0] / (g[0][1] + s2[0]), g[1][0] / (g[1][1] + s2[1])));
    const double r1 = std::log2(1.0 + g[1][1] / s2[1]);
    if (r0 < s_.r_min - tol.rate_abs || r1 < s_.r_min - tol.rate_abs)
      return -1.0;
    return r0 + r1;
  }

private:
  const Scenario &s_;
  Eigen::Index K_, N_;
  cd c_[2][2][2];
};

void check_size(const Scenario &s, const OracleOptions &opt) {
  if (s.num_waveguides() > 2 || s.num_users() > 2)
    throw std::invalid_argument("oracle_grid handles at most N = 2 waveguides and K = 2 users");
  if (!(opt.step > 0.0) || opt.levels < 2)
    throw std::invalid_argument("oracle step must be positive and levels at least 2");
}

ChannelMatrix channel_at(const Scenario &s, const LinkModel &link, const std::vector<double> &x) {
  SystemGeometry g = s.geom;
  g.pin_x = x;
  return link.channel(g);
}

PrecoderSet family_member(const Scenario &s, const ChannelMatrix &h, const std::vector<double> &split) {
  const auto K = s.num_users();
  PrecoderSet p = PrecoderSet::zeros(K, s.budget);
  for (std::size_t k = 0; k < K; ++k)
    for (Eigen::Index n = 0; n < h.num_waveguides(); ++n) {
      const double share = K == 1 ? 1.0 : (k == 0 ? split[static_cast<std::size_t>(n)] : 1.0 - split[static_cast<std::size_t>(n)]);
      p.w[k](n) = std::polar(std::sqrt(share * s.budget[static_cast<std::size_t>(n)]),
                             std::arg(h.h(static_cast<Eigen::Index>(k), n)));
    }
  return p;
}

} // namespace

OracleResult oracle_grid(const Scenario &s, const LinkModel &link, const OracleOptions &opt) {
  s.validate();
  check_size(s, opt);
  const auto N = s.num_waveguides();
  const auto xs = position_grid(s.geom.x_max, opt.step);
  const int L = s.num_users() == 1 ? 1 : opt.levels;
  const std::size_t combos = N == 1 ? static_cast<std::size_t>(L) : static_cast<std::size_t>(L) * L;
  const std::size_t positions = N == 1 ? xs.size() : xs.size() * xs.size();

  OracleResult out;
  std::vector<double> x(N), split(N, 1.0);
  for (std::size_t pi = 0; pi < positions; ++pi) {
    x[0] = xs[pi % xs.size()];
    if (N == 2)
      x[1] = xs[pi / xs.size()];
    const ChannelMatrix h = channel_at(s, link, x);
    const FamilyEvaluator eval(s, h);
    double best_here = -1.0;
    for (std::size_t ci = 0; ci < combos; ++ci) {
      if (L > 1) {
        split[0] = level(static_cast<int>(ci % L), L);
        if (N == 2)
          split[1] = level(static_cast<int>(ci / L), L);
      }
      const double r = eval(split.data());
      ++out.evaluated;
      best_here = std::max(best_here, r);
      if (r > out.sum_rate) {
        out.sum_rate = r;
        out.pin_x = x;
        out.split = split;
      }
    }
    if (opt.keep_grid)
      out.grid.push_back({x, best_here});
  }
  if (out.sum_rate >= 0.0)
    out.precoders = family_member(s, channel_at(s, link, out.pin_x), out.split);
  return out;
}

double oracle_projection(const Scenario &s, const LinkModel &link, const std::vector<double> &pin_x,
                         const PrecoderSet &p, const OracleOptions &opt) {
  s.validate();
  check_size(s, opt);
  const auto N = s.num_waveguides();
  if (pin_x.size() != N || p.w.size() != s.num_users())
    throw std::invalid_argument("projection needs one position per waveguide and one precoder per user");
  const auto xs = position_grid(s.geom.x_max, opt.step);
  std::vector<double> x(N), split(N, 1.0);
  for (std::size_t n = 0; n < N; ++n)
    x[n] = *std::min_element(xs.begin(), xs.end(),
                             [&](double a, double b) { return std::abs(a - pin_x[n]) < std::abs(b - pin_x[n]); });
  const ChannelMatrix h = channel_at(s, link, x);
  const FamilyEvaluator eval(s, h);
  if (s.num_users() == 1)
    return eval(split.data());

  std::vector<int> centre(N);
  for (std::size_t n = 0; n < N; ++n) {
    const auto ni = static_cast<Eigen::Index>(n);
    const double p0 = std::norm(p.w[0](ni)), p1 = std::norm(p.w[1](ni));
    const double a = p0 + p1 > 0.0 ? p0 / (p0 + p1) : 0.5;
    centre[n] = static_cast<int>(std::lround(a * (opt.levels - 1)));
  }
  // nearest feasible split in level distance, better rate on ties
  const int reach = opt.levels;
  int best_dist = -1;
  double best = -1.0;
  for (int d0 = -reach; d0 <= reach; ++d0)
    for (int d1 = N == 2 ? -reach : 0; d1 <= (N == 2 ? reach : 0); ++d1) {
      const int l[2] = {centre[0] + d0, N == 2 ? centre[1] + d1 : 0};
      if (l[0] < 0 || l[0] >= opt.levels || l[1] < 0 || l[1] >= opt.levels)
        continue;
      for (std::size_t n = 0; n < N; ++n)
        split[n] = level(l[n], opt.levels);
      const double r = eval(split.data());
      const int dist = std::abs(d0) + std::abs(d1);
      if (r >= 0.0 && (best_dist < 0 || dist < best_dist || (dist == best_dist && r > best))) {
        best_dist = dist;
        best = r;
      }
    }
  return best;
}

OracleComparison compare_with_oracle(const ScenarioConfig &c, const SweepPoint &pt, int drop) {
  OracleComparison out;
  out.point = pt;
  out.drop = drop;
  out.ao = run_trial(c, pt, drop, SchemeKind::proposed);
  out.seed = out.ao.seed;
  if (!out.ao.error.empty())
    throw std::runtime_error("proposed scheme failed: " + out.ao.error);
  const Scenario s = make_scenario(c, pt, draw_users(c, pt.K, out.seed));
  const auto link = LinkModel::make(s.f_c, s.material, false, s.eta_mode);
  const OracleOptions opt{c.oracle_step, c.oracle_levels, false};
  out.oracle = oracle_grid(s, link, opt);
  if (out.ao.status != "infeasible_init")
    out.projected = oracle_projection(s, link, out.ao.pin_x, out.ao.precoders, opt);
  if (out.oracle.sum_rate > 0.0)
    out.ratio = out.ao.sum_rate / out.oracle.sum_rate;
  return out;
}

std::string oracle_csv(const std::vector<OracleComparison> &rows) {
  std::string s = "f_c_ghz,K,N,p_max_dbm,drop,seed,oracle_rate,oracle_pin_x,ao_rate,ao_feasible,ao_pin_x,projected_rate,ratio\n";
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  auto joined = [&](const std::vector<double> &v) {
    std::string r;
    for (std::size_t i = 0; i < v.size(); ++i)
      r += (i ? ";" : "") + num(v[i]);
    return r;
  };
  for (const auto &r : rows)
    s += num(r.point.f_c_ghz) + "," + std::to_string(r.point.K) + "," + std::to_string(r.point.N) + "," +
         num(r.point.p_max_dbm) + "," + std::to_string(r.drop) + "," + std::to_string(r.seed) + "," +
         num(r.oracle.sum_rate) + "," + joined(r.oracle.pin_x) + "," + num(r.ao.sum_rate) + "," +
         (r.ao.feasible ? "1" : "0") + "," + joined(r.ao.pin_x) + "," + num(r.projected) + "," + num(r.ratio) + "\n";
  return s;
}

} // namespace panoma
