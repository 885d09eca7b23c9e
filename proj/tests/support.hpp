#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "panoma/harness.hpp"
#include "panoma/rates.hpp"

namespace panoma::testing {

/// Sum-rate written out term by term from the SINR definition, with plain
/// loops over complex numbers and no shared code with the rate engine.
inline double brute_force_sum_rate(const std::vector<std::vector<std::complex<double>>> &h, // [user][guide]
                                   const std::vector<std::vector<std::complex<double>>> &w, // [user][guide]
                                   const std::vector<double> &sigma2) {
  const std::size_t K = h.size();
  auto received = [&](std::size_t m, std::size_t k) {
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < h[m].size(); ++n)
      acc += std::conj(h[m][n]) * w[k][n];
    return std::norm(acc);
  };
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double worst = 1e300;
    for (std::size_t m = k; m < K; ++m) {
      double interference = 0.0;
      for (std::size_t b = k + 1; b < K; ++b)
        interference += received(m, b);
      worst = std::min(worst, received(m, k) / (interference + sigma2[m]));
      if (k + 1 == K)
        break;
    }
    total += std::log2(1.0 + worst);
  }
  return total;
}

struct RandomInstance {
  ChannelMatrix h;
  PrecoderSet p;
  NoiseSpec noise;
  std::vector<std::vector<std::complex<double>>> hv, wv;
};

inline RandomInstance random_instance(std::mt19937_64 &rng, int K, int N) {
  std::normal_distribution<double> G(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.1, 2.0);
  RandomInstance r;
  r.h.h.resize(K, N);
  r.hv.assign(K, std::vector<std::complex<double>>(N));
  r.wv.assign(K, std::vector<std::complex<double>>(N));
  r.p = PrecoderSet::zeros(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(N), 10.0));
  for (int k = 0; k < K; ++k) {
    for (int n = 0; n < N; ++n) {
      const std::complex<double> hk(G(rng), G(rng)), wk(G(rng), G(rng));
      r.h.h(k, n) = r.hv[k][n] = hk * 1e-3;
      r.p.w[static_cast<std::size_t>(k)](n) = r.wv[k][n] = wk;
    }
    r.noise.sigma2.push_back(U(rng) * 1e-6);
  }
  return r;
}

/// Drop `seed` of the default geometry with K users and N guides.
inline Scenario small_scenario(std::uint64_t seed, int K, int N, double f_ghz = 28.0, double p_dbm = 10.0) {
  ScenarioConfig c;
  c.master_seed = seed;
  const SweepPoint pt{f_ghz, K, N, p_dbm};
  return make_scenario(c, pt, draw_users(c, K, derive_seed(seed, static_cast<std::uint64_t>(K), 0)));
}

} // namespace panoma::testing
