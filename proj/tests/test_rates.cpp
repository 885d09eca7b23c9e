#include "doctest.h"

#include <cmath>
#include <random>

#include "panoma/rates.hpp"
#include "support.hpp"

using namespace panoma;

namespace {

// Two users on one guide: h = 1e-3 * [1, 0.5j], w0 = 0.6, w1 = 0.8j, sigma2 = 1e-7.
struct TwoUser {
  ChannelMatrix h;
  PrecoderSet p = PrecoderSet::zeros(2, {1.0});
  NoiseSpec noise = NoiseSpec::uniform(2, 1e-7);
  TwoUser() {
    h.h.resize(2, 1);
    h.h(0, 0) = {1e-3, 0.0};
    h.h(1, 0) = {0.0, 0.5e-3};
    p.w[0](0) = {0.6, 0.0};
    p.w[1](0) = {0.0, 0.8};
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

// reference values: tests/oracles/physics_values.py

TEST_CASE("SINR table of a two-user instance") {
  const TwoUser t;
  CHECK(rel(sinr(t.h, t.p, t.noise, 0, 0), 0.48648648648648648922) < 1e-12);
  CHECK(rel(sinr(t.h, t.p, t.noise, 0, 1), 0.34615384615384615939) < 1e-12);
  CHECK(rel(sinr(t.h, t.p, t.noise, 1, 1), 1.6000000000000000666) < 1e-12);
  CHECK_THROWS_AS(sinr(t.h, t.p, t.noise, 1, 0), std::invalid_argument);

  const auto rep = rate_report(t.h, t.p, t.noise);
  CHECK(rel(rep.per_user_rate[0], 0.42884329880387430086) < 1e-12);
  CHECK(rel(rep.per_user_rate[1], 1.3785116232537298495) < 1e-12);
  CHECK(rel(rep.sum_rate, 1.8073549220576041503) < 1e-12);
  CHECK(rep.binding_decoder[0] == 1);
}

TEST_CASE("single user capacity") {
  ChannelMatrix h;
  h.h.resize(1, 2);
  h.h << std::complex<double>(1e-3, 2e-3), std::complex<double>(-1e-3, 0.5e-3);
  PrecoderSet p = PrecoderSet::zeros(1, {1.0, 1.0});
  p.w[0] << std::complex<double>(0.3, 0.1), std::complex<double>(0.2, -0.4);
  const NoiseSpec noise = NoiseSpec::uniform(1, 1e-8);
  const double g = std::norm(h.user(0).dot(p.w[0]));
  CHECK(rel(sum_rate(h, p, noise), std::log2(1.0 + g / 1e-8)) < 1e-14);
  CHECK(ordering_satisfied(h, p, 0.0).all());
}

TEST_CASE("zero precoders") {
  const TwoUser t;
  const auto zero = PrecoderSet::zeros(2, {1.0});
  CHECK(sum_rate(t.h, zero, t.noise) == 0.0);
  CHECK(user_rate(t.h, zero, t.noise, 0) == 0.0);
  const auto rep = check_feasibility(SystemGeometry{}, t.h, zero, t.noise, 0.5, 100.0);
  for (double s : rep.c3_slack)
    CHECK(s == -0.5);
}

TEST_CASE("ties pick the first decoder") {
  ChannelMatrix h;
  h.h = Eigen::MatrixXcd::Constant(3, 1, {1e-3, 0.0});
  PrecoderSet p = PrecoderSet::zeros(3, {1.0});
  for (auto &w : p.w)
    w(0) = 0.5;
  const auto rep = rate_report(h, p, NoiseSpec::uniform(3, 1e-7));
  CHECK(rep.binding_decoder[0] == 0);
  CHECK(rep.binding_decoder[1] == 1);
  CHECK(rep.per_user_rate[0] == doctest::Approx(std::log2(1.0 + rep.sinr(0, 0))));
}

TEST_CASE("brute-force equivalence on random instances") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 200; ++i) {
    const int K = 1 + i % 4, N = 1 + (i / 4) % 3;
    const auto r = testing::random_instance(rng, K, N);
    const double ref = testing::brute_force_sum_rate(r.hv, r.wv, r.noise.sigma2);
    CHECK(rel(sum_rate(r.h, r.p, r.noise), ref) < 1e-10);
  }
}

TEST_CASE("scaling channel power and noise together leaves the SINR unchanged") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    auto r = testing::random_instance(rng, 3, 2);
    const auto a = rate_report(r.h, r.p, r.noise);
    r.h.h *= std::sqrt(7.5);
    for (auto &s : r.noise.sigma2)
      s *= 7.5;
    const auto b = rate_report(r.h, r.p, r.noise);
    for (int k = 0; k < 3; ++k)
      for (int m = k; m < 3; ++m)
        CHECK(rel(b.sinr(k, m), a.sinr(k, m)) < 1e-12);
  }
}

TEST_CASE("rates do not increase with noise") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20; ++i) {
    auto r = testing::random_instance(rng, 4, 2);
    const auto before = rate_report(r.h, r.p, r.noise);
    r.noise.sigma2[2] *= 3.0;
    const auto after = rate_report(r.h, r.p, r.noise);
    for (int k = 0; k <= 2; ++k)
      CHECK(after.per_user_rate[static_cast<std::size_t>(k)] <= before.per_user_rate[static_cast<std::size_t>(k)]);
  }
}

TEST_CASE("strict ordering gives a unique binding decoder") {
  // every receiver sees gains strictly decreasing in the message index
  ChannelMatrix h;
  h.h.resize(3, 1);
  h.h << 1e-3, 2e-3, 3e-3;
  PrecoderSet p = PrecoderSet::zeros(3, {1.0});
  p.w[0](0) = 0.8;
  p.w[1](0) = 0.5;
  p.w[2](0) = 0.2;
  REQUIRE(ordering_satisfied(h, p, 0.0).all());
  const auto rep = rate_report(h, p, NoiseSpec::uniform(3, 1e-7));
  for (int k = 0; k < 2; ++k) {
    int at_min = 0;
    const double worst = rep.sinr(k, rep.binding_decoder[static_cast<std::size_t>(k)]);
    for (int m = k; m < 3; ++m)
      at_min += rep.sinr(k, m) == worst ? 1 : 0;
    CHECK(at_min == 1);
  }
}

TEST_CASE("ordering report finds the swapped pair") {
  ChannelMatrix h;
  PrecoderSet p = PrecoderSet::zeros(3, {1.0});
  h.h.resize(3, 1);
  h.h << 1e-3, 2e-3, 3e-3;
  p.w[0](0) = 0.8;
  p.w[1](0) = 0.2; // swapped with w2
  p.w[2](0) = 0.5;
  const auto rep = ordering_satisfied(h, p, 0.0);
  CHECK_FALSE(rep.all());
  for (std::size_t k = 0; k < 3; ++k) {
    REQUIRE(rep.first_violation[k].has_value());
    CHECK(rep.first_violation[k]->first == 1);
    CHECK(rep.first_violation[k]->second == 2);
  }
  PrecoderSet same = PrecoderSet::zeros(3, {1.0});
  for (auto &w : same.w)
    w(0) = 0.4;
  CHECK(ordering_satisfied(h, same, 0.0).all());
}

TEST_CASE("feasibility report") {
  const TwoUser t;
  SystemGeometry g;
  g.pin_x = {101.0};
  auto p = t.p;
  p.budget = {0.36 + 0.64};
  const auto rep = check_feasibility(g, t.h, p, t.noise, 0.5, 100.0);
  CHECK(rep.c2_slack[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(rep.c2_ok(p.budget));
  CHECK(rep.c4_slack[0] == doctest::Approx(-1.0));
  CHECK_FALSE(rep.c4_ok());
  CHECK_FALSE(rep.c3_ok()); // user 0 gets 0.43 < 0.5
  CHECK_FALSE(rep.feasible(p.budget));
}
