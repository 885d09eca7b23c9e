#include "doctest.h"

#include <cmath>

#include "panoma/ao.hpp"
#include "support.hpp"

using namespace panoma;

TEST_CASE("dBm conversions") {
  CHECK(dbm_to_watt(30.0) == doctest::Approx(1.0));
  CHECK(dbm_to_watt(-90.0) == doctest::Approx(1e-12));
  for (double d : {-90.0, -3.0, 0.0, 17.5, 20.0})
    CHECK(watt_to_dbm(dbm_to_watt(d)) == doctest::Approx(d).epsilon(1e-13));
}

TEST_CASE("scheme names round trip") {
  for (auto k : {SchemeKind::proposed, SchemeKind::ideal_pin, SchemeKind::naive_pin, SchemeKind::conventional})
    CHECK(scheme_from_string(to_string(k)) == k);
  CHECK_FALSE(scheme_from_string("best").has_value());
}

TEST_CASE("users are sorted by strength") {
  const Scenario s = testing::small_scenario(11, 5, 2);
  SystemGeometry g = s.geom;
  g.pin_x = initial_positions(s);
  const auto h = LinkModel::make(s.f_c, s.material, true, s.eta_mode).channel(g);
  for (Eigen::Index k = 1; k < h.num_users(); ++k)
    CHECK(h.user(k - 1).norm() <= h.user(k).norm() * (1.0 + 1e-12));
}

TEST_CASE("initial point is feasible and within range") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Scenario s = testing::small_scenario(seed, 4, 2, 6.0);
    const auto link = LinkModel::make(s.f_c, s.material, false, s.eta_mode);
    const auto init = init_scenario(s, link);
    REQUIRE(init.feasible);
    SystemGeometry g = s.geom;
    g.pin_x = init.pin_x;
    const auto h = link.channel(g);
    CHECK(check_feasibility(g, h, init.precoders, s.noise, s.r_min, g.x_max).feasible(s.budget));
    CHECK(sum_rate(h, init.precoders, s.noise) == doctest::Approx(init.sum_rate).epsilon(1e-10));
  }
}

TEST_CASE("alternating optimisation improves on its start") {
  AoCaps caps;
  caps.tau_max = 4;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Scenario s = testing::small_scenario(seed, 3, 2, 6.0);
    const auto link = LinkModel::make(s.f_c, s.material, false, s.eta_mode);
    const auto init = init_scenario(s, link);
    const auto t = run_ao(s, link, true, caps);
    CHECK(t.sum_rate >= init.sum_rate - 1e-6);
    for (std::size_t i = 1; i < t.accepted_rates.size(); ++i)
      CHECK(t.accepted_rates[i] >= t.accepted_rates[i - 1] - 1e-6);
    for (double x : t.pin_x) {
      CHECK(x >= 0.0);
      CHECK(x <= s.geom.x_max);
    }
  }
}

TEST_CASE("schemes are scored on their own channel") {
  AoCaps caps;
  caps.tau_max = 3;
  const Scenario s = testing::small_scenario(7, 3, 2, 28.0, 15.0);
  double ideal = 0.0, proposed = 0.0;
  for (auto kind : {SchemeKind::proposed, SchemeKind::ideal_pin, SchemeKind::naive_pin, SchemeKind::conventional}) {
    CAPTURE(to_string(kind));
    const auto r = run_scheme(s, kind, caps);
    const auto h = evaluation_channel(s, kind, r.pin_x);
    CHECK(r.sum_rate == doctest::Approx(sum_rate(h, r.precoders, s.noise)).epsilon(1e-10));
    CHECK(r.per_user_rate.size() == 3);
    if (kind == SchemeKind::ideal_pin)
      ideal = r.sum_rate;
    if (kind == SchemeKind::proposed) {
      proposed = r.sum_rate;
      CHECK(r.feasible);
    }
  }
  // the lossless channel dominates the lossy one pointwise
  CHECK(ideal >= proposed - 1e-6);
}
