#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "panoma/physics.hpp"

using namespace panoma;

namespace {

SystemGeometry one_user(double ux, double uy, double pin) {
  SystemGeometry g;
  g.d = 3.0;
  g.feed_y = {45.0};
  g.pin_x = {pin};
  g.users = {{ux, uy}};
  return g;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

// reference values: tests/oracles/physics_values.py

TEST_CASE("guided wavelength") {
  CHECK(rel(guided_wavelength(28e9, 1.42), 0.0075400517605633802817) < 1e-14);
  CHECK(rel(guided_wavelength(6e9, 1.42), 0.035186908215962441315) < 1e-14);
  CHECK(guided_wavelength(28e9, 1.0) == doctest::Approx(kSpeedOfLight / 28e9).epsilon(1e-15));
  CHECK_THROWS_AS(guided_wavelength(0.0, 1.42), std::domain_error);
  CHECK_THROWS_AS(guided_wavelength(28e9, 0.9), std::domain_error);
}

TEST_CASE("attenuation constant of PTFE") {
  const auto ptfe = WaveguideMaterial::ptfe();
  CHECK(rel(attenuation_constant(ptfe, PhysicalConstants::at(28e9, 1.42)), 0.086785695275182317291) < 1e-13);
  CHECK(rel(attenuation_constant(ptfe, PhysicalConstants::at(6e9, 1.42)), 0.018596934701824782277) < 1e-13);
  CHECK(rel(attenuation_constant(ptfe, PhysicalConstants::at(15e9, 1.42)), 0.046492336754561955692) < 1e-13);
  CHECK(attenuation_constant(ptfe.lossless(), PhysicalConstants::at(28e9, 1.42)) == 0.0);
}

TEST_CASE("attenuation grows linearly with the carrier") {
  const auto ptfe = WaveguideMaterial::ptfe();
  for (double f1 : {1e9, 6e9, 15e9})
    for (double f2 : {2e9, 28e9, 60e9}) {
      const double a1 = attenuation_constant(ptfe, PhysicalConstants::at(f1, 1.42));
      const double a2 = attenuation_constant(ptfe, PhysicalConstants::at(f2, 1.42));
      CHECK(rel(a2 / a1, f2 / f1) < 1e-9);
    }
}

TEST_CASE("constants") {
  const auto pc = PhysicalConstants::at(28e9, 1.42);
  CHECK(rel(pc.eta, 0.00085202592129231111766) < 1e-14);
  CHECK(pc.lambda_g < pc.lambda);
  const auto sq = PhysicalConstants::at(28e9, 1.42, EtaMode::squared);
  CHECK(rel(sq.eta, pc.eta * pc.eta) < 1e-14);
  CHECK_THROWS(PhysicalConstants::at(-1.0, 1.42));
}

TEST_CASE("user to PA distance") {
  SystemGeometry g = one_user(3.0, 45.0, 3.0);
  CHECK(user_pa_distance(g, 0, 0) == 3.0);
  g = one_user(0.0, 45.0, 4.0);
  CHECK(user_pa_distance(g, 0, 0) == doctest::Approx(5.0).epsilon(1e-15));
  g = one_user(0.0, 40.0, 10.0);
  CHECK(rel(user_pa_distance(g, 0, 0), 11.575836902790225474) < 1e-14);
  CHECK_THROWS_AS(user_pa_distance(g, 1, 0), std::out_of_range);
  CHECK_THROWS_AS(user_pa_distance(g, 0, 1), std::out_of_range);
}

TEST_CASE("channel coefficient") {
  const auto pc = PhysicalConstants::at(28e9, 1.42);
  const auto ptfe = WaveguideMaterial::ptfe();

  SUBCASE("PA at the feed directly above the user") {
    const auto g = one_user(0.0, 45.0, 0.0);
    const auto h = channel_coefficient(g, ptfe, pc, 0, 0, false);
    CHECK(rel(std::abs(h), 0.0097298276865655123919) < 1e-13);
    const double phase = std::remainder(-2.0 * std::numbers::pi * 3.0 / pc.lambda, 2.0 * std::numbers::pi);
    CHECK(std::abs(std::remainder(std::arg(h) - phase, 2.0 * std::numbers::pi)) < 1e-9);
  }
  SUBCASE("generic point") {
    const auto g = one_user(12.0, 47.0, 20.0);
    const auto h = channel_coefficient(g, ptfe, pc, 0, 0, false);
    // phase of a 10-metre path at 28 GHz carries ~1e-12 relative rounding
    CHECK(std::abs(h.real() - 0.00053764185632422553484) < 1e-14);
    CHECK(std::abs(h.imag() + 0.00023402641400714357546) < 1e-14);
  }
  SUBCASE("loss factor at 20 m") {
    const auto g = one_user(12.0, 47.0, 20.0);
    const double ratio = std::abs(channel_coefficient(g, ptfe, pc, 0, 0, false)) /
                         std::abs(channel_coefficient(g, ptfe, pc, 0, 0, true));
    CHECK(rel(ratio, 0.17627431215397322412) < 1e-12);
  }
  SUBCASE("lossless flag equals a loss-free material") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 100.0);
    for (int i = 0; i < 50; ++i) {
      const auto g = one_user(U(rng), U(rng), U(rng));
      CHECK(channel_coefficient(g, ptfe, pc, 0, 0, true) == channel_coefficient(g, ptfe.lossless(), pc, 0, 0, false));
    }
  }
  SUBCASE("power ratio follows exp(-2 alpha x)") {
    const double a = attenuation_constant(ptfe, pc);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 100.0);
    for (int i = 0; i < 50; ++i) {
      const double x = U(rng);
      const auto g = one_user(U(rng), U(rng), x);
      const double r = std::norm(channel_coefficient(g, ptfe, pc, 0, 0, false)) /
                       std::norm(channel_coefficient(g, ptfe, pc, 0, 0, true));
      CHECK(rel(r, std::exp(-2.0 * a * x)) < 1e-12);
    }
  }
  SUBCASE("magnitude bound sqrt(eta)/d") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 100.0);
    for (int i = 0; i < 50; ++i) {
      const auto g = one_user(U(rng), U(rng), U(rng));
      CHECK(std::abs(channel_coefficient(g, ptfe, pc, 0, 0, false)) <= std::sqrt(pc.eta) / g.d * (1 + 1e-15));
    }
  }
}

TEST_CASE("magnitude decreases along the guide for a user at x = 0") {
  const auto pc = PhysicalConstants::at(28e9, 1.42);
  double prev = std::numeric_limits<double>::infinity();
  for (double x = 0.0; x <= 100.0; x += 0.5) {
    const auto g = one_user(0.0, 30.0, x);
    const double m = std::abs(channel_coefficient(g, WaveguideMaterial::ptfe(), pc, 0, 0, false));
    CHECK(m < prev);
    prev = m;
  }
}

TEST_CASE("channel matrix") {
  const auto pc = PhysicalConstants::at(28e9, 1.42);
  const auto ptfe = WaveguideMaterial::ptfe();
  SystemGeometry g;
  g.feed_y = centred_feed_points(2, 10.0, 50.0);
  CHECK(g.feed_y == std::vector<double>{45.0, 55.0});
  g.pin_x = {12.0, 30.0};
  g.users = {{5.0, 20.0}, {60.0, 80.0}};
  const auto h = channel_matrix(g, ptfe, pc, false);
  REQUIRE(h.num_users() == 2);
  REQUIRE(h.num_waveguides() == 2);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t n = 0; n < 2; ++n)
      CHECK(h.h(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) ==
            channel_coefficient(g, ptfe, pc, k, n, false));

  SystemGeometry swapped = g;
  std::swap(swapped.users[0], swapped.users[1]);
  const auto hs = channel_matrix(swapped, ptfe, pc, false);
  CHECK(hs.h.row(0) == h.h.row(1));
  CHECK(hs.h.row(1) == h.h.row(0));

  SystemGeometry empty = g;
  empty.users.clear();
  CHECK_THROWS(channel_matrix(empty, ptfe, pc, false));
}

TEST_CASE("geometry validation") {
  SystemGeometry g;
  g.feed_y = {55.0, 45.0};
  g.pin_x = {0.0, 0.0};
  g.users = {{1.0, 1.0}};
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g.feed_y = {45.0, 55.0};
  CHECK_NOTHROW(g.validate());
  g.d = 0.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("conventional array") {
  const auto pc = PhysicalConstants::at(28e9, 1.42);
  SystemGeometry g;
  g.feed_y = {45.0, 55.0};
  g.pin_x = {0.0, 0.0};
  g.users = {{30.0, 50.0}};
  const auto h = conventional_array_channel(g, pc);
  const double dist = std::sqrt(30.0 * 30.0 + 9.0);
  // broadside user: equal magnitudes, no waveguide loss
  CHECK(rel(std::abs(h.h(0, 0)), std::sqrt(pc.eta) / dist) < 1e-12);
  CHECK(rel(std::abs(h.h(0, 1)), std::sqrt(pc.eta) / dist) < 1e-12);
}
