#pragma once

// Pinching-antenna geometry, dielectric waveguide losses and the
// user <-> pinching-antenna channel coefficients.
//
// Coordinates: waveguides run along x at height d, the n-th one starting
// at its feed point (0, feed_y[n], d). The single pinching antenna on
// waveguide n sits at (pin_x[n], feed_y[n], d). Users lie on the ground
// plane at (x_k, y_k, 0). Everything is SI: metres, hertz, nepers/m.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace panoma {

inline constexpr double kSpeedOfLight = 2.99792458e8;

/// How the free-space gain factor is built from the carrier.
/// `linear` uses c/(4 pi f_c) as an amplitude-squared factor; `squared`
/// uses the Friis form (c/(4 pi f_c))^2.
enum class EtaMode { linear, squared };

struct PhysicalConstants {
  double c = kSpeedOfLight;
  double f_c = 0.0;      // Hz
  double eta = 0.0;      // free-space gain factor
  double lambda = 0.0;   // free-space wavelength (m)
  double lambda_g = 0.0; // guided wavelength (m)
  double eta_eff = 1.0;  // effective refractive index of the guide

  /// Throws std::domain_error for f_c <= 0 or eta_eff < 1.
  static PhysicalConstants at(double f_c, double eta_eff, EtaMode mode = EtaMode::linear);
};

struct WaveguideMaterial {
  double eta_eff = 1.42;
  double eps_r = 2.1;
  double tan_delta = 2e-4;

  /// Polytetrafluoroethylene strip.
  static WaveguideMaterial ptfe() { return {}; }

  /// Same guide with a perfect (loss-free) dielectric.
  WaveguideMaterial lossless() const {
    WaveguideMaterial m = *this;
    m.tan_delta = 0.0;
    return m;
  }

  void validate() const;
};

struct UserPosition {
  double x = 0.0;
  double y = 0.0;
};

struct SystemGeometry {
  double d = 3.0;                  // waveguide height
  std::vector<double> feed_y;      // one per waveguide, strictly increasing
  std::vector<double> pin_x;       // one per waveguide
  std::vector<UserPosition> users; // one per user
  double x_max = 100.0;

  std::size_t num_waveguides() const { return feed_y.size(); }
  std::size_t num_users() const { return users.size(); }

  /// Checks the structural invariants (sizes, d > 0, increasing feeds).
  /// Pin positions outside [0, x_max] are a constraint violation reported by
  /// the feasibility checker, not a structural error.
  void validate() const;
};

/// Feed points spaced `spacing` apart and centred on `centre_y`.
std::vector<double> centred_feed_points(std::size_t n, double spacing, double centre_y);

struct ChannelMatrix {
  Eigen::MatrixXcd h; // K x N, row k is h_k^T
  bool lossless = false;

  Eigen::Index num_users() const { return h.rows(); }
  Eigen::Index num_waveguides() const { return h.cols(); }
  Eigen::VectorXcd user(Eigen::Index k) const { return h.row(k).transpose(); }
};

/// lambda / eta_eff with lambda = c / f_c.
double guided_wavelength(double f_c, double eta_eff);

/// lambda_g * eps_r * pi * f_c^2 / c^2 * tan_delta, in nepers per metre.
double attenuation_constant(const WaveguideMaterial &mat, const PhysicalConstants &pc);

/// Distance from user k to the pinching antenna on waveguide n.
double user_pa_distance(const SystemGeometry &geom, std::size_t k, std::size_t n);

/// Same distance for an explicit PA coordinate; used by the placement solver.
double user_pa_distance(const SystemGeometry &geom, std::size_t k, std::size_t n, double pin_x);

/// End-to-end coefficient through waveguide n's feed, along the guide to its
/// pinching antenna and through free space to user k.
std::complex<double> channel_coefficient(const SystemGeometry &geom, const WaveguideMaterial &mat,
                                         const PhysicalConstants &pc, std::size_t k,
                                         std::size_t n, bool lossless);

ChannelMatrix channel_matrix(const SystemGeometry &geom, const WaveguideMaterial &mat,
                             const PhysicalConstants &pc, bool lossless);

/// Bundles the per-frequency quantities every consumer of the channel needs.
struct LinkModel {
  PhysicalConstants pc;
  WaveguideMaterial mat;
  double alpha_d = 0.0;
  bool lossless = false;

  static LinkModel make(double f_c, const WaveguideMaterial &mat, bool lossless,
                        EtaMode mode = EtaMode::linear);

  /// Attenuation constant actually applied (0 when lossless).
  double effective_alpha() const { return lossless ? 0.0 : alpha_d; }

  ChannelMatrix channel(const SystemGeometry &geom) const {
    return channel_matrix(geom, mat, pc, lossless);
  }
};

/// Conventional fixed array: N elements at half-wavelength spacing along y,
/// centred at (0, mean(feed_y), d). Amplitude uses the distance to the array
/// centre, phase the exact per-element distance.
ChannelMatrix conventional_array_channel(const SystemGeometry &geom, const PhysicalConstants &pc);

} // namespace panoma
