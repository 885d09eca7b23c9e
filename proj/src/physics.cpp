#include "panoma/physics.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace panoma {

namespace {
constexpr double kPi = std::numbers::pi;
}

PhysicalConstants PhysicalConstants::at(double f_c, double eta_eff, EtaMode mode) {
  PhysicalConstants pc;
  pc.f_c = f_c;
  pc.eta_eff = eta_eff;
  pc.lambda_g = guided_wavelength(f_c, eta_eff);
  pc.lambda = pc.c / f_c;
  const double amplitude = pc.c / (4.0 * kPi * f_c);
  pc.eta = (mode == EtaMode::linear) ? amplitude : amplitude * amplitude;
  return pc;
}

void WaveguideMaterial::validate() const {
  if (!(eta_eff >= 1.0))
    throw std::domain_error("effective refractive index must be >= 1");
  if (!(eps_r > 0.0))
    throw std::domain_error("dielectric constant must be positive");
  if (!(tan_delta >= 0.0))
    throw std::domain_error("loss tangent must be non-negative");
}

void SystemGeometry::validate() const {
  if (!(d > 0.0))
    throw std::invalid_argument("waveguide height d must be positive");
  if (feed_y.empty())
    throw std::invalid_argument("at least one waveguide is required");
  if (users.empty())
    throw std::invalid_argument("at least one user is required");
  if (pin_x.size() != feed_y.size())
    throw std::invalid_argument("pin_x and feed_y must have the same length");
  for (std::size_t n = 1; n < feed_y.size(); ++n)
    if (!(feed_y[n] > feed_y[n - 1]))
      throw std::invalid_argument("feed points must be strictly increasing in y");
  if (!(x_max >= 0.0))
    throw std::invalid_argument("x_max must be non-negative");
}

std::vector<double> centred_feed_points(std::size_t n, double spacing, double centre_y) {
  std::vector<double> y(n);
  const double mid = 0.5 * static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = centre_y + (static_cast<double>(i) - mid) * spacing;
  return y;
}

double guided_wavelength(double f_c, double eta_eff) {
  if (!(f_c > 0.0))
    throw std::domain_error("carrier frequency must be positive");
  if (!(eta_eff >= 1.0))
    throw std::domain_error("effective refractive index must be >= 1");
  return (kSpeedOfLight / f_c) / eta_eff;
}

double attenuation_constant(const WaveguideMaterial &mat, const PhysicalConstants &pc) {
  return pc.lambda_g * mat.eps_r * kPi * pc.f_c * pc.f_c / (pc.c * pc.c) * mat.tan_delta;
}

double user_pa_distance(const SystemGeometry &geom, std::size_t k, std::size_t n, double pin_x) {
  if (k >= geom.users.size() || n >= geom.feed_y.size())
    throw std::out_of_range("user/waveguide index out of range");
  const double dx = pin_x - geom.users[k].x;
  const double dy = geom.feed_y[n] - geom.users[k].y;
  return std::sqrt(dx * dx + dy * dy + geom.d * geom.d);
}

double user_pa_distance(const SystemGeometry &geom, std::size_t k, std::size_t n) {
  if (n >= geom.pin_x.size())
    throw std::out_of_range("waveguide index out of range");
  return user_pa_distance(geom, k, n, geom.pin_x[n]);
}

std::complex<double> channel_coefficient(const SystemGeometry &geom, const WaveguideMaterial &mat,
                                         const PhysicalConstants &pc, std::size_t k,
                                         std::size_t n, bool lossless) {
  const double dist = user_pa_distance(geom, k, n);
  const double x = geom.pin_x[n];
  const double alpha = lossless ? 0.0 : attenuation_constant(mat, pc);
  const double phase = -2.0 * kPi * dist / pc.lambda - 2.0 * kPi * x / pc.lambda_g;
  const double magnitude = std::sqrt(pc.eta) / dist * std::exp(-alpha * x);
  return std::polar(magnitude, phase);
}

ChannelMatrix channel_matrix(const SystemGeometry &geom, const WaveguideMaterial &mat,
                             const PhysicalConstants &pc, bool lossless) {
  geom.validate();
  const auto K = geom.num_users();
  const auto N = geom.num_waveguides();
  ChannelMatrix out;
  out.lossless = lossless;
  out.h.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(N));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < N; ++n)
      out.h(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) =
          channel_coefficient(geom, mat, pc, k, n, lossless);
  return out;
}

LinkModel LinkModel::make(double f_c, const WaveguideMaterial &mat, bool lossless, EtaMode mode) {
  mat.validate();
  LinkModel link;
  link.pc = PhysicalConstants::at(f_c, mat.eta_eff, mode);
  link.mat = mat;
  link.alpha_d = attenuation_constant(mat, link.pc);
  link.lossless = lossless;
  return link;
}

ChannelMatrix conventional_array_channel(const SystemGeometry &geom, const PhysicalConstants &pc) {
  geom.validate();
  const auto K = geom.num_users();
  const auto N = geom.num_waveguides();
  const double centre_y =
      std::accumulate(geom.feed_y.begin(), geom.feed_y.end(), 0.0) / static_cast<double>(N);
  const auto element_y = centred_feed_points(N, 0.5 * pc.lambda, centre_y);

  ChannelMatrix out;
  out.lossless = true;
  out.h.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(N));
  for (std::size_t k = 0; k < K; ++k) {
    const auto &u = geom.users[k];
    const double centre_dist =
        std::sqrt(u.x * u.x + (centre_y - u.y) * (centre_y - u.y) + geom.d * geom.d);
    for (std::size_t n = 0; n < N; ++n) {
      const double dy = element_y[n] - u.y;
      const double dist = std::sqrt(u.x * u.x + dy * dy + geom.d * geom.d);
      out.h(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) =
          std::polar(std::sqrt(pc.eta) / centre_dist, -2.0 * kPi * dist / pc.lambda);
    }
  }
  return out;
}

} // namespace panoma
