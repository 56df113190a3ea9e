#include "risnoma/geometry_channel.hpp"

#include <cmath>
#include <numbers>

#include "risnoma/errors.hpp"

namespace risnoma {

std::mt19937_64 trial_rng(std::uint64_t master_seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed & 0xffffffffu),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(trial & 0xffffffffu),
                    static_cast<std::uint32_t>(trial >> 32), 0x52495355u};
  return std::mt19937_64(seq);
}

CVector steering_vector(double theta, int m, double spacing_ratio) {
  if (m < 1) throw DomainError("steering vector needs m >= 1");
  CVector a(m);
  const double step = 2.0 * std::numbers::pi * spacing_ratio * std::sin(theta);
  for (int p = 0; p < m; ++p) a(p) = std::polar(1.0, step * p);
  return a;
}

double pathloss(double distance, double exponent, double ref_gain) {
  if (!(distance > 0.0)) throw DomainError("path loss needs a positive distance");
  return ref_gain * std::pow(distance, -exponent);
}

CMatrix rician_channel(const CMatrix& los, double k_factor, double gain,
                       std::mt19937_64& rng) {
  if (k_factor < 0.0) throw DomainError("Rician factor must be >= 0");
  if (gain < 0.0) throw DomainError("channel gain must be >= 0");
  const double amp = std::sqrt(gain);
  if (std::isinf(k_factor)) return amp * los;

  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CMatrix nlos(los.rows(), los.cols());
  for (Eigen::Index c = 0; c < nlos.cols(); ++c)
    for (Eigen::Index r = 0; r < nlos.rows(); ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      nlos(r, c) = Complex(re, im);
    }
  const double w_los = std::sqrt(k_factor / (k_factor + 1.0));
  const double w_nlos = std::sqrt(1.0 / (k_factor + 1.0));
  return amp * (w_los * los + w_nlos * nlos);
}

std::vector<CVector> ChannelSet::all_users() const {
  std::vector<CVector> users = g_near;
  users.insert(users.end(), g_far.begin(), g_far.end());
  return users;
}

Point2 polar_point(double radius, double angle) {
  return {radius * std::sin(angle), radius * std::cos(angle)};
}

double ris_angle_of(const Point2& p) { return std::atan2(p.x, p.y); }

std::pair<ScenarioGeometry, ChannelSet> build_scenario(const SystemConfig& config,
                                                       std::uint64_t seed) {
  config.validate();
  auto rng = trial_rng(config.rng_seed, seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // (lo, hi]: hi - u (hi - lo) with u in [0, 1)
  auto draw = [&](const Interval& iv) { return iv.hi - unit(rng) * (iv.hi - iv.lo); };

  ScenarioGeometry geo;
  geo.bs = config.bs_position;
  geo.target_angles = config.target_angles;
  geo.target_radii = config.target_radii;
  for (int k = 0; k < config.n_clusters; ++k) {
    // Near and far users of one cluster share the RIS angle.
    const double theta = draw(config.cluster_angle_ranges[k]);
    const double r_near = draw(config.near_radius);
    const double r_far = draw(config.far_radius);
    geo.near.push_back({polar_point(r_near, theta), r_near, theta});
    geo.far.push_back({polar_point(r_far, theta), r_far, theta});
  }

  const int m = config.n_ris;
  const int n = config.n_tx;
  const double d_bs = std::hypot(geo.bs.x, geo.bs.y);
  // Both arrays are ULAs along x with broadside +y. The BS sees the RIS at
  // atan2(-bs.x, -bs.y); only its sine matters for the ULA response.
  const double arrival = ris_angle_of(geo.bs);
  const double departure = std::atan2(-geo.bs.x, -geo.bs.y);
  const CMatrix los_g = steering_vector(arrival, m, config.spacing_ratio) *
                        steering_vector(departure, n, config.spacing_ratio).adjoint();

  ChannelSet ch;
  ch.G = rician_channel(los_g, config.rician_k,
                        pathloss(d_bs, config.pathloss_exp.bs_ris, config.pathloss_ref), rng);
  for (int k = 0; k < config.n_clusters; ++k) {
    const auto& u_near = geo.near[k];
    const auto& u_far = geo.far[k];
    const CMatrix los_n = steering_vector(u_near.angle, m, config.spacing_ratio);
    const CMatrix los_f = steering_vector(u_far.angle, m, config.spacing_ratio);
    ch.g_near.push_back(rician_channel(
        los_n, config.rician_k,
        pathloss(u_near.radius, config.pathloss_exp.ris_near, config.pathloss_ref), rng));
    ch.g_far.push_back(rician_channel(
        los_f, config.rician_k,
        pathloss(u_far.radius, config.pathloss_exp.ris_far, config.pathloss_ref), rng));
  }
  return {geo, ch};
}

}  // namespace risnoma
