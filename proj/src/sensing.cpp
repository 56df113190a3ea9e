#include "risnoma/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "risnoma/errors.hpp"

namespace risnoma {

AngleGrid make_angle_grid(const SystemConfig& config) {
  AngleGrid g;
  const double step = config.angle_grid_step();
  for (int i = 0; i < config.angle_grid_points; ++i) {
    const double theta = -std::numbers::pi / 2.0 + step * i;
    g.grid.push_back(theta);
    if (desired_beampattern(theta, config.target_angles, config.beam_width)) {
      g.interested.push_back(theta);
      g.interested_index.push_back(i);
    }
  }
  return g;
}

CMatrix sensing_cascade(double theta, const CMatrix& G, double spacing_ratio) {
  const CVector a = steering_vector(theta, static_cast<int>(G.rows()), spacing_ratio);
  return a.conjugate().asDiagonal() * G;
}

double beampattern_gain(const CMatrix& V, std::span<const CMatrix> W, const CMatrix& G,
                        double theta, double spacing_ratio) {
  if (V.rows() != G.rows() || V.cols() != G.rows())
    throw ShapeError("beampattern_gain: V does not match G");
  CMatrix sum = CMatrix::Zero(G.cols(), G.cols());
  for (const auto& Wk : W) {
    if (Wk.rows() != G.cols() || Wk.cols() != G.cols())
      throw ShapeError("beampattern_gain: W does not match G");
    sum += Wk;
  }
  const CMatrix ups = sensing_cascade(theta, G, spacing_ratio);
  return std::max(0.0, (V * ups * sum * ups.adjoint()).trace().real());
}

MinGain min_gain(const CMatrix& V, std::span<const CMatrix> W, const CMatrix& G,
                 std::span<const double> angles, double spacing_ratio) {
  if (angles.empty()) throw DomainError("min_gain needs at least one angle");
  MinGain best{beampattern_gain(V, W, G, angles[0], spacing_ratio), angles[0]};
  for (std::size_t i = 1; i < angles.size(); ++i) {
    const double g = beampattern_gain(V, W, G, angles[i], spacing_ratio);
    if (g < best.value) best = {g, angles[i]};
  }
  return best;
}

bool desired_beampattern(double theta, std::span<const double> target_angles,
                         double beam_width) {
  // Grid points sit at exact multiples of the step; allow rounding slack.
  constexpr double kEdge = 1e-9;
  return std::any_of(target_angles.begin(), target_angles.end(), [&](double t) {
    return std::abs(theta - t) <= beam_width / 2.0 + kEdge;
  });
}

double HeatmapWindow::x(int i) const {
  return nx == 1 ? x_min : x_min + (x_max - x_min) * i / (nx - 1);
}

double HeatmapWindow::y(int j) const {
  return ny == 1 ? y_min : y_min + (y_max - y_min) * j / (ny - 1);
}

RMatrix illumination_heatmap(const BeamState& state, const ChannelSet& channels,
                             const SystemConfig& config, const HeatmapWindow& window) {
  if (window.nx < 1 || window.ny < 1) throw DomainError("heatmap window needs >= 1 cell");
  RMatrix map = RMatrix::Zero(window.ny, window.nx);
  for (int j = 0; j < window.ny; ++j) {
    for (int i = 0; i < window.nx; ++i) {
      const Point2 p{window.x(i), window.y(j)};
      const double r = std::hypot(p.x, p.y);
      if (r <= 0.0 || p.y < 0.0) continue;
      const double gain = beampattern_gain(state.V, state.W, channels.G, ris_angle_of(p),
                                           config.spacing_ratio);
      map(j, i) = pathloss(r, config.pathloss_exp.ris_point, config.pathloss_ref) * gain;
    }
  }
  const double peak = map.maxCoeff();
  if (peak > 0.0) map /= peak;
  return map;
}

}  // namespace risnoma
