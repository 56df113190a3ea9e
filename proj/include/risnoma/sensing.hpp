#pragma once

#include <span>
#include <vector>

#include "risnoma/comm_noma.hpp"
#include "risnoma/config.hpp"
#include "risnoma/geometry_channel.hpp"
#include "risnoma/types.hpp"

namespace risnoma {

struct AngleGrid {
  std::vector<double> grid;        // [-pi/2, pi/2] inclusive
  std::vector<double> interested;  // grid points within beam_width/2 of a target
  std::vector<int> interested_index;
};

AngleGrid make_angle_grid(const SystemConfig& config);

// Upsilon = diag(a^H(theta)) G.
CMatrix sensing_cascade(double theta, const CMatrix& G, double spacing_ratio);

// Tr[V Upsilon (sum_k W_k) Upsilon^H].
double beampattern_gain(const CMatrix& V, std::span<const CMatrix> W, const CMatrix& G,
                        double theta, double spacing_ratio);

struct MinGain {
  double value = 0.0;
  double angle = 0.0;
};

// Minimum beampattern gain over the given angles. Throws DomainError on an
// empty angle set.
MinGain min_gain(const CMatrix& V, std::span<const CMatrix> W, const CMatrix& G,
                 std::span<const double> angles, double spacing_ratio);

bool desired_beampattern(double theta, std::span<const double> target_angles,
                         double beam_width);

struct HeatmapWindow {
  double x_min = -100.0;
  double x_max = 100.0;
  double y_min = 0.0;
  double y_max = 100.0;
  int nx = 101;
  int ny = 51;

  double x(int i) const;
  double y(int j) const;
};

// Row j, column i holds the normalized illumination power at (x(i), y(j)):
// pathloss(|p|) * beampattern_gain(angle of p), scaled so the max is 1.
// Points at the RIS itself or behind it (y < 0) are left at zero.
RMatrix illumination_heatmap(const BeamState& state, const ChannelSet& channels,
                             const SystemConfig& config, const HeatmapWindow& window);

}  // namespace risnoma
