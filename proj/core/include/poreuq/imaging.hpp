#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "poreuq/config.hpp"
#include "poreuq/grid.hpp"

namespace poreuq::img {

/// Region label of one training point. RaiPlusExtra points are the fluid
/// tubular dilation of the reactive interface; together with Rai points they
/// form the RAI+ fitting set.
enum class Region : std::uint8_t { Solid, Fluid, Boundary, Rai, RaiPlusExtra };

const char* region_name(Region r);
Region region_from_name(const std::string& name);

/// Training observations: space-time points with image intensities and
/// region labels, plus the reduced reactive-interface selection (indices
/// into the point list) assigned once step-2 evidence is available.
struct ObservationSet {
  int spatial_dim = 1;
  std::vector<double> points;      // row-major [n][spatial_dim + 1]
  std::vector<double> intensity;   // [n]
  std::vector<Region> region;      // [n]
  std::vector<int> rai_minus;      // subset of rai_indices(), assigned later
  /// Sampled bucket sizes, in config order: solid, fluid, rai, rai+ extra,
  /// rai- reserve, boundary. The reserve bucket is labeled Rai.
  std::array<int, 6> bucket_counts{};

  int size() const { return static_cast<int>(region.size()); }
  int point_dim() const { return spatial_dim + 1; }

  std::vector<int> indices_of(Region r) const;
  /// All reactive-interface points (label Rai).
  std::vector<int> rai_indices() const { return indices_of(Region::Rai); }
  /// RAI+ fitting set: Rai plus its fluid tubular dilation.
  std::vector<int> rai_plus_indices() const;
  int count(Region r) const;

  /// Row-major coordinates of the selected points.
  std::vector<double> gather_points(std::span<const int> idx) const;
  std::vector<double> gather_intensity(std::span<const int> idx) const;

  void write_csv(const std::string& path) const;
  static ObservationSet read_csv(const std::string& path);
};

/// Min-max normalization over the full stack; idempotent. A constant stack
/// maps to zero.
FieldGrid normalize_stack(const FieldGrid& stack);

/// Reactive area of interest: voxels whose intensity strictly decreases at
/// the next time slice and whose intensity lies inside (0.1, 0.9). The final
/// time slice is never marked. Returns a grid-sized mask.
std::vector<char> detect_rai(const FieldGrid& stack);

/// RAI augmented by a fluid tubular neighborhood: fluid-side voxels (not in
/// the RAI, intensity below solid_threshold) within Chebyshev radius r_space
/// in space and r_time in time of a RAI voxel.
std::vector<char> dilate_rai_plus(const std::vector<char>& rai, const FieldGrid& stack,
                                  int r_space, int r_time, double solid_threshold = 0.5);

/// Stratified sampling of the six observation buckets. Quotas honor the
/// configured fractions within one point (largest-remainder rounding); the
/// rai_minus fraction reserves extra reactive-interface points. Each region
/// is sampled without replacement while its voxel pool lasts, topped up with
/// replacement otherwise; an empty pool with a positive quota is an error
/// naming the region. Reproducible under seed.
ObservationSet extract_observations(const FieldGrid& stack, const ObservationConfig& cfg,
                                    std::uint64_t seed);

/// Reduced reactive set: keeps the RAI points whose pointwise Dm* estimate
/// (ratio of the step-2 BMA operator fields, aligned with rai_indices()) is
/// positive. Stores and returns the selection; throws NumericError when the
/// result is empty.
std::vector<int> restrict_rai_minus(ObservationSet& obs,
                                    std::span<const double> dm_star_estimates);

}  // namespace poreuq::img
