#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace poreuq {

/// One coordinate axis of a Cartesian spatiotemporal grid.
/// Spatial axes are cell-centered (n cells over [lo, hi]); the time axis is
/// node-based (n slices, first at lo, last at hi).
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int n = 1;
  bool cell_centered = true;

  double spacing() const {
    if (cell_centered) return (hi - lo) / n;
    return n > 1 ? (hi - lo) / (n - 1) : 0.0;
  }
  double coord(int i) const {
    return cell_centered ? lo + (i + 0.5) * spacing() : lo + i * spacing();
  }
};

/// Dense scalar field over (space x time) in dimensionless coordinates.
/// Storage is time-major, x fastest: data[(it*ny + iy)*nx + ix].
class FieldGrid {
 public:
  FieldGrid() = default;
  FieldGrid(Axis x, Axis t);           // 1D+Time
  FieldGrid(Axis x, Axis y, Axis t);   // 2D+Time

  int spatial_dim() const { return static_cast<int>(axes_.size()) - 1; }
  int nx() const { return axes_[0].n; }
  int ny() const { return spatial_dim() == 2 ? axes_[1].n : 1; }
  int nt() const { return axes_.back().n; }
  std::size_t cells_per_slice() const { return static_cast<std::size_t>(nx()) * ny(); }
  std::size_t size() const { return data_.size(); }

  const Axis& axis(int a) const { return axes_[a]; }
  const Axis& time_axis() const { return axes_.back(); }

  double& at(int ix, int it) { return data_[idx(ix, 0, it)]; }
  double at(int ix, int it) const { return data_[idx(ix, 0, it)]; }
  double& at(int ix, int iy, int it) { return data_[idx(ix, iy, it)]; }
  double at(int ix, int iy, int it) const { return data_[idx(ix, iy, it)]; }

  std::size_t idx(int ix, int iy, int it) const {
    return (static_cast<std::size_t>(it) * ny() + iy) * nx() + ix;
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// Spatial average of one time slice.
  double slice_mean(int it) const;

  /// Flat float64 stack with a JSON sidecar describing shape and axes.
  /// Writes `path` with the raw values and `path + ".json"` with metadata.
  void write_binary(const std::string& path) const;
  static FieldGrid read_binary(const std::string& path);

  /// One CSV per time slice (columns x[,y],value) under `dir`, named
  /// `<stem>_t####.csv`.
  void write_csv_slices(const std::string& dir, const std::string& stem) const;

 private:
  std::vector<Axis> axes_;
  std::vector<double> data_;
};

/// Reproducible stream splitting: derives independent sub-seeds from a master
/// seed so that modules do not share generator state.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace poreuq
