#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "poreuq/config.hpp"
#include "poreuq/grid.hpp"

namespace poreuq::dns {

/// Dimensionless numbers of the inverse-scaled reaction-diffusion system.
struct ModelConstants {
  double Da2_star = 21.3912;
  double Dm_star = 2.4;
  double beta = 1.0;
  double upsilon_C0 = 1.0;
  double c0 = 1e-7;  // solid-region concentration floor
};

/// Initial state of the dimensionless problem: spatial grid, time controls
/// and the initial micro-porosity field (1 in pure fluid, >= eps0 in the
/// porous matrix).
struct Geometry {
  std::vector<Axis> spatial_axes;  // 1 or 2 cell-centered axes
  int nt = 2;
  double t_final = 1.0;
  double eps0 = 0.05;
  std::vector<double> eps_init;  // one value per spatial cell, x fastest

  int dim() const { return static_cast<int>(spatial_axes.size()); }
  int nx() const { return spatial_axes[0].n; }
  int ny() const { return dim() == 2 ? spatial_axes[1].n : 1; }
  std::size_t cells() const { return static_cast<std::size_t>(nx()) * ny(); }
  FieldGrid make_field() const;
  /// Upscaled porosity of the initial state, phi = <eps>.
  double upscaled_porosity() const;
};

/// Piecewise-smooth 1D porosity: calcite cores (low eps) in a fluid
/// background (eps = 1), cosine-ramped at the edges over ramp_cells cells.
/// Throws ConfigError on overlapping cores.
Geometry make_geometry_1d(const GeometryConfig& cfg);

/// 2D disk core with two porosity halves and optional angular apertures.
Geometry make_geometry_2d(const GeometryConfig& cfg);

Geometry make_geometry(const GeometryConfig& cfg);

struct SolveControls {
  double inner_tol = 1e-10;
  int max_inner = 100;
  /// Well-mixed verification limit: the concentration is pinned to 1 and only
  /// the porosity equation is integrated.
  bool hold_conc_at_one = false;
};

struct SolveResult {
  FieldGrid eps;
  FieldGrid conc;
};

/// Solves the dimensionless dissolution system with a conservative
/// cell-centered finite-volume stencil (harmonic-mean face coefficients for
/// the heterogeneous diffusion) and implicit Euler stepping with fixed-point
/// inner iterations. The reaction indicator is frozen at the step-start
/// state. Dirichlet C = 1 is enforced on every domain boundary face.
/// Throws NumericError when inner iterations fail to converge.
SolveResult solve_dissolution(const Geometry& geometry, const ModelConstants& constants,
                              const SolveControls& controls = {});

/// Discrete heterogeneous diffusion operator of one time slice, exactly the
/// solver's stencil (used to verify local consistency of the output fields).
std::vector<double> fv_diffusion_slice(const Geometry& geometry,
                                       std::span<const double> eps_slice,
                                       std::span<const double> conc_slice, double beta);

/// Synthetic dynamical uCT stack: image = clamp(1 - eps + xi, 0, 1) with
/// iid Gaussian voxel noise xi ~ N(0, sigma^2), reproducible under seed.
FieldGrid emit_synthetic_uct(const FieldGrid& eps, double sigma, std::uint64_t seed);

}  // namespace poreuq::dns
