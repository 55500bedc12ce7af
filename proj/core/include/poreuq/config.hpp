#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace poreuq {

/// One calcite core segment of a 1D geometry: plateau porosity `eps`
/// on [x0, x1], smoothed at the edges by the geometry ramp.
struct CoreSegment {
  double x0 = 0.0;
  double x1 = 0.0;
  double eps = 0.05;
};

/// Angular opening of the 2D cylindrical core (degrees).
struct Aperture {
  double angle_deg = 0.0;
  double width_deg = 0.0;
};

struct GeometryConfig {
  int dim = 1;
  double x_lo = 0.0, x_hi = 3.0;
  double y_lo = -1.0, y_hi = 1.0;  // 2D only
  int nx = 200, ny = 1, nt = 240;
  double t_final = 1.0;
  double eps0 = 0.05;      // residual porosity floor
  int ramp_cells = 2;      // edge smoothing width, in cells
  std::vector<CoreSegment> cores;  // 1D cores
  // 2D cylindrical core
  double disk_cx = 1.0, disk_cy = 0.0, disk_r = 0.5;
  double disk_eps_a = 0.05, disk_eps_b = 0.10;  // porosity levels of the two halves
  std::vector<Aperture> apertures;
};

/// Physical parameters of the synthetic experiment; the dimensionless
/// numbers of the inverse formulation derive from these.
struct PhysicalConfig {
  double Ks = 0.8913;    // dissolution rate constant, mol.m^-2.s^-1
  double As = 1e3;       // specific reactive area, m^-1
  double gammaH = 1e-3;  // acid activity coefficient, m^3.mol^-1
  double Dm = 1e-9;      // molecular diffusion, m^2.s^-1
  double L = 1e-4;       // characteristic length, m
  double Tf = 24.0;      // physical final time, s
  double Tf_star = 1.0;  // dimensionless final time
  double C0 = 1.0;       // boundary acid concentration (normalization)
  double upsilon = 1.0;  // calcite molar volume in units making upsilon*C0 dimensionless

  double D_ref() const { return Tf_star * L * L / Tf; }
  double Da2_star() const { return Ks * As * gammaH * L * L / D_ref(); }
  double Dm_star() const { return Dm / D_ref(); }
  double upsilon_C0() const { return upsilon * C0; }
  /// Physical catalytic Damkohler, recovered as Da2_star / Dm_star.
  double Da2() const { return Da2_star() / Dm_star(); }
};

/// Observation sampling quotas as fractions of n_obs. The rai_minus
/// fraction reserves extra reactive-interface points matching the reported
/// budget split; the actual reduced set is recomputed from step-2 evidence.
struct ObservationConfig {
  std::int64_t n_obs = 7725;
  double f_solid = 0.50;
  double f_fluid = 0.04;
  double f_rai = 0.15;
  double f_rai_plus = 0.13;
  double f_rai_minus = 0.10;
  double f_boundary = 0.08;
  double solid_threshold = 0.5;  // image intensity above which a voxel is solid
  int rai_dilate_space = 2;
  int rai_dilate_time = 1;
};

/// Per-step sampler hyperparameters.
struct StepSampler {
  int n_adapt = 50;
  int n_samples = 200;
  int n_leapfrog = 200;
  double dt = 1e-3;
};

struct RunConfig {
  std::string case_name = "1d-beta1";
  double beta = 1.0;  // tortuosity index
  GeometryConfig geometry;
  PhysicalConfig physical;
  ObservationConfig observations;
  std::array<StepSampler, 3> steps{};
  double noise_sigma = 0.03;
  double c0 = 1e-7;          // solid-region concentration floor
  double sigma_theta = 10.0;  // prior standard deviation
  double porosity_mask_threshold = 0.85;
  std::uint64_t seed = 42;
  int eps_hidden_layers = 4, eps_width = 32;
  int c_hidden_layers = 3, c_width = 32;
  bool fast = false;
  int chains = 1;
  bool write_csv_slices = true;

  /// Shipped configurations: "1d-beta1", "1d-beta05", "2d", "2d-smoke".
  static RunConfig preset(const std::string& name);

  /// Applies the reduced profile: n_samples = 60, n_leapfrog = 50 per step.
  void apply_fast_profile();

  /// Throws ConfigError on invalid or inconsistent settings.
  void validate() const;

  /// Flat TOML-style key = value serialization; parse(serialize(c)) == c.
  std::string serialize() const;
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;

  bool operator==(const RunConfig& other) const;
};

}  // namespace poreuq
