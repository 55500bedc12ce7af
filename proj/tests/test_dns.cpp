#include "poreuq/dns.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "poreuq/errors.hpp"

using namespace poreuq;
using namespace poreuq::dns;

namespace {

GeometryConfig base_1d() {
  GeometryConfig g;
  g.dim = 1;
  g.x_lo = 0.0;
  g.x_hi = 3.0;
  g.nx = 200;
  g.nt = 240;
  g.ramp_cells = 0;
  return g;
}

}  // namespace

TEST_CASE("1D geometry: plateau construction") {
  auto cfg = base_1d();
  cfg.nx = 300;  // aligned cell edges at 1.0 and 2.0
  cfg.cores = {{1.0, 2.0, 0.05}};
  const auto g = make_geometry_1d(cfg);
  for (int i = 0; i < cfg.nx; ++i) {
    const double x = g.spatial_axes[0].coord(i);
    if (x > 1.0 && x < 2.0)
      CHECK(g.eps_init[i] == 0.05);
    else
      CHECK(g.eps_init[i] == 1.0);
  }
}

TEST_CASE("1D geometry: no cores means pure fluid") {
  auto cfg = base_1d();
  const auto g = make_geometry_1d(cfg);
  for (double e : g.eps_init) CHECK(e == 1.0);
}

TEST_CASE("1D geometry: upscaled porosity matches the analytic area fraction") {
  auto cfg = base_1d();
  cfg.nx = 300;  // spacing 0.01: all core edges land on cell boundaries
  cfg.cores = {{0.50, 1.00, 0.05}, {1.75, 2.50, 0.20}};
  const auto g = make_geometry_1d(cfg);
  const double width = cfg.x_hi - cfg.x_lo;
  const double expect =
      1.0 + (0.05 - 1.0) * 0.50 / width + (0.20 - 1.0) * 0.75 / width;
  CHECK(std::abs(g.upscaled_porosity() - expect) < 1e-12);
}

TEST_CASE("1D geometry: overlapping cores are rejected") {
  auto cfg = base_1d();
  cfg.cores = {{1.0, 2.0, 0.05}, {1.5, 2.5, 0.05}};
  CHECK_THROWS_AS(make_geometry_1d(cfg), ConfigError);
}

TEST_CASE("2D geometry: disk solid fraction, empty disk, aperture monotonicity") {
  GeometryConfig cfg;
  cfg.dim = 2;
  cfg.x_lo = 0.0;
  cfg.x_hi = 2.0;
  cfg.y_lo = -1.0;
  cfg.y_hi = 1.0;
  cfg.nx = cfg.ny = 200;
  cfg.nt = 4;
  cfg.ramp_cells = 0;
  cfg.disk_cx = 1.0;
  cfg.disk_cy = 0.0;
  cfg.disk_r = 0.5;
  cfg.disk_eps_a = 0.05;
  cfg.disk_eps_b = 0.10;

  const auto g = make_geometry_2d(cfg);
  std::size_t solid = 0;
  for (double e : g.eps_init) solid += e < 1.0;
  const double frac = static_cast<double>(solid) / g.eps_init.size();
  const double expect = M_PI * 0.25 / 4.0;  // disk area over domain area
  CHECK(std::abs(frac - expect) < 3.0 / cfg.nx);

  auto empty = cfg;
  empty.disk_r = 0.0;
  const auto ge = make_geometry_2d(empty);
  for (double e : ge.eps_init) CHECK(e == 1.0);

  auto open = cfg;
  open.apertures = {{30.0, 20.0}, {210.0, 20.0}};
  const auto go = make_geometry_2d(open);
  std::size_t solid_open = 0;
  for (double e : go.eps_init) solid_open += e < 1.0;
  CHECK(solid_open < solid);
}

TEST_CASE("reaction off: porosity frozen, concentration relaxes to 1") {
  auto cfg = base_1d();
  cfg.nx = 80;
  cfg.nt = 60;
  cfg.cores = {{1.0, 2.0, 0.05}};
  const auto g = make_geometry_1d(cfg);
  ModelConstants mc;
  mc.Da2_star = 0.0;
  mc.Dm_star = 2.4;
  mc.beta = 1.0;
  const auto sol = solve_dissolution(g, mc);
  for (int it = 0; it < cfg.nt; ++it)
    for (int i = 0; i < cfg.nx; ++i)
      CHECK(sol.eps.at(i, it) == g.eps_init[i]);
  // the pure-diffusion steady state of the conservative operator has
  // uniform C/eps equal to the boundary value 1, i.e. C = eps
  auto u_deviation = [&](int it) {
    double worst = 0.0;
    for (int i = 0; i < cfg.nx; ++i)
      worst = std::max(worst,
                       std::abs(sol.conc.at(i, it) / g.eps_init[i] - 1.0));
    return worst;
  };
  // fluid region is already saturated at the final time
  for (int i = 0; i < cfg.nx; ++i)
    if (g.eps_init[i] == 1.0)
      CHECK(std::abs(sol.conc.at(i, cfg.nt - 1) - 1.0) < 0.05);
  // global relaxation toward the steady state
  CHECK(u_deviation(59) < u_deviation(30));
  CHECK(u_deviation(30) < u_deviation(10));
  // relaxation is monotone at mid-fluid
  CHECK(sol.conc.at(10, 10) <= sol.conc.at(10, 30) + 1e-12);
  CHECK(sol.conc.at(10, 30) <= sol.conc.at(10, 59) + 1e-12);
}

TEST_CASE("all-fluid geometry stays fluid and saturates") {
  auto cfg = base_1d();
  cfg.nx = 60;
  cfg.nt = 40;
  const auto g = make_geometry_1d(cfg);
  ModelConstants mc;
  const auto sol = solve_dissolution(g, mc);
  for (int it = 0; it < cfg.nt; ++it)
    for (int i = 0; i < cfg.nx; ++i)
      CHECK(sol.eps.at(i, it) == 1.0);
  for (int i = 0; i < cfg.nx; ++i)
    CHECK(std::abs(sol.conc.at(i, cfg.nt - 1) - 1.0) < 1e-6);
}

TEST_CASE("0D well-mixed limit matches the exact ODE") {
  // single solid cell with C held at 1: eps(t) = min(1, eps0 + uC0 Da2* t)
  GeometryConfig cfg;
  cfg.dim = 1;
  cfg.x_lo = 0.0;
  cfg.x_hi = 1.0;
  cfg.nx = 1;
  cfg.nt = 101;
  cfg.ramp_cells = 0;
  cfg.cores = {{0.0, 1.0, 0.05}};
  auto g = make_geometry_1d(cfg);
  ModelConstants mc;
  mc.Da2_star = 3.0;
  mc.Dm_star = 1.0;
  mc.upsilon_C0 = 0.7;
  SolveControls ctl;
  ctl.hold_conc_at_one = true;
  const auto sol = solve_dissolution(g, mc, ctl);
  for (int it = 0; it < cfg.nt; ++it) {
    const double t = sol.eps.time_axis().coord(it);
    const double expect = std::min(1.0, 0.05 + mc.upsilon_C0 * mc.Da2_star * t);
    CHECK(std::abs(sol.eps.at(0, it) - expect) < 1e-6);
  }
}

TEST_CASE("shipped 1D config: monotone dissolution, bounds, local consistency") {
  const auto run_cfg = RunConfig::preset("1d-beta1");
  const auto g = make_geometry_1d(run_cfg.geometry);
  ModelConstants mc;
  mc.Da2_star = run_cfg.physical.Da2_star();
  mc.Dm_star = run_cfg.physical.Dm_star();
  mc.beta = run_cfg.beta;
  mc.upsilon_C0 = run_cfg.physical.upsilon_C0();
  SolveControls ctl;
  const auto sol = solve_dissolution(g, mc, ctl);

  const int nx = g.nx(), nt = g.nt;
  for (int it = 1; it < nt; ++it) {
    for (int i = 0; i < nx; ++i) {
      CHECK(sol.eps.at(i, it) >= sol.eps.at(i, it - 1) - 1e-14);  // monotone
      CHECK(sol.eps.at(i, it) >= g.eps0 - 1e-12);
      CHECK(sol.eps.at(i, it) <= 1.0 + 1e-12);
      CHECK(sol.conc.at(i, it) >= 0.0);
      CHECK(sol.conc.at(i, it) <= 1.0);
    }
  }

  // discrete residuals of both equations on the stored output, re-evaluated
  // independently of the solver loop
  const double dt = g.t_final / (nt - 1);
  double worst_eps = 0.0, worst_conc = 0.0;
  for (int it = 1; it < nt; ++it) {
    std::vector<double> eps_s(nx), conc_s(nx), eps_p(nx), conc_p(nx);
    for (int i = 0; i < nx; ++i) {
      eps_s[i] = sol.eps.at(i, it);
      conc_s[i] = sol.conc.at(i, it);
      eps_p[i] = sol.eps.at(i, it - 1);
      conc_p[i] = sol.conc.at(i, it - 1);
    }
    const auto diff = fv_diffusion_slice(g, eps_s, conc_s, mc.beta);
    for (int i = 0; i < nx; ++i) {
      const bool react = eps_p[i] < 1.0 - 1e-12;
      const bool capped = react && eps_s[i] >= 1.0 - 1e-12;
      if (!capped) {
        const double re = (eps_s[i] - eps_p[i]) / dt -
                          (react ? mc.upsilon_C0 * mc.Da2_star * conc_s[i] : 0.0);
        worst_eps = std::max(worst_eps, std::abs(re));
        const double rc = (conc_s[i] - conc_p[i]) / dt +
                          (react ? mc.Da2_star * conc_s[i] : 0.0) -
                          mc.Dm_star * diff[i];
        worst_conc = std::max(worst_conc, std::abs(rc));
      }
    }
  }
  CHECK(worst_eps < ctl.inner_tol);
  CHECK(worst_conc < ctl.inner_tol);

  // core actually dissolves over the run
  CHECK(sol.eps.slice_mean(nt - 1) > sol.eps.slice_mean(0) + 0.05);
}

TEST_CASE("grid refinement changes the dissolved volume fraction by under 2%") {
  const auto run_cfg = RunConfig::preset("1d-beta1");
  ModelConstants mc;
  mc.Da2_star = run_cfg.physical.Da2_star();
  mc.Dm_star = run_cfg.physical.Dm_star();
  mc.beta = run_cfg.beta;
  mc.upsilon_C0 = run_cfg.physical.upsilon_C0();

  auto dissolved_fraction = [&](int nx, int nt) {
    auto gc = run_cfg.geometry;
    gc.nx = nx;
    gc.nt = nt;
    const auto g = make_geometry_1d(gc);
    const auto sol = solve_dissolution(g, mc);
    const double phi0 = sol.eps.slice_mean(0);
    const double phiT = sol.eps.slice_mean(nt - 1);
    return (phiT - phi0) / (1.0 - phi0);
  };
  const double coarse = dissolved_fraction(200, 240);
  const double fine = dissolved_fraction(400, 479);  // half dx, half dt
  CHECK(std::abs(fine - coarse) / coarse < 0.02);
}

TEST_CASE("synthetic uCT stack: noiseless identity, clamping and noise level") {
  auto cfg = base_1d();
  cfg.nx = 100;
  cfg.nt = 10;
  cfg.cores = {{1.0, 2.0, 0.05}};
  const auto g = make_geometry_1d(cfg);
  FieldGrid eps = g.make_field();
  for (int it = 0; it < cfg.nt; ++it)
    for (int i = 0; i < cfg.nx; ++i) eps.at(i, it) = g.eps_init[i];

  const auto clean = emit_synthetic_uct(eps, 0.0, 9);
  for (int it = 0; it < cfg.nt; ++it)
    for (int i = 0; i < cfg.nx; ++i)
      CHECK(clean.at(i, it) == doctest::Approx(1.0 - g.eps_init[i]).epsilon(1e-15));

  FieldGrid fluid = eps;
  std::fill(fluid.data().begin(), fluid.data().end(), 1.0);
  const auto dark = emit_synthetic_uct(fluid, 0.0, 9);
  for (double v : dark.data()) CHECK(v == 0.0);

  // noise standard deviation within 5% on a mid-intensity field
  Axis x{0.0, 1.0, 1000, true};
  Axis t{0.0, 1.0, 100, false};
  FieldGrid mid(x, t);
  std::fill(mid.data().begin(), mid.data().end(), 0.5);
  const auto noisy = emit_synthetic_uct(mid, 0.03, 1234);
  double mean = 0.0, var = 0.0;
  for (double v : noisy.data()) mean += v - 0.5;
  mean /= static_cast<double>(noisy.size());
  for (double v : noisy.data()) var += (v - 0.5 - mean) * (v - 0.5 - mean);
  var /= static_cast<double>(noisy.size());
  CHECK(std::abs(std::sqrt(var) - 0.03) / 0.03 < 0.05);

  // reproducible under seed
  const auto again = emit_synthetic_uct(mid, 0.03, 1234);
  CHECK(again.data() == noisy.data());
}
