#include "poreuq/dns.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "poreuq/errors.hpp"

namespace poreuq::dns {

namespace {

constexpr double kSolidIndicatorTol = 1e-12;  // reaction active iff eps < 1 - tol

double cosine_ramp(double u) {
  // 0 at u <= 0, 1 at u >= 1, smooth in between
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return 0.5 * (1.0 - std::cos(M_PI * u));
}

}  // namespace

FieldGrid Geometry::make_field() const {
  Axis t{0.0, t_final, nt, false};
  if (dim() == 1) return FieldGrid(spatial_axes[0], t);
  return FieldGrid(spatial_axes[0], spatial_axes[1], t);
}

double Geometry::upscaled_porosity() const {
  double s = 0.0;
  for (double e : eps_init) s += e;
  return s / static_cast<double>(eps_init.size());
}

Geometry make_geometry_1d(const GeometryConfig& cfg) {
  Geometry g;
  g.spatial_axes = {Axis{cfg.x_lo, cfg.x_hi, cfg.nx, true}};
  g.nt = cfg.nt;
  g.t_final = cfg.t_final;
  g.eps0 = cfg.eps0;

  auto cores = cfg.cores;
  std::sort(cores.begin(), cores.end(),
            [](const CoreSegment& a, const CoreSegment& b) { return a.x0 < b.x0; });
  for (std::size_t i = 1; i < cores.size(); ++i)
    if (cores[i].x0 < cores[i - 1].x1)
      throw ConfigError("overlapping core segments");

  const Axis& ax = g.spatial_axes[0];
  const double ramp = cfg.ramp_cells * ax.spacing();
  g.eps_init.assign(cfg.nx, 1.0);
  for (int i = 0; i < cfg.nx; ++i) {
    const double x = ax.coord(i);
    for (const auto& core : cores) {
      if (x <= core.x0 || x >= core.x1) continue;
      double s = 1.0;
      if (ramp > 0.0)
        s = std::min(cosine_ramp((x - core.x0) / ramp), cosine_ramp((core.x1 - x) / ramp));
      const double v = s >= 1.0 ? core.eps : 1.0 + s * (core.eps - 1.0);
      g.eps_init[i] = std::min(g.eps_init[i], v);
    }
  }
  return g;
}

Geometry make_geometry_2d(const GeometryConfig& cfg) {
  Geometry g;
  g.spatial_axes = {Axis{cfg.x_lo, cfg.x_hi, cfg.nx, true},
                    Axis{cfg.y_lo, cfg.y_hi, cfg.ny, true}};
  g.nt = cfg.nt;
  g.t_final = cfg.t_final;
  g.eps0 = cfg.eps0;

  const Axis& ax = g.spatial_axes[0];
  const Axis& ay = g.spatial_axes[1];
  const double ramp = cfg.ramp_cells * std::min(ax.spacing(), ay.spacing());
  g.eps_init.assign(static_cast<std::size_t>(cfg.nx) * cfg.ny, 1.0);
  if (cfg.disk_r <= 0.0) return g;

  for (int iy = 0; iy < cfg.ny; ++iy) {
    for (int ix = 0; ix < cfg.nx; ++ix) {
      const double dx = ax.coord(ix) - cfg.disk_cx;
      const double dy = ay.coord(iy) - cfg.disk_cy;
      const double r = std::hypot(dx, dy);
      if (r >= cfg.disk_r) continue;
      double angle = std::atan2(dy, dx) * 180.0 / M_PI;
      if (angle < 0.0) angle += 360.0;
      bool in_aperture = false;
      for (const auto& ap : cfg.apertures) {
        double d = std::fabs(angle - ap.angle_deg);
        d = std::min(d, 360.0 - d);
        if (d <= 0.5 * ap.width_deg) in_aperture = true;
      }
      if (in_aperture) continue;
      const double eps_solid = (dy >= 0.0) ? cfg.disk_eps_a : cfg.disk_eps_b;
      double s = 1.0;
      if (ramp > 0.0) s = cosine_ramp((cfg.disk_r - r) / ramp);
      const double v = s >= 1.0 ? eps_solid : 1.0 + s * (eps_solid - 1.0);
      g.eps_init[static_cast<std::size_t>(iy) * cfg.nx + ix] =
          std::min(g.eps_init[static_cast<std::size_t>(iy) * cfg.nx + ix], v);
    }
  }
  return g;
}

Geometry make_geometry(const GeometryConfig& cfg) {
  return cfg.dim == 1 ? make_geometry_1d(cfg) : make_geometry_2d(cfg);
}

namespace {

// Harmonic mean of the face mobility eps^(1+beta).
inline double face_k(double ka, double kb) {
  return 2.0 * ka * kb / (ka + kb);
}

struct Stencil1D {
  std::vector<double> lower, diag, upper, rhs;
};

// Thomas algorithm, in place.
void solve_tridiag(Stencil1D& s, std::vector<double>& x) {
  const int n = static_cast<int>(s.diag.size());
  for (int i = 1; i < n; ++i) {
    const double m = s.lower[i] / s.diag[i - 1];
    s.diag[i] -= m * s.upper[i - 1];
    s.rhs[i] -= m * s.rhs[i - 1];
  }
  x[n - 1] = s.rhs[n - 1] / s.diag[n - 1];
  for (int i = n - 2; i >= 0; --i)
    x[i] = (s.rhs[i] - s.upper[i] * x[i + 1]) / s.diag[i];
}

}  // namespace

std::vector<double> fv_diffusion_slice(const Geometry& geometry,
                                       std::span<const double> eps_slice,
                                       std::span<const double> conc_slice, double beta) {
  const int nx = geometry.nx();
  const int ny = geometry.ny();
  std::vector<double> out(geometry.cells(), 0.0);
  auto k_of = [beta](double e) { return std::pow(e, 1.0 + beta); };

  if (geometry.dim() == 1) {
    const double h = geometry.spatial_axes[0].spacing();
    const double inv_h2 = 1.0 / (h * h);
    for (int i = 0; i < nx; ++i) {
      const double ki = k_of(eps_slice[i]);
      const double ui = conc_slice[i] / eps_slice[i];
      double flux_e, flux_w;
      if (i + 1 < nx) {
        const double ke = face_k(ki, k_of(eps_slice[i + 1]));
        flux_e = ke * (conc_slice[i + 1] / eps_slice[i + 1] - ui);
      } else {
        flux_e = 2.0 * ki * (1.0 / eps_slice[i] - ui);  // boundary face, C = 1
      }
      if (i > 0) {
        const double kw = face_k(ki, k_of(eps_slice[i - 1]));
        flux_w = kw * (ui - conc_slice[i - 1] / eps_slice[i - 1]);
      } else {
        flux_w = 2.0 * ki * (ui - 1.0 / eps_slice[i]);
      }
      out[i] = (flux_e - flux_w) * inv_h2;
    }
    return out;
  }

  const double hx = geometry.spatial_axes[0].spacing();
  const double hy = geometry.spatial_axes[1].spacing();
  const double ihx2 = 1.0 / (hx * hx), ihy2 = 1.0 / (hy * hy);
  auto id = [nx](int ix, int iy) { return static_cast<std::size_t>(iy) * nx + ix; };
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t c = id(ix, iy);
      const double ki = k_of(eps_slice[c]);
      const double ui = conc_slice[c] / eps_slice[c];
      auto dir_flux = [&](int jx, int jy, bool inside) {
        if (inside) {
          const std::size_t j = id(jx, jy);
          const double kf = face_k(ki, k_of(eps_slice[j]));
          return kf * (conc_slice[j] / eps_slice[j] - ui);
        }
        return 2.0 * ki * (1.0 / eps_slice[c] - ui);
      };
      const double fe = dir_flux(ix + 1, iy, ix + 1 < nx);
      const double fw = dir_flux(ix - 1, iy, ix > 0);
      const double fn = dir_flux(ix, iy + 1, iy + 1 < ny);
      const double fs = dir_flux(ix, iy - 1, iy > 0);
      out[c] = (fe + fw) * ihx2 + (fn + fs) * ihy2;
    }
  }
  return out;
}

SolveResult solve_dissolution(const Geometry& geometry, const ModelConstants& constants,
                              const SolveControls& controls) {
  if (geometry.nt < 2) throw NumericError("solve_dissolution: nt must be >= 2");
  if (geometry.eps_init.size() != geometry.cells())
    throw NumericError("solve_dissolution: geometry field size mismatch");

  const int nx = geometry.nx();
  const int ny = geometry.ny();
  const std::size_t cells = geometry.cells();
  const int nt = geometry.nt;
  const double dt = geometry.t_final / (nt - 1);
  const double beta = constants.beta;
  auto k_of = [beta](double e) { return std::pow(e, 1.0 + beta); };

  SolveResult res{geometry.make_field(), geometry.make_field()};
  std::vector<double> eps(geometry.eps_init.begin(), geometry.eps_init.end());
  std::vector<double> conc(cells);
  for (std::size_t i = 0; i < cells; ++i)
    conc[i] = eps[i] >= 1.0 - kSolidIndicatorTol ? 1.0 : constants.c0;

  auto store = [&](int it) {
    std::copy(eps.begin(), eps.end(), res.eps.data().begin() + it * cells);
    std::copy(conc.begin(), conc.end(), res.conc.data().begin() + it * cells);
  };
  store(0);

  std::vector<char> react(cells);
  std::vector<double> eps_cur(cells), eps_new(cells), c_new(cells), c_cur(cells);

  const double hx = geometry.spatial_axes[0].spacing();
  const double hy = geometry.dim() == 2 ? geometry.spatial_axes[1].spacing() : 0.0;
  const double ihx2 = 1.0 / (hx * hx);
  const double ihy2 = geometry.dim() == 2 ? 1.0 / (hy * hy) : 0.0;

  Stencil1D st;
  if (geometry.dim() == 1) {
    st.lower.resize(cells);
    st.diag.resize(cells);
    st.upper.resize(cells);
    st.rhs.resize(cells);
  }
  Eigen::SparseMatrix<double> mat;
  Eigen::VectorXd rhs2d, sol2d;
  std::vector<Eigen::Triplet<double>> trips;
  if (geometry.dim() == 2) {
    mat.resize(static_cast<int>(cells), static_cast<int>(cells));
    rhs2d.resize(static_cast<int>(cells));
  }

  for (int it = 1; it < nt; ++it) {
    for (std::size_t i = 0; i < cells; ++i)
      react[i] = eps[i] < 1.0 - kSolidIndicatorTol ? 1 : 0;
    eps_cur = eps;
    c_cur = conc;

    if (controls.hold_conc_at_one) {
      const double growth = dt * constants.upsilon_C0 * constants.Da2_star;
      for (std::size_t i = 0; i < cells; ++i) {
        conc[i] = 1.0;
        if (react[i]) eps[i] = std::min(1.0, eps[i] + growth);
      }
      store(it);
      continue;
    }

    bool converged = false;
    for (int inner = 0; inner < controls.max_inner; ++inner) {
      // implicit C solve with the current porosity iterate
      if (geometry.dim() == 1) {
        for (int i = 0; i < nx; ++i) {
          const double ki = k_of(eps_cur[i]);
          double diag = 1.0 / dt + (react[i] ? constants.Da2_star : 0.0);
          double lower = 0.0, upper = 0.0, rhs = conc[i] / dt;
          if (i + 1 < nx) {
            const double ke = face_k(ki, k_of(eps_cur[i + 1]));
            diag += constants.Dm_star * ke * ihx2 / eps_cur[i];
            upper = -constants.Dm_star * ke * ihx2 / eps_cur[i + 1];
          } else {
            const double kb = 2.0 * ki;
            diag += constants.Dm_star * kb * ihx2 / eps_cur[i];
            rhs += constants.Dm_star * kb * ihx2 / eps_cur[i];  // u_bc = 1/eps
          }
          if (i > 0) {
            const double kw = face_k(ki, k_of(eps_cur[i - 1]));
            diag += constants.Dm_star * kw * ihx2 / eps_cur[i];
            lower = -constants.Dm_star * kw * ihx2 / eps_cur[i - 1];
          } else {
            const double kb = 2.0 * ki;
            diag += constants.Dm_star * kb * ihx2 / eps_cur[i];
            rhs += constants.Dm_star * kb * ihx2 / eps_cur[i];
          }
          st.lower[i] = lower;
          st.diag[i] = diag;
          st.upper[i] = upper;
          st.rhs[i] = rhs;
        }
        Stencil1D tmp = st;
        solve_tridiag(tmp, c_new);
      } else {
        trips.clear();
        auto id = [nx](int ix, int iy) { return iy * nx + ix; };
        for (int iy = 0; iy < ny; ++iy) {
          for (int ix = 0; ix < nx; ++ix) {
            const int c = id(ix, iy);
            const double ki = k_of(eps_cur[c]);
            double diag = 1.0 / dt + (react[c] ? constants.Da2_star : 0.0);
            double rhs = conc[c] / dt;
            auto couple = [&](int jx, int jy, bool inside, double ih2) {
              if (inside) {
                const int j = id(jx, jy);
                const double kf = face_k(ki, k_of(eps_cur[j]));
                diag += constants.Dm_star * kf * ih2 / eps_cur[c];
                trips.emplace_back(c, j, -constants.Dm_star * kf * ih2 / eps_cur[j]);
              } else {
                const double kb = 2.0 * ki;
                diag += constants.Dm_star * kb * ih2 / eps_cur[c];
                rhs += constants.Dm_star * kb * ih2 / eps_cur[c];
              }
            };
            couple(ix + 1, iy, ix + 1 < nx, ihx2);
            couple(ix - 1, iy, ix > 0, ihx2);
            couple(ix, iy + 1, iy + 1 < ny, ihy2);
            couple(ix, iy - 1, iy > 0, ihy2);
            trips.emplace_back(c, c, diag);
            rhs2d[c] = rhs;
          }
        }
        mat.setFromTriplets(trips.begin(), trips.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(mat);
        if (lu.info() != Eigen::Success)
          throw NumericError("solve_dissolution: sparse factorization failed at step " +
                             std::to_string(it));
        sol2d = lu.solve(rhs2d);
        for (std::size_t i = 0; i < cells; ++i) c_new[i] = sol2d[static_cast<int>(i)];
      }

      // porosity update, capped at pure fluid
      const double growth = dt * constants.upsilon_C0 * constants.Da2_star;
      for (std::size_t i = 0; i < cells; ++i)
        eps_new[i] = react[i] ? std::min(1.0, eps[i] + growth * c_new[i]) : eps[i];

      // converge on the discrete PDE residual of the C equation, evaluated
      // with the updated porosity (the eps equation is exact by construction
      // away from the cap)
      const auto diff = fv_diffusion_slice(geometry, eps_new, c_new, beta);
      double resid = 0.0;
      for (std::size_t i = 0; i < cells; ++i) {
        const double rc = (c_new[i] - conc[i]) / dt +
                          (react[i] ? constants.Da2_star * c_new[i] : 0.0) -
                          constants.Dm_star * diff[i];
        resid = std::max(resid, std::fabs(rc));
      }
      eps_cur = eps_new;
      c_cur = c_new;
      if (resid < controls.inner_tol) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw NumericError("solve_dissolution: inner iterations did not converge at step " +
                         std::to_string(it));

    eps = eps_cur;
    conc = c_cur;
    for (std::size_t i = 0; i < cells; ++i) {
      if (!(eps[i] >= geometry.eps0 - 1e-12 && eps[i] <= 1.0 + 1e-12))
        throw NumericError("solve_dissolution: porosity left [eps0, 1] at step " +
                           std::to_string(it));
      if (!(conc[i] >= -1e-10 && conc[i] <= 1.0 + 1e-10))
        throw NumericError("solve_dissolution: concentration left [0, 1] at step " +
                           std::to_string(it));
      conc[i] = std::clamp(conc[i], 0.0, 1.0);
      eps[i] = std::clamp(eps[i], geometry.eps0, 1.0);
    }
    store(it);
  }
  return res;
}

FieldGrid emit_synthetic_uct(const FieldGrid& eps, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw NumericError("emit_synthetic_uct: sigma must be >= 0");
  FieldGrid img = eps;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& v : img.data()) {
    const double noise = sigma > 0.0 ? sigma * gauss(rng) : 0.0;
    v = std::clamp(1.0 - v + noise, 0.0, 1.0);
  }
  return img;
}

}  // namespace poreuq::dns
