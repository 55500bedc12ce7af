#include "poreuq/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "poreuq/errors.hpp"

namespace poreuq::img {

const char* region_name(Region r) {
  switch (r) {
    case Region::Solid: return "SOLID";
    case Region::Fluid: return "FLUID";
    case Region::Boundary: return "BOUNDARY";
    case Region::Rai: return "RAI";
    case Region::RaiPlusExtra: return "RAI_PLUS_EXTRA";
  }
  return "?";
}

Region region_from_name(const std::string& name) {
  if (name == "SOLID") return Region::Solid;
  if (name == "FLUID") return Region::Fluid;
  if (name == "BOUNDARY") return Region::Boundary;
  if (name == "RAI") return Region::Rai;
  if (name == "RAI_PLUS_EXTRA") return Region::RaiPlusExtra;
  throw IoError("unknown region label: " + name);
}

std::vector<int> ObservationSet::indices_of(Region r) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (region[i] == r) out.push_back(i);
  return out;
}

std::vector<int> ObservationSet::rai_plus_indices() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (region[i] == Region::Rai || region[i] == Region::RaiPlusExtra) out.push_back(i);
  return out;
}

int ObservationSet::count(Region r) const {
  int c = 0;
  for (auto v : region) c += (v == r);
  return c;
}

std::vector<double> ObservationSet::gather_points(std::span<const int> idx) const {
  std::vector<double> out(idx.size() * point_dim());
  for (std::size_t k = 0; k < idx.size(); ++k)
    for (int d = 0; d < point_dim(); ++d)
      out[k * point_dim() + d] = points[static_cast<std::size_t>(idx[k]) * point_dim() + d];
  return out;
}

std::vector<double> ObservationSet::gather_intensity(std::span<const int> idx) const {
  std::vector<double> out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = intensity[idx[k]];
  return out;
}

void ObservationSet::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << (spatial_dim == 1 ? "x,t,intensity,region\n" : "x,y,t,intensity,region\n");
  out.precision(17);
  for (int i = 0; i < size(); ++i) {
    for (int d = 0; d < point_dim(); ++d)
      out << points[static_cast<std::size_t>(i) * point_dim() + d] << ",";
    out << intensity[i] << "," << region_name(region[i]) << "\n";
  }
}

ObservationSet ObservationSet::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::string header;
  if (!std::getline(in, header)) throw IoError("empty observation CSV: " + path);
  ObservationSet obs;
  obs.spatial_dim = header.rfind("x,y,", 0) == 0 ? 2 : 1;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    for (int d = 0; d < obs.point_dim(); ++d) {
      std::getline(ss, tok, ',');
      obs.points.push_back(std::stod(tok));
    }
    std::getline(ss, tok, ',');
    obs.intensity.push_back(std::stod(tok));
    std::getline(ss, tok, ',');
    obs.region.push_back(region_from_name(tok));
  }
  return obs;
}

FieldGrid normalize_stack(const FieldGrid& stack) {
  FieldGrid out = stack;
  double lo = stack.data()[0], hi = stack.data()[0];
  for (double v : stack.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == lo) {
    std::fill(out.data().begin(), out.data().end(), 0.0);
    return out;
  }
  const double span = hi - lo;
  for (auto& v : out.data()) v = (v - lo) / span;
  return out;
}

std::vector<char> detect_rai(const FieldGrid& stack) {
  if (stack.nt() < 2) throw NumericError("detect_rai: stack needs >= 2 time slices");
  std::vector<char> mask(stack.size(), 0);
  const std::size_t cs = stack.cells_per_slice();
  for (int it = 0; it + 1 < stack.nt(); ++it) {
    const double* cur = stack.data().data() + static_cast<std::size_t>(it) * cs;
    const double* nxt = cur + cs;
    char* m = mask.data() + static_cast<std::size_t>(it) * cs;
    for (std::size_t c = 0; c < cs; ++c)
      m[c] = (nxt[c] < cur[c] && cur[c] > 0.1 && cur[c] < 0.9) ? 1 : 0;
  }
  return mask;
}

std::vector<char> dilate_rai_plus(const std::vector<char>& rai, const FieldGrid& stack,
                                  int r_space, int r_time, double solid_threshold) {
  if (r_space < 0 || r_time < 0) throw NumericError("dilate_rai_plus: negative radius");
  std::vector<char> out = rai;
  const int nx = stack.nx(), ny = stack.ny(), nt = stack.nt();
  const bool two_d = stack.spatial_dim() == 2;
  for (int it = 0; it < nt; ++it) {
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        if (!rai[stack.idx(ix, iy, it)]) continue;
        for (int dt = -r_time; dt <= r_time; ++dt) {
          const int jt = it + dt;
          if (jt < 0 || jt >= nt) continue;
          for (int dy = two_d ? -r_space : 0; dy <= (two_d ? r_space : 0); ++dy) {
            const int jy = iy + dy;
            if (jy < 0 || jy >= ny) continue;
            for (int dx = -r_space; dx <= r_space; ++dx) {
              const int jx = ix + dx;
              if (jx < 0 || jx >= nx) continue;
              const std::size_t j = stack.idx(jx, jy, jt);
              if (out[j] || rai[j]) continue;
              if (stack.data()[j] < solid_threshold) out[j] = 1;  // fluid side only
            }
          }
        }
      }
    }
  }
  return out;
}

namespace {

/// Largest-remainder quotas: each within one point of fraction * n_obs.
std::vector<std::int64_t> quotas_from_fractions(std::span<const double> fractions,
                                                std::int64_t n_obs) {
  const int k = static_cast<int>(fractions.size());
  std::vector<std::int64_t> q(k);
  std::vector<std::pair<double, int>> rem(k);
  double target = 0.0;
  std::int64_t assigned = 0;
  for (int i = 0; i < k; ++i) {
    const double exact = fractions[i] * static_cast<double>(n_obs);
    q[i] = static_cast<std::int64_t>(std::floor(exact));
    rem[i] = {exact - std::floor(exact), i};
    target += exact;
    assigned += q[i];
  }
  std::int64_t leftover = static_cast<std::int64_t>(std::llround(target)) - assigned;
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int i = 0; i < k && leftover > 0; ++i, --leftover) ++q[rem[i].second];
  return q;
}

}  // namespace

ObservationSet extract_observations(const FieldGrid& raw_stack,
                                    const ObservationConfig& cfg, std::uint64_t seed) {
  const double fsum = cfg.f_solid + cfg.f_fluid + cfg.f_rai + cfg.f_rai_plus +
                      cfg.f_rai_minus + cfg.f_boundary;
  if (fsum > 1.0 + 1e-12) throw ConfigError("observation fractions sum above 1");
  if (cfg.n_obs > static_cast<std::int64_t>(raw_stack.size()))
    throw ConfigError("n_obs exceeds grid size");

  const FieldGrid stack = normalize_stack(raw_stack);
  const std::vector<char> rai = detect_rai(stack);
  const std::vector<char> rai_plus = dilate_rai_plus(
      rai, stack, cfg.rai_dilate_space, cfg.rai_dilate_time, cfg.solid_threshold);

  const int nx = stack.nx(), ny = stack.ny(), nt = stack.nt();
  const bool two_d = stack.spatial_dim() == 2;

  // voxel pools per bucket
  std::vector<std::size_t> pool_solid, pool_fluid, pool_rai, pool_tube, pool_boundary;
  for (int it = 0; it < nt; ++it) {
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const std::size_t c = stack.idx(ix, iy, it);
        const bool ring = ix == 0 || ix == nx - 1 || (two_d && (iy == 0 || iy == ny - 1));
        if (ring) {
          pool_boundary.push_back(c);
          continue;
        }
        if (rai[c]) {
          pool_rai.push_back(c);
          continue;
        }
        if (rai_plus[c]) {
          pool_tube.push_back(c);
          continue;
        }
        if (stack.data()[c] >= cfg.solid_threshold)
          pool_solid.push_back(c);
        else
          pool_fluid.push_back(c);
      }
    }
  }

  const double fractions[6] = {cfg.f_solid,     cfg.f_fluid,  cfg.f_rai,
                               cfg.f_rai_plus,  cfg.f_rai_minus, cfg.f_boundary};
  const auto quotas = quotas_from_fractions(fractions, cfg.n_obs);

  std::mt19937_64 rng(seed);
  auto draw = [&rng](std::vector<std::size_t> pool, std::int64_t quota,
                     const char* name) {
    std::vector<std::size_t> picked;
    if (quota == 0) return picked;
    if (pool.empty())
      throw NumericError(std::string("observation region ") + name +
                         " is empty but has a positive quota");
    const std::int64_t take =
        std::min<std::int64_t>(quota, static_cast<std::int64_t>(pool.size()));
    for (std::int64_t i = 0; i < take; ++i) {  // partial Fisher-Yates
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
      picked.push_back(pool[i]);
    }
    for (std::int64_t i = take; i < quota; ++i) {  // top up with replacement
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      picked.push_back(pool[pick(rng)]);
    }
    return picked;
  };

  const auto sel_solid = draw(pool_solid, quotas[0], "SOLID");
  const auto sel_fluid = draw(pool_fluid, quotas[1], "FLUID");
  const auto sel_rai = draw(pool_rai, quotas[2], "RAI");
  const auto sel_tube = draw(pool_tube, quotas[3], "RAI_PLUS_EXTRA");
  const auto sel_rai_reserve = draw(pool_rai, quotas[4], "RAI_MINUS_RESERVE");
  const auto sel_boundary = draw(pool_boundary, quotas[5], "BOUNDARY");

  ObservationSet obs;
  obs.spatial_dim = stack.spatial_dim();
  auto push = [&](std::size_t c, Region r) {
    const int it = static_cast<int>(c / stack.cells_per_slice());
    const std::size_t rem = c % stack.cells_per_slice();
    const int iy = static_cast<int>(rem) / nx;
    const int ix = static_cast<int>(rem) % nx;
    obs.points.push_back(stack.axis(0).coord(ix));
    if (two_d) obs.points.push_back(stack.axis(1).coord(iy));
    obs.points.push_back(stack.time_axis().coord(it));
    obs.intensity.push_back(stack.data()[c]);
    obs.region.push_back(r);
  };
  obs.bucket_counts = {static_cast<int>(sel_solid.size()), static_cast<int>(sel_fluid.size()),
                       static_cast<int>(sel_rai.size()), static_cast<int>(sel_tube.size()),
                       static_cast<int>(sel_rai_reserve.size()),
                       static_cast<int>(sel_boundary.size())};
  for (auto c : sel_solid) push(c, Region::Solid);
  for (auto c : sel_fluid) push(c, Region::Fluid);
  for (auto c : sel_rai) push(c, Region::Rai);
  for (auto c : sel_rai_reserve) push(c, Region::Rai);
  for (auto c : sel_tube) push(c, Region::RaiPlusExtra);
  for (auto c : sel_boundary) push(c, Region::Boundary);
  return obs;
}

std::vector<int> restrict_rai_minus(ObservationSet& obs,
                                    std::span<const double> dm_star_estimates) {
  const auto rai = obs.rai_indices();
  if (rai.size() != dm_star_estimates.size())
    throw NumericError("restrict_rai_minus: estimate count does not match RAI points");
  std::vector<int> kept;
  for (std::size_t k = 0; k < rai.size(); ++k)
    if (dm_star_estimates[k] > 0.0) kept.push_back(rai[k]);
  if (kept.empty())
    throw NumericError("restrict_rai_minus: no RAI point has a positive Dm* estimate");
  obs.rai_minus = kept;
  return kept;
}

}  // namespace poreuq::img
