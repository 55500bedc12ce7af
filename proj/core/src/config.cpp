#include "poreuq/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "poreuq/errors.hpp"

namespace poreuq {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string encode_cores(const std::vector<CoreSegment>& cores) {
  std::string s;
  for (std::size_t i = 0; i < cores.size(); ++i) {
    if (i) s += ", ";
    s += fmt_double(cores[i].x0) + ":" + fmt_double(cores[i].x1) + ":" +
         fmt_double(cores[i].eps);
  }
  return s;
}

std::string encode_apertures(const std::vector<Aperture>& aps) {
  std::string s;
  for (std::size_t i = 0; i < aps.size(); ++i) {
    if (i) s += ", ";
    s += fmt_double(aps[i].angle_deg) + ":" + fmt_double(aps[i].width_deg);
  }
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<CoreSegment> decode_cores(const std::string& s) {
  std::vector<CoreSegment> cores;
  if (trim(s).empty()) return cores;
  for (const auto& item : split(s, ',')) {
    auto parts = split(trim(item), ':');
    if (parts.size() != 3) throw ConfigError("bad core segment: " + item);
    cores.push_back({std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])});
  }
  return cores;
}

std::vector<Aperture> decode_apertures(const std::string& s) {
  std::vector<Aperture> aps;
  if (trim(s).empty()) return aps;
  for (const auto& item : split(s, ',')) {
    auto parts = split(trim(item), ':');
    if (parts.size() != 2) throw ConfigError("bad aperture: " + item);
    aps.push_back({std::stod(parts[0]), std::stod(parts[1])});
  }
  return aps;
}

}  // namespace

RunConfig RunConfig::preset(const std::string& name) {
  RunConfig c;
  c.case_name = name;
  // Table-2 sampler settings (1D): N = 50/20/4, Ns = 200, L = 200,
  // dt = 1e-3 / 5e-4 / 2e-4.
  c.steps = {StepSampler{50, 200, 200, 1e-3}, StepSampler{20, 200, 200, 5e-4},
             StepSampler{4, 200, 200, 2e-4}};
  if (name == "1d-beta1" || name == "1d-beta05") {
    c.beta = (name == "1d-beta1") ? 1.0 : 0.5;
    c.geometry.dim = 1;
    c.geometry.x_lo = 0.0;
    c.geometry.x_hi = 3.0;
    c.geometry.nx = 200;
    c.geometry.nt = 240;
    c.geometry.cores = (name == "1d-beta1")
                           ? std::vector<CoreSegment>{{0.45, 1.40, 0.05},
                                                      {1.70, 2.65, 0.07}}
                           : std::vector<CoreSegment>{{0.45, 1.40, 0.05},
                                                      {1.70, 2.65, 0.08}};
    return c;
  }
  if (name == "2d" || name == "2d-smoke") {
    c.beta = 0.5;
    c.geometry.dim = 2;
    c.geometry.x_lo = 0.0;
    c.geometry.x_hi = 2.0;
    c.geometry.y_lo = -1.0;
    c.geometry.y_hi = 1.0;
    c.geometry.disk_cx = 1.0;
    c.geometry.disk_cy = 0.0;
    c.geometry.disk_r = 0.5;
    c.geometry.disk_eps_a = 0.05;
    c.geometry.disk_eps_b = 0.10;
    c.geometry.apertures = {{60.0, 24.0}, {240.0, 24.0}};
    c.physical.Tf = 175.0;
    c.physical.upsilon = 36.93e-3;  // L/mol with C0 = 1 mol/L
    c.observations.f_solid = 0.155;
    c.observations.f_fluid = 0.005;
    c.observations.f_rai = 0.48;
    c.observations.f_rai_plus = 0.11;
    c.observations.f_rai_minus = 0.20;
    c.observations.f_boundary = 0.05;
    // Table-4 sampler settings (2D): N = 50/40/10, Ns = 200, L = 150.
    c.steps = {StepSampler{50, 200, 150, 1e-3}, StepSampler{40, 200, 150, 5e-4},
               StepSampler{10, 200, 150, 3e-4}};
    if (name == "2d") {
      c.geometry.nx = 100;
      c.geometry.ny = 100;
      c.geometry.nt = 350;
      c.observations.n_obs = 15907;
    } else {
      c.geometry.nx = 50;
      c.geometry.ny = 50;
      c.geometry.nt = 80;
      c.observations.n_obs = 6000;
      c.write_csv_slices = false;
    }
    return c;
  }
  throw ConfigError("unknown preset: " + name);
}

void RunConfig::apply_fast_profile() {
  fast = true;
  for (auto& s : steps) {
    s.n_samples = 60;
    s.n_leapfrog = 50;
    if (s.n_adapt >= s.n_samples) s.n_adapt = s.n_samples - 1;
  }
}

void RunConfig::validate() const {
  if (geometry.dim != 1 && geometry.dim != 2)
    throw ConfigError("geometry.dim must be 1 or 2");
  if (geometry.nx < 2 || geometry.nt < 2 || (geometry.dim == 2 && geometry.ny < 2))
    throw ConfigError("grid too small");
  if (geometry.x_hi <= geometry.x_lo) throw ConfigError("empty x extent");
  if (geometry.dim == 2 && geometry.y_hi <= geometry.y_lo)
    throw ConfigError("empty y extent");
  if (geometry.eps0 <= 0.0 || geometry.eps0 >= 1.0)
    throw ConfigError("eps0 must lie in (0, 1)");
  for (const auto& core : geometry.cores) {
    if (core.x1 <= core.x0) throw ConfigError("empty core segment");
    if (core.eps < geometry.eps0 || core.eps >= 1.0)
      throw ConfigError("core porosity outside [eps0, 1)");
  }
  if (beta <= 0.0) throw ConfigError("beta must be positive");
  if (physical.Tf <= 0.0 || physical.L <= 0.0 || physical.Tf_star <= 0.0)
    throw ConfigError("physical scales must be positive");
  if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
  if (sigma_theta <= 0.0) throw ConfigError("sigma_theta must be positive");
  if (c0 <= 0.0) throw ConfigError("c0 must be positive");
  const auto& o = observations;
  const double fsum =
      o.f_solid + o.f_fluid + o.f_rai + o.f_rai_plus + o.f_rai_minus + o.f_boundary;
  if (fsum > 1.0 + 1e-12) throw ConfigError("observation fractions sum above 1");
  if (o.n_obs <= 0) throw ConfigError("n_obs must be positive");
  const std::int64_t grid_size = static_cast<std::int64_t>(geometry.nx) *
                                 (geometry.dim == 2 ? geometry.ny : 1) * geometry.nt;
  if (o.n_obs > grid_size) throw ConfigError("n_obs exceeds grid size");
  for (const auto& s : steps) {
    if (s.n_adapt <= 0 || s.n_samples <= 0 || s.n_leapfrog <= 0 || s.dt <= 0.0)
      throw ConfigError("sampler settings must be positive");
    if (s.n_adapt >= s.n_samples)
      throw ConfigError("n_adapt must be below n_samples");
  }
  if (eps_hidden_layers < 1 || c_hidden_layers < 1 || eps_width < 1 || c_width < 1)
    throw ConfigError("network architecture too small");
  if (chains < 1) throw ConfigError("chains must be >= 1");
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  auto kv = [&out](const std::string& k, const std::string& v) {
    out << k << " = " << v << "\n";
  };
  kv("case", "\"" + case_name + "\"");
  kv("beta", fmt_double(beta));
  kv("seed", std::to_string(seed));
  kv("noise_sigma", fmt_double(noise_sigma));
  kv("c0", fmt_double(c0));
  kv("sigma_theta", fmt_double(sigma_theta));
  kv("porosity_mask_threshold", fmt_double(porosity_mask_threshold));
  kv("fast", fast ? "true" : "false");
  kv("chains", std::to_string(chains));
  kv("write_csv_slices", write_csv_slices ? "true" : "false");

  kv("geometry.dim", std::to_string(geometry.dim));
  kv("geometry.x_lo", fmt_double(geometry.x_lo));
  kv("geometry.x_hi", fmt_double(geometry.x_hi));
  kv("geometry.y_lo", fmt_double(geometry.y_lo));
  kv("geometry.y_hi", fmt_double(geometry.y_hi));
  kv("geometry.nx", std::to_string(geometry.nx));
  kv("geometry.ny", std::to_string(geometry.ny));
  kv("geometry.nt", std::to_string(geometry.nt));
  kv("geometry.t_final", fmt_double(geometry.t_final));
  kv("geometry.eps0", fmt_double(geometry.eps0));
  kv("geometry.ramp_cells", std::to_string(geometry.ramp_cells));
  kv("geometry.cores", "\"" + encode_cores(geometry.cores) + "\"");
  kv("geometry.disk_cx", fmt_double(geometry.disk_cx));
  kv("geometry.disk_cy", fmt_double(geometry.disk_cy));
  kv("geometry.disk_r", fmt_double(geometry.disk_r));
  kv("geometry.disk_eps_a", fmt_double(geometry.disk_eps_a));
  kv("geometry.disk_eps_b", fmt_double(geometry.disk_eps_b));
  kv("geometry.apertures", "\"" + encode_apertures(geometry.apertures) + "\"");

  kv("physical.Ks", fmt_double(physical.Ks));
  kv("physical.As", fmt_double(physical.As));
  kv("physical.gammaH", fmt_double(physical.gammaH));
  kv("physical.Dm", fmt_double(physical.Dm));
  kv("physical.L", fmt_double(physical.L));
  kv("physical.Tf", fmt_double(physical.Tf));
  kv("physical.Tf_star", fmt_double(physical.Tf_star));
  kv("physical.C0", fmt_double(physical.C0));
  kv("physical.upsilon", fmt_double(physical.upsilon));

  kv("observations.n_obs", std::to_string(observations.n_obs));
  kv("observations.f_solid", fmt_double(observations.f_solid));
  kv("observations.f_fluid", fmt_double(observations.f_fluid));
  kv("observations.f_rai", fmt_double(observations.f_rai));
  kv("observations.f_rai_plus", fmt_double(observations.f_rai_plus));
  kv("observations.f_rai_minus", fmt_double(observations.f_rai_minus));
  kv("observations.f_boundary", fmt_double(observations.f_boundary));
  kv("observations.solid_threshold", fmt_double(observations.solid_threshold));
  kv("observations.rai_dilate_space", std::to_string(observations.rai_dilate_space));
  kv("observations.rai_dilate_time", std::to_string(observations.rai_dilate_time));

  for (int i = 0; i < 3; ++i) {
    const std::string p = "step" + std::to_string(i + 1) + ".";
    kv(p + "n_adapt", std::to_string(steps[i].n_adapt));
    kv(p + "n_samples", std::to_string(steps[i].n_samples));
    kv(p + "n_leapfrog", std::to_string(steps[i].n_leapfrog));
    kv(p + "dt", fmt_double(steps[i].dt));
  }

  kv("network.eps_hidden_layers", std::to_string(eps_hidden_layers));
  kv("network.eps_width", std::to_string(eps_width));
  kv("network.c_hidden_layers", std::to_string(c_hidden_layers));
  kv("network.c_width", std::to_string(c_width));
  return out.str();
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    bool quoted = val.size() >= 2 && val.front() == '"' && val.back() == '"';
    if (quoted) val = val.substr(1, val.size() - 2);

    auto as_d = [&]() { return std::stod(val); };
    auto as_i = [&]() { return std::stoi(val); };
    auto as_i64 = [&]() { return static_cast<std::int64_t>(std::stoll(val)); };
    auto as_b = [&]() {
      if (val == "true") return true;
      if (val == "false") return false;
      throw ConfigError("line " + std::to_string(lineno) + ": expected true/false");
    };

    try {
      if (key == "case") c.case_name = val;
      else if (key == "beta") c.beta = as_d();
      else if (key == "seed") c.seed = std::stoull(val);
      else if (key == "noise_sigma") c.noise_sigma = as_d();
      else if (key == "c0") c.c0 = as_d();
      else if (key == "sigma_theta") c.sigma_theta = as_d();
      else if (key == "porosity_mask_threshold") c.porosity_mask_threshold = as_d();
      else if (key == "fast") c.fast = as_b();
      else if (key == "chains") c.chains = as_i();
      else if (key == "write_csv_slices") c.write_csv_slices = as_b();
      else if (key == "geometry.dim") c.geometry.dim = as_i();
      else if (key == "geometry.x_lo") c.geometry.x_lo = as_d();
      else if (key == "geometry.x_hi") c.geometry.x_hi = as_d();
      else if (key == "geometry.y_lo") c.geometry.y_lo = as_d();
      else if (key == "geometry.y_hi") c.geometry.y_hi = as_d();
      else if (key == "geometry.nx") c.geometry.nx = as_i();
      else if (key == "geometry.ny") c.geometry.ny = as_i();
      else if (key == "geometry.nt") c.geometry.nt = as_i();
      else if (key == "geometry.t_final") c.geometry.t_final = as_d();
      else if (key == "geometry.eps0") c.geometry.eps0 = as_d();
      else if (key == "geometry.ramp_cells") c.geometry.ramp_cells = as_i();
      else if (key == "geometry.cores") c.geometry.cores = decode_cores(val);
      else if (key == "geometry.disk_cx") c.geometry.disk_cx = as_d();
      else if (key == "geometry.disk_cy") c.geometry.disk_cy = as_d();
      else if (key == "geometry.disk_r") c.geometry.disk_r = as_d();
      else if (key == "geometry.disk_eps_a") c.geometry.disk_eps_a = as_d();
      else if (key == "geometry.disk_eps_b") c.geometry.disk_eps_b = as_d();
      else if (key == "geometry.apertures") c.geometry.apertures = decode_apertures(val);
      else if (key == "physical.Ks") c.physical.Ks = as_d();
      else if (key == "physical.As") c.physical.As = as_d();
      else if (key == "physical.gammaH") c.physical.gammaH = as_d();
      else if (key == "physical.Dm") c.physical.Dm = as_d();
      else if (key == "physical.L") c.physical.L = as_d();
      else if (key == "physical.Tf") c.physical.Tf = as_d();
      else if (key == "physical.Tf_star") c.physical.Tf_star = as_d();
      else if (key == "physical.C0") c.physical.C0 = as_d();
      else if (key == "physical.upsilon") c.physical.upsilon = as_d();
      else if (key == "observations.n_obs") c.observations.n_obs = as_i64();
      else if (key == "observations.f_solid") c.observations.f_solid = as_d();
      else if (key == "observations.f_fluid") c.observations.f_fluid = as_d();
      else if (key == "observations.f_rai") c.observations.f_rai = as_d();
      else if (key == "observations.f_rai_plus") c.observations.f_rai_plus = as_d();
      else if (key == "observations.f_rai_minus") c.observations.f_rai_minus = as_d();
      else if (key == "observations.f_boundary") c.observations.f_boundary = as_d();
      else if (key == "observations.solid_threshold") c.observations.solid_threshold = as_d();
      else if (key == "observations.rai_dilate_space") c.observations.rai_dilate_space = as_i();
      else if (key == "observations.rai_dilate_time") c.observations.rai_dilate_time = as_i();
      else if (key == "network.eps_hidden_layers") c.eps_hidden_layers = as_i();
      else if (key == "network.eps_width") c.eps_width = as_i();
      else if (key == "network.c_hidden_layers") c.c_hidden_layers = as_i();
      else if (key == "network.c_width") c.c_width = as_i();
      else if (key.rfind("step", 0) == 0) {
        int idx = key[4] - '1';
        if (idx < 0 || idx > 2 || key.size() < 6 || key[5] != '.')
          throw ConfigError("bad step key: " + key);
        std::string field = key.substr(6);
        if (field == "n_adapt") c.steps[idx].n_adapt = as_i();
        else if (field == "n_samples") c.steps[idx].n_samples = as_i();
        else if (field == "n_leapfrog") c.steps[idx].n_leapfrog = as_i();
        else if (field == "dt") c.steps[idx].dt = as_d();
        else throw ConfigError("unknown key: " + key);
      } else {
        throw ConfigError("unknown key: " + key);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("line " + std::to_string(lineno) + " (" + key + "): " + e.what());
    }
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config: " + path);
  out << serialize();
}

bool RunConfig::operator==(const RunConfig& o) const {
  auto core_eq = [](const CoreSegment& a, const CoreSegment& b) {
    return a.x0 == b.x0 && a.x1 == b.x1 && a.eps == b.eps;
  };
  auto ap_eq = [](const Aperture& a, const Aperture& b) {
    return a.angle_deg == b.angle_deg && a.width_deg == b.width_deg;
  };
  if (geometry.cores.size() != o.geometry.cores.size()) return false;
  for (std::size_t i = 0; i < geometry.cores.size(); ++i)
    if (!core_eq(geometry.cores[i], o.geometry.cores[i])) return false;
  if (geometry.apertures.size() != o.geometry.apertures.size()) return false;
  for (std::size_t i = 0; i < geometry.apertures.size(); ++i)
    if (!ap_eq(geometry.apertures[i], o.geometry.apertures[i])) return false;
  for (int i = 0; i < 3; ++i) {
    if (steps[i].n_adapt != o.steps[i].n_adapt) return false;
    if (steps[i].n_samples != o.steps[i].n_samples) return false;
    if (steps[i].n_leapfrog != o.steps[i].n_leapfrog) return false;
    if (steps[i].dt != o.steps[i].dt) return false;
  }
  return case_name == o.case_name && beta == o.beta &&
         geometry.dim == o.geometry.dim && geometry.x_lo == o.geometry.x_lo &&
         geometry.x_hi == o.geometry.x_hi && geometry.y_lo == o.geometry.y_lo &&
         geometry.y_hi == o.geometry.y_hi && geometry.nx == o.geometry.nx &&
         geometry.ny == o.geometry.ny && geometry.nt == o.geometry.nt &&
         geometry.t_final == o.geometry.t_final && geometry.eps0 == o.geometry.eps0 &&
         geometry.ramp_cells == o.geometry.ramp_cells &&
         geometry.disk_cx == o.geometry.disk_cx &&
         geometry.disk_cy == o.geometry.disk_cy &&
         geometry.disk_r == o.geometry.disk_r &&
         geometry.disk_eps_a == o.geometry.disk_eps_a &&
         geometry.disk_eps_b == o.geometry.disk_eps_b &&
         physical.Ks == o.physical.Ks && physical.As == o.physical.As &&
         physical.gammaH == o.physical.gammaH && physical.Dm == o.physical.Dm &&
         physical.L == o.physical.L && physical.Tf == o.physical.Tf &&
         physical.Tf_star == o.physical.Tf_star && physical.C0 == o.physical.C0 &&
         physical.upsilon == o.physical.upsilon &&
         observations.n_obs == o.observations.n_obs &&
         observations.f_solid == o.observations.f_solid &&
         observations.f_fluid == o.observations.f_fluid &&
         observations.f_rai == o.observations.f_rai &&
         observations.f_rai_plus == o.observations.f_rai_plus &&
         observations.f_rai_minus == o.observations.f_rai_minus &&
         observations.f_boundary == o.observations.f_boundary &&
         observations.solid_threshold == o.observations.solid_threshold &&
         observations.rai_dilate_space == o.observations.rai_dilate_space &&
         observations.rai_dilate_time == o.observations.rai_dilate_time &&
         noise_sigma == o.noise_sigma && c0 == o.c0 &&
         sigma_theta == o.sigma_theta &&
         porosity_mask_threshold == o.porosity_mask_threshold && seed == o.seed &&
         eps_hidden_layers == o.eps_hidden_layers && eps_width == o.eps_width &&
         c_hidden_layers == o.c_hidden_layers && c_width == o.c_width &&
         fast == o.fast && chains == o.chains &&
         write_csv_slices == o.write_csv_slices;
}

}  // namespace poreuq
