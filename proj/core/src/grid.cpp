#include "poreuq/grid.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "poreuq/errors.hpp"

namespace poreuq {

FieldGrid::FieldGrid(Axis x, Axis t) {
  x.cell_centered = true;
  t.cell_centered = false;
  axes_ = {x, t};
  data_.assign(static_cast<std::size_t>(x.n) * t.n, 0.0);
}

FieldGrid::FieldGrid(Axis x, Axis y, Axis t) {
  x.cell_centered = true;
  y.cell_centered = true;
  t.cell_centered = false;
  axes_ = {x, y, t};
  data_.assign(static_cast<std::size_t>(x.n) * y.n * t.n, 0.0);
}

double FieldGrid::slice_mean(int it) const {
  const std::size_t n = cells_per_slice();
  const double* p = data_.data() + static_cast<std::size_t>(it) * n;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += p[i];
  return s / static_cast<double>(n);
}

void FieldGrid::write_binary(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(data_.data()),
            static_cast<std::streamsize>(data_.size() * sizeof(double)));
  if (!out) throw IoError("short write: " + path);

  nlohmann::json meta;
  meta["order"] = "t-major,x-fastest";
  meta["dtype"] = "float64";
  std::vector<int> shape;
  for (const auto& a : axes_) shape.push_back(a.n);
  meta["shape"] = shape;
  auto& ax = meta["axes"] = nlohmann::json::array();
  const char* names2[] = {"x", "t"};
  const char* names3[] = {"x", "y", "t"};
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    ax.push_back({{"name", axes_.size() == 2 ? names2[i] : names3[i]},
                  {"lo", axes_[i].lo},
                  {"hi", axes_[i].hi},
                  {"n", axes_[i].n},
                  {"cell_centered", axes_[i].cell_centered}});
  }
  std::ofstream side(path + ".json");
  if (!side) throw IoError("cannot open for writing: " + path + ".json");
  side << meta.dump(2) << "\n";
}

FieldGrid FieldGrid::read_binary(const std::string& path) {
  std::ifstream side(path + ".json");
  if (!side) throw IoError("missing sidecar: " + path + ".json");
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const std::exception& e) {
    throw IoError("bad sidecar " + path + ".json: " + e.what());
  }
  std::vector<Axis> axes;
  for (const auto& a : meta.at("axes")) {
    Axis ax;
    ax.lo = a.at("lo").get<double>();
    ax.hi = a.at("hi").get<double>();
    ax.n = a.at("n").get<int>();
    ax.cell_centered = a.at("cell_centered").get<bool>();
    axes.push_back(ax);
  }
  FieldGrid g;
  if (axes.size() == 2) {
    g = FieldGrid(axes[0], axes[1]);
  } else if (axes.size() == 3) {
    g = FieldGrid(axes[0], axes[1], axes[2]);
  } else {
    throw IoError("unsupported axis count in " + path + ".json");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  in.read(reinterpret_cast<char*>(g.data_.data()),
          static_cast<std::streamsize>(g.data_.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(g.data_.size() * sizeof(double)))
    throw IoError("truncated stack: " + path);
  return g;
}

void FieldGrid::write_csv_slices(const std::string& dir, const std::string& stem) const {
  std::filesystem::create_directories(dir);
  char name[64];
  for (int it = 0; it < nt(); ++it) {
    std::snprintf(name, sizeof(name), "%s_t%04d.csv", stem.c_str(), it);
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw IoError("cannot open slice CSV in " + dir);
    if (spatial_dim() == 1) {
      out << "x,value\n";
      for (int ix = 0; ix < nx(); ++ix)
        out << axes_[0].coord(ix) << "," << at(ix, it) << "\n";
    } else {
      out << "x,y,value\n";
      for (int iy = 0; iy < ny(); ++iy)
        for (int ix = 0; ix < nx(); ++ix)
          out << axes_[0].coord(ix) << "," << axes_[1].coord(iy) << ","
              << at(ix, iy, it) << "\n";
    }
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 over master ^ golden-ratio-scaled stream index
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace poreuq
