#include "poreuq/surrogate.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "poreuq/errors.hpp"

namespace poreuq {

double ParamVector::tilde_alpha() const {
  if (!layout.has_alpha) throw NumericError("parameter vector carries no alpha");
  return values[layout.alpha_index()];
}

double ParamVector::tilde_gamma() const {
  if (!layout.has_gamma) throw NumericError("parameter vector carries no gamma");
  return values[layout.gamma_index()];
}

void ParamVector::set_tilde_alpha(double v) {
  if (!layout.has_alpha) throw NumericError("parameter vector carries no alpha");
  values[layout.alpha_index()] = v;
}

void ParamVector::set_tilde_gamma(double v) {
  if (!layout.has_gamma) throw NumericError("parameter vector carries no gamma");
  values[layout.gamma_index()] = v;
}

double ParamVector::alpha() const { return std::exp(tilde_alpha()); }
double ParamVector::gamma() const { return std::exp(tilde_gamma()); }

namespace {

void init_network_weights(const ad::MlpShape& shape, double* out, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto layer = [&](int fan_in, int fan_out) {
    const double sd = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int i = 0; i < fan_out * fan_in; ++i) *out++ = sd * gauss(rng);
    for (int i = 0; i < fan_out; ++i) *out++ = 0.0;  // biases
  };
  layer(shape.input_dim, shape.width);
  for (int l = 1; l < shape.hidden_layers; ++l) layer(shape.width, shape.width);
  layer(shape.width, 1);
}

}  // namespace

ParamVector init_params(const NetworkSpec& eps_spec, const NetworkSpec* conc_spec,
                        bool with_alpha, bool with_gamma, std::uint64_t seed) {
  ParamVector p;
  p.layout.eps_params = eps_spec.param_count();
  p.layout.conc_params = conc_spec ? conc_spec->param_count() : 0;
  p.layout.has_alpha = with_alpha;
  p.layout.has_gamma = with_gamma;
  p.values.assign(p.layout.dim(), 0.0);

  std::mt19937_64 rng(seed);
  init_network_weights(eps_spec.shape, p.values.data(), rng);
  if (conc_spec)
    init_network_weights(conc_spec->shape, p.values.data() + p.layout.eps_params, rng);
  // tilde_alpha = tilde_gamma = 0 already (alpha = gamma = 1)
  return p;
}

double log_prior(const ParamVector& params, double sigma_theta) {
  double s = 0.0;
  for (double v : params.values) s += v * v;
  return s / (2.0 * sigma_theta * sigma_theta);
}

ad::DualBatch predict_eps(const NetworkSpec& spec, const ParamVector& params,
                          std::span<const double> points, int n, ad::JetMode mode) {
  return ad::eval_network(spec.shape, params.eps_slice(), points, n, mode);
}

ad::DualBatch predict_conc(const NetworkSpec& spec, const ParamVector& params,
                           std::span<const double> points, int n, ad::JetMode mode) {
  if (params.layout.conc_params == 0)
    throw NumericError("parameter vector carries no concentration network");
  return ad::eval_network(spec.shape, params.conc_slice(), points, n, mode);
}

namespace {
constexpr char kMagic[8] = {'P', 'Q', 'T', 'H', 'E', 'T', 'A', '\0'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_params(const std::string& path, std::span<const double> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kMagic, 8);
  const std::uint32_t version = kVersion;
  const std::uint32_t count = static_cast<std::uint32_t>(values.size());
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&count), 4);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw IoError("short write: " + path);
}

std::vector<double> read_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[8];
  std::uint32_t version = 0, count = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&count), 4);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("bad parameter file header: " + path);
  if (version != kVersion) throw IoError("unsupported parameter file version");
  std::vector<double> values(count);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(double)))
    throw IoError("truncated parameter file: " + path);
  return values;
}

}  // namespace poreuq
