#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "poreuq/autodiff.hpp"

namespace poreuq {

/// Architecture of one surrogate network. The micro-porosity network
/// defaults to 4 hidden layers x 32 neurons with a rectified-tanh output
/// (Tanh^r(z) = 0.5*(tanh(z)+1), so outputs stay in [0,1]); the acid
/// concentration network defaults to 3 hidden layers x 32 neurons, also
/// rectified-tanh since the field is normalized to [0,1].
struct NetworkSpec {
  ad::MlpShape shape;

  int param_count() const { return shape.param_count(); }

  static NetworkSpec porosity_default(int input_dim) {
    NetworkSpec s;
    s.shape = {input_dim, 4, 32, ad::OutputActivation::RectifiedTanh};
    return s;
  }
  static NetworkSpec concentration_default(int input_dim) {
    NetworkSpec s;
    s.shape = {input_dim, 3, 32, ad::OutputActivation::RectifiedTanh};
    return s;
  }
};

/// Flat layout of the sampled state: porosity-network weights, then
/// concentration-network weights, then the log-transformed inverse
/// parameters present at the current sequential step.
struct ParamLayout {
  int eps_params = 0;
  int conc_params = 0;
  bool has_alpha = false;
  bool has_gamma = false;

  int network_dim() const { return eps_params + conc_params; }
  int dim() const { return network_dim() + (has_alpha ? 1 : 0) + (has_gamma ? 1 : 0); }
  int alpha_index() const { return network_dim(); }
  int gamma_index() const { return network_dim() + 1; }
};

/// The state sampled by the chain: Theta = {network weights, tilde_alpha,
/// tilde_gamma} with alpha = exp(tilde_alpha) = 1/Da2*, gamma =
/// exp(tilde_gamma) = 1/Dm*, kept in log space so positivity is structural.
struct ParamVector {
  ParamLayout layout;
  std::vector<double> values;

  int dim() const { return layout.dim(); }
  int network_dim() const { return layout.network_dim(); }

  std::span<const double> eps_slice() const {
    return {values.data(), static_cast<std::size_t>(layout.eps_params)};
  }
  std::span<const double> conc_slice() const {
    return {values.data() + layout.eps_params,
            static_cast<std::size_t>(layout.conc_params)};
  }
  double tilde_alpha() const;
  double tilde_gamma() const;
  void set_tilde_alpha(double v);
  void set_tilde_gamma(double v);
  double alpha() const;  // 1 / Da2*
  double gamma() const;  // 1 / Dm*
};

/// Point estimates of the dimensionless inverse parameters.
struct InverseParams {
  double alpha = 1.0;
  double gamma = 1.0;
  /// Physical Damkohler recovered as Da2*/Dm* = gamma/alpha.
  double da2() const { return gamma / alpha; }
};

/// Draws network weights from N(0, 1/sqrt(fan_in)) per layer, zero biases;
/// log-inverse parameters start at 0 (alpha = gamma = 1, weakly informed).
/// Reproducible for a fixed seed.
ParamVector init_params(const NetworkSpec& eps_spec, const NetworkSpec* conc_spec,
                        bool with_alpha, bool with_gamma, std::uint64_t seed);

/// Gaussian log-prior potential term ||Theta||^2 / (2 sigma_theta^2).
double log_prior(const ParamVector& params, double sigma_theta = 10.0);

/// Surrogate field evaluations (+ input derivatives on request).
ad::DualBatch predict_eps(const NetworkSpec& spec, const ParamVector& params,
                          std::span<const double> points, int n,
                          ad::JetMode mode = ad::JetMode::None);
ad::DualBatch predict_conc(const NetworkSpec& spec, const ParamVector& params,
                           std::span<const double> points, int n,
                           ad::JetMode mode = ad::JetMode::None);

/// Chain checkpoint format: 16-byte header (8-byte magic "PQTHETA\0",
/// uint32 version, uint32 count) followed by count float64 values.
void write_params(const std::string& path, std::span<const double> values);
std::vector<double> read_params(const std::string& path);

}  // namespace poreuq
