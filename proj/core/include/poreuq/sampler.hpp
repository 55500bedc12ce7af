#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace poreuq::hmc {

/// Multi-task potential energy U(theta) = sum_k lambda_k L_k(theta) + prior.
/// Implementations own whatever evaluation state they need; one instance
/// serves one chain at a time.
class PotentialModel {
 public:
  struct Gradient {
    std::vector<double> total;                  // d(U)/d(theta), lambda-weighted
    std::vector<std::vector<double>> per_task;  // d(L_k)/d(theta), unweighted
    std::vector<double> task_values;            // L_k
    double prior = 0.0;
  };

  virtual ~PotentialModel() = default;
  virtual int dim() const = 0;
  virtual int task_count() const = 0;
  /// Task values and prior only (no gradients).
  virtual void eval(std::span<const double> theta, std::vector<double>& task_values,
                    double& prior) = 0;
  /// Fills all Gradient members; buffers are reused across calls.
  virtual void grad(std::span<const double> theta, std::span<const double> lambda,
                    Gradient& out) = 0;

  double potential(std::span<const double> lambda,
                   std::span<const double> task_values, double prior) const {
    double u = prior;
    for (std::size_t k = 0; k < task_values.size(); ++k) u += lambda[k] * task_values[k];
    return u;
  }
};

struct SamplerConfig {
  int n_adapt = 50;     // N: adaptive iterations (lambda re-estimated each)
  int n_samples = 200;  // Ns: posterior iterations with frozen lambda
  int n_leapfrog = 200; // L
  double dt = 1e-3;
  std::uint64_t seed = 0;
};

/// Full per-iteration chain history; length n_adapt + n_samples on success.
struct ChainRecord {
  int n_adapt = 0;
  int n_samples = 0;
  std::vector<std::vector<double>> theta;
  std::vector<std::vector<double>> lambda;
  std::vector<double> h_before, h_after;
  std::vector<char> accept;
  std::vector<std::vector<double>> task_values;  // L_k at the recorded state

  int size() const { return static_cast<int>(theta.size()); }
  int first_post_adaptive() const { return n_adapt; }
  double acceptance_rate() const;

  /// CSV stream: iteration, H_before, H_after, accept, lambda_k...,
  /// alpha, gamma (log-inverse parameters exponentiated when present;
  /// pass -1 for absent indices).
  void write_csv(const std::string& path, int alpha_index, int gamma_index) const;
};

/// Inverse-Dirichlet weights from per-task gradient variances:
/// lambda_k = sqrt(min_t Var(grad L_t) / Var(grad L_k)). The variance is
/// taken across the components of each task's parameter gradient. Every
/// lambda lies in (0, 1] and the minimum-variance task gets exactly 1.
/// Throws NumericError on a zero-variance (degenerate) task.
std::vector<double> adapt_weights(const std::vector<std::vector<double>>& task_grads);

struct LeapfrogResult {
  bool diverged = false;
  std::vector<double> task_values;  // at the final state
  double prior = 0.0;
};

/// L symmetric half-kick / drift / half-kick steps of the Hamiltonian flow
/// with identity mass matrix; theta and momentum are updated in place.
LeapfrogResult leapfrog(PotentialModel& model, std::span<const double> lambda,
                        std::vector<double>& theta, std::vector<double>& momentum,
                        double dt, int n_steps);

/// Adaptively Weighted HMC: n_adapt iterations re-estimating lambda from
/// gradient variances at the current state, then n_samples iterations with
/// lambda frozen at the last adapted values. Momenta are drawn fresh from a
/// standard Gaussian each iteration and a Metropolis correction is applied
/// in both phases. Aborts (NumericError) when more than 90% of any
/// 50-iteration window diverges.
ChainRecord sample(PotentialModel& model, const SamplerConfig& config,
                   std::span<const double> theta0);

}  // namespace poreuq::hmc
