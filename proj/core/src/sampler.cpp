#include "poreuq/sampler.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <random>

#include "poreuq/errors.hpp"

namespace poreuq::hmc {

double ChainRecord::acceptance_rate() const {
  if (accept.empty()) return 0.0;
  double s = 0.0;
  for (char a : accept) s += a;
  return s / static_cast<double>(accept.size());
}

void ChainRecord::write_csv(const std::string& path, int alpha_index,
                            int gamma_index) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.precision(17);
  const std::size_t n_tasks = lambda.empty() ? 0 : lambda.front().size();
  out << "iteration,H_before,H_after,accept";
  for (std::size_t k = 0; k < n_tasks; ++k) out << ",lambda" << k;
  out << ",alpha,gamma\n";
  for (int i = 0; i < size(); ++i) {
    out << i << "," << h_before[i] << "," << h_after[i] << ","
        << static_cast<int>(accept[i]);
    for (std::size_t k = 0; k < n_tasks; ++k) out << "," << lambda[i][k];
    if (alpha_index >= 0)
      out << "," << std::exp(theta[i][alpha_index]);
    else
      out << ",";
    if (gamma_index >= 0)
      out << "," << std::exp(theta[i][gamma_index]);
    else
      out << ",";
    out << "\n";
  }
}

std::vector<double> adapt_weights(const std::vector<std::vector<double>>& task_grads) {
  if (task_grads.empty()) throw NumericError("adapt_weights: no tasks");
  const std::size_t k_tasks = task_grads.size();
  std::vector<double> var(k_tasks);
  std::size_t argmin = 0;
  for (std::size_t k = 0; k < k_tasks; ++k) {
    const auto& g = task_grads[k];
    if (g.size() < 2)
      throw NumericError("adapt_weights: gradient vectors need >= 2 components");
    double mean = 0.0, meansq = 0.0;
    for (double v : g) {
      mean += v;
      meansq += v * v;
    }
    mean /= static_cast<double>(g.size());
    meansq /= static_cast<double>(g.size());
    var[k] = meansq - mean * mean;
    if (!(var[k] > 0.0))
      throw NumericError("adapt_weights: degenerate (zero-variance) task " +
                         std::to_string(k));
    if (var[k] < var[argmin]) argmin = k;
  }
  std::vector<double> lambda(k_tasks);
  for (std::size_t k = 0; k < k_tasks; ++k)
    lambda[k] = std::sqrt(var[argmin] / var[k]);
  lambda[argmin] = 1.0;
  return lambda;
}

namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

LeapfrogResult leapfrog(PotentialModel& model, std::span<const double> lambda,
                        std::vector<double>& theta, std::vector<double>& momentum,
                        double dt, int n_steps) {
  const int d = model.dim();
  LeapfrogResult res;
  PotentialModel::Gradient g;
  model.grad(theta, lambda, g);
  if (!all_finite(g.total)) {
    res.diverged = true;
    return res;
  }
  for (int i = 0; i < d; ++i) momentum[i] -= 0.5 * dt * g.total[i];
  for (int step = 0; step < n_steps; ++step) {
    for (int i = 0; i < d; ++i) theta[i] += dt * momentum[i];
    if (!all_finite(theta)) {
      res.diverged = true;
      return res;
    }
    model.grad(theta, lambda, g);
    if (!all_finite(g.total)) {
      res.diverged = true;
      return res;
    }
    const double kick = (step + 1 == n_steps) ? 0.5 * dt : dt;
    for (int i = 0; i < d; ++i) momentum[i] -= kick * g.total[i];
  }
  res.task_values = g.task_values;
  res.prior = g.prior;
  if (!all_finite(momentum)) res.diverged = true;
  return res;
}

ChainRecord sample(PotentialModel& model, const SamplerConfig& config,
                   std::span<const double> theta0) {
  if (config.n_adapt <= 0 || config.n_samples <= 0 || config.n_leapfrog <= 0 ||
      config.dt <= 0.0)
    throw NumericError("sampler: configuration values must be positive");
  if (config.n_adapt >= config.n_samples)
    throw NumericError("sampler: n_adapt must be below n_samples");
  const int d = model.dim();
  if (static_cast<int>(theta0.size()) != d)
    throw NumericError("sampler: initial state dimension mismatch");

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<double> theta(theta0.begin(), theta0.end());
  std::vector<double> lambda(model.task_count(), 1.0);
  std::vector<double> momentum(d);

  ChainRecord rec;
  rec.n_adapt = config.n_adapt;
  rec.n_samples = config.n_samples;
  const int total = config.n_adapt + config.n_samples;
  rec.theta.reserve(total);

  PotentialModel::Gradient g;
  std::deque<char> window;
  int window_divergent = 0;

  for (int iter = 0; iter < total; ++iter) {
    model.grad(theta, lambda, g);
    if (iter < config.n_adapt) lambda = adapt_weights(g.per_task);
    const double u0 = model.potential(lambda, g.task_values, g.prior);

    for (int i = 0; i < d; ++i) momentum[i] = gauss(rng);
    double kin0 = 0.0;
    for (double r : momentum) kin0 += r * r;
    const double h0 = u0 + 0.5 * kin0;

    std::vector<double> theta_prop = theta;
    LeapfrogResult traj =
        leapfrog(model, lambda, theta_prop, momentum, config.dt, config.n_leapfrog);

    double h1 = std::numeric_limits<double>::infinity();
    std::vector<double> task_end = g.task_values;
    bool accepted = false;
    if (!traj.diverged) {
      double kin1 = 0.0;
      for (double r : momentum) kin1 += r * r;
      const double u1 = model.potential(lambda, traj.task_values, traj.prior);
      h1 = u1 + 0.5 * kin1;
      if (std::isfinite(h1) && unif(rng) <= std::exp(h0 - h1)) {
        accepted = true;
        theta = theta_prop;
        task_end = traj.task_values;
      }
    } else {
      unif(rng);  // keep the random stream aligned across divergent iterations
    }

    rec.theta.push_back(theta);
    rec.lambda.push_back(lambda);
    rec.h_before.push_back(h0);
    rec.h_after.push_back(h1);
    rec.accept.push_back(accepted ? 1 : 0);
    rec.task_values.push_back(task_end);

    window.push_back(traj.diverged ? 1 : 0);
    window_divergent += traj.diverged ? 1 : 0;
    if (static_cast<int>(window.size()) > 50) {
      window_divergent -= window.front();
      window.pop_front();
    }
    if (static_cast<int>(window.size()) == 50 && window_divergent > 45)
      throw NumericError(
          "sampler aborted: divergence rate above 90% over a 50-iteration window "
          "(iteration " +
          std::to_string(iter) + ")");
  }
  return rec;
}

}  // namespace poreuq::hmc
