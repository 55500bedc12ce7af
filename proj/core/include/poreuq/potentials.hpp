#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "poreuq/autodiff.hpp"
#include "poreuq/errors.hpp"
#include "poreuq/imaging.hpp"
#include "poreuq/sampler.hpp"
#include "poreuq/surrogate.hpp"

namespace poreuq::pot {

/// Task kinds of the sequential multi-potential. Step 1 uses the two image
/// fits; step 2 adds the reaction link, the quasi-stationary Poisson
/// constraint and the constant Dirichlet/solid constraints; step 3 replaces
/// the Poisson constraint by the heat-equation residual and adds the full
/// coupled reactive model on the reduced reactive set.
enum class TaskKind {
  EpsFitSolid,
  EpsFitRaiPlus,
  F1Reaction,
  CLaplace,
  CHeat,
  CDirichletConst,
  F2Full,
};

const char* task_name(TaskKind k);

struct PotentialSpec {
  int step = 1;
  double sigma_theta = 10.0;
  double c0 = 1e-7;
  double upsilon_C0 = 1.0;
  double beta = 1.0;
  /// Porosity floor used inside fractional powers of the developed diffusion
  /// operator; network outputs below it are clamped.
  double pow_floor = 1e-3;
  std::vector<TaskKind> tasks;

  static PotentialSpec for_step(int step, double beta, double upsilon_C0,
                                double c0 = 1e-7, double sigma_theta = 10.0);
};

/// Thrown when a residual or gradient turns non-finite; carries the task.
class TaskNumericError : public poreuq::NumericError {
 public:
  TaskNumericError(int task, const std::string& what)
      : NumericError(what), task_index(task) {}
  int task_index;
};

// ---- pointwise diffusion operator forms -----------------------------------

/// Compact form of the heterogeneous diffusion div(eps^(1+beta) grad(C/eps))
/// evaluated from pointwise jets (value, spatial gradient, per-axis second
/// derivatives) by the quotient rule. Throws NumericError if eps < floor.
std::vector<double> diffusion_compact(const ad::DualBatch& eps, const ad::DualBatch& conc,
                                      double beta, double floor = 1e-6);

/// Developed form: eps^(beta-1)(eps lap C - C lap eps)
///   + (beta-1) eps^(beta-1) grad(eps).grad(C)
///   + (beta-1) eps^(beta-2) C grad(eps).grad(eps).
/// The beta = 1 path reduces to eps lap C - C lap eps with no powers.
std::vector<double> diffusion_developed(const ad::DualBatch& eps,
                                        const ad::DualBatch& conc, double beta,
                                        double floor = 1e-6);

// ---- residual operators (RMS over their point subsets) --------------------

double residual_eps_fit(const NetworkSpec& eps_spec, const ParamVector& params,
                        std::span<const double> points,
                        std::span<const double> intensity, int n);

double residual_f1(const NetworkSpec& eps_spec, const NetworkSpec& conc_spec,
                   const ParamVector& params, std::span<const double> points, int n,
                   double upsilon_C0);

/// step 2: RMS of lap C; step 3: RMS of gamma dC/dt - lap C.
double residual_c_field(const NetworkSpec& conc_spec, const ParamVector& params,
                        std::span<const double> points, int n, int step);

struct DirichletResidual {
  double boundary_part = 0.0;  // RMS(1 - C) on the domain boundary set
  double solid_part = 0.0;     // RMS(c0 - C) on the solid set
  /// sqrt(boundary^2 + solid^2): the single-task combination whose square is
  /// the sum of the two squared RMS norms entering the potential.
  double combined = 0.0;
};
DirichletResidual residual_dirichlet(const NetworkSpec& conc_spec,
                                     const ParamVector& params,
                                     std::span<const double> boundary_points, int nb,
                                     std::span<const double> solid_points, int ns,
                                     double c0);

double residual_f2(const NetworkSpec& eps_spec, const NetworkSpec& conc_spec,
                   const ParamVector& params, std::span<const double> points, int n,
                   double beta, double upsilon_C0, double pow_floor = 1e-3);

// ---- the sampled multi-potential -------------------------------------------

/// Weighted multi-task potential over the observation regions, evaluated and
/// differentiated through a reverse-mode tape in fixed-size point chunks.
/// Implements the sampler-facing PotentialModel interface.
class BpinnPotential : public hmc::PotentialModel {
 public:
  BpinnPotential(PotentialSpec spec, const img::ObservationSet& obs,
                 NetworkSpec eps_spec, NetworkSpec conc_spec, ParamLayout layout,
                 int chunk = 256);
  ~BpinnPotential() override;

  int dim() const override { return layout_.dim(); }
  int task_count() const override { return static_cast<int>(spec_.tasks.size()); }
  const PotentialSpec& spec() const { return spec_; }
  const ParamLayout& layout() const { return layout_; }

  void eval(std::span<const double> theta, std::vector<double>& task_values,
            double& prior) override;
  void grad(std::span<const double> theta, std::span<const double> lambda,
            Gradient& out) override;

  /// U = sum_k lambda_k L_k + prior with L_k = RMS_k^2 / 2. Throws
  /// TaskNumericError when a task value is non-finite.
  double assemble(std::span<const double> theta, std::span<const double> lambda);

 private:
  struct TaskGraph;
  void build_graphs(const img::ObservationSet& obs);
  double run_task(TaskGraph& tg, std::span<const double> theta, double* grad);

  PotentialSpec spec_;
  NetworkSpec eps_spec_, conc_spec_;
  ParamLayout layout_;
  int chunk_;
  std::vector<std::unique_ptr<TaskGraph>> graphs_;
};

/// Total and per-task potential gradients at params (spec-level entry point).
/// Throws TaskNumericError carrying the offending task on non-finite
/// gradient components.
hmc::PotentialModel::Gradient grad_potential(BpinnPotential& potential,
                                             const ParamVector& params,
                                             std::span<const double> lambda);

/// U(theta) for the given step and weights; typed error on NaN residuals.
double assemble_potential(BpinnPotential& potential, const ParamVector& params,
                          std::span<const double> lambda);

// ---- operator timing benchmark ---------------------------------------------

struct BenchRow {
  std::string form;   // compact | developed_general | developed_beta1
  std::string grid;   // e.g. "1d-48000"
  double mean_ns = 0.0;
  double speedup = 1.0;  // T_compact / T_form on the same grid
};

/// Wall-time comparison of the three operator evaluation routes through
/// random surrogate networks, single-threaded. The compact route evaluates
/// the full composition by nested tape differentiation; the developed routes
/// use fused jet propagation plus the pointwise developed formula.
std::vector<BenchRow> benchmark_operators(std::span<const int> batches_1d,
                                          std::span<const int> batches_2d,
                                          int repetitions, std::uint64_t seed = 7);

void write_benchmark_csv(const std::string& path, const std::vector<BenchRow>& rows);

}  // namespace poreuq::pot
