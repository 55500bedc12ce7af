#include "poreuq/potentials.hpp"

#include <chrono>
#include <functional>
#include <tuple>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "poreuq/errors.hpp"

namespace poreuq::pot {

const char* task_name(TaskKind k) {
  switch (k) {
    case TaskKind::EpsFitSolid: return "EPS_FIT_SOLID";
    case TaskKind::EpsFitRaiPlus: return "EPS_FIT_RAIPLUS";
    case TaskKind::F1Reaction: return "F1_REACTION";
    case TaskKind::CLaplace: return "C_LAPLACE";
    case TaskKind::CHeat: return "C_HEAT";
    case TaskKind::CDirichletConst: return "C_DIRICHLET_CONST";
    case TaskKind::F2Full: return "F2_FULL";
  }
  return "?";
}

PotentialSpec PotentialSpec::for_step(int step, double beta, double upsilon_C0,
                                      double c0, double sigma_theta) {
  if (step < 1 || step > 3) throw NumericError("potential step must be 1, 2 or 3");
  PotentialSpec s;
  s.step = step;
  s.beta = beta;
  s.upsilon_C0 = upsilon_C0;
  s.c0 = c0;
  s.sigma_theta = sigma_theta;
  s.tasks = {TaskKind::EpsFitSolid, TaskKind::EpsFitRaiPlus};
  if (step >= 2) {
    s.tasks.push_back(TaskKind::F1Reaction);
    s.tasks.push_back(step == 2 ? TaskKind::CLaplace : TaskKind::CHeat);
    s.tasks.push_back(TaskKind::CDirichletConst);
  }
  if (step == 3) s.tasks.push_back(TaskKind::F2Full);
  return s;
}

// ---- pointwise diffusion operator forms -----------------------------------

namespace {

void check_jets(const ad::DualBatch& f, const char* who) {
  if (static_cast<int>(f.first.size()) < f.spatial_dim ||
      static_cast<int>(f.second.size()) < f.spatial_dim)
    throw NumericError(std::string(who) + ": jets must carry spatial first and "
                                          "second derivatives");
}

std::vector<double> developed_core(const ad::DualBatch& eps, const ad::DualBatch& conc,
                                   double beta, double floor, bool clamp) {
  check_jets(eps, "diffusion_developed");
  check_jets(conc, "diffusion_developed");
  const int n = eps.n;
  const int sd = eps.spatial_dim;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const double e_raw = eps.value[i];
    if (!clamp && e_raw < floor)
      throw NumericError("diffusion operator: porosity below floor");
    const double c = conc.value[i];
    double lap_e = 0.0, lap_c = 0.0, dot_ec = 0.0, dot_ee = 0.0;
    for (int s = 0; s < sd; ++s) {
      lap_e += eps.second[s][i];
      lap_c += conc.second[s][i];
      dot_ec += eps.first[s][i] * conc.first[s][i];
      dot_ee += eps.first[s][i] * eps.first[s][i];
    }
    const double core = e_raw * lap_c - c * lap_e;
    if (beta == 1.0) {
      out[i] = core;
      continue;
    }
    const double e = std::max(e_raw, floor);
    const double p1 = std::pow(e, beta - 1.0);
    const double p2 = std::pow(e, beta - 2.0);
    out[i] = p1 * core + (beta - 1.0) * (p1 * dot_ec + p2 * c * dot_ee);
  }
  return out;
}

}  // namespace

std::vector<double> diffusion_compact(const ad::DualBatch& eps, const ad::DualBatch& conc,
                                      double beta, double floor) {
  check_jets(eps, "diffusion_compact");
  check_jets(conc, "diffusion_compact");
  const int n = eps.n;
  const int sd = eps.spatial_dim;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const double e = eps.value[i];
    if (e < floor) throw NumericError("diffusion operator: porosity below floor");
    const double c = conc.value[i];
    const double u = c / e;
    const double k = std::pow(e, 1.0 + beta);
    double acc = 0.0;
    for (int s = 0; s < sd; ++s) {
      const double es = eps.first[s][i];
      const double cs = conc.first[s][i];
      const double u_s = (cs - u * es) / e;
      const double u_ss = (conc.second[s][i] - 2.0 * u_s * es - u * eps.second[s][i]) / e;
      const double k_s = (1.0 + beta) * std::pow(e, beta) * es;
      acc += k_s * u_s + k * u_ss;
    }
    out[i] = acc;
  }
  return out;
}

std::vector<double> diffusion_developed(const ad::DualBatch& eps,
                                        const ad::DualBatch& conc, double beta,
                                        double floor) {
  return developed_core(eps, conc, beta, floor, /*clamp=*/false);
}

// ---- residual operators ----------------------------------------------------

namespace {

double rms(std::span<const double> r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return std::sqrt(s / static_cast<double>(r.size()));
}

}  // namespace

double residual_eps_fit(const NetworkSpec& eps_spec, const ParamVector& params,
                        std::span<const double> points,
                        std::span<const double> intensity, int n) {
  if (n == 0) throw NumericError("residual_eps_fit: empty subset");
  const auto d = ad::eval_network(eps_spec.shape, params.eps_slice(), points, n,
                                  ad::JetMode::None);
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = 1.0 - d.value[i] - intensity[i];
  return rms(r);
}

double residual_f1(const NetworkSpec& eps_spec, const NetworkSpec& conc_spec,
                   const ParamVector& params, std::span<const double> points, int n,
                   double upsilon_C0) {
  if (n == 0) throw NumericError("residual_f1: empty subset");
  const double alpha = params.alpha();
  const auto de = ad::eval_network(eps_spec.shape, params.eps_slice(), points, n,
                                   ad::JetMode::First);
  const auto dc = ad::eval_network(conc_spec.shape, params.conc_slice(), points, n,
                                   ad::JetMode::None);
  const int t_axis = eps_spec.shape.input_dim - 1;
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i)
    r[i] = alpha / upsilon_C0 * de.first[t_axis][i] - dc.value[i];
  return rms(r);
}

double residual_c_field(const NetworkSpec& conc_spec, const ParamVector& params,
                        std::span<const double> points, int n, int step) {
  if (step != 2 && step != 3) throw NumericError("residual_c_field: step must be 2 or 3");
  if (n == 0) throw NumericError("residual_c_field: empty subset");
  const auto dc = ad::eval_network(conc_spec.shape, params.conc_slice(), points, n,
                                   ad::JetMode::Second);
  const int t_axis = conc_spec.shape.input_dim - 1;
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) {
    double lap = 0.0;
    for (int s = 0; s < dc.spatial_dim; ++s) lap += dc.second[s][i];
    r[i] = step == 2 ? lap : params.gamma() * dc.first[t_axis][i] - lap;
  }
  return rms(r);
}

DirichletResidual residual_dirichlet(const NetworkSpec& conc_spec,
                                     const ParamVector& params,
                                     std::span<const double> boundary_points, int nb,
                                     std::span<const double> solid_points, int ns,
                                     double c0) {
  DirichletResidual out;
  if (nb > 0) {
    const auto d = ad::eval_network(conc_spec.shape, params.conc_slice(),
                                    boundary_points, nb, ad::JetMode::None);
    std::vector<double> r(nb);
    for (int i = 0; i < nb; ++i) r[i] = 1.0 - d.value[i];
    out.boundary_part = rms(r);
  }
  if (ns > 0) {
    const auto d = ad::eval_network(conc_spec.shape, params.conc_slice(), solid_points,
                                    ns, ad::JetMode::None);
    std::vector<double> r(ns);
    for (int i = 0; i < ns; ++i) r[i] = c0 - d.value[i];
    out.solid_part = rms(r);
  }
  out.combined = std::sqrt(out.boundary_part * out.boundary_part +
                           out.solid_part * out.solid_part);
  return out;
}

double residual_f2(const NetworkSpec& eps_spec, const NetworkSpec& conc_spec,
                   const ParamVector& params, std::span<const double> points, int n,
                   double beta, double upsilon_C0, double pow_floor) {
  if (n == 0) throw NumericError("residual_f2: empty subset");
  const double gamma = params.gamma();
  const auto de = ad::eval_network(eps_spec.shape, params.eps_slice(), points, n,
                                   ad::JetMode::Second);
  const auto dc = ad::eval_network(conc_spec.shape, params.conc_slice(), points, n,
                                   ad::JetMode::Second);
  const auto diff = developed_core(de, dc, beta, pow_floor, /*clamp=*/true);
  const int t_axis = eps_spec.shape.input_dim - 1;
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i)
    r[i] = gamma * (dc.first[t_axis][i] + de.first[t_axis][i] / upsilon_C0) - diff[i];
  return rms(r);
}

// ---- the sampled multi-potential -------------------------------------------

struct BpinnPotential::TaskGraph {
  TaskKind kind;
  std::unique_ptr<ad::Tape> tape;
  int input = -1, data = -1, residual = -1;
  std::vector<double> pts, dat;
  int n = 0;
  // second part (Dirichlet solid constraint)
  std::unique_ptr<ad::Tape> tape_b;
  int input_b = -1, residual_b = -1;
  std::vector<double> pts_b;
  int n_b = 0;
  std::vector<double> seed;
};

BpinnPotential::~BpinnPotential() = default;

BpinnPotential::BpinnPotential(PotentialSpec spec, const img::ObservationSet& obs,
                               NetworkSpec eps_spec, NetworkSpec conc_spec,
                               ParamLayout layout, int chunk)
    : spec_(std::move(spec)),
      eps_spec_(eps_spec),
      conc_spec_(conc_spec),
      layout_(layout),
      chunk_(chunk) {
  if (eps_spec_.shape.input_dim != obs.point_dim())
    throw NumericError("potential: network input dimension does not match points");
  build_graphs(obs);
}

void BpinnPotential::build_graphs(const img::ObservationSet& obs) {
  const int pdim = obs.point_dim();
  const int t_axis = pdim - 1;
  const int sdim = pdim - 1;

  auto subset = [&](const std::vector<int>& idx) {
    return std::make_pair(obs.gather_points(idx), static_cast<int>(idx.size()));
  };

  for (TaskKind kind : spec_.tasks) {
    auto tg = std::make_unique<TaskGraph>();
    tg->kind = kind;
    std::vector<int> idx;
    switch (kind) {
      case TaskKind::EpsFitSolid: idx = obs.indices_of(img::Region::Solid); break;
      case TaskKind::EpsFitRaiPlus: idx = obs.rai_plus_indices(); break;
      case TaskKind::F1Reaction: idx = obs.rai_indices(); break;
      case TaskKind::CLaplace:
      case TaskKind::CHeat: idx = obs.indices_of(img::Region::Fluid); break;
      case TaskKind::CDirichletConst: idx = obs.indices_of(img::Region::Boundary); break;
      case TaskKind::F2Full: idx = obs.rai_minus; break;
    }
    if (idx.empty())
      throw NumericError(std::string("potential task ") + task_name(kind) +
                         ": empty observation subset");
    std::tie(tg->pts, tg->n) = subset(idx);
    const int cap = std::min<int>(chunk_, tg->n);
    tg->tape = std::make_unique<ad::Tape>(cap, pdim);
    ad::Tape& tp = *tg->tape;

    switch (kind) {
      case TaskKind::EpsFitSolid:
      case TaskKind::EpsFitRaiPlus: {
        tg->dat = obs.gather_intensity(idx);
        tg->input = tp.input(ad::JetMode::None);
        tg->data = tp.data_array();
        const int eps_out = ad::build_mlp(tp, eps_spec_.shape, 0, tg->input,
                                          ad::JetMode::None);
        const int v = tp.slot_value(eps_out);
        tg->residual = tp.sub(tp.add_const(tp.scale(v, -1.0), 1.0), tg->data);
        break;
      }
      case TaskKind::F1Reaction: {
        tg->input = tp.input(ad::JetMode::First);
        const int eps_out = ad::build_mlp(tp, eps_spec_.shape, 0, tg->input,
                                          ad::JetMode::First);
        const int conc_out = ad::build_mlp(tp, conc_spec_.shape, layout_.eps_params,
                                           tg->input, ad::JetMode::None);
        const int eps_t = tp.slot_d1(eps_out, t_axis);
        const int alpha = tp.exp_op(tp.param_scalar(layout_.alpha_index()));
        const int lhs = tp.scale(tp.mul(alpha, eps_t), 1.0 / spec_.upsilon_C0);
        tg->residual = tp.sub(lhs, tp.slot_value(conc_out));
        break;
      }
      case TaskKind::CLaplace:
      case TaskKind::CHeat: {
        tg->input = tp.input(ad::JetMode::Second);
        const int conc_out = ad::build_mlp(tp, conc_spec_.shape, layout_.eps_params,
                                           tg->input, ad::JetMode::Second);
        int lap = tp.slot_d2(conc_out, 0);
        for (int s = 1; s < sdim; ++s) lap = tp.add(lap, tp.slot_d2(conc_out, s));
        if (kind == TaskKind::CLaplace) {
          tg->residual = lap;
        } else {
          const int gamma = tp.exp_op(tp.param_scalar(layout_.gamma_index()));
          const int c_t = tp.slot_d1(conc_out, t_axis);
          tg->residual = tp.sub(tp.mul(gamma, c_t), lap);
        }
        break;
      }
      case TaskKind::CDirichletConst: {
        tg->input = tp.input(ad::JetMode::None);
        const int conc_out = ad::build_mlp(tp, conc_spec_.shape, layout_.eps_params,
                                           tg->input, ad::JetMode::None);
        tg->residual = tp.sub(tp.constant(1.0), tp.slot_value(conc_out));
        // solid part
        const auto solid_idx = obs.indices_of(img::Region::Solid);
        std::tie(tg->pts_b, tg->n_b) = subset(solid_idx);
        const int cap_b = std::min<int>(chunk_, tg->n_b);
        tg->tape_b = std::make_unique<ad::Tape>(cap_b, pdim);
        ad::Tape& tb = *tg->tape_b;
        tg->input_b = tb.input(ad::JetMode::None);
        const int conc_b = ad::build_mlp(tb, conc_spec_.shape, layout_.eps_params,
                                         tg->input_b, ad::JetMode::None);
        tg->residual_b = tb.sub(tb.constant(spec_.c0), tb.slot_value(conc_b));
        break;
      }
      case TaskKind::F2Full: {
        tg->input = tp.input(ad::JetMode::Second);
        const int eps_out = ad::build_mlp(tp, eps_spec_.shape, 0, tg->input,
                                          ad::JetMode::Second);
        const int conc_out = ad::build_mlp(tp, conc_spec_.shape, layout_.eps_params,
                                           tg->input, ad::JetMode::Second);
        const int e = tp.slot_value(eps_out);
        const int c = tp.slot_value(conc_out);
        int lap_c = tp.slot_d2(conc_out, 0);
        int lap_e = tp.slot_d2(eps_out, 0);
        for (int s = 1; s < sdim; ++s) {
          lap_c = tp.add(lap_c, tp.slot_d2(conc_out, s));
          lap_e = tp.add(lap_e, tp.slot_d2(eps_out, s));
        }
        const int core = tp.sub(tp.mul(e, lap_c), tp.mul(c, lap_e));
        int diffusion = core;
        if (spec_.beta != 1.0) {
          const int p1 = tp.pow_clamped(e, spec_.beta - 1.0, spec_.pow_floor);
          const int term1 = tp.mul(p1, core);
          int dot_ec = tp.mul(tp.slot_d1(eps_out, 0), tp.slot_d1(conc_out, 0));
          int dot_ee = tp.mul(tp.slot_d1(eps_out, 0), tp.slot_d1(eps_out, 0));
          for (int s = 1; s < sdim; ++s) {
            dot_ec = tp.add(dot_ec, tp.mul(tp.slot_d1(eps_out, s), tp.slot_d1(conc_out, s)));
            dot_ee = tp.add(dot_ee, tp.mul(tp.slot_d1(eps_out, s), tp.slot_d1(eps_out, s)));
          }
          const int term2 = tp.scale(tp.mul(p1, dot_ec), spec_.beta - 1.0);
          const int p2 = tp.pow_clamped(e, spec_.beta - 2.0, spec_.pow_floor);
          const int term3 = tp.scale(tp.mul(p2, tp.mul(c, dot_ee)), spec_.beta - 1.0);
          diffusion = tp.add(tp.add(term1, term2), term3);
        }
        const int gamma = tp.exp_op(tp.param_scalar(layout_.gamma_index()));
        const int eps_t = tp.slot_d1(eps_out, t_axis);
        const int c_t = tp.slot_d1(conc_out, t_axis);
        const int lhs = tp.mul(gamma, tp.add(c_t, tp.scale(eps_t, 1.0 / spec_.upsilon_C0)));
        tg->residual = tp.sub(lhs, diffusion);
        break;
      }
    }
    graphs_.push_back(std::move(tg));
  }
}

double BpinnPotential::run_task(TaskGraph& tg, std::span<const double> theta,
                                double* grad) {
  const int pdim = eps_spec_.shape.input_dim;
  double value = 0.0;
  auto run_part = [&](ad::Tape& tape, int input, int data, int residual,
                      const std::vector<double>& pts, const std::vector<double>& dat,
                      int n) {
    double sumsq = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int off = 0; off < n; off += tape.capacity()) {
      const int nb = std::min<int>(tape.capacity(), n - off);
      tape.set_input_values(input, pts.data() + static_cast<std::size_t>(off) * pdim, nb);
      if (data >= 0) tape.set_data_values(data, dat.data() + off, nb);
      tape.forward(theta);
      const double* r = tape.values(residual);
      for (int i = 0; i < nb; ++i) sumsq += r[i] * r[i];
      if (grad) {
        tg.seed.resize(nb);
        for (int i = 0; i < nb; ++i) tg.seed[i] = r[i] * inv_n;
        tape.zero_adjoints();
        tape.seed_value_adjoint(residual, tg.seed.data(), nb);
        tape.backward(theta, {grad, theta.size()});
      }
    }
    return 0.5 * sumsq * inv_n;
  };
  value += run_part(*tg.tape, tg.input, tg.data, tg.residual, tg.pts, tg.dat, tg.n);
  if (tg.tape_b)
    value += run_part(*tg.tape_b, tg.input_b, -1, tg.residual_b, tg.pts_b, {}, tg.n_b);
  return value;
}

void BpinnPotential::eval(std::span<const double> theta, std::vector<double>& task_values,
                          double& prior) {
  task_values.resize(task_count());
  for (int k = 0; k < task_count(); ++k)
    task_values[k] = run_task(*graphs_[k], theta, nullptr);
  double s = 0.0;
  for (double v : theta) s += v * v;
  prior = s / (2.0 * spec_.sigma_theta * spec_.sigma_theta);
}

void BpinnPotential::grad(std::span<const double> theta, std::span<const double> lambda,
                          Gradient& out) {
  const int d = dim();
  const int K = task_count();
  out.total.assign(d, 0.0);
  out.per_task.resize(K);
  out.task_values.resize(K);
  for (int k = 0; k < K; ++k) {
    out.per_task[k].assign(d, 0.0);
    out.task_values[k] = run_task(*graphs_[k], theta, out.per_task[k].data());
  }
  double s = 0.0;
  const double inv_s2 = 1.0 / (spec_.sigma_theta * spec_.sigma_theta);
  for (int i = 0; i < d; ++i) {
    s += theta[i] * theta[i];
    double g = theta[i] * inv_s2;
    for (int k = 0; k < K; ++k) g += lambda[k] * out.per_task[k][i];
    out.total[i] = g;
  }
  out.prior = 0.5 * s * inv_s2;
}

double BpinnPotential::assemble(std::span<const double> theta,
                                std::span<const double> lambda) {
  std::vector<double> task_values;
  double prior = 0.0;
  eval(theta, task_values, prior);
  for (int k = 0; k < task_count(); ++k) {
    if (!std::isfinite(task_values[k]))
      throw TaskNumericError(k, std::string("non-finite residual in task ") +
                                    task_name(spec_.tasks[k]));
    if (lambda[k] <= 0.0) throw NumericError("assemble: weights must be positive");
  }
  return potential(lambda, task_values, prior);
}

hmc::PotentialModel::Gradient grad_potential(BpinnPotential& potential,
                                             const ParamVector& params,
                                             std::span<const double> lambda) {
  hmc::PotentialModel::Gradient g;
  potential.grad(params.values, lambda, g);
  for (int k = 0; k < potential.task_count(); ++k)
    for (double v : g.per_task[k])
      if (!std::isfinite(v))
        throw TaskNumericError(k, std::string("non-finite gradient in task ") +
                                      task_name(potential.spec().tasks[k]));
  return g;
}

double assemble_potential(BpinnPotential& potential, const ParamVector& params,
                          std::span<const double> lambda) {
  return potential.assemble(params.values, lambda);
}

// ---- operator timing benchmark ---------------------------------------------

namespace {

constexpr int kBenchChunk = 512;
constexpr double kBenchFloor = 1e-3;

struct CompactEvaluator {
  ad::Tape tape;
  int input, out;

  CompactEvaluator(const NetworkSpec& eps_spec, const NetworkSpec& conc_spec,
                   const ParamLayout& layout, double beta, int cap)
      : tape(cap, eps_spec.shape.input_dim), input(tape.input(ad::JetMode::None)) {
    const int eps_out =
        ad::build_mlp(tape, eps_spec.shape, 0, input, ad::JetMode::None);
    const int conc_out = ad::build_mlp(tape, conc_spec.shape, layout.eps_params, input,
                                       ad::JetMode::None);
    const int einv = tape.pow_clamped(eps_out, -1.0, kBenchFloor);
    const int u = tape.mul(conc_out, einv);
    const int k = tape.pow_clamped(eps_out, 1.0 + beta, kBenchFloor);
    int acc = -1;
    for (int s = 0; s < tape.spatial_dim(); ++s) {
      const int u_s = tape.record_tangent(u, s);
      const int phi = tape.mul(k, u_s);
      const int d_s = tape.record_tangent(phi, s);
      acc = acc < 0 ? d_s : tape.add(acc, d_s);
    }
    out = acc;
  }

  void evaluate(std::span<const double> theta, std::span<const double> pts, int n,
                double* result) {
    const int pdim = tape.input_dim();
    for (int off = 0; off < n; off += tape.capacity()) {
      const int nb = std::min<int>(tape.capacity(), n - off);
      tape.set_input_values(input, pts.data() + static_cast<std::size_t>(off) * pdim, nb);
      tape.forward(theta);
      std::memcpy(result + off, tape.values(out),
                  static_cast<std::size_t>(nb) * sizeof(double));
    }
  }
};

struct DevelopedEvaluator {
  ad::Tape tape;
  int input, eps_out, conc_out;
  double beta;

  DevelopedEvaluator(const NetworkSpec& eps_spec, const NetworkSpec& conc_spec,
                     const ParamLayout& layout, double beta_, int cap)
      : tape(cap, eps_spec.shape.input_dim),
        input(tape.input(ad::JetMode::Second)),
        beta(beta_) {
    eps_out = ad::build_mlp(tape, eps_spec.shape, 0, input, ad::JetMode::Second);
    conc_out = ad::build_mlp(tape, conc_spec.shape, layout.eps_params, input,
                             ad::JetMode::Second);
  }

  void evaluate(std::span<const double> theta, std::span<const double> pts, int n,
                double* result) {
    const int pdim = tape.input_dim();
    const int sd = tape.spatial_dim();
    for (int off = 0; off < n; off += tape.capacity()) {
      const int nb = std::min<int>(tape.capacity(), n - off);
      tape.set_input_values(input, pts.data() + static_cast<std::size_t>(off) * pdim, nb);
      tape.forward(theta);
      const double* e = tape.values(eps_out);
      const double* c = tape.values(conc_out);
      for (int i = 0; i < nb; ++i) {
        double lap_e = 0.0, lap_c = 0.0, dot_ec = 0.0, dot_ee = 0.0;
        for (int s = 0; s < sd; ++s) {
          lap_e += tape.d2(eps_out, s)[i];
          lap_c += tape.d2(conc_out, s)[i];
          dot_ec += tape.d1(eps_out, s)[i] * tape.d1(conc_out, s)[i];
          dot_ee += tape.d1(eps_out, s)[i] * tape.d1(eps_out, s)[i];
        }
        const double core = e[i] * lap_c - c[i] * lap_e;
        if (beta == 1.0) {
          result[off + i] = core;
        } else {
          const double ec = std::max(e[i], kBenchFloor);
          const double p1 = std::pow(ec, beta - 1.0);
          const double p2 = std::pow(ec, beta - 2.0);
          result[off + i] = p1 * core + (beta - 1.0) * (p1 * dot_ec + p2 * c[i] * dot_ee);
        }
      }
    }
  }
};

double time_ns(const std::function<void()>& fn, int repetitions) {
  fn();  // warmup
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < repetitions; ++r) fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::nano>(stop - start).count() / repetitions;
}

}  // namespace

std::vector<BenchRow> benchmark_operators(std::span<const int> batches_1d,
                                          std::span<const int> batches_2d,
                                          int repetitions, std::uint64_t seed) {
  std::vector<BenchRow> rows;
  auto run_dim = [&](int input_dim, std::span<const int> batches) {
    const NetworkSpec eps_spec = NetworkSpec::porosity_default(input_dim);
    const NetworkSpec conc_spec = NetworkSpec::concentration_default(input_dim);
    const ParamVector params =
        init_params(eps_spec, &conc_spec, false, false, seed + input_dim);
    const ParamLayout& layout = params.layout;

    std::mt19937_64 rng(seed * 31 + input_dim);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int batch : batches) {
      std::vector<double> pts(static_cast<std::size_t>(batch) * input_dim);
      for (auto& v : pts) v = 3.0 * unif(rng);
      std::vector<double> result(batch);
      const int cap = std::min(kBenchChunk, batch);

      CompactEvaluator compact(eps_spec, conc_spec, layout, 0.5, cap);
      DevelopedEvaluator dev_general(eps_spec, conc_spec, layout, 0.5, cap);
      DevelopedEvaluator dev_beta1(eps_spec, conc_spec, layout, 1.0, cap);

      const std::string grid =
          (input_dim == 2 ? "1d-" : "2d-") + std::to_string(batch);
      const double t_compact = time_ns(
          [&] { compact.evaluate(params.values, pts, batch, result.data()); },
          repetitions);
      const double t_general = time_ns(
          [&] { dev_general.evaluate(params.values, pts, batch, result.data()); },
          repetitions);
      const double t_beta1 = time_ns(
          [&] { dev_beta1.evaluate(params.values, pts, batch, result.data()); },
          repetitions);
      rows.push_back({"compact", grid, t_compact, 1.0});
      rows.push_back({"developed_general", grid, t_general, t_compact / t_general});
      rows.push_back({"developed_beta1", grid, t_beta1, t_compact / t_beta1});
    }
  };
  run_dim(2, batches_1d);
  run_dim(3, batches_2d);
  return rows;
}

void write_benchmark_csv(const std::string& path, const std::vector<BenchRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "form,grid,mean_ns,speedup\n";
  for (const auto& r : rows)
    out << r.form << "," << r.grid << "," << r.mean_ns << "," << r.speedup << "\n";
}

}  // namespace poreuq::pot
