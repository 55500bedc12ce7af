#include "poreuq/autodiff.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "poreuq/errors.hpp"
#include "support/finite_diff.hpp"

using namespace poreuq;
using namespace poreuq::ad;
using testsupport::rel_err;

namespace {

std::vector<double> random_theta(const MlpShape& shape, std::mt19937_64& rng,
                                 double sd = 0.8) {
  std::normal_distribution<double> gauss(0.0, sd);
  std::vector<double> theta(shape.param_count());
  for (auto& v : theta) v = gauss(rng);
  return theta;
}

double net_value(const MlpShape& shape, const std::vector<double>& theta,
                 std::vector<double> point) {
  return eval_network(shape, theta, point, 1, JetMode::None).value[0];
}

}  // namespace

TEST_CASE("identity affine node: value, slope one, zero curvature") {
  Tape tape(1, 2);
  const int in = tape.input(JetMode::Second);
  // one output neuron reading x only
  const std::vector<double> theta = {1.0, 0.0, 0.0};  // W = [1, 0], b = 0
  const int out = tape.affine(in, 0, 1, JetMode::Second);
  const double pt[2] = {0.5, 0.3};
  tape.set_input_values(in, pt, 1);
  tape.forward(theta);
  CHECK(tape.values(out)[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(tape.d1(out, 0)[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(tape.d1(out, 1)[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(tape.d2(out, 0)[0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("tanh at the origin: value 0, slope 1, zero curvature") {
  Tape tape(1, 2);
  const int in = tape.input(JetMode::Second);
  const std::vector<double> theta = {1.0, 0.0, 0.0};
  const int out = tape.tanh_op(tape.affine(in, 0, 1, JetMode::Second), JetMode::Second);
  const double pt[2] = {0.0, 0.7};
  tape.set_input_values(in, pt, 1);
  tape.forward(theta);
  CHECK(tape.values(out)[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(tape.d1(out, 0)[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(tape.d2(out, 0)[0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("random two-layer net matches central finite differences") {
  std::mt19937_64 rng(7);
  MlpShape shape{2, 2, 8, OutputActivation::Linear};
  const auto theta = random_theta(shape, rng);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const std::vector<double> pt = {unif(rng), unif(rng)};

  const auto d = eval_network(shape, theta, pt, 1, JetMode::Second);
  for (int axis = 0; axis < 2; ++axis) {
    const double fd = testsupport::central_first(
        [&](double x) {
          auto p = pt;
          p[axis] = x;
          return net_value(shape, theta, p);
        },
        pt[axis], 1e-4);
    CHECK(rel_err(d.first[axis][0], fd, 1e-9) < 1e-6);
  }
  const double fd2 = testsupport::central_second(
      [&](double x) {
        auto p = pt;
        p[0] = x;
        return net_value(shape, theta, p);
      },
      pt[0], 1e-4);
  CHECK(rel_err(d.second[0][0], fd2, 1e-7) < 1e-4);
}

TEST_CASE("input-derivative property: 100 random smooth instances") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  int checked_first = 0, checked_second = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const int input_dim = 2 + (inst % 2);
    MlpShape shape{input_dim, 1 + static_cast<int>(rng() % 3),
                   4 + static_cast<int>(rng() % 8),
                   inst % 3 == 0 ? OutputActivation::RectifiedTanh
                                 : OutputActivation::Linear};
    const auto theta = random_theta(shape, rng, 0.7);
    std::vector<double> pt(input_dim);
    for (auto& v : pt) v = unif(rng);
    const auto d = eval_network(shape, theta, pt, 1, JetMode::Second);
    for (int axis = 0; axis < input_dim; ++axis) {
      const double fd = testsupport::central_first(
          [&](double x) {
            auto p = pt;
            p[axis] = x;
            return net_value(shape, theta, p);
          },
          pt[axis], 1e-4);
      if (std::abs(fd) > 1e-5) {
        CHECK(rel_err(d.first[axis][0], fd) < 1e-5);
        ++checked_first;
      }
    }
    for (int s = 0; s + 1 < input_dim; ++s) {
      const double fd2 = testsupport::central_second(
          [&](double x) {
            auto p = pt;
            p[s] = x;
            return net_value(shape, theta, p);
          },
          pt[s], 1e-4);
      if (std::abs(fd2) > 1e-4) {
        CHECK(rel_err(d.second[s][0], fd2) < 1e-4);
        ++checked_second;
      }
    }
  }
  CHECK(checked_first > 150);
  CHECK(checked_second > 60);
}

TEST_CASE("parameter gradients through jet slots match finite differences") {
  // L = mean(r^2)/2 with r built from value, time-derivative and Laplacian
  // slots plus an exp-transformed scalar parameter: the same structure the
  // potential tasks use.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int inst = 0; inst < 12; ++inst) {
    MlpShape shape{2, 2, 6, OutputActivation::RectifiedTanh};
    const int d = shape.param_count();
    std::vector<double> theta = random_theta(shape, rng, 0.6);
    theta.push_back(0.3 * unif(rng));  // scalar inverse parameter (log space)
    const int n = 5;
    std::vector<double> pts(2 * n);
    for (auto& v : pts) v = unif(rng);
    std::vector<double> target(n);
    for (auto& v : target) v = unif(rng);

    auto build = [&](Tape& tape) {
      const int in = tape.input(JetMode::Second);
      const int out = build_mlp(tape, shape, 0, in, JetMode::Second);
      const int par = tape.exp_op(tape.param_scalar(d));
      const int lap = tape.slot_d2(out, 0);
      const int ct = tape.slot_d1(out, 1);
      const int v = tape.slot_value(out);
      const int pw = tape.pow_clamped(v, 1.5, 1e-3);
      const int data = tape.data_array();
      // r = par * ct - lap + pow(v,1.5) - target
      const int r =
          tape.sub(tape.add(tape.sub(tape.mul(par, ct), lap), pw), data);
      return std::make_tuple(in, data, r);
    };

    auto loss = [&](const std::vector<double>& th) {
      Tape tape(n, 2);
      auto [in, data, r] = build(tape);
      tape.set_input_values(in, pts.data(), n);
      tape.set_data_values(data, target.data(), n);
      tape.forward(th);
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += tape.values(r)[i] * tape.values(r)[i];
      return 0.5 * s / n;
    };

    Tape tape(n, 2);
    auto [in, data, r] = build(tape);
    tape.set_input_values(in, pts.data(), n);
    tape.set_data_values(data, target.data(), n);
    tape.forward(theta);
    std::vector<double> seed(n);
    for (int i = 0; i < n; ++i) seed[i] = tape.values(r)[i] / n;
    std::vector<double> grad(theta.size(), 0.0);
    tape.zero_adjoints();
    tape.seed_value_adjoint(r, seed.data(), n);
    tape.backward(theta, grad);

    const auto fd = testsupport::grad_central(loss, theta, 1e-4);
    int checked = 0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      if (std::abs(fd[i]) < 1e-7) continue;
      CHECK(rel_err(grad[i], fd[i]) < 1e-5);
      ++checked;
    }
    CHECK(checked > 10);
  }
}

TEST_CASE("tape evaluation is pure: repeated forward is bit-identical") {
  std::mt19937_64 rng(5);
  MlpShape shape{2, 3, 16, OutputActivation::RectifiedTanh};
  const auto theta = random_theta(shape, rng);
  const int n = 17;
  std::vector<double> pts(2 * n);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (auto& v : pts) v = unif(rng);
  const auto a = eval_network(shape, theta, pts, n, JetMode::Second);
  const auto b = eval_network(shape, theta, pts, n, JetMode::Second);
  for (int i = 0; i < n; ++i) {
    CHECK(a.value[i] == b.value[i]);
    CHECK(a.first[0][i] == b.first[0][i]);
    CHECK(a.second[0][i] == b.second[0][i]);
  }
}

TEST_CASE("derivatives of a constant network are exactly zero") {
  MlpShape shape{2, 2, 4, OutputActivation::Linear};
  std::vector<double> theta(shape.param_count(), 0.0);
  const double pt[2] = {0.4, 0.6};
  const auto d = eval_network(shape, theta, {pt, 2}, 1, JetMode::Second);
  CHECK(d.value[0] == 0.0);
  CHECK(d.first[0][0] == 0.0);
  CHECK(d.first[1][0] == 0.0);
  CHECK(d.second[0][0] == 0.0);
  CHECK(d.value.size() == d.first[0].size());
  CHECK(d.value.size() == d.second[0].size());
}

TEST_CASE("nested tangent recording reproduces the fused jets") {
  std::mt19937_64 rng(31);
  for (int inst = 0; inst < 5; ++inst) {
    MlpShape shape{2, 2, 8, OutputActivation::RectifiedTanh};
    const auto theta = random_theta(shape, rng, 0.7);
    const int n = 9;
    std::vector<double> pts(2 * n);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (auto& v : pts) v = unif(rng);

    Tape tape(n, 2);
    const int in = tape.input(JetMode::None);
    const int out = build_mlp(tape, shape, 0, in, JetMode::None);
    const int t1 = tape.record_tangent(out, 0);
    const int t2 = tape.record_tangent(t1, 0);
    tape.set_input_values(in, pts.data(), n);
    tape.forward(theta);

    const auto jets = eval_network(shape, theta, pts, n, JetMode::Second);
    for (int i = 0; i < n; ++i) {
      CHECK(rel_err(tape.values(t1)[i], jets.first[0][i], 1e-12) < 1e-11);
      CHECK(rel_err(tape.values(t2)[i], jets.second[0][i], 1e-12) < 1e-11);
    }
  }
}

TEST_CASE("eval_network rejects mismatched input dimensionality") {
  MlpShape shape{2, 2, 4, OutputActivation::Linear};
  std::vector<double> theta(shape.param_count(), 0.1);
  const std::vector<double> bad_pts = {0.1, 0.2, 0.3};  // 1.5 points worth
  CHECK_THROWS_AS(eval_network(shape, theta, bad_pts, 1, JetMode::None), NumericError);
  std::vector<double> bad_theta(shape.param_count() - 1, 0.1);
  const std::vector<double> pts = {0.1, 0.2};
  CHECK_THROWS_AS(eval_network(shape, bad_theta, pts, 1, JetMode::None), NumericError);
}
