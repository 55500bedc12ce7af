#include "poreuq/surrogate.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "doctest.h"
#include "poreuq/errors.hpp"

using namespace poreuq;

TEST_CASE("parameter initialization is reproducible under a fixed seed") {
  const auto eps = NetworkSpec::porosity_default(2);
  const auto conc = NetworkSpec::concentration_default(2);
  const auto a = init_params(eps, &conc, true, true, 42);
  const auto b = init_params(eps, &conc, true, true, 42);
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
  const auto c = init_params(eps, &conc, true, true, 43);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    any_diff = any_diff || a.values[i] != c.values[i];
  CHECK(any_diff);
}

TEST_CASE("default 1D parameter counts match the documented architecture") {
  const auto eps = NetworkSpec::porosity_default(2);
  const auto conc = NetworkSpec::concentration_default(2);

  const auto step1 = init_params(eps, nullptr, false, false, 1);
  CHECK(step1.dim() == 3297);
  CHECK(step1.network_dim() == 3297);

  const auto step3 = init_params(eps, &conc, true, true, 1);
  CHECK(step3.network_dim() == 5538);  // both networks
  CHECK(step3.dim() == 5540);          // plus the two log-inverse parameters
  CHECK(step3.layout.alpha_index() == 5538);
  CHECK(step3.layout.gamma_index() == 5539);
  CHECK(step3.tilde_alpha() == 0.0);
  CHECK(step3.tilde_gamma() == 0.0);
  CHECK(step3.alpha() == 1.0);
  CHECK(step3.gamma() == 1.0);
}

TEST_CASE("parameter count formula matches direct layer arithmetic") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const int input_dim = 1 + static_cast<int>(rng() % 3);
    const int layers = 1 + static_cast<int>(rng() % 5);
    const int width = 1 + static_cast<int>(rng() % 40);
    ad::MlpShape s{input_dim, layers, width, ad::OutputActivation::Linear};
    // independent count: walk the layers, summing weight and bias entries
    int count = 0;
    int fan_in = input_dim;
    for (int l = 0; l < layers; ++l) {
      count += fan_in * width + width;
      fan_in = width;
    }
    count += fan_in + 1;
    CHECK(s.param_count() == count);
  }
}

TEST_CASE("log prior examples and direct-summation oracle") {
  const auto eps = NetworkSpec::porosity_default(2);
  auto p = init_params(eps, nullptr, false, false, 5);

  std::fill(p.values.begin(), p.values.end(), 0.0);
  CHECK(log_prior(p, 10.0) == 0.0);

  p.values[0] = 10.0;
  CHECK(log_prior(p, 10.0) == doctest::Approx(0.5).epsilon(1e-15));

  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 2.0);
  for (auto& v : p.values) v = gauss(rng);
  double expect = 0.0;
  for (double v : p.values) expect += v * v;
  expect /= 200.0;
  CHECK(log_prior(p, 10.0) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("rectified tanh output: midpoint, saturation and range guarantee") {
  const auto eps = NetworkSpec::porosity_default(2);

  // zero parameters: output pre-activation 0 -> 0.5
  ParamVector p;
  p.layout.eps_params = eps.param_count();
  p.values.assign(p.layout.dim(), 0.0);
  const std::vector<double> pt = {0.3, 0.7};
  CHECK(predict_eps(eps, p, pt, 1).value[0] == doctest::Approx(0.5).epsilon(1e-15));

  // large positive output bias: saturation toward 1
  p.values[p.layout.eps_params - 1] = 40.0;
  CHECK(predict_eps(eps, p, pt, 1).value[0] == doctest::Approx(1.0).epsilon(1e-12));

  // randomized range check
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss(0.0, 3.0);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  int draws = 0;
  for (int rep = 0; rep < 100; ++rep) {
    for (auto& v : p.values) v = gauss(rng);
    std::vector<double> pts(2 * 100);
    for (auto& v : pts) v = unif(rng);
    const auto d = predict_eps(eps, p, pts, 100);
    for (double v : d.value) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      ++draws;
    }
  }
  CHECK(draws == 10000);
}

TEST_CASE("exp/log transform round-trips to machine precision") {
  for (double x : {1e-6, 1e-3, 0.04675, 1.0, 2.4, 17.5, 1e3, 1e6}) {
    const double rt = std::exp(std::log(x));
    CHECK(std::abs(rt - x) / x < 1e-14);
  }
}

TEST_CASE("checkpoint serialization round-trips with the 16-byte header") {
  const auto eps = NetworkSpec::porosity_default(2);
  const auto conc = NetworkSpec::concentration_default(2);
  const auto p = init_params(eps, &conc, true, true, 7);
  const std::string path = "/tmp/poreuq_test_theta.bin";
  write_params(path, p.values);

  // header: 8-byte magic + u32 version + u32 count, then raw float64
  FILE* f = std::fopen(path.c_str(), "rb");
  REQUIRE(f != nullptr);
  std::fseek(f, 0, SEEK_END);
  const long bytes = std::ftell(f);
  std::fclose(f);
  CHECK(bytes == 16 + static_cast<long>(p.values.size() * sizeof(double)));

  const auto back = read_params(path);
  REQUIRE(back.size() == p.values.size());
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i] == p.values[i]);
}

TEST_CASE("inverse parameter accessors require the parameters to exist") {
  const auto eps = NetworkSpec::porosity_default(2);
  const auto p = init_params(eps, nullptr, false, false, 1);
  CHECK_THROWS_AS(p.tilde_alpha(), NumericError);
  CHECK_THROWS_AS((void)predict_conc(NetworkSpec::concentration_default(2), p, {}, 0),
                  NumericError);

  InverseParams inv{1.0 / 21.3912, 1.0 / 2.4};
  CHECK(inv.da2() == doctest::Approx(8.913).epsilon(1e-6));
}
