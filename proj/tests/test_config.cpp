#include "poreuq/config.hpp"

#include <cmath>

#include "doctest.h"
#include "poreuq/errors.hpp"

using namespace poreuq;

TEST_CASE("1D preset reproduces the documented dimensionless numbers") {
  const auto c = RunConfig::preset("1d-beta1");
  c.validate();
  CHECK(c.physical.D_ref() == doctest::Approx(4.1667e-10).epsilon(1e-3));
  CHECK(c.physical.Da2_star() == doctest::Approx(21.3912).epsilon(1e-6));
  CHECK(c.physical.Dm_star() == doctest::Approx(2.4).epsilon(1e-12));
  CHECK(c.physical.Da2() == doctest::Approx(8.913).epsilon(1e-6));
  CHECK(c.physical.upsilon_C0() == 1.0);
  CHECK(c.geometry.nx == 200);
  CHECK(c.geometry.nt == 240);
  CHECK(c.geometry.eps0 == 0.05);
  CHECK(c.observations.n_obs == 7725);
  CHECK(c.sigma_theta == 10.0);
  CHECK(c.c0 == 1e-7);
  // sampler settings per step
  CHECK(c.steps[0].n_adapt == 50);
  CHECK(c.steps[1].n_adapt == 20);
  CHECK(c.steps[2].n_adapt == 4);
  for (int i = 0; i < 3; ++i) {
    CHECK(c.steps[i].n_samples == 200);
    CHECK(c.steps[i].n_leapfrog == 200);
  }
  CHECK(c.steps[0].dt == 1e-3);
  CHECK(c.steps[1].dt == 5e-4);
  CHECK(c.steps[2].dt == 2e-4);
}

TEST_CASE("2D preset reproduces the documented dimensionless numbers") {
  const auto c = RunConfig::preset("2d");
  c.validate();
  CHECK(c.physical.D_ref() == doctest::Approx(5.714e-11).epsilon(1e-3));
  CHECK(c.physical.Da2_star() == doctest::Approx(155.9775).epsilon(1e-6));
  CHECK(c.physical.Dm_star() == doctest::Approx(17.5).epsilon(1e-12));
  CHECK(c.physical.Da2() == doctest::Approx(8.913).epsilon(1e-6));
  CHECK(c.physical.upsilon_C0() == doctest::Approx(0.03693).epsilon(1e-12));
  CHECK(c.geometry.nx == 100);
  CHECK(c.geometry.ny == 100);
  CHECK(c.geometry.nt == 350);
  CHECK(c.geometry.disk_r == 0.5);
  CHECK(c.observations.n_obs == 15907);
  CHECK(c.steps[0].n_adapt == 50);
  CHECK(c.steps[1].n_adapt == 40);
  CHECK(c.steps[2].n_adapt == 10);
  for (int i = 0; i < 3; ++i) CHECK(c.steps[i].n_leapfrog == 150);
  CHECK(c.steps[2].dt == 3e-4);
}

TEST_CASE("config serialization round-trips exactly") {
  for (const char* name : {"1d-beta1", "1d-beta05", "2d", "2d-smoke"}) {
    auto c = RunConfig::preset(name);
    c.seed = 123456789;
    c.noise_sigma = 0.0312345;
    const auto back = RunConfig::parse(c.serialize());
    CHECK(back == c);
  }
  auto fast = RunConfig::preset("1d-beta1");
  fast.apply_fast_profile();
  CHECK(RunConfig::parse(fast.serialize()) == fast);
  CHECK(fast.steps[0].n_samples == 60);
  CHECK(fast.steps[0].n_leapfrog == 50);
}

TEST_CASE("config file save and load") {
  auto c = RunConfig::preset("1d-beta05");
  const std::string path = "/tmp/poreuq_test_config.toml";
  c.save(path);
  CHECK(RunConfig::load(path) == c);
}

TEST_CASE("validation rejects inconsistent settings") {
  auto c = RunConfig::preset("1d-beta1");
  c.geometry.eps0 = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = RunConfig::preset("1d-beta1");
  c.observations.n_obs = 10'000'000;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = RunConfig::preset("1d-beta1");
  c.observations.f_solid = 0.95;  // fractions sum above 1
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = RunConfig::preset("1d-beta1");
  c.steps[0].n_adapt = c.steps[0].n_samples;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = RunConfig::preset("1d-beta1");
  c.geometry.cores[0].x1 = c.geometry.cores[0].x0;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  CHECK_THROWS_AS(RunConfig::preset("bogus"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("unknown_key = 3\n"), ConfigError);
}
