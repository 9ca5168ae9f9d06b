#include <cmath>
#include <limits>

#include "doctest.h"
#include "msde/builtin_models.hpp"
#include "msde/cutoff.hpp"
#include "msde/errors.hpp"
#include "msde/paths.hpp"
#include "msde/rng.hpp"

using msde::CutoffFamily;
using msde::Mat;
using msde::TimeGrid;
using msde::Vec;

namespace {

/// Driftless unit-diffusion model: the Euler path is the partial-sum walk of
/// the increments, so exit bookkeeping has hand-computed values.
msde::ModelSpec make_flat_model() {
  msde::ModelSpec m;
  m.name = "flat";
  m.dim = 1;
  m.K = 1.0;
  m.k1 = 0.0;
  m.xi = 1.0;
  m.growth = {{1, 1.0, 0.0}};
  m.x0 = Vec::Zero(1);
  m.b = [](const Vec&, Vec& out) { out.setZero(1); };
  m.b_jac = [](const Vec&, Mat& out) { out.setZero(1, 1); };
  m.b_hess = [](const Vec&, msde::Tensor3& out) {
    out.resize(1);
    out.setZero();
  };
  m.f = m.b;
  m.f_jac = m.b_jac;
  m.f_hess = m.b_hess;
  m.sigma = [](const Vec&, Mat& out) { out.setIdentity(1, 1); };
  m.sigma_jac = [](const Vec&, std::vector<Mat>& out) {
    out.assign(1, Mat::Zero(1, 1));
  };
  m.sigma_hess = [](const Vec&, std::vector<msde::Tensor3>& out) {
    out.assign(1, msde::Tensor3());
    out[0].resize(1);
    out[0].setZero();
  };
  return m;
}

}  // namespace

TEST_SUITE("paths") {
  TEST_CASE("time grid arithmetic and validation") {
    const TimeGrid grid(1.0, 1000);
    CHECK(grid.dt() == doctest::Approx(1e-3).epsilon(1e-15));
    CHECK(grid.time(0) == 0.0);
    CHECK(grid.time(1000) == 1.0);
    CHECK_THROWS_AS(TimeGrid(0.0, 10), msde::ConfigError);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), msde::ConfigError);
  }

  TEST_CASE("noise is reproducible and labeled") {
    const TimeGrid grid(1.0, 64);
    const auto a = msde::sample_noise(grid, 2, 99);
    const auto b = msde::sample_noise(grid, 2, 99);
    const auto c = msde::sample_noise(grid, 2, 100);
    CHECK((a.increments.array() == b.increments.array()).all());
    CHECK_FALSE((a.increments.array() == c.increments.array()).all());
    CHECK(a.generator_id == msde::kGeneratorId);
    CHECK(a.seed == 99);
    CHECK(a.dim == 2);
    CHECK_THROWS_AS(msde::sample_noise(grid, 0, 1), msde::ConfigError);
  }

  TEST_CASE("standardized increments pass desk-scale moment sanity") {
    const TimeGrid grid(1.0, 5000);
    const auto noise = msde::sample_noise(grid, 2, 77);
    const double root_dt = std::sqrt(grid.dt());
    double sum = 0.0, sum_sq = 0.0;
    const long n = 5000L * 2L;
    for (long k = 0; k < grid.steps; ++k) {
      for (int j = 0; j < 2; ++j) {
        const double z = noise.increments(k, j) / root_dt;
        sum += z;
        sum_sq += z * z;
      }
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sum_sq / static_cast<double>(n) - mean * mean;
    CHECK(std::abs(mean) <= 0.04);
    CHECK(std::abs(var - 1.0) <= 0.06);
  }

  TEST_CASE("single Euler step has its hand-computed value") {
    const msde::ModelSpec ou = msde::make_ou({});
    const CutoffFamily family(ou.xi, 1);
    const auto tm = msde::make_truncated(ou, 8, family);
    Mat inc(1, 1);
    inc << 0.25;
    const auto noise = msde::noise_from_increments(TimeGrid(1.0, 1), inc);
    CHECK(noise.generator_id == "crafted");
    const auto path = msde::euler_truncated(tm, noise);
    CHECK(path.states(0, 0) == 1.0);
    CHECK(path.states(1, 0) == 0.25);  // 1 + (-1)*1 + 0.25
    CHECK(path.settled_level == 8);
    CHECK(path.sup_norm == 1.0);
  }

  TEST_CASE("stopping times and exit events on a crafted walk") {
    const msde::ModelSpec flat = make_flat_model();
    const CutoffFamily family(1.0, 1);
    const auto tm = msde::make_truncated(flat, 10, family);
    Mat inc(2, 1);
    inc << 5.0, 1.0;
    const auto noise = msde::noise_from_increments(TimeGrid(2.0, 2), inc);
    const auto path = msde::euler_truncated(tm, noise);
    CHECK(path.states(1, 0) == 5.0);
    CHECK(path.states(2, 0) == 6.0);
    CHECK(path.sup_norm == 6.0);

    REQUIRE(msde::stopping_time(path, 4, 1.0).has_value());
    CHECK(*msde::stopping_time(path, 4, 1.0) == 1);
    CHECK(*msde::stopping_time(path, 6, 1.0) == 2);  // closed threshold
    CHECK_FALSE(msde::stopping_time(path, 7, 1.0).has_value());

    CHECK(path.exit_radius_events.at(1) == 1);
    CHECK(path.exit_radius_events.at(5) == 1);
    CHECK(path.exit_radius_events.at(6) == 2);
    CHECK(path.exit_radius_events.count(7) == 0);
    CHECK(path.settled_level == 10);

    const auto tight = msde::make_truncated(flat, 2, family);
    const auto clipped = msde::euler_truncated(tight, noise);
    CHECK(clipped.settled_level == -1);
  }

  TEST_CASE("euler path tracks the exact linear recursion in L2") {
    const msde::ModelSpec ou = msde::make_ou({});
    const CutoffFamily family(ou.xi, 1);
    const auto tm = msde::make_truncated(ou, 8, family);
    const TimeGrid grid(1.0, 1000);
    const double decay = std::exp(-grid.dt());
    double sq_sum = 0.0;
    const int n_seeds = 1000;
    for (int s = 0; s < n_seeds; ++s) {
      const auto noise = msde::sample_noise(grid, 1, 3000 + s);
      const auto path = msde::euler_truncated(tm, noise);
      double y = 1.0;
      for (long k = 0; k < grid.steps; ++k) {
        y = decay * y + noise.increments(k, 0);
      }
      const double gap = path.states(grid.steps, 0) - y;
      sq_sum += gap * gap;
    }
    const double rms = std::sqrt(sq_sum / n_seeds);
    INFO("rms terminal gap ", rms);
    CHECK(rms <= 5e-3);
  }

  TEST_CASE("levels nest bitwise up to the exit index") {
    const msde::ModelSpec cubic = msde::make_cubic({});
    const CutoffFamily family(cubic.xi, 1);
    const auto tm1 = msde::make_truncated(cubic, 1, family);
    const auto tm2 = msde::make_truncated(cubic, 2, family);
    const TimeGrid grid(1.0, 200);
    for (int s = 0; s < 50; ++s) {
      const auto noise = msde::sample_noise(grid, 1, 500 + s);
      const auto p1 = msde::euler_truncated(tm1, noise);
      const auto p2 = msde::euler_truncated(tm2, noise);
      const auto tau = msde::stopping_time(p1, 1, cubic.xi);
      const long limit = tau.has_value() ? *tau : grid.steps;
      for (long k = 0; k <= limit; ++k) {
        CHECK(p1.states(k, 0) == p2.states(k, 0));
      }
    }
  }

  TEST_CASE("the nesting loop settles, labels, and gives up past n_max") {
    const msde::ModelSpec cubic = msde::make_cubic({});
    const CutoffFamily family(cubic.xi, 1);

    const auto smooth = msde::sample_noise(TimeGrid(1.0, 100), 1, 1);
    const auto settled = msde::euler_original(cubic, family, smooth);
    CHECK(settled.settled_level >= 1);
    CHECK(settled.model_id.find("[original-via-nesting]") != std::string::npos);
    CHECK(settled.sup_norm <
          std::pow(static_cast<double>(settled.settled_level), cubic.xi));

    Mat inc(2, 1);
    inc << 2.0, 0.0;
    const auto kick = msde::noise_from_increments(TimeGrid(1.0, 2), inc);
    CHECK_THROWS_AS(msde::euler_original(cubic, family, kick, 1, 1),
                    msde::SettleError);
    try {
      msde::euler_original(cubic, family, kick, 1, 1);
    } catch (const msde::SettleError& e) {
      CHECK(e.n_max == 1);
      CHECK(e.seed == kick.seed);
    }
    const auto recovered = msde::euler_original(cubic, family, kick, 1, 4096);
    CHECK(recovered.settled_level == 2);
    CHECK(recovered.exit_radius_events.at(1) == 1);
  }

  TEST_CASE("a non-finite state raises an explosion error with its step") {
    const msde::ModelSpec cubic = msde::make_cubic({});
    const CutoffFamily family(cubic.xi, 1);
    const auto tm = msde::make_truncated(cubic, 1, family);
    Mat inc = Mat::Zero(5, 1);
    inc(3, 0) = std::numeric_limits<double>::infinity();
    const auto noise = msde::noise_from_increments(TimeGrid(1.0, 5), inc);
    CHECK_THROWS_AS(msde::euler_truncated(tm, noise), msde::ExplosionError);
    try {
      msde::euler_truncated(tm, noise);
    } catch (const msde::ExplosionError& e) {
      CHECK(e.step_index == 3);
    }
  }

  TEST_CASE("dimension and shape mismatches are rejected") {
    const msde::ModelSpec ou = msde::make_ou({});
    const CutoffFamily family(ou.xi, 1);
    const auto tm = msde::make_truncated(ou, 2, family);
    const auto noise2 = msde::sample_noise(TimeGrid(1.0, 4), 2, 1);
    CHECK_THROWS_AS(msde::euler_truncated(tm, noise2), msde::ConfigError);
    Mat wrong(3, 1);
    wrong.setZero();
    CHECK_THROWS_AS(msde::noise_from_increments(TimeGrid(1.0, 4), wrong),
                    msde::ConfigError);
  }
}
