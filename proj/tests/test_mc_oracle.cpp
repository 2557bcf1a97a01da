#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "endowrisk/mc_oracle.hpp"
#include "endowrisk/pricer.hpp"

using namespace endowrisk;

namespace {

const double kTheta = std::log(0.02);
HazardModel default_ou() { return HazardModel::shifted_log_ou(0.04, kTheta, 0.5, 0.2); }

McConfig small(std::size_t paths = 20000) {
  McConfig c;
  c.n_paths = paths;
  c.steps_per_year = 100;
  return c;
}

struct ThreadsEnv {
  explicit ThreadsEnv(const char* value) { setenv("ENDOWRISK_THREADS", value, 1); }
  ~ThreadsEnv() { unsetenv("ENDOWRISK_THREADS"); }
};

}  // namespace

TEST_CASE("config invariants") {
  McConfig c;
  CHECK_NOTHROW(c.validate());
  c.n_paths = 99;
  CHECK_THROWS(c.validate());
  c.n_paths = 100;
  c.steps_per_year = 9;
  CHECK_THROWS(c.validate());
}

TEST_CASE("paths") {
  const McConfig cfg = small();
  const auto flat = simulate_hazard_path(HazardModel::constant(0.04), Measure::Physical, 0.0, 0.05, 0.0, 10.0, cfg, 3);
  CHECK(flat.size() == 1001);
  for (double l : flat) CHECK(l == 0.05);

  const auto expo = HazardModel::deterministic_exponential(0.01, 0.03, 0.08);
  const auto path = simulate_hazard_path(expo, Measure::Physical, 0.0, 0.03, 0.0, 10.0, cfg, 0);
  CHECK(std::abs(path.back() - (0.01 + 0.02 * std::exp(0.8))) <= 1e-12);

  const auto ou = simulate_hazard_path(default_ou(), Measure::Physical, 0.0, 0.06, 0.0, 10.0, cfg, 5);
  for (double l : ou) CHECK(l > 0.04);
}

TEST_CASE("tilted log-OU terminal mean") {
  // Tilting shifts the long-run level of y to theta - alpha b0 / kappa_y.
  const double alpha = 0.1, b = 0.2, kappa = 0.5, T = 4.0;
  const double y0 = std::log(0.06 - 0.04);
  McConfig cfg = small(20000);
  cfg.antithetic = false;
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < cfg.n_paths; ++i) {
    const auto p = simulate_hazard_path(default_ou(), Measure::AlphaTilted, alpha, 0.06, 0.0, T, cfg, i);
    const double y = std::log(p.back() - 0.04);
    sum += y;
    sq += y * y;
  }
  const double n = static_cast<double>(cfg.n_paths);
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  const double shifted = kTheta - alpha * b / kappa;
  const double expected = shifted + (y0 - shifted) * std::exp(-kappa * T);
  CHECK(std::abs(mean - expected) <= 3.0 * se);
}

TEST_CASE("physical survival estimates") {
  const McEstimate flat = mc_phi_physical(HazardModel::constant(0.04), 0.05, 0.0, 10.0, small());
  CHECK(std::abs(flat.mean - 0.60653066) <= std::max(3.0 * flat.se, 1e-9));

  const auto expo = HazardModel::deterministic_exponential(0.0, 0.01, 0.08);
  const McEstimate e = mc_phi_physical(expo, 0.01, 0.0, 10.0, small());
  CHECK(std::abs(e.mean - phi_deterministic_closed_form(expo, 0.0, 0.0, 10.0)) <= std::max(3.0 * e.se, 1e-6));

  const McEstimate ou = mc_phi_physical(default_ou(), 0.06, 0.0, 10.0, small(40000));
  const double eval[] = {0.06};
  const PricingProblem p{default_ou(), ShortRateModel::constant(0.03), 0.1,
                         Grid::make_default(0.04, 10.0, eval), {}};
  const double pde = phi_physical(p).evaluate(0.06, 0.0);
  CHECK(std::abs(ou.mean - pde) <= std::max(3.0 * ou.se, 2e-3));
  CHECK(ou.n_paths == 40000);
  CHECK(ou.se > 0.0);
}

TEST_CASE("tilted survival estimates") {
  const auto flat = HazardModel::constant(0.04);
  const McEstimate a = mc_beta(flat, 0.1, 0.05, 0.0, 10.0, small());
  const McEstimate b = mc_phi_physical(flat, 0.05, 0.0, 10.0, small());
  CHECK(a.mean == b.mean);

  const double eval[] = {0.06};
  const PricingProblem p{default_ou(), ShortRateModel::constant(0.03), 0.1,
                         Grid::make_default(0.04, 10.0, eval), {}};
  const McEstimate beta = mc_beta(default_ou(), 0.1, 0.06, 0.0, 10.0, small(40000));
  const McEstimate phys = mc_phi_physical(default_ou(), 0.06, 0.0, 10.0, small(40000));
  CHECK(std::abs(beta.mean - beta_surface(p).evaluate(0.06, 0.0)) <= std::max(3.0 * beta.se, 2e-3));
  CHECK(beta.mean >= phys.mean - 3.0 * std::hypot(beta.se, phys.se));
}

TEST_CASE("antithetic pairs reduce the standard error") {
  McConfig on = small(20000), off = small(20000);
  off.antithetic = false;
  const McEstimate a = mc_phi_physical(default_ou(), 0.06, 0.0, 10.0, on);
  const McEstimate b = mc_phi_physical(default_ou(), 0.06, 0.0, 10.0, off);
  CHECK(a.se / b.se <= 0.8);
}

TEST_CASE("halving the time step") {
  McConfig coarse = small(), fine = small();
  fine.steps_per_year = 200;
  const auto flat = HazardModel::constant(0.04);
  const McEstimate a = mc_phi_physical(flat, 0.05, 0.0, 10.0, coarse);
  const McEstimate b = mc_phi_physical(flat, 0.05, 0.0, 10.0, fine);
  CHECK(std::abs(a.mean - b.mean) <= std::max(a.se, 1e-12));

  const auto expo = HazardModel::deterministic_exponential(0.0, 0.01, 0.08);
  const McEstimate c = mc_phi_physical(expo, 0.01, 0.0, 10.0, coarse);
  const McEstimate d = mc_phi_physical(expo, 0.01, 0.0, 10.0, fine);
  CHECK(std::abs(c.mean - d.mean) <= 1e-6);
}

TEST_CASE("bit-identical across thread counts and runs") {
  const McConfig cfg = small(5000);
  McEstimate one, three;
  {
    ThreadsEnv env("1");
    CHECK(configured_threads() == 1);
    one = mc_beta(default_ou(), 0.1, 0.06, 0.0, 10.0, cfg);
  }
  {
    ThreadsEnv env("3");
    CHECK(configured_threads() == 3);
    three = mc_beta(default_ou(), 0.1, 0.06, 0.0, 10.0, cfg);
  }
  CHECK(one.mean == three.mean);
  CHECK(one.se == three.se);
  const McEstimate again = mc_beta(default_ou(), 0.1, 0.06, 0.0, 10.0, cfg);
  CHECK(again.mean == one.mean);

  McConfig other = cfg;
  other.seed += 1;
  CHECK(mc_beta(default_ou(), 0.1, 0.06, 0.0, 10.0, other).mean != one.mean);
}

TEST_CASE("static standard-deviation premium") {
  const std::size_t lives[] = {1, 10, 100};
  const SurvivorPremium det = mc_survivor_premium(HazardModel::constant(0.04), lives, 0.1, 0.05, 0.0, 10.0, small());
  const double p = std::exp(-0.5);
  CHECK(det.var_p <= 1e-20);
  CHECK(det.limit == doctest::Approx(p).epsilon(1e-12));
  REQUIRE(det.points.size() == 3);
  CHECK(std::abs(det.points[0].per_life - (p + 0.1 * std::sqrt(p * (1.0 - p)))) <= 1e-12);
  CHECK(std::abs(det.points[0].per_life - 0.65538) <= 1e-5);

  const SurvivorPremium sto = mc_survivor_premium(default_ou(), lives, 0.1, 0.06, 0.0, 10.0, small());
  CHECK(sto.var_p > 0.0);
  for (std::size_t i = 1; i < sto.points.size(); ++i) CHECK(sto.points[i].per_life < sto.points[i - 1].per_life);
  CHECK(sto.points.back().per_life > sto.limit);
  CHECK(std::abs(sto.limit - (sto.mean_p + 0.1 * std::sqrt(sto.var_p))) <= 1e-15);
}
