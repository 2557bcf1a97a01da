#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "endowrisk/hazard_model.hpp"

namespace endowrisk {

enum class Measure {
  Physical,     // drift a
  AlphaTilted,  // drift a - alpha b (lambda - floor)
};

struct McConfig {
  std::size_t n_paths = 200000;
  std::size_t steps_per_year = 250;
  std::uint64_t seed = 0x5eed5eedULL;
  bool antithetic = true;
  Measure measure = Measure::Physical;

  /// Throws std::invalid_argument for n_paths < 100 or steps_per_year < 10.
  void validate() const;
};

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n_paths = 0;
  McConfig config;
};

/// Worker count for path loops and the check pool: ENDOWRISK_THREADS when set
/// to a positive integer, otherwise the hardware concurrency (at least 1).
std::size_t configured_threads();

/// Euler-Maruyama in y = ln(lambda - floor), so lambda > floor on every path.
/// Paths 2i and 2i+1 share the normals of stream i (negated for the odd path)
/// when config.antithetic is set. Returns lambda at the n_steps + 1 step times.
std::vector<double> simulate_hazard_path(const HazardModel& model, Measure measure, double alpha,
                                         double lambda0, double t0, double horizon,
                                         const McConfig& config, std::size_t path_index);

/// E[exp(-int_t^T lambda ds)] under the physical measure.
McEstimate mc_phi_physical(const HazardModel& model, double lambda0, double t, double horizon,
                           McConfig config);

/// The same expectation with the alpha-tilted drift.
McEstimate mc_beta(const HazardModel& model, double alpha, double lambda0, double t,
                   double horizon, McConfig config);

/// Static standard-deviation premium for n lives, conditional on the hazard path:
///   H/n = E p + alpha sqrt(Var p + E[p (1 - p)] / n),  p = exp(-int lambda).
struct PremiumPoint {
  std::size_t n = 0;
  double per_life = 0.0;  // H(X_S) / n
  double se = 0.0;
};

struct SurvivorPremium {
  double mean_p = 0.0;          // E p
  double mean_p_se = 0.0;
  double var_p = 0.0;           // Var E(X|S)
  double mean_bernoulli = 0.0;  // E Var(X|S) = E[p (1 - p)]
  std::vector<PremiumPoint> points;
  double limit = 0.0;  // E p + alpha sqrt(Var p)
  double limit_se = 0.0;
  std::size_t n_paths = 0;
};

SurvivorPremium mc_survivor_premium(const HazardModel& model, std::span<const std::size_t> lives,
                                    double alpha, double lambda0, double t, double horizon,
                                    McConfig config);

}  // namespace endowrisk
