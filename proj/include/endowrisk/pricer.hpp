#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "endowrisk/bond_model.hpp"
#include "endowrisk/hazard_model.hpp"
#include "endowrisk/pde_engine.hpp"

namespace endowrisk {

/// Everything needed to price pure endowments on one grid. The horizon T is grid().horizon().
struct PricingProblem {
  HazardModel hazard;
  ShortRateModel bond;
  double alpha = 0.0;
  Grid grid;
  SolverConfig solver;

  [[nodiscard]] double horizon() const noexcept { return grid.horizon(); }
  /// Runs validate() on the hazard model; throws DomainError with the reason on failure.
  void require_valid() const;
  [[nodiscard]] PricingProblem with_alpha(double a) const;
  [[nodiscard]] PricingProblem with_hazard(const HazardModel& h) const;
  [[nodiscard]] PricingProblem with_grid(const Grid& g) const;
};

/// Risk-adjusted survival factor phi solving the single-life equation, terminal 1.
Surface phi_single(const PricingProblem& problem);

/// phi with alpha = 0, i.e. the physical survival probability.
Surface phi_physical(const PricingProblem& problem);

/// exp(-int_t^T (lambda(s) - alpha sqrt(lambda(s))) ds) for b = 0 models, where
/// lambda(t) = lambda. Throws DomainError for stochastic models.
double phi_deterministic_closed_form(const HazardModel& hazard, double alpha, double lambda,
                                     double t, double horizon);

/// Same, with lambda(t) taken from the model's own trajectory started at time 0
/// (DeterministicExponential uses its initial_hazard).
double phi_deterministic_closed_form(const HazardModel& hazard, double alpha, double t,
                                     double horizon);

/// Retained surfaces phi^(1..n_max) (or gamma^(1..n_max)).
class PortfolioLadder {
 public:
  PortfolioLadder() = default;
  explicit PortfolioLadder(std::vector<Surface> surfaces) : surfaces_(std::move(surfaces)) {}

  [[nodiscard]] std::size_t n_max() const noexcept { return surfaces_.size(); }
  /// phi^(n) for 1 <= n <= n_max.
  [[nodiscard]] const Surface& at(std::size_t n) const;
  /// zeta^(n) = phi^(n) / n.
  [[nodiscard]] Surface per_risk(std::size_t n) const;

 private:
  std::vector<Surface> surfaces_;
};

enum class LadderKind {
  Phi,    // nonlinear recursion for phi^(n)
  Gamma,  // linear upper-envelope recursion with tilted drift
};

/// Streams a recursion one level at a time, keeping only the last two levels.
/// Level n's source reads level n-1 at the same nodes, so no interpolation enters.
class LadderStepper {
 public:
  LadderStepper(PricingProblem problem, LadderKind kind);

  /// Solves the next level and returns it. For Phi, throws SolverError(Quality)
  /// when phi^(n) < phi^(n-1) - quality_slack at any node.
  const Surface& advance();

  [[nodiscard]] std::size_t level() const noexcept { return level_; }
  [[nodiscard]] const Surface& current() const;
  /// Level n-1, or nullptr when level() <= 1 (the zero surface).
  [[nodiscard]] const Surface* previous() const noexcept;

  double quality_slack = 1e-6;

 private:
  PricingProblem problem_;
  LadderKind kind_;
  std::size_t level_ = 0;
  std::optional<Surface> current_;
  std::optional<Surface> previous_;
};

PortfolioLadder phi_portfolio(const PricingProblem& problem, std::size_t n_max);

/// Large-portfolio limit factor: linear, drift a - alpha b (lambda - floor), discount lambda.
Surface beta_surface(const PricingProblem& problem);

PortfolioLadder gamma_ladder(const PricingProblem& problem, std::size_t n_max);

/// Auxiliary bounding functions used in the convergence-rate argument, n >= 2:
/// f^(n) has source alpha n sqrt(lambda); h^(n) has source n lambda - alpha sqrt(n lambda).
Surface rate_aux_f(const PricingProblem& problem, std::size_t n);
Surface rate_aux_h(const PricingProblem& problem, std::size_t n);

struct RiskDecomposition {
  double per_risk_price = 0.0;               // P^(n) / n
  double risk_neutral = 0.0;                 // P^{alpha=0}
  double finite_portfolio_charge = 0.0;      // P^(n)/n - F beta
  double stochastic_mortality_charge = 0.0;  // F beta - P^{alpha=0}

  [[nodiscard]] double total_charge() const noexcept {
    return finite_portfolio_charge + stochastic_mortality_charge;
  }
};

struct RateBound {
  double j = 0.0;      // alpha sqrt(2) / (sqrt(2 floor) - alpha)
  double k_n = 0.0;    // K_1 = 1, K_n = J / n^{3/2} + (n-1)/n K_{n-1}
  double l_n = 0.0;    // n K_n
  double bound = 0.0;  // 1/n + 2 J / sqrt(n)
};

/// Throws DomainError when alpha >= sqrt(2 floor) or n == 0.
RateBound rate_bound_constants(double lambda_floor, double alpha, std::size_t n);

struct SharpeResidual {
  double max_abs = 0.0;
  std::vector<double> residuals;
};

/// Residual of "portfolio drift = r Pi + alpha * local std dev" reconstructed from
/// the phi surface by centred differences and exact bond partials. Each sample
/// (lambda, t) is snapped to the nearest interior node of phi's grid.
SharpeResidual sharpe_identity_check(const PricingProblem& problem, const Surface& phi, double r,
                                     std::span<const std::pair<double, double>> samples);

/// Deterministic 10 x 10 sample around lambda_star: hazard offsets spanning a factor
/// 10 either side of lambda_star - floor, times spread over (0, T).
std::vector<std::pair<double, double>> default_sharpe_samples(const PricingProblem& problem,
                                                              double lambda_star);

/// Lazily solves and caches the surfaces behind point queries.
class EndowmentPricer {
 public:
  explicit EndowmentPricer(PricingProblem problem);

  [[nodiscard]] const PricingProblem& problem() const noexcept { return problem_; }

  const Surface& phi();
  const Surface& phi_alpha0();
  const Surface& beta();
  /// phi^(n); solves and retains the ladder up to n on first use.
  const Surface& phi_n(std::size_t n);

  /// F(r, t) phi^(n)(lambda, t). Throws std::out_of_range off the grid.
  double price(double r, double lambda, double t, std::size_t n);
  /// Bond holding P_r / F_r, which equals phi(lambda, t).
  double hedge_ratio(double r, double lambda, double t);
  /// n e^{-(floor - alpha sqrt(floor)) (T - t)}.
  [[nodiscard]] double envelope(double t, std::size_t n) const;

  RiskDecomposition risk_decomposition(std::size_t n, double r, double lambda, double t);

 private:
  PricingProblem problem_;
  std::optional<Surface> phi_;
  std::optional<Surface> phi_alpha0_;
  std::optional<Surface> beta_;
  PortfolioLadder ladder_;
};

}  // namespace endowrisk
