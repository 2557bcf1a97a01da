#pragma once

#include <variant>

namespace endowrisk {

struct ConstantRateParams {
  double rate = 0.0;
};

/// Vasicek dynamics specified directly under Q: dr = k (m - r) dt + sigma dW^Q.
struct VasicekParams {
  double reversion_speed = 0.0;  // k
  double long_run_mean = 0.0;    // m
  double vol = 0.0;              // sigma
};

enum class RateKind { ConstantRate, Vasicek };

class ShortRateModel {
 public:
  using Params = std::variant<ConstantRateParams, VasicekParams>;

  /// Throws DomainError on r < 0 (constant), k <= 0 or sigma < 0 (Vasicek).
  explicit ShortRateModel(Params params);

  static ShortRateModel constant(double rate);
  static ShortRateModel vasicek(double reversion_speed, double long_run_mean, double vol);

  [[nodiscard]] RateKind kind() const noexcept;
  [[nodiscard]] const Params& params() const noexcept { return params_; }

  /// Risk-neutral drift mu^Q(r) and volatility sigma(r).
  [[nodiscard]] double q_drift(double r) const noexcept;
  [[nodiscard]] double vol() const noexcept;

 private:
  Params params_;
};

struct BondPrice {
  double value = 1.0;  // F
  double delta = 0.0;  // F_r
};

/// F together with the partials entering the bond pricing equation.
struct BondPartials {
  double value = 1.0;
  double d_r = 0.0;
  double d_rr = 0.0;
  double d_t = 0.0;
};

/// Price of the default-free T-bond. Throws DomainError when t > T.
BondPrice bond_price(const ShortRateModel& model, double r, double t, double horizon);

BondPartials bond_partials(const ShortRateModel& model, double r, double t, double horizon);

/// F_t + mu^Q F_r + sigma^2 F_rr / 2 - r F from the analytic partials.
double bond_pde_residual(const ShortRateModel& model, double r, double t, double horizon);

namespace detail {
/// Vasicek partials with A(tau) replaced by A(tau) + slope * tau; slope = 0 is the
/// exact affine solution. Exposed so tests can confirm the residual detects errors.
BondPartials vasicek_partials(const VasicekParams& p, double r, double tau, double a_slope);
}  // namespace detail

}  // namespace endowrisk
