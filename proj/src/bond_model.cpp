#include "endowrisk/bond_model.hpp"

#include <cmath>

#include "endowrisk/hazard_model.hpp"

namespace endowrisk {

ShortRateModel::ShortRateModel(Params params) : params_(params) {
  if (const auto* c = std::get_if<ConstantRateParams>(&params_)) {
    if (!(c->rate >= 0.0)) throw DomainError("constant rate must be >= 0");
  } else {
    const auto& v = std::get<VasicekParams>(params_);
    if (!(v.reversion_speed > 0.0)) throw DomainError("vasicek: reversion speed k must be > 0");
    if (!(v.vol >= 0.0)) throw DomainError("vasicek: vol must be >= 0");
  }
}

ShortRateModel ShortRateModel::constant(double rate) { return ShortRateModel(ConstantRateParams{rate}); }

ShortRateModel ShortRateModel::vasicek(double reversion_speed, double long_run_mean, double vol) {
  return ShortRateModel(VasicekParams{reversion_speed, long_run_mean, vol});
}

RateKind ShortRateModel::kind() const noexcept {
  return params_.index() == 0 ? RateKind::ConstantRate : RateKind::Vasicek;
}

double ShortRateModel::q_drift(double r) const noexcept {
  if (const auto* v = std::get_if<VasicekParams>(&params_)) {
    return v->reversion_speed * (v->long_run_mean - r);
  }
  return 0.0;
}

double ShortRateModel::vol() const noexcept {
  if (const auto* v = std::get_if<VasicekParams>(&params_)) return v->vol;
  return 0.0;
}

namespace detail {

BondPartials vasicek_partials(const VasicekParams& p, double r, double tau, double a_slope) {
  const double k = p.reversion_speed;
  const double s2 = p.vol * p.vol;
  const double decay = std::exp(-k * tau);
  const double b = (1.0 - decay) / k;
  const double level = p.long_run_mean - s2 / (2.0 * k * k);
  const double a = level * (b - tau) - s2 * b * b / (4.0 * k) + a_slope * tau;
  // dB/dtau = e^{-k tau};  dA/dtau = level (B' - 1) - s2 B B' / (2k)
  const double db = decay;
  const double da = level * (db - 1.0) - s2 * b * db / (2.0 * k) + a_slope;

  BondPartials out;
  out.value = std::exp(a - b * r);
  out.d_r = -b * out.value;
  out.d_rr = b * b * out.value;
  out.d_t = -(da - db * r) * out.value;  // dtau/dt = -1
  return out;
}

}  // namespace detail

BondPartials bond_partials(const ShortRateModel& model, double r, double t, double horizon) {
  if (t > horizon) throw DomainError("bond_price: t must not exceed the horizon T");
  const double tau = horizon - t;
  if (model.kind() == RateKind::ConstantRate) {
    // The rate never moves, so the state r is the rate for the whole term.
    BondPartials out;
    out.value = std::exp(-r * tau);
    out.d_r = -tau * out.value;
    out.d_rr = tau * tau * out.value;
    out.d_t = r * out.value;
    return out;
  }
  return detail::vasicek_partials(std::get<VasicekParams>(model.params()), r, tau, 0.0);
}

BondPrice bond_price(const ShortRateModel& model, double r, double t, double horizon) {
  const BondPartials p = bond_partials(model, r, t, horizon);
  return BondPrice{p.value, p.d_r};
}

double bond_pde_residual(const ShortRateModel& model, double r, double t, double horizon) {
  const BondPartials p = bond_partials(model, r, t, horizon);
  const double sigma = model.vol();
  return p.d_t + model.q_drift(r) * p.d_r + 0.5 * sigma * sigma * p.d_rr - r * p.value;
}

}  // namespace endowrisk
