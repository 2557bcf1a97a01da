#include "endowrisk/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "endowrisk/lemmas.hpp"
#include "endowrisk/mc_oracle.hpp"

namespace endowrisk {

bool VerifyResult::any_failed() const {
  return std::any_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.failed(); });
}

std::size_t VerifyResult::count(CheckStatus status) const {
  return static_cast<std::size_t>(std::count_if(
      reports.begin(), reports.end(), [status](const CheckReport& r) { return r.status == status; }));
}

double check_tolerance(const VerifyOptions& options, const std::string& id) {
  if (auto it = options.tolerances.find(id); it != options.tolerances.end()) return it->second;
  return default_tolerances().at(id);
}

void run_pool(std::vector<std::function<void()>>& tasks, std::size_t threads) {
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, tasks.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  // Rethrow in task order so the reported failure does not depend on scheduling.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<CheckReport> fuzz_lemma_reports(std::uint64_t seed, std::size_t n_samples,
                                            const std::string& scenario, double slack) {
  auto row = [&](const char* id, const FuzzResult& r) {
    std::ostringstream note;
    note << r.violations << " violations in " << r.samples << " samples";
    CheckReport c = make_check(id, scenario, r.samples, r.max_gap, slack, note.str());
    if (r.violations > 0) c.status = CheckStatus::Fail;
    return c;
  };
  return {row("lem_4_5_fuzz", fuzz_root_shift(seed + 1, n_samples, slack)),
          row("lem_4_10_fuzz", fuzz_root_split(seed + 2, n_samples, slack)),
          row("lem_4_12_fuzz", fuzz_root_average(seed + 3, n_samples, slack))};
}

namespace {

std::size_t node_count(const Grid& g) { return g.n_y() * (g.n_tau() + 1); }

// max(a - b) over all nodes
double max_excess(const Surface& a, const Surface& b, double scale_a = 1.0, double scale_b = 1.0) {
  const auto va = a.values();
  const auto vb = b.values();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < va.size(); ++i) worst = std::max(worst, scale_a * va[i] - scale_b * vb[i]);
  return worst;
}

// Largest increase between neighbouring nodes in lambda.
double max_lambda_increase(const Surface& s) {
  const Grid& g = s.grid();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= g.n_tau(); ++k) {
    const auto u = s.slice(k);
    for (std::size_t j = 0; j + 1 < g.n_y(); ++j) worst = std::max(worst, u[j + 1] - u[j]);
  }
  return worst;
}

double envelope_violation(const Surface& s, double n, double floor, double alpha) {
  const Grid& g = s.grid();
  const double rate = floor - alpha * std::sqrt(floor);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= g.n_tau(); ++k) {
    const double cap = n * std::exp(-rate * g.tau(k));
    for (double u : s.slice(k)) worst = std::max({worst, -u, u - cap});
  }
  return worst;
}

// min over interior nodes of u_yy - u_y, which has the sign of phi_lambda_lambda.
double min_convexity(const Surface& s) {
  const Grid& g = s.grid();
  const double dy = g.dy();
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= g.n_tau(); ++k) {
    const auto u = s.slice(k);
    for (std::size_t j = 1; j + 1 < g.n_y(); ++j) {
      const double uyy = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (dy * dy);
      const double uy = (u[j + 1] - u[j - 1]) / (2.0 * dy);
      worst = std::min(worst, uyy - uy);
    }
  }
  return worst;
}

// Short form for notes; CSV numeric columns keep full precision.
std::string fmt(double v) {
  std::ostringstream o;
  o.precision(8);
  o << v;
  return o.str();
}

class Suite {
 public:
  Suite(const RunConfig& config, std::ostream* log)
      : config_(config), options_(config.verify), problem_(config.problem()), log_(log) {}

  VerifyResult run();

 private:
  using Reports = std::vector<CheckReport>;

  CheckReport check(const std::string& id, std::size_t nodes, double violation,
                    std::string note = {}) const {
    return make_check(id, config_.scenario, nodes, violation, check_tolerance(options_, id),
                      std::move(note));
  }
  CheckReport skip(const std::string& id, std::string note) const {
    return make_skip(id, config_.scenario, std::move(note));
  }
  void say(const std::string& line) {
    if (!log_) return;
    std::lock_guard<std::mutex> lock(log_mutex_);
    *log_ << line << '\n';
  }
  double bond_at(double t) const {
    return bond_price(problem_.bond, config_.evaluation.r, t, problem_.horizon()).value;
  }

  void base_checks(Reports& out);
  void alpha_checks(Reports& out);
  void drift_checks(Reports& out);
  void vol_checks(Reports& out);
  void large_n_checks(Reports& out);
  void aux_checks(Reports& out);
  void sharpe_checks(Reports& out);
  void mc_checks(Reports& out);

  const RunConfig& config_;
  const VerifyOptions& options_;
  PricingProblem problem_;
  std::ostream* log_;
  std::mutex log_mutex_;
};

void Suite::base_checks(Reports& out) {
  const Grid& g = problem_.grid;
  const double floor = g.lambda_floor();
  const double alpha = problem_.alpha;
  const std::size_t nodes = node_count(g);
  const std::size_t n_max = options_.n_max;
  const PortfolioLadder ladder = phi_portfolio(problem_, n_max);
  const Surface& phi = ladder.at(1);
  const Surface phi0 = phi_physical(problem_);
  const Surface beta = beta_surface(problem_);

  out.push_back(check("thm_3_5_envelope", nodes, envelope_violation(phi, 1.0, floor, alpha)));

  double price_worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= g.n_tau(); ++k) {
    const double f = bond_at(g.t(k));
    for (double u : phi.slice(k)) price_worst = std::max({price_worst, -f * u, f * u - f});
  }
  out.push_back(check("cor_3_6_price_bounds", nodes, price_worst,
                      "r = " + fmt(config_.evaluation.r)));
  out.push_back(check("thm_3_7_phi_lambda_nonpositive", nodes, max_lambda_increase(phi)));
  out.push_back(check("cor_3_9_price_ordering", nodes, max_excess(phi0, phi)));

  double env = -std::numeric_limits<double>::infinity();
  double mono = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= n_max; ++n) {
    env = std::max(env, envelope_violation(ladder.at(n), static_cast<double>(n), floor, alpha));
    mono = std::max(mono, max_lambda_increase(ladder.at(n)));
  }
  const std::string levels = "n <= " + std::to_string(n_max);
  out.push_back(check("thm_4_2_envelope", nodes * n_max, env, levels));
  out.push_back(check("thm_4_4_lambda_nonpositive", nodes * n_max, mono, levels));

  double sub = -std::numeric_limits<double>::infinity();
  std::size_t pairs = 0;
  for (std::size_t m = 1; m < n_max; ++m) {
    for (std::size_t n = m; m + n <= n_max; ++n) {
      const auto a = ladder.at(m).values(), b = ladder.at(n).values(), c = ladder.at(m + n).values();
      for (std::size_t i = 0; i < a.size(); ++i) sub = std::max(sub, c[i] - a[i] - b[i]);
      ++pairs;
    }
  }
  if (pairs > 0) {
    out.push_back(check("thm_4_11_subadditivity", nodes * pairs, sub, "m + n <= " + std::to_string(n_max)));
  } else {
    out.push_back(skip("thm_4_11_subadditivity", "needs n_max >= 2"));
  }

  out.push_back(check("lem_4_14_beta_nonincreasing", nodes, max_lambda_increase(beta)));

  // Decomposition at the evaluation point.
  const auto& e = config_.evaluation;
  const double f = bond_at(e.t);
  double identity = 0.0, negative = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= n_max; ++n) {
    RiskDecomposition d;
    d.per_risk_price = f * ladder.at(n).evaluate(e.lambda, e.t) / static_cast<double>(n);
    d.risk_neutral = f * phi0.evaluate(e.lambda, e.t);
    const double fb = f * beta.evaluate(e.lambda, e.t);
    d.finite_portfolio_charge = d.per_risk_price - fb;
    d.stochastic_mortality_charge = fb - d.risk_neutral;
    identity = std::max(identity, std::abs(d.total_charge() - (d.per_risk_price - d.risk_neutral)));
    negative = std::max({negative, -d.finite_portfolio_charge, -d.stochastic_mortality_charge});
  }
  out.push_back(check("eq_4_55_identity", n_max, identity, levels));
  out.push_back(check("eq_4_55_charges_nonnegative", n_max, negative, levels));

  double charge_nodes = 0.0;
  double interior_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= g.n_tau(); ++k) {
    const double fk = bond_at(g.t(k));
    const auto b = beta.slice(k), p = phi0.slice(k);
    for (std::size_t j = 0; j < g.n_y(); ++j) {
      charge_nodes = std::max(charge_nodes, std::abs(fk * (b[j] - p[j])));
      if (k > 0) interior_margin = std::min(interior_margin, b[j] - p[j]);
    }
  }
  const double charge = f * (beta.evaluate(e.lambda, e.t) - phi0.evaluate(e.lambda, e.t));
  if (problem_.hazard.is_deterministic()) {
    out.push_back(check("cor_4_21_zero_mortality_charge", nodes, charge_nodes));
    out.push_back(skip("cor_4_22_positive_mortality_charge", "b = 0"));
  } else {
    out.push_back(skip("cor_4_21_zero_mortality_charge", "b > 0"));
    const double threshold = 1e-4;
    out.push_back(check("cor_4_22_positive_mortality_charge", 1, threshold - charge,
                        "charge " + fmt(charge) + " vs 1e-4; min interior beta - phi_alpha0 " +
                            fmt(interior_margin)));
  }
}

void Suite::alpha_checks(Reports& out) {
  const Grid& g = problem_.grid;
  const double floor = g.lambda_floor();
  if (!(floor > 0.0)) {
    out.push_back(skip("thm_3_8_alpha_monotone", "alpha grid is degenerate for a zero floor"));
    out.push_back(skip("thm_4_6_alpha_monotone", "alpha grid is degenerate for a zero floor"));
    out.push_back(skip("cor_4_7_alpha0_ladder", "alpha grid is degenerate for a zero floor"));
    return;
  }
  const std::size_t steps = options_.alpha_steps;
  std::vector<LadderStepper> steppers;
  std::string grid_note = "alpha in {";
  for (std::size_t i = 0; i <= steps; ++i) {
    const double a = static_cast<double>(i) / static_cast<double>(steps) * std::sqrt(floor);
    steppers.emplace_back(problem_.with_alpha(a), LadderKind::Phi);
    steppers.back().quality_slack = std::numeric_limits<double>::infinity();
    grid_note += (i ? "," : "") + fmt(a);
  }
  grid_note += "}";

  const std::size_t nodes = node_count(g);
  double level1 = -std::numeric_limits<double>::infinity();
  double all = level1;
  double lower = level1;
  std::optional<Surface> physical;
  for (std::size_t n = 1; n <= options_.n_max; ++n) {
    for (auto& s : steppers) s.advance();
    if (n == 1) physical = steppers.front().current();
    for (std::size_t i = 0; i + 1 < steppers.size(); ++i) {
      const double v = max_excess(steppers[i].current(), steppers[i + 1].current());
      all = std::max(all, v);
      if (n == 1) level1 = std::max(level1, v);
    }
    // alpha = 0 ladder equals n phi_alpha0 and sits below every other alpha
    const auto v0 = steppers.front().current().values();
    const auto p0 = physical->values();
    for (std::size_t i = 0; i < v0.size(); ++i) {
      lower = std::max(lower, std::abs(v0[i] - static_cast<double>(n) * p0[i]));
    }
    for (std::size_t i = 1; i < steppers.size(); ++i) {
      lower = std::max(lower, max_excess(steppers.front().current(), steppers[i].current()));
    }
  }
  const std::size_t pairs = steppers.size() - 1;
  out.push_back(check("thm_3_8_alpha_monotone", nodes * pairs, level1, grid_note));
  out.push_back(check("thm_4_6_alpha_monotone", nodes * pairs * options_.n_max, all,
                      grid_note + ", n <= " + std::to_string(options_.n_max)));
  out.push_back(check("cor_4_7_alpha0_ladder", nodes * steppers.size() * options_.n_max, lower,
                      "n <= " + std::to_string(options_.n_max)));
}

void Suite::drift_checks(Reports& out) {
  const auto raised = problem_.hazard.with_raised_drift(options_.drift_raise);
  if (!raised) {
    out.push_back(skip("thm_3_10_drift_monotone", "hazard kind has no drift parameter"));
    out.push_back(skip("thm_4_8_drift_monotone", "hazard kind has no drift parameter"));
    return;
  }
  LadderStepper base(problem_, LadderKind::Phi), up(problem_.with_hazard(*raised), LadderKind::Phi);
  base.quality_slack = up.quality_slack = std::numeric_limits<double>::infinity();
  const std::size_t nodes = node_count(problem_.grid);
  double level1 = 0.0, all = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= options_.n_max; ++n) {
    const double v = max_excess(up.advance(), base.advance());
    if (n == 1) level1 = v;
    all = std::max(all, v);
  }
  const std::string note = "drift raised by " + fmt(options_.drift_raise);
  out.push_back(check("thm_3_10_drift_monotone", nodes, level1, note));
  out.push_back(check("thm_4_8_drift_monotone", nodes * options_.n_max, all,
                      note + ", n <= " + std::to_string(options_.n_max)));
}

void Suite::vol_checks(Reports& out) {
  const auto scaled = problem_.hazard.with_scaled_vol(options_.vol_scale);
  if (!scaled) {
    out.push_back(skip("thm_3_11_vol_monotone", "hazard kind has no volatility parameter"));
    out.push_back(skip("thm_4_9_vol_monotone", "hazard kind has no volatility parameter"));
    return;
  }
  LadderStepper base(problem_, LadderKind::Phi), up(problem_.with_hazard(*scaled), LadderKind::Phi);
  base.quality_slack = up.quality_slack = std::numeric_limits<double>::infinity();
  const std::size_t nodes = node_count(problem_.grid);
  double level1 = 0.0, all = -std::numeric_limits<double>::infinity();
  bool level1_ok = false;
  std::size_t held = 0;
  std::string convexity;
  for (std::size_t n = 1; n <= options_.n_max; ++n) {
    const Surface& lo = base.advance();
    const Surface& hi = up.advance();
    const double c = std::max(min_convexity(lo), min_convexity(hi));
    const bool ok = c >= -options_.convexity_slack;
    if (n == 1) convexity = fmt(c);
    if (!ok) continue;
    ++held;
    const double v = max_excess(lo, hi);
    if (n == 1) {
      level1 = v;
      level1_ok = true;
    }
    all = std::max(all, v);
  }
  const std::string note = "b scaled by " + fmt(options_.vol_scale) + ", drift held fixed";
  if (level1_ok) {
    out.push_back(check("thm_3_11_vol_monotone", nodes, level1,
                        note + "; convexity precondition held (min " + convexity + ")"));
  } else {
    out.push_back(skip("thm_3_11_vol_monotone",
                       "convexity precondition failed (min " + convexity + ")"));
  }
  const std::string held_note =
      "; convexity precondition held at " + std::to_string(held) + " of " + std::to_string(options_.n_max) + " levels";
  if (held > 0) {
    out.push_back(check("thm_4_9_vol_monotone", nodes * held, all, note + held_note));
  } else {
    out.push_back(skip("thm_4_9_vol_monotone", "convexity precondition failed at every level"));
  }
}

void Suite::large_n_checks(Reports& out) {
  const Grid& g = problem_.grid;
  const std::size_t nodes = node_count(g);
  const std::size_t n_top = options_.ladder_n_max;
  const Surface beta = beta_surface(problem_);
  std::optional<RateBound> bound;
  std::string bound_note;
  try {
    bound = rate_bound_constants(g.lambda_floor(), problem_.alpha, 1);
  } catch (const DomainError& e) {
    bound_note = e.what();
  }

  LadderStepper phi(problem_, LadderKind::Phi), gamma(problem_, LadderKind::Gamma);
  phi.quality_slack = std::numeric_limits<double>::infinity();
  double n_mono = -std::numeric_limits<double>::infinity();
  double per_risk = n_mono, lower = n_mono, dominates = n_mono, gamma_mono = n_mono, rate = n_mono;
  std::string rate_note;
  double zeta_top = 0.0;

  for (std::size_t n = 1; n <= n_top; ++n) {
    const Surface& p = phi.advance();
    const Surface& gm = gamma.advance();
    const double nd = static_cast<double>(n);
    if (const Surface* prev = phi.previous()) {
      n_mono = std::max(n_mono, max_excess(*prev, p));
      per_risk = std::max(per_risk, max_excess(p, *prev, 1.0 / nd, 1.0 / (nd - 1.0)));
    }
    lower = std::max(lower, max_excess(beta, p, 1.0, 1.0 / nd));
    dominates = std::max(dominates, max_excess(p, gm));
    gamma_mono = std::max(gamma_mono, max_lambda_increase(gm));
    if (const Surface* prev = gamma.previous()) gamma_mono = std::max(gamma_mono, max_excess(*prev, gm));

    if (bound && std::find(options_.rate_levels.begin(), options_.rate_levels.end(), n) !=
                     options_.rate_levels.end()) {
      const RateBound rb = rate_bound_constants(g.lambda_floor(), problem_.alpha, n);
      const double big_phi = max_excess(gm, beta, 1.0 / nd, 1.0);
      rate = std::max(rate, big_phi - rb.bound);
      rate_note += (rate_note.empty() ? "" : "; ") + std::string("n=") + std::to_string(n) +
                   " gap " + fmt(big_phi) + " bound " + fmt(rb.bound);
    }
    if (n == n_top) zeta_top = p.evaluate(config_.evaluation.lambda, config_.evaluation.t) / nd;
  }

  const std::string levels = "n <= " + std::to_string(n_top);
  out.push_back(check("lem_4_3_n_monotone", nodes * (n_top - 1), n_mono, levels));
  out.push_back(check("thm_4_13_per_risk_decreasing", nodes * (n_top - 1), per_risk, levels));
  out.push_back(check("thm_4_15_beta_lower_bound", nodes * n_top, lower, levels));
  out.push_back(check("lem_4_16_gamma_monotone", nodes * n_top, gamma_mono, levels));
  out.push_back(check("lem_4_17_gamma_dominates", nodes * n_top, dominates, levels));
  if (bound && !options_.rate_levels.empty()) {
    out.push_back(check("thm_4_18_rate_bound", nodes * options_.rate_levels.size(), rate,
                        "J " + fmt(bound->j) + "; " + rate_note));
  } else {
    out.push_back(skip("thm_4_18_rate_bound", bound_note.empty() ? "no rate levels" : bound_note));
  }

  if (problem_.hazard.is_deterministic()) {
    const Surface phi0 = phi_physical(problem_);
    const double target = phi0.evaluate(config_.evaluation.lambda, config_.evaluation.t);
    out.push_back(check("cor_4_21_diversification", 1, std::abs(zeta_top - target),
                        "zeta_" + std::to_string(n_top) + " " + fmt(zeta_top) + " vs phi_alpha0 " +
                            fmt(target)));
  } else {
    out.push_back(skip("cor_4_21_diversification", "b > 0"));
  }
}

void Suite::aux_checks(Reports& out) {
  const Grid& g = problem_.grid;
  RateBound rb;
  try {
    rb = rate_bound_constants(g.lambda_floor(), problem_.alpha, 1);
  } catch (const DomainError& e) {
    out.push_back(skip("lem_4_19_aux_f_bound", e.what()));
    out.push_back(skip("lem_4_20_aux_h_bound", e.what()));
    return;
  }
  double f_worst = -std::numeric_limits<double>::infinity(), h_worst = f_worst;
  for (std::size_t n : options_.rate_levels) {
    const Surface f = rate_aux_f(problem_, n);
    const Surface h = rate_aux_h(problem_, n);
    for (double v : f.values()) f_worst = std::max(f_worst, v - rb.j);
    for (double v : h.values()) h_worst = std::max(h_worst, v - 1.0);
  }
  const std::size_t nodes = node_count(g) * options_.rate_levels.size();
  out.push_back(check("lem_4_19_aux_f_bound", nodes, f_worst, "J " + fmt(rb.j)));
  out.push_back(check("lem_4_20_aux_h_bound", nodes, h_worst));
}

void Suite::sharpe_checks(Reports& out) {
  const auto samples = default_sharpe_samples(problem_, config_.evaluation.lambda);
  const double r = config_.evaluation.r;
  const Surface phi = phi_single(problem_);
  const SharpeResidual coarse = sharpe_identity_check(problem_, phi, r, samples);
  out.push_back(check("eq_2_16_sharpe_identity", samples.size(), coarse.max_abs));
  if (!options_.refinement) {
    out.push_back(skip("eq_2_16_sharpe_refinement", "refinement disabled"));
    return;
  }
  const PricingProblem fine = problem_.with_grid(problem_.grid.refined());
  const SharpeResidual refined = sharpe_identity_check(fine, phi_single(fine), r, samples);
  const double ratio = refined.max_abs > 0.0 ? coarse.max_abs / refined.max_abs
                                             : std::numeric_limits<double>::infinity();
  out.push_back(check("eq_2_16_sharpe_refinement", samples.size(), 1.5 - ratio,
                      "residual " + fmt(coarse.max_abs) + " -> " + fmt(refined.max_abs) +
                          ", ratio " + fmt(ratio) + " vs 1.5"));
}

void Suite::mc_checks(Reports& out) {
  const auto& e = config_.evaluation;
  const double T = problem_.horizon();
  const Surface phi0 = phi_physical(problem_);
  const Surface beta = beta_surface(problem_);
  const McEstimate mp = mc_phi_physical(problem_.hazard, e.lambda, e.t, T, config_.mc);
  const McEstimate mb = mc_beta(problem_.hazard, problem_.alpha, e.lambda, e.t, T, config_.mc);

  auto agreement = [&](const char* id, double pde, const McEstimate& m) {
    const double tol = std::max(3.0 * m.se, check_tolerance(options_, id));
    CheckReport c = make_check(id, config_.scenario, m.n_paths, std::abs(pde - m.mean), tol,
                               "pde " + fmt(pde) + " mc " + fmt(m.mean) + " se " + fmt(m.se));
    return c;
  };
  out.push_back(agreement("mc_phi_physical", phi0.evaluate(e.lambda, e.t), mp));
  out.push_back(agreement("mc_beta", beta.evaluate(e.lambda, e.t), mb));

  if (problem_.hazard.is_deterministic()) {
    out.push_back(skip("mc_beta_dominance", "b = 0"));
  } else {
    const double se = std::sqrt(mp.se * mp.se + mb.se * mb.se);
    const double tol = 3.0 * se + check_tolerance(options_, "mc_beta_dominance");
    out.push_back(make_check("mc_beta_dominance", config_.scenario, mb.n_paths, mp.mean - mb.mean,
                             tol, "beta " + fmt(mb.mean) + " phi_alpha0 " + fmt(mp.mean)));
  }
}

VerifyResult Suite::run() {
  VerifyResult result;
  const ValidationReport v = validate(problem_.hazard, problem_.alpha, problem_.grid);
  if (!v.ok) {
    std::string note = v.reason;
    if (v.failing_lambda) note += " at lambda " + fmt(*v.failing_lambda);
    CheckReport r = make_check("validate_model", config_.scenario, 0, 1.0, 0.0, note);
    result.reports.push_back(r);
    return result;
  }

  using Member = void (Suite::*)(Reports&);
  struct Group {
    const char* name;
    Member fn;
    bool enabled;
  };
  const std::vector<Group> groups{
      {"large-n ladder", &Suite::large_n_checks, true},
      {"alpha grid", &Suite::alpha_checks, true},
      {"base surfaces", &Suite::base_checks, true},
      {"drift", &Suite::drift_checks, true},
      {"volatility", &Suite::vol_checks, true},
      {"auxiliary bounds", &Suite::aux_checks, true},
      {"sharpe identity", &Suite::sharpe_checks, true},
      {"monte carlo", &Suite::mc_checks, options_.monte_carlo},
  };

  std::vector<Reports> outputs(groups.size() + 1);
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (!groups[i].enabled) continue;
    tasks.emplace_back([this, &groups, &outputs, i] {
      const auto start = std::chrono::steady_clock::now();
      say("  start " + std::string(groups[i].name));
      (this->*groups[i].fn)(outputs[i]);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      for (auto& r : outputs[i]) r.wall_seconds = secs;
      std::ostringstream line;
      line << "  done  " << groups[i].name << " (" << secs << " s)";
      say(line.str());
    });
  }
  tasks.emplace_back([this, &outputs, n = groups.size()] {
    const auto start = std::chrono::steady_clock::now();
    outputs[n] = fuzz_lemma_reports(config_.mc.seed, options_.fuzz_samples, config_.scenario);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& r : outputs[n]) r.wall_seconds = secs;
  });
  if (!options_.monte_carlo) {
    outputs[groups.size() - 1].push_back(skip("mc_phi_physical", "monte carlo disabled"));
    outputs[groups.size() - 1].push_back(skip("mc_beta", "monte carlo disabled"));
    outputs[groups.size() - 1].push_back(skip("mc_beta_dominance", "monte carlo disabled"));
  }

  run_pool(tasks, configured_threads());
  for (auto& o : outputs) {
    for (auto& r : o) result.reports.push_back(std::move(r));
  }
  std::sort(result.reports.begin(), result.reports.end(),
            [](const CheckReport& a, const CheckReport& b) { return a.id < b.id; });
  return result;
}

}  // namespace

VerifyResult run_verify(const RunConfig& config, std::ostream* log) {
  Suite suite(config, log);
  return suite.run();
}

}  // namespace endowrisk
