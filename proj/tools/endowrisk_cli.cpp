#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "endowrisk/config.hpp"
#include "endowrisk/lemmas.hpp"
#include "endowrisk/pricer.hpp"
#include "endowrisk/report.hpp"
#include "endowrisk/verify.hpp"

namespace fs = std::filesystem;
using namespace endowrisk;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kConfigError = 2, kNumericalFailure = 3 };

struct CommonFlags {
  std::string config_path;
  std::string scenario;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--scenario", f.scenario,
                  "built-in scenario (default, deterministic, exponential, vasicek), or a name for --config");
  cmd->add_option("--out", f.out_dir, "output directory for CSV files");
  cmd->add_option("--seed", f.seed, "Monte Carlo and fuzzer seed");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig c;
  if (!f.config_path.empty()) {
    c = load_config(f.config_path);
    if (!f.scenario.empty()) c.scenario = f.scenario;
  } else {
    c = builtin_scenario(f.scenario.empty() ? "default" : f.scenario);
  }
  if (!f.out_dir.empty()) c.output_dir = f.out_dir;
  if (f.seed) c.mc.seed = *f.seed;
  return c;
}

// Numbers in console output always carry a decimal point or exponent.
std::string show(double v) {
  std::string s = format_number(v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::ofstream open_csv(const RunConfig& c, const std::string& file) {
  fs::create_directories(c.output_dir);
  const fs::path path = fs::path(c.output_dir) / file;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void require_on_grid(const Grid& g, double lambda, double t) {
  if (!(lambda >= g.lambda_min() && lambda <= g.lambda_max())) {
    throw ConfigError("lambda " + show(lambda) + " outside the grid range [" + show(g.lambda_min()) +
                      ", " + show(g.lambda_max()) + "]");
  }
  if (!(t >= 0.0 && t <= g.horizon())) {
    throw ConfigError("t " + show(t) + " outside [0, " + show(g.horizon()) + "]");
  }
}

void print_summary(const std::string& scenario, const VerifyResult& r) {
  std::cout << scenario << ": " << r.count(CheckStatus::Pass) << " pass, "
            << r.count(CheckStatus::Fail) << " fail, " << r.count(CheckStatus::Skip) << " skip\n";
  for (const auto& c : r.reports) {
    if (c.status == CheckStatus::Fail) {
      std::cout << "  FAIL " << c.id << " violation " << show(c.max_violation) << " > "
                << show(c.tolerance) << (c.note.empty() ? "" : "  (" + c.note + ")") << '\n';
    }
  }
}

int cmd_price(const RunConfig& c, double r, std::optional<double> lambda, std::optional<double> t,
              std::size_t n) {
  const PricingProblem p = c.problem();
  p.require_valid();
  const double l = lambda.value_or(c.evaluation.lambda);
  const double tt = t.value_or(c.evaluation.t);
  require_on_grid(p.grid, l, tt);
  EndowmentPricer pricer(p);
  const double price = pricer.price(r, l, tt, n);
  const double hedge = pricer.hedge_ratio(r, l, tt);
  const double env = pricer.envelope(tt, n);
  std::cout << "price " << show(price) << "\nhedge_ratio " << show(hedge) << "\nenvelope "
            << show(env) << '\n';
  auto out = open_csv(c, "price.csv");
  out << "scenario,r,lambda,t,n,price,hedge_ratio,envelope\n"
      << csv_field(c.scenario) << ',' << format_number(r) << ',' << format_number(l) << ','
      << format_number(tt) << ',' << n << ',' << format_number(price) << ',' << format_number(hedge)
      << ',' << format_number(env) << '\n';
  return kOk;
}

int cmd_ladder(const RunConfig& c, std::size_t n_max) {
  const PricingProblem p = c.problem();
  p.require_valid();
  const double l = c.evaluation.lambda, t = c.evaluation.t;
  require_on_grid(p.grid, l, t);
  const double beta = beta_surface(p).evaluate(l, t);
  std::optional<double> j;
  try {
    j = rate_bound_constants(p.grid.lambda_floor(), p.alpha, 1).j;
  } catch (const DomainError&) {
  }
  LadderStepper phi(p, LadderKind::Phi), gamma(p, LadderKind::Gamma);
  auto out = open_csv(c, "ladder_" + c.scenario + ".csv");
  out << "n,zeta,gamma_over_n,beta,rate_bound\n";
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double nd = static_cast<double>(n);
    const double zeta = phi.advance().evaluate(l, t) / nd;
    const double g = gamma.advance().evaluate(l, t) / nd;
    const double bound = j ? 1.0 / nd + 2.0 * *j / std::sqrt(nd) : std::nan("");
    out << n << ',' << format_number(zeta) << ',' << format_number(g) << ',' << format_number(beta)
        << ',' << format_number(bound) << '\n';
    std::cout << "n " << n << "  zeta " << show(zeta) << "  gamma/n " << show(g) << '\n';
  }
  std::cout << "beta " << show(beta) << '\n';
  return kOk;
}

int cmd_decompose(const RunConfig& c, std::size_t n) {
  const PricingProblem p = c.problem();
  p.require_valid();
  const auto& e = c.evaluation;
  require_on_grid(p.grid, e.lambda, e.t);
  EndowmentPricer pricer(p);
  const RiskDecomposition d = pricer.risk_decomposition(n, e.r, e.lambda, e.t);
  std::cout << "per_risk_price " << show(d.per_risk_price) << "\nrisk_neutral " << show(d.risk_neutral)
            << "\nfinite_portfolio_charge " << show(d.finite_portfolio_charge)
            << "\nstochastic_mortality_charge " << show(d.stochastic_mortality_charge)
            << "\ntotal_charge " << show(d.total_charge()) << '\n';
  auto out = open_csv(c, "decompose_" + c.scenario + ".csv");
  out << "n,per_risk_price,risk_neutral,finite_portfolio_charge,stochastic_mortality_charge,total_charge\n"
      << n << ',' << format_number(d.per_risk_price) << ',' << format_number(d.risk_neutral) << ','
      << format_number(d.finite_portfolio_charge) << ','
      << format_number(d.stochastic_mortality_charge) << ',' << format_number(d.total_charge()) << '\n';
  return kOk;
}

int write_verify(const RunConfig& c, const VerifyResult& r) {
  auto out = open_csv(c, "verify_" + c.scenario + ".csv");
  write_check_csv(out, r.reports);
  return r.any_failed() ? kCheckFailed : kOk;
}

int cmd_verify(const RunConfig& c) {
  const VerifyResult r = run_verify(c, &std::cerr);
  print_summary(c.scenario, r);
  return write_verify(c, r);
}

int cmd_fuzz(const RunConfig& c, std::size_t n_samples) {
  if (n_samples < 1) throw ConfigError("fuzz-lemmas: --samples must be >= 1");
  const auto reports = fuzz_lemma_reports(c.mc.seed, n_samples, c.scenario);
  for (const auto& r : reports) {
    std::cout << r.id << ' ' << to_string(r.status) << "  " << r.note << "  max gap "
              << show(r.max_violation) << '\n';
  }
  auto out = open_csv(c, "fuzz_lemmas.csv");
  write_check_csv(out, reports);
  const bool failed = std::any_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.failed(); });
  return failed ? kCheckFailed : kOk;
}

// Verifies several scenarios; scenarios share the worker pool.
int cmd_sweep(const CommonFlags& flags, std::vector<std::string> names) {
  if (names.empty()) names = builtin_scenarios();
  std::vector<RunConfig> configs;
  for (const auto& name : names) {
    CommonFlags f = flags;
    f.scenario = name;
    f.config_path.clear();
    configs.push_back(resolve(f));
  }
  std::vector<VerifyResult> results(configs.size());
  std::vector<std::function<void()>> tasks;
  std::mutex log_mutex;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    tasks.emplace_back([&, i] {
      results[i] = run_verify(configs[i]);
      std::lock_guard<std::mutex> lock(log_mutex);
      std::cerr << "  finished " << configs[i].scenario << '\n';
    });
  }
  run_pool(tasks, configured_threads());
  int code = kOk;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    print_summary(configs[i].scenario, results[i]);
    if (write_verify(configs[i], results[i]) != kOk) code = kCheckFailed;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pure endowment pricing under the instantaneous Sharpe ratio"};
  app.require_subcommand(1);

  CommonFlags flags;
  double r = 0.03;
  std::optional<double> lambda, t;
  std::size_t n = 1;
  auto* price = app.add_subcommand("price", "price n pure endowments at one point");
  add_common(price, flags);
  price->add_option("--r", r, "short rate");
  price->add_option("--lambda", lambda, "hazard rate (default: evaluation point)");
  price->add_option("--t", t, "valuation time (default: evaluation point)");
  price->add_option("-n,--n", n, "number of lives")->check(CLI::PositiveNumber);

  std::size_t n_max = 100;
  auto* ladder = app.add_subcommand("ladder", "zeta, gamma/n, beta and the rate bound for n = 1..n_max");
  add_common(ladder, flags);
  ladder->add_option("--n-max", n_max, "largest portfolio size")->check(CLI::PositiveNumber);

  std::size_t n_dec = 10;
  auto* decompose = app.add_subcommand("decompose", "split the risk charge at the evaluation point");
  add_common(decompose, flags);
  decompose->add_option("-n,--n", n_dec, "number of lives")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "run the property suite for one scenario");
  add_common(verify, flags);

  std::size_t samples = 100000;
  auto* fuzz = app.add_subcommand("fuzz-lemmas", "fuzz the square-root inequalities");
  add_common(fuzz, flags);
  fuzz->add_option("--samples", samples, "samples per inequality");

  std::vector<std::string> sweep_names;
  auto* sweep = app.add_subcommand("sweep", "run verify over several built-in scenarios");
  add_common(sweep, flags);
  sweep->add_option("--scenarios", sweep_names, "scenario names (default: all built-in)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*sweep) return cmd_sweep(flags, sweep_names);
    const RunConfig c = resolve(flags);
    if (*price) return cmd_price(c, r, lambda, t, n);
    if (*ladder) return cmd_ladder(c, n_max);
    if (*decompose) return cmd_decompose(c, n_dec);
    if (*verify) return cmd_verify(c);
    if (*fuzz) return cmd_fuzz(c, samples);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kOk;
}
