#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "endowrisk/config.hpp"
#include "endowrisk/lemmas.hpp"
#include "endowrisk/report.hpp"
#include "endowrisk/verify.hpp"

using namespace endowrisk;
namespace fs = std::filesystem;

namespace {

// Small grid and sample sizes so a full suite runs in a few seconds.
const char* kQuickConfig = R"({
  "schema": "endowrisk.run/1",
  "scenario": "quick",
  "grid": {"n_y": 121, "n_tau": 200},
  "mc": {"n_paths": 4000, "steps_per_year": 50},
  "verify": {"n_max": 4, "ladder_n_max": 10, "rate_levels": [2, 5, 10], "fuzz_samples": 2000}
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct CliRun {
  int code;
  std::string output;
};

CliRun run_cli(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "endowrisk_cli_test.log";
  const std::string cmd = std::string(ENDOWRISK_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WEXITSTATUS(status), slurp(log)};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("endowrisk_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("square-root inequalities: worked examples") {
  // A = 3, B = 1, C = 4: sqrt(25) = 5 <= 2 + sqrt(17)
  CHECK(root_shift_gap(3.0, 1.0, 4.0) == doctest::Approx(5.0 - (2.0 + std::sqrt(17.0))));
  CHECK(5.0 - root_shift_gap(3.0, 1.0, 4.0) == doctest::Approx(6.1231056).epsilon(1e-8));
  CHECK(root_shift_gap(2.5, 2.5, -1.0) == 0.0);
  // n = 2: sqrt(Bl^2 + C^2 / 2) <= sqrt(Bl^2 + C^2)
  for (double bl : {0.0, 0.3, -2.0}) {
    for (double c : {0.0, 0.5, 3.0}) {
      const double a = c + 1.7;  // A drops out when n = 2
      CHECK(root_average_gap(a, c, bl, 2) ==
            doctest::Approx(std::sqrt(bl * bl + c * c / 2.0) - std::sqrt(bl * bl + c * c)));
    }
  }
  CHECK(root_split_gap(2.0, 1.0, 1.5, 0.3, -0.2, 3, 4) <= 0.0);
}

TEST_CASE("square-root inequality fuzzers") {
  for (auto fuzz : {fuzz_root_shift, fuzz_root_split, fuzz_root_average}) {
    const FuzzResult r = fuzz(42, 20000, 1e-12);
    CHECK(r.samples == 20000);
    CHECK(r.violations == 0);
    CHECK(r.max_gap <= 1e-12);
    const FuzzResult again = fuzz(42, 20000, 1e-12);
    CHECK(again.max_gap == r.max_gap);
  }
  const auto rows = fuzz_lemma_reports(1, 1000, "s");
  REQUIRE(rows.size() == 3);
  std::set<std::string> ids;
  for (const auto& r : rows) ids.insert(r.id);
  CHECK(ids == std::set<std::string>{"lem_4_5_fuzz", "lem_4_10_fuzz", "lem_4_12_fuzz"});
}

TEST_CASE("report rows and csv dialect") {
  const CheckReport pass = make_check("b_check", "s", 10, 1e-7, 1e-6);
  const CheckReport fail = make_check("a_check", "s", 10, 2e-6, 1e-6, "note, with comma");
  const CheckReport skip = make_skip("c_check", "s", "precondition");
  CHECK(pass.status == CheckStatus::Pass);
  CHECK(fail.failed());
  CHECK(skip.status == CheckStatus::Skip);
  CHECK(make_check("x", "s", 1, 1e-6, 1e-6).status == CheckStatus::Pass);
  CHECK(make_check("x", "s", 1, std::nan(""), 1.0).failed());

  std::ostringstream out;
  write_check_csv(out, {pass, fail, skip});
  const std::string text = out.str();
  CHECK(text ==
        "check,scenario,nodes,max_violation,tolerance,status,note\n"
        "a_check,s,10,1.9999999999999999e-06,9.9999999999999995e-07,fail,\"note, with comma\"\n"
        "b_check,s,10,9.9999999999999995e-08,9.9999999999999995e-07,pass,\n"
        "c_check,s,0,0,0,skip,precondition\n");
  CHECK(text.find('\r') == std::string::npos);
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("config parsing") {
  const RunConfig c = parse_config(kQuickConfig);
  CHECK(c.scenario == "quick");
  CHECK(c.grid.n_y == 121);
  CHECK(c.verify.rate_levels.size() == 3);
  CHECK(c.alpha == 0.1);

  const RunConfig v = parse_config(R"({"schema": "endowrisk.run/1", "scenario": "vasicek",
      "hazard": {"kind": "shifted_log_ou", "lambda_floor": 0.03, "mean_offset": 0.01,
                 "reversion_speed": 1.0, "vol": 0.3},
      "verify": {"tolerances": {"thm_3_5_envelope": 1e-7}}})");
  CHECK(v.bond.kind() == RateKind::Vasicek);
  CHECK(v.hazard.lambda_floor() == 0.03);
  CHECK(check_tolerance(v.verify, "thm_3_5_envelope") == 1e-7);
  CHECK(check_tolerance(v.verify, "thm_4_18_rate_bound") == 1e-4);

  CHECK_THROWS_AS(parse_config(R"({"schema": "endowrisk.run/1", "colour": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schema": "endowrisk.run/2"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario": "default"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schema": "endowrisk.run/1", "grid": {"nY": 3}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schema": "endowrisk.run/1",
      "hazard": {"kind": "shifted_log_ou", "lambda_floor": 0.04, "mean_level": -4, "mean_offset": 0.02,
                 "reversion_speed": 0.5, "vol": 0.2}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schema": "endowrisk.run/1",
      "verify": {"tolerances": {"thm_9_9": 1}}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schema": "endowrisk.run/1", "mc": {"n_paths": 5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(builtin_scenario("nope"), ConfigError);
  for (const auto& name : builtin_scenarios()) CHECK_NOTHROW((void)builtin_scenario(name).problem());
}

TEST_CASE("verify suite on a small grid") {
  const RunConfig c = parse_config(kQuickConfig);
  const VerifyResult r = run_verify(c);
  std::set<std::string> ids;
  for (const auto& row : r.reports) {
    ids.insert(row.id);
    INFO(row.id << " " << row.max_violation << " " << row.note);
    CHECK_FALSE(row.failed());
  }
  // one row per entry of the tolerance table, except the validation row
  std::set<std::string> expected;
  for (const auto& [id, tol] : default_tolerances()) {
    if (id != "validate_model") expected.insert(id);
  }
  CHECK(ids == expected);
  CHECK(r.reports.size() == expected.size());
}

TEST_CASE("verify reports a failed validation before any solve") {
  RunConfig c = parse_config(kQuickConfig);
  c.alpha = 0.25;
  const VerifyResult r = run_verify(c);
  REQUIRE(r.reports.size() == 1);
  CHECK(r.reports[0].id == "validate_model");
  CHECK(r.reports[0].failed());
  CHECK(r.reports[0].note.find("alpha exceeds sqrt(lambda_floor)") != std::string::npos);
}

TEST_CASE("verify on b = 0 reports a zero mortality charge") {
  RunConfig c = parse_config(kQuickConfig);
  c.hazard = HazardModel::constant(0.04);
  const VerifyResult r = run_verify(c);
  bool seen = false;
  for (const auto& row : r.reports) {
    if (row.id != "cor_4_21_zero_mortality_charge") continue;
    seen = true;
    CHECK(row.status == CheckStatus::Pass);
    CHECK(row.max_violation <= 1e-6);
  }
  CHECK(seen);
}

TEST_CASE("cli: price") {
  const fs::path out = scratch_dir("price");
  const auto t_end = run_cli("price --t 10 -n 7 --out " + out.string());
  CHECK(t_end.code == 0);
  CHECK(t_end.output.find("price 7.0\n") != std::string::npos);
  CHECK(fs::exists(out / "price.csv"));

  const fs::path cfg = out / "flat.json";
  std::ofstream(cfg) << R"({"schema": "endowrisk.run/1", "scenario": "flat", "alpha": 0,
      "hazard": {"kind": "constant", "lambda_floor": 0.04}, "evaluation": {"lambda": 0.05}})";
  const auto flat = run_cli("price --config " + cfg.string() + " --lambda 0.05 --t 5 --out " + out.string());
  CHECK(flat.code == 0);
  const auto pos = flat.output.find("price ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::abs(std::stod(flat.output.substr(pos + 6)) - 0.67032005) <= 1e-4);

  const auto off = run_cli("price --lambda 80 --out " + out.string());
  CHECK(off.code == 2);
  CHECK(off.output.find("outside the grid range [") != std::string::npos);

  CHECK(run_cli("price --scenario nonexistent --out " + out.string()).code == 2);
  CHECK(run_cli("price --config /does/not/exist.json").code == 2);
}

TEST_CASE("cli: verify, fuzz, ladder and decompose") {
  const fs::path out = scratch_dir("verify");
  const fs::path cfg = out / "quick.json";
  std::ofstream(cfg) << kQuickConfig;

  const auto ok = run_cli("verify --config " + cfg.string() + " --out " + out.string());
  CHECK(ok.code == 0);
  CHECK(fs::exists(out / "verify_quick.csv"));

  const fs::path bad = out / "bad.json";
  std::ofstream(bad) << R"({"schema": "endowrisk.run/1", "scenario": "bad", "alpha": 0.25,
      "grid": {"n_y": 61, "n_tau": 50}})";
  const auto fail = run_cli("verify --config " + bad.string() + " --out " + out.string());
  CHECK(fail.code == 1);
  CHECK(slurp(out / "verify_bad.csv").find("validate_model,bad,0,1,0,fail") != std::string::npos);

  CHECK(run_cli("fuzz-lemmas --samples 500 --seed 9 --out " + out.string()).code == 0);
  CHECK(fs::exists(out / "fuzz_lemmas.csv"));

  CHECK(run_cli("ladder --config " + cfg.string() + " --n-max 6 --out " + out.string()).code == 0);
  const std::string ladder = slurp(out / "ladder_quick.csv");
  CHECK(ladder.rfind("n,zeta,gamma_over_n,beta,rate_bound\n", 0) == 0);
  CHECK(std::count(ladder.begin(), ladder.end(), '\n') == 7);

  const auto dec = run_cli("decompose --config " + cfg.string() + " -n 5 --out " + out.string());
  CHECK(dec.code == 0);
  CHECK(dec.output.find("stochastic_mortality_charge ") != std::string::npos);
}
