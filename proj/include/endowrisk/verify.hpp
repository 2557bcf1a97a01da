#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "endowrisk/config.hpp"
#include "endowrisk/report.hpp"

namespace endowrisk {

struct VerifyResult {
  std::vector<CheckReport> reports;

  [[nodiscard]] bool any_failed() const;
  [[nodiscard]] std::size_t count(CheckStatus status) const;
};

/// Tolerance for a check id: the config override if present, else the default table.
double check_tolerance(const VerifyOptions& options, const std::string& id);

/// Runs the property suite for one scenario. Independent groups of checks run
/// on a pool of configured_threads() workers; each group is deterministic, so
/// the sorted report does not depend on the thread count. A model that fails
/// validation yields a single failed "validate_model" row and no solves.
/// Progress lines go to `log` when non-null.
VerifyResult run_verify(const RunConfig& config, std::ostream* log = nullptr);

/// The three square-root inequality fuzzers as report rows.
std::vector<CheckReport> fuzz_lemma_reports(std::uint64_t seed, std::size_t n_samples,
                                            const std::string& scenario, double slack = 1e-12);

/// Runs tasks on up to `threads` workers; task i writes only its own outputs.
void run_pool(std::vector<std::function<void()>>& tasks, std::size_t threads);

}  // namespace endowrisk
