#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace endowrisk {

/// 17 significant digits, '.' decimal, locale independent.
std::string format_number(double value);

enum class CheckStatus { Pass, Fail, Skip };

std::string to_string(CheckStatus status);

/// One verified property. status is Pass exactly when max_violation <= tolerance,
/// unless the check was skipped because its precondition did not hold.
struct CheckReport {
  std::string id;
  std::string scenario;
  std::size_t nodes = 0;
  double max_violation = 0.0;
  double tolerance = 0.0;
  CheckStatus status = CheckStatus::Pass;
  std::string note;
  double wall_seconds = 0.0;  // printed, never written to the CSV

  [[nodiscard]] bool failed() const noexcept { return status == CheckStatus::Fail; }
};

/// Builds a report whose status follows from max_violation <= tolerance.
CheckReport make_check(std::string id, std::string scenario, std::size_t nodes,
                       double max_violation, double tolerance, std::string note = {});

CheckReport make_skip(std::string id, std::string scenario, std::string note);

/// Header plus one row per report, sorted by (scenario, id). Wall time is left
/// out so that reports are byte-identical between runs.
void write_check_csv(std::ostream& out, std::vector<CheckReport> reports);

/// CSV-safe text field: quoted when it contains a comma, quote or newline.
std::string csv_field(const std::string& text);

}  // namespace endowrisk
