#include "endowrisk/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

namespace endowrisk {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass:
      return "pass";
    case CheckStatus::Fail:
      return "fail";
    case CheckStatus::Skip:
      return "skip";
  }
  return "fail";
}

CheckReport make_check(std::string id, std::string scenario, std::size_t nodes,
                       double max_violation, double tolerance, std::string note) {
  CheckReport r;
  r.id = std::move(id);
  r.scenario = std::move(scenario);
  r.nodes = nodes;
  r.max_violation = max_violation;
  r.tolerance = tolerance;
  r.status = (max_violation <= tolerance) ? CheckStatus::Pass : CheckStatus::Fail;
  r.note = std::move(note);
  return r;
}

CheckReport make_skip(std::string id, std::string scenario, std::string note) {
  CheckReport r;
  r.id = std::move(id);
  r.scenario = std::move(scenario);
  r.status = CheckStatus::Skip;
  r.note = std::move(note);
  return r;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_check_csv(std::ostream& out, std::vector<CheckReport> reports) {
  std::sort(reports.begin(), reports.end(), [](const CheckReport& a, const CheckReport& b) {
    return std::tie(a.scenario, a.id) < std::tie(b.scenario, b.id);
  });
  out << "check,scenario,nodes,max_violation,tolerance,status,note\n";
  for (const auto& r : reports) {
    out << csv_field(r.id) << ',' << csv_field(r.scenario) << ',' << r.nodes << ','
        << format_number(r.max_violation) << ',' << format_number(r.tolerance) << ','
        << to_string(r.status) << ',' << csv_field(r.note) << '\n';
  }
}

}  // namespace endowrisk
