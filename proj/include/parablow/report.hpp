#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "parablow/io.hpp"

namespace parablow {

enum class CheckStatus { pass, fail, warn };

std::string_view to_string(CheckStatus s);

struct CheckRecord {
  std::string id;       // "C01" ...
  std::string name;
  std::string anchor;   // the law being checked, as a formula
  double measured = 0.0;
  double tolerance = 0.0;
  std::string comparison = "<=";  // how measured relates to tolerance when passing
  CheckStatus status = CheckStatus::fail;
  bool warning_only = false;      // a failure is reported as warn
  double wall_time = 0.0;
  std::vector<std::pair<std::string, double>> details;
  std::string note;
  Table series;  // plot-ready diagnostic series

  bool passed() const { return status != CheckStatus::fail; }
  /// Sets status from a boolean outcome honouring warning_only.
  void resolve(bool ok);
};

struct VerificationReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<CheckRecord> checks;
  double wall_time = 0.0;

  /// AND of the per-check passes; false for an empty report.
  bool overall() const;
};

std::string report_json(const VerificationReport& report);
std::string report_text(const VerificationReport& report);

/// Writes report.json, report.txt and check_<id>.csv for every check; returns the
/// written paths. Throws invalid-argument for an empty check set, io-error otherwise.
std::vector<std::filesystem::path> emit_report(const VerificationReport& report,
                                               const std::filesystem::path& dir);

/// Reads a report.json back (series are not restored).
VerificationReport load_report(const std::filesystem::path& file);

}  // namespace parablow
