#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "parablow/report.hpp"

namespace parablow {

enum class SuiteTier { quick, full };

SuiteTier parse_tier(const std::string& name);
std::string_view to_string(SuiteTier tier);

struct SuiteOptions {
  SuiteTier tier = SuiteTier::quick;
  std::uint64_t seed = 1;
  /// Check ids to run ("C01" ... "C13"); empty runs all of them.
  std::vector<std::string> only;
  /// Progress messages, one per finished check.
  std::function<void(const std::string&)> log;
};

/// Ids of the checks in report order.
std::vector<std::string> suite_check_ids();

/// Runs the acceptance checks. The quick tier skips the two-dimensional
/// boundary-asymptote solve; every other experiment runs at its full size.
VerificationReport run_suite(const SuiteOptions& options);

}  // namespace parablow
