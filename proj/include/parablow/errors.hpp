#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace parablow {

enum class ErrorCode {
  invalid_argument,
  infeasible_resolution,
  unsupported_domain,
  index_out_of_range,
  incompatible_grids,
  grid_mismatch,
  negative_input,
  newton_divergence,
  no_convergence,
  no_convergence_in_k,
  non_monotone_sequence,
  budget_exceeded,
  schedules_disagree,
  insufficient_samples,
  unresolved_layer,
  grid_incommensurate,
  config_error,
  io_error,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// harness can map it to an exit status and a report line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace parablow
