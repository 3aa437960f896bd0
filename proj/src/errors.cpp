#include "parablow/errors.hpp"

namespace parablow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::infeasible_resolution: return "infeasible-resolution";
    case ErrorCode::unsupported_domain: return "unsupported-domain";
    case ErrorCode::index_out_of_range: return "index-out-of-range";
    case ErrorCode::incompatible_grids: return "incompatible-grids";
    case ErrorCode::grid_mismatch: return "grid-mismatch";
    case ErrorCode::negative_input: return "negative-input";
    case ErrorCode::newton_divergence: return "newton-divergence";
    case ErrorCode::no_convergence: return "no-convergence";
    case ErrorCode::no_convergence_in_k: return "no-convergence-in-k";
    case ErrorCode::non_monotone_sequence: return "non-monotone-sequence";
    case ErrorCode::budget_exceeded: return "budget-exceeded";
    case ErrorCode::schedules_disagree: return "schedules-disagree";
    case ErrorCode::insufficient_samples: return "insufficient-samples";
    case ErrorCode::unresolved_layer: return "unresolved-layer";
    case ErrorCode::grid_incommensurate: return "grid-incommensurate";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace parablow
