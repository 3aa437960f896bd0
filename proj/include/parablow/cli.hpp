#pragma once

#include <iosfwd>

#include "parablow/config.hpp"
#include "parablow/io.hpp"

namespace parablow {

/// One row per sweep member: q, h, tau0, lambda, k_final, phi_margin, cq_deviation,
/// scaling_deviation, status (0 ok, 1 failed). Members run on at most `jobs` threads;
/// rows come back in member order.
Table run_sweep(const RunConfig& cfg, int jobs, std::vector<std::string>* errors = nullptr);

/// Subcommands solve | construct | verify | sweep | report.
/// Exit status: 0 success, 1 check or run failure, 2 usage or configuration error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace parablow
