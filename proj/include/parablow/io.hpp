#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "parablow/constructions.hpp"

namespace parablow {

/// Shortest round-trip decimal form, locale independent; "nan" / "inf" / "-inf".
std::string format_number(double v);

/// Plain CSV table: header row, comma separated.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& file, const Table& table);
std::string to_csv(const Table& table);

/// One row per (snapshot, interior node): t, x, y, u.
Table snapshot_table(const Trajectory& traj);
/// One row per step: index, t, tau, energy, l2, max, dtnorm, bound_margin, majorant,
/// majorant_margin, newton_iterations.
Table diagnostics_table(const Trajectory& traj);
/// One row per (output time, interior node): t, x, y, u.
Table field_table(const std::vector<double>& times, const std::vector<Field>& fields);
/// stage, member, parameter, sup_change, wall_time (stage coded k=0, m=1, n=2, start=3).
Table convergence_table(const std::vector<ConvergenceRow>& rows);

/// JSON sidecar with the convergence table, run summaries and limit parameters.
std::string convergence_json(const ConstructionResult& result);

void write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace parablow
