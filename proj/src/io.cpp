#include "parablow/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace parablow {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error(ErrorCode::io_error, "number formatting failed");
  return std::string(buf, ptr);
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::error_code ec;
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path(), ec);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + file.string());
  out << text;
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + file.string());
}

void write_csv(const std::filesystem::path& file, const Table& table) { write_text(file, to_csv(table)); }

namespace {

void append_field(Table& t, double time, const Field& u) {
  const Grid& g = u.grid();
  for (std::size_t node : g.interior()) {
    const Point p = g.coordinate(node);
    t.rows.push_back({time, p[0], g.dim() == 2 ? p[1] : 0.0, u[node]});
  }
}

}  // namespace

Table snapshot_table(const Trajectory& traj) {
  Table t{{"t", "x", "y", "u"}, {}};
  for (const auto& s : traj.snapshots) append_field(t, s.t, s.u);
  return t;
}

Table field_table(const std::vector<double>& times, const std::vector<Field>& fields) {
  Table t{{"t", "x", "y", "u"}, {}};
  for (std::size_t i = 0; i < times.size() && i < fields.size(); ++i) append_field(t, times[i], fields[i]);
  return t;
}

Table diagnostics_table(const Trajectory& traj) {
  Table t{{"index", "t", "tau", "energy", "l2", "max", "dtnorm", "bound_margin", "majorant",
           "majorant_margin", "newton_iterations"},
          {}};
  for (const auto& s : traj.steps) {
    t.rows.push_back({static_cast<double>(s.index), s.t, s.tau, s.energy, s.l2, s.max, s.dtnorm,
                      s.bound_margin, s.majorant, s.majorant_margin,
                      static_cast<double>(s.newton_iterations)});
  }
  return t;
}

Table convergence_table(const std::vector<ConvergenceRow>& rows) {
  Table t{{"stage", "member", "parameter", "sup_change", "wall_time"}, {}};
  for (const auto& r : rows) {
    double stage = 0;
    if (r.stage == "m") stage = 1;
    if (r.stage == "n") stage = 2;
    if (r.stage == "start") stage = 3;
    t.rows.push_back({stage, static_cast<double>(r.member), r.parameter, r.sup_change, r.wall_time});
  }
  return t;
}

std::string convergence_json(const ConstructionResult& result) {
  using nlohmann::ordered_json;
  auto num = [](double v) -> ordered_json {
    if (!std::isfinite(v)) return format_number(v);
    return v;
  };
  ordered_json j;
  j["path"] = result.path;
  j["tolerance"] = num(result.tolerance);
  j["k_final"] = num(result.k_final);
  j["start_final"] = num(result.start_final);
  j["discrepancy"] = num(result.discrepancy);
  j["output_times"] = result.times;
  ordered_json table = ordered_json::array();
  for (const auto& r : result.table) {
    table.push_back({{"stage", r.stage},
                     {"member", r.member},
                     {"parameter", num(r.parameter)},
                     {"sup_change", num(r.sup_change)},
                     {"wall_time", r.wall_time}});
  }
  j["table"] = table;
  ordered_json runs = ordered_json::array();
  for (const auto& r : result.runs) {
    runs.push_back({{"label", r.label},
                    {"k", num(r.k)},
                    {"start_time", num(r.start_time)},
                    {"steps", r.steps},
                    {"newton_iterations", r.newton_iterations},
                    {"energy_increase", num(r.energy_increase)},
                    {"phi_margin", num(r.phi_margin)},
                    {"majorant_margin", num(r.majorant_margin)},
                    {"derivative_ratio", num(r.derivative_ratio)},
                    {"wall_time", r.wall_time}});
  }
  j["runs"] = runs;
  return j.dump(2) + "\n";
}

}  // namespace parablow
