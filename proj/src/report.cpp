#include "parablow/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace parablow {

using nlohmann::ordered_json;

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "PASS";
    case CheckStatus::fail: return "FAIL";
    case CheckStatus::warn: return "WARN";
  }
  return "?";
}

void CheckRecord::resolve(bool ok) {
  if (ok) {
    status = CheckStatus::pass;
  } else {
    status = warning_only ? CheckStatus::warn : CheckStatus::fail;
  }
}

bool VerificationReport::overall() const {
  if (checks.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.passed(); });
}

namespace {

ordered_json num(double v) {
  if (!std::isfinite(v)) return format_number(v);
  return v;
}

double from_json(const ordered_json& v) {
  if (v.is_number()) return v.get<double>();
  const std::string s = v.get<std::string>();
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  throw Error(ErrorCode::io_error, "bad number '" + s + "' in report");
}

std::string fixed_width(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

std::string short_number(double v) {
  if (!std::isfinite(v)) return format_number(v);
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

std::string report_json(const VerificationReport& report) {
  ordered_json j;
  j["suite"] = report.suite;
  j["seed"] = report.seed;
  j["overall"] = report.overall() ? "pass" : "fail";
  j["wall_time"] = report.wall_time;
  ordered_json checks = ordered_json::array();
  for (const auto& c : report.checks) {
    ordered_json d = ordered_json::object();
    for (const auto& [k, v] : c.details) d[k] = num(v);
    checks.push_back({{"id", c.id},
                      {"name", c.name},
                      {"anchor", c.anchor},
                      {"measured", num(c.measured)},
                      {"comparison", c.comparison},
                      {"tolerance", num(c.tolerance)},
                      {"status", std::string(to_string(c.status))},
                      {"warning_only", c.warning_only},
                      {"details", d},
                      {"note", c.note},
                      {"series", "check_" + c.id + ".csv"},
                      {"wall_time", c.wall_time}});
  }
  j["checks"] = checks;
  return j.dump(2) + "\n";
}

std::string report_text(const VerificationReport& report) {
  std::vector<std::array<std::string, 6>> rows;
  rows.push_back({"id", "check", "measured", "tolerance", "status", "anchor"});
  for (const auto& c : report.checks) {
    rows.push_back({c.id, c.name, short_number(c.measured), c.comparison + " " + short_number(c.tolerance),
                    std::string(to_string(c.status)), c.anchor});
  }
  std::array<std::size_t, 6> width{};
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < 6; ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::string out = "suite: " + report.suite + "  seed: " + std::to_string(report.seed) + "\n\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    std::string line;
    for (std::size_t i = 0; i < 6; ++i) line += (i ? "  " : "") + (i < 5 ? fixed_width(rows[k][i], width[i]) : rows[k][i]);
    out += line + "\n";
    if (k == 0) out += std::string(line.size(), '-') + "\n";
  }
  out += "\noverall: " + std::string(report.overall() ? "PASS" : "FAIL") + "\n";
  for (const auto& c : report.checks) {
    if (!c.note.empty()) out += c.id + ": " + c.note + "\n";
  }
  return out;
}

std::vector<std::filesystem::path> emit_report(const VerificationReport& report,
                                               const std::filesystem::path& dir) {
  if (report.checks.empty())
    throw Error(ErrorCode::invalid_argument, "at least one check is required in a report");
  std::set<std::string> ids;
  for (const auto& c : report.checks) {
    if (!ids.insert(c.id).second) throw Error(ErrorCode::invalid_argument, "check " + c.id + " appears twice");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  written.push_back(dir / "report.json");
  write_text(written.back(), report_json(report));
  written.push_back(dir / "report.txt");
  write_text(written.back(), report_text(report));
  for (const auto& c : report.checks) {
    written.push_back(dir / ("check_" + c.id + ".csv"));
    write_csv(written.back(), c.series);
  }
  return written;
}

VerificationReport load_report(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "file not found: " + file.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::io_error, "cannot parse " + file.string() + ": " + e.what());
  }
  VerificationReport r;
  try {
    r.suite = j.at("suite").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.wall_time = j.at("wall_time").get<double>();
    for (const auto& c : j.at("checks")) {
      CheckRecord rec;
      rec.id = c.at("id").get<std::string>();
      rec.name = c.at("name").get<std::string>();
      rec.anchor = c.at("anchor").get<std::string>();
      rec.measured = from_json(c.at("measured"));
      rec.comparison = c.at("comparison").get<std::string>();
      rec.tolerance = from_json(c.at("tolerance"));
      const std::string s = c.at("status").get<std::string>();
      rec.status = s == "PASS" ? CheckStatus::pass : s == "WARN" ? CheckStatus::warn : CheckStatus::fail;
      rec.warning_only = c.at("warning_only").get<bool>();
      rec.note = c.at("note").get<std::string>();
      rec.wall_time = c.at("wall_time").get<double>();
      for (const auto& [k, v] : c.at("details").items()) rec.details.emplace_back(k, from_json(v));
      r.checks.push_back(std::move(rec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io_error, "malformed report " + file.string() + ": " + e.what());
  }
  return r;
}

}  // namespace parablow
