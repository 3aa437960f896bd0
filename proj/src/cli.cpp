#include "parablow/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <limits>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "parablow/report.hpp"
#include "parablow/suite.hpp"

namespace parablow {
namespace {

namespace fs = std::filesystem;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> solve_times(const RunConfig& cfg) {
  std::vector<double> out;
  for (double t : cfg.construction.output_times) {
    if (t < cfg.problem.horizon) out.push_back(t);
  }
  out.push_back(cfg.problem.horizon);
  return out;
}

fs::path resolve_out(const std::string& flag, const RunConfig* cfg) {
  if (const char* env = std::getenv("PARABLOW_OUT"); env && *env) return env;
  if (!flag.empty()) return flag;
  if (cfg) return cfg->out_dir;
  return "parablow-out";
}

int run_solve(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  const ProblemSpec& p = cfg.problem;
  double k = p.initial.k;
  if (p.initial.mode == InitialData::Mode::blow_up)
    k = p.initial.k_sequence.empty() ? 4.0 * phi_q(p.q, cfg.construction.stepper.tau0) : p.initial.k_sequence.front();
  const GridPtr grid = build_grid(p.domain, cfg.construction.h);
  const auto times = solve_times(cfg);
  const Trajectory tr = evolve(Field::constant_interior(grid, k), p, cfg.construction.stepper, times);
  write_csv(out_dir / "trajectory.csv", snapshot_table(tr));
  write_csv(out_dir / "diagnostics.csv", diagnostics_table(tr));
  const RunSummary s = summarize_trajectory(tr, "solve", k, 0.0);
  out << "solve: " << p.domain.describe() << " q=" << format_number(p.q) << " k=" << format_number(k)
      << " nodes=" << grid->interior_count() << " steps=" << s.steps
      << " newton=" << s.newton_iterations << "\n"
      << "  max energy increase " << format_number(s.energy_increase) << ", phi margin "
      << format_number(s.phi_margin) << ", majorant margin " << format_number(s.majorant_margin) << "\n"
      << "  wrote " << (out_dir / "trajectory.csv").string() << " and diagnostics.csv\n";
  return 0;
}

std::string short_name(const std::string& path) {
  if (path == "minimal-exhaustion") return "minimal";
  if (path == "maximal-truncation") return "maximal";
  return "lateral";
}

int run_construct(const RunConfig& cfg, std::vector<std::string> paths, bool compare,
                  const fs::path& out_dir, std::ostream& out) {
  if (paths.empty()) paths = cfg.paths;
  std::vector<std::string> unique;
  for (const auto& p : paths) {
    if (p != "minimal" && p != "maximal" && p != "lateral") throw UsageError("unknown path '" + p + "'");
    if (std::find(unique.begin(), unique.end(), p) == unique.end()) unique.push_back(p);
  }
  // minimal before maximal so the maximal ladder can start at the minimal k and the
  // two sequences stay ordered
  std::stable_sort(unique.begin(), unique.end(), [](const std::string& a, const std::string& b) {
    auto rank = [](const std::string& s) { return s == "minimal" ? 0 : s == "maximal" ? 1 : 2; };
    return rank(a) < rank(b);
  });
  std::vector<ConstructionResult> results;
  for (const auto& p : unique) {
    ConstructionConfig c = cfg.construction;
    if (p == "minimal") {
      results.push_back(construct_minimal(cfg.problem, c.exhaustion, c));
    } else if (p == "maximal") {
      if (!results.empty()) c.k_initial = std::max(c.k_initial, results.front().k_final);
      results.push_back(construct_maximal(cfg.problem, c));
    } else {
      results.push_back(construct_lateral(cfg.problem, c));
    }
    const auto& r = results.back();
    const std::string name = short_name(r.path);
    write_csv(out_dir / (name + "_fields.csv"), field_table(r.times, r.fields));
    write_csv(out_dir / (name + "_convergence.csv"), convergence_table(r.table));
    write_text(out_dir / (name + "_convergence.json"), convergence_json(r));
    out << name << ": k_final=" << format_number(r.k_final) << " table rows=" << r.table.size()
        << " runs=" << r.runs.size();
    if (!std::isnan(r.discrepancy)) out << " schedules A/B=" << format_number(r.discrepancy);
    out << "\n";
  }
  if (!compare) return 0;
  if (results.size() < 2) throw UsageError("--compare needs at least two paths");
  Table t{{"a", "b", "t", "relative_sup_difference"}, {}};
  out << "coincidence (max over probes of |a-b|/b)\n";
  out << std::left << std::setw(10) << "a" << std::setw(10) << "b" << std::setw(10) << "t" << "difference\n";
  const double lo = cfg.construction.window_lo, hi = cfg.construction.window_hi;
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (std::size_t j = i + 1; j < results.size(); ++j) {
      const auto& a = results[i];
      const auto& b = results[j];
      if (!same_grid(*a.grid, *b.grid)) throw Error(ErrorCode::grid_mismatch, "paths live on different grids");
      for (std::size_t n = 0; n < a.times.size(); ++n) {
        const double time = a.times[n];
        if (time < lo - 1e-12 || time > hi + 1e-12) continue;
        const Field& fb = b.at(time);
        double worst = 0.0;
        for (std::size_t node : a.probes) {
          const double d = std::abs(a.fields[n][node] - fb[node]);
          if (d > 0.0) worst = std::max(worst, d / std::abs(fb[node]));
        }
        t.rows.push_back({double(i), double(j), time, worst});
        out << std::left << std::setw(10) << short_name(a.path) << std::setw(10) << short_name(b.path)
            << std::setw(10) << format_number(time) << format_number(worst) << "\n";
      }
    }
  }
  write_csv(out_dir / "coincidence.csv", t);
  return 0;
}

int run_verify(SuiteTier tier, std::uint64_t seed, const fs::path& out_dir, std::ostream& out) {
  SuiteOptions opt;
  opt.tier = tier;
  opt.seed = seed;
  opt.log = [&out](const std::string& line) { out << line << std::endl; };
  const VerificationReport report = run_suite(opt);
  emit_report(report, out_dir);
  out << "\n" << report_text(report) << "report written to " << (out_dir / "report.json").string() << "\n";
  return report.overall() ? 0 : 1;
}

int run_sweep_cmd(const RunConfig& cfg, int jobs, const fs::path& out_dir, std::ostream& out,
                  std::ostream& err) {
  if (cfg.sweep.empty()) throw UsageError("the config has no sweep axes");
  std::vector<std::string> errors;
  const Table t = run_sweep(cfg, jobs, &errors);
  write_csv(out_dir / "sweep.csv", t);
  out << to_csv(t);
  for (const auto& e : errors) err << e << "\n";
  return errors.empty() ? 0 : 1;
}

int run_report(const fs::path& dir, std::ostream& out) {
  const VerificationReport r = load_report(dir / "report.json");
  out << report_text(r);
  return r.overall() ? 0 : 1;
}

}  // namespace

Table run_sweep(const RunConfig& cfg, int jobs, std::vector<std::string>* errors) {
  const auto axis = [](const std::vector<double>& v, double fallback) {
    return v.empty() ? std::vector<double>{fallback} : v;
  };
  const auto qs = axis(cfg.sweep.q, cfg.problem.q);
  const auto hs = axis(cfg.sweep.h, cfg.construction.h);
  const auto taus = axis(cfg.sweep.tau0, cfg.construction.stepper.tau0);
  const auto lambdas = axis(cfg.sweep.lambda, kNaN);

  struct Member {
    double q, h, tau0, lambda;
  };
  std::vector<Member> members;
  for (double q : qs)
    for (double h : hs)
      for (double tau : taus)
        for (double l : lambdas) members.push_back({q, h, tau, l});

  Table t{{"q", "h", "tau0", "lambda", "k_final", "phi_margin", "cq_deviation", "scaling_deviation", "status"}, {}};
  t.rows.assign(members.size(), {});
  std::vector<std::string> messages(members.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < members.size(); i = next++) {
      const Member& m = members[i];
      RunConfig local = cfg;  // private copy per member
      local.problem.q = m.q;
      local.construction.h = m.h;
      local.construction.stepper.tau0 = m.tau0;
      std::vector<double> row{m.q, m.h, m.tau0, m.lambda, kNaN, kNaN, kNaN, kNaN, 0.0};
      try {
        const ConstructionResult r = local.problem.lateral.is_zero()
                                         ? construct_maximal(local.problem, local.construction)
                                         : construct_lateral(local.problem, local.construction);
        row[4] = r.k_final;
        double phi = -1.0;
        for (const auto& s : r.runs) {
          if (s.zero_lateral) phi = std::max(phi, s.phi_margin);
        }
        row[5] = phi;
        if (r.times.front() >= 10.0 * m.tau0 && !r.probes.empty())
          row[6] = fit_initial_asymptote(r, m.q, r.probes, m.tau0).deviation;
        if (!std::isnan(m.lambda))
          row[7] = check_scaling_invariance(local.problem, m.lambda, m.h, m.h / m.lambda, local.construction);
      } catch (const std::exception& e) {
        row[8] = 1.0;
        messages[i] = "member " + std::to_string(i) + ": " + e.what();
      }
      t.rows[i] = std::move(row);
    }
  };
  const std::size_t n = std::min<std::size_t>(std::max(jobs, 1), std::max<std::size_t>(members.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (errors) {
    for (auto& m : messages) {
      if (!m.empty()) errors->push_back(std::move(m));
    }
  }
  return t;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"parablow: large solutions of the semilinear heat equation"};
  app.require_subcommand(1);
  std::string config_path, out_flag, suite = "quick";
  std::vector<std::string> paths;
  bool compare = false;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  auto* solve = app.add_subcommand("solve", "one trajectory from the configured initial data");
  solve->add_option("--config", config_path, "JSON config file")->required();
  solve->add_option("--out", out_flag, "output directory");

  auto* construct = app.add_subcommand("construct", "minimal / maximal / lateral constructions");
  construct->add_option("--config", config_path, "JSON config file")->required();
  construct->add_option("--path", paths, "minimal | maximal | lateral (repeatable)")
      ->check(CLI::IsMember({"minimal", "maximal", "lateral"}));
  construct->add_flag("--compare", compare, "emit the pairwise coincidence table");
  construct->add_option("--out", out_flag, "output directory");

  auto* verify = app.add_subcommand("verify", "acceptance suite and report");
  verify->add_option("--suite", suite, "quick | full")->check(CLI::IsMember({"quick", "full"}));
  verify->add_option("--config", config_path, "JSON config supplying the seed");
  verify->add_option("--out", out_flag, "output directory");

  auto* sweep = app.add_subcommand("sweep", "parameter sweep over q, h, tau0, lambda");
  sweep->add_option("--config", config_path, "JSON config file")->required();
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_flag, "output directory");

  auto* report = app.add_subcommand("report", "print a stored verification report");
  report->add_option("--out", out_flag, "directory holding report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    RunConfig cfg;
    const bool has_config = !config_path.empty();
    if (has_config) cfg = load_config(config_path);
    const fs::path dir = resolve_out(out_flag, has_config ? &cfg : nullptr);
    if (solve->parsed()) return run_solve(cfg, dir, out);
    if (construct->parsed()) return run_construct(cfg, paths, compare, dir, out);
    if (verify->parsed()) return run_verify(parse_tier(suite), has_config ? cfg.seed : 1, dir, out);
    if (sweep->parsed()) return run_sweep_cmd(cfg, jobs, dir, out, err);
    if (report->parsed()) return run_report(dir, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    const bool usage = e.code() == ErrorCode::config_error || e.code() == ErrorCode::io_error;
    return usage ? 2 : 1;
  }
  return 2;
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace parablow
