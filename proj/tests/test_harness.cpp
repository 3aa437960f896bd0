#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "parablow/cli.hpp"
#include "parablow/suite.hpp"

using namespace parablow;
namespace fs = std::filesystem;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_error) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << text;
  return {};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("parablow-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "parablow");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(int(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::string strip_wall_time(const std::string& json) {
  std::istringstream in(json);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find("wall_time") == std::string::npos) out += line + "\n";
  return out;
}

}  // namespace

TEST(Config, MinimalConfigFillsDefaults) {
  const RunConfig c = parse_config(R"j({"q": 2, "domain": "interval(-1,1)", "path": "maximal"})j");
  EXPECT_EQ(c.problem.q, 2.0);
  EXPECT_TRUE(c.problem.domain == DomainSpec::interval(-1, 1));
  EXPECT_EQ(c.construction.h, 1.0 / 256);
  EXPECT_EQ(c.construction.stepper.tau0, 1e-5);
  EXPECT_EQ(c.construction.stepper.schedule, ScheduleKind::geometric);
  EXPECT_EQ(c.paths, std::vector<std::string>{"maximal"});
}

TEST(Config, FullConfigRoundsTrip) {
  const RunConfig c = parse_config(R"j({
    "q": 3, "domain": {"kind": "ball", "radius": 2, "dim": 2},
    "lateral": {"kind": "tabulated", "times": [0, 1], "values": [0, 2]},
    "initial": {"mode": "blow-up", "k_sequence": [10, 20, 40]},
    "h": 0.125,
    "stepper": {"schedule": "fixed", "tau0": 0.001, "tau_max": 0.001, "backend": "krylov"},
    "output_times": [0.1, 0.2],
    "k_ladder": {"factor": 4, "tolerance": 1e-3},
    "exhaustion": [0.5, 0.25],
    "lateral_schedules": {"window": [0.1, 0.2], "start_max_members": 5},
    "path": ["minimal", "lateral"],
    "out": "somewhere",
    "sweep": {"q": [2, 3], "lambda": [2]},
    "seed": 42
  })j");
  EXPECT_TRUE(c.problem.domain == DomainSpec::ball(2, 2));
  EXPECT_EQ(c.problem.lateral.kind, LateralData::Kind::tabulated);
  EXPECT_EQ(c.problem.initial.k_sequence.size(), 3u);
  EXPECT_EQ(c.construction.stepper.schedule, ScheduleKind::fixed);
  EXPECT_EQ(c.construction.stepper.backend, LinearBackend::krylov);
  EXPECT_EQ(c.construction.k_factor, 4.0);
  EXPECT_EQ(c.construction.exhaustion.parameters.size(), 2u);
  EXPECT_EQ(c.construction.start_max_members, 5u);
  EXPECT_EQ(c.paths.size(), 2u);
  EXPECT_EQ(c.out_dir, "somewhere");
  EXPECT_EQ(c.sweep.q.size(), 2u);
  EXPECT_EQ(c.seed, 42u);
}

TEST(Config, DomainShorthands) {
  EXPECT_TRUE(parse_domain("interval(-1, 1)") == DomainSpec::interval(-1, 1));
  EXPECT_TRUE(parse_domain("ball(1,2)") == DomainSpec::ball(1, 2));
  EXPECT_TRUE(parse_domain("annulus(0.5,1,2)") == DomainSpec::annulus(0.5, 1, 2));
  EXPECT_TRUE(parse_domain("exterior-ball(1,8,2)") == DomainSpec::exterior_ball(1, 8, 2));
  EXPECT_TRUE(parse_domain("periodic-interval(0,1)") == DomainSpec::periodic(0, 1));
  EXPECT_TRUE(parse_domain("rectangle-with-hole(-1,1,-1,1,0,0,0.25)") ==
              DomainSpec::rectangle_with_hole(-1, 1, -1, 1, {0, 0}, 0.25));
  EXPECT_THROW(parse_domain("interval(-1)"), Error);
  EXPECT_THROW(parse_domain("square(1,2)"), Error);
  EXPECT_THROW(parse_domain("interval(a,b)"), Error);
}

TEST(Config, Rejections) {
  EXPECT_NE(config_error(R"j({"q": 1, "domain": "interval(-1,1)"})j").find("invariant-violation"), std::string::npos);
  EXPECT_NE(config_error(R"j({"q": 2, "domain": "interval(-1,1)", "stepsize": 1})j").find("unknown-key: stepsize"),
            std::string::npos);
  EXPECT_NE(config_error(R"j({"q": 2, "domain": "interval(-1,1)", "stepper": {"tau": 1}})j").find("stepper.tau"),
            std::string::npos);
  EXPECT_NE(config_error(R"j({"q": "two", "domain": "interval(-1,1)"})j").find("type-mismatch: q"), std::string::npos);
  EXPECT_NE(config_error(R"j({"q": 2, "domain": "interval(-1,1)", "path": []})j").find("path"), std::string::npos);
  EXPECT_NE(config_error(R"j({"q": 2, "domain": "interval(-1,1)", "sweep": {"q": []}})j").find("sweep.q"),
            std::string::npos);
  EXPECT_NE(config_error(R"j({"q": 2, "domain": "interval(-1,1)", "path": "sideways"})j").find("sideways"),
            std::string::npos);
  const std::string dup = config_error("{\"q\": 2,\n \"domain\": \"interval(-1,1)\",\n \"q\": 3}");
  EXPECT_NE(dup.find("duplicate-key"), std::string::npos);
  EXPECT_NE(dup.find(":3:"), std::string::npos) << dup;
  const std::string bad = config_error("{\"q\": 2,\n\n \"domain\": }");
  EXPECT_NE(bad.find("parse-error"), std::string::npos);
  EXPECT_NE(bad.find(":3:"), std::string::npos) << bad;
}

TEST(Config, MissingFile) {
  try {
    load_config("/nonexistent/missing.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io_error);
    EXPECT_NE(std::string(e.what()).find("file not found"), std::string::npos);
  }
}

TEST(Io, NumbersAreShortestAndLocaleFree) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-2.5e-12), "-2.5e-12");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  Table t{{"a", "b"}, {{1, 0.5}, {2, 0.25}}};
  EXPECT_EQ(to_csv(t), "a,b\n1,0.5\n2,0.25\n");
}

TEST(Report, EmptyReportRejected) {
  VerificationReport r;
  EXPECT_FALSE(r.overall());
  EXPECT_THROW(emit_report(r, scratch("empty")), Error);
}

TEST(Report, FilesAndRoundTrip) {
  VerificationReport r;
  r.suite = "quick";
  CheckRecord a;
  a.id = "C01";
  a.name = "one";
  a.anchor = "x";
  a.measured = 0.5;
  a.tolerance = 1.0;
  a.resolve(true);
  a.series = {{"t", "v"}, {{0, 1}}};
  CheckRecord b = a;
  b.id = "C02";
  b.warning_only = true;
  b.resolve(false);
  r.checks = {a, b};
  EXPECT_TRUE(r.overall());
  const fs::path dir = scratch("report");
  const auto files = emit_report(r, dir);
  EXPECT_EQ(files.size(), 4u);
  for (const auto& f : files) EXPECT_TRUE(fs::exists(f));
  const VerificationReport back = load_report(dir / "report.json");
  ASSERT_EQ(back.checks.size(), 2u);
  EXPECT_EQ(back.checks[1].status, CheckStatus::warn);
  EXPECT_EQ(back.checks[0].measured, 0.5);
  r.checks[0].resolve(false);
  EXPECT_FALSE(r.overall());
}

TEST(Suite, SubsetIsDeterministic) {
  SuiteOptions opt;
  opt.only = {"C01", "C12", "C13"};
  opt.seed = 9;
  const VerificationReport a = run_suite(opt);
  const VerificationReport b = run_suite(opt);
  ASSERT_EQ(a.checks.size(), 3u);
  EXPECT_EQ(strip_wall_time(report_json(a)), strip_wall_time(report_json(b)));
  EXPECT_EQ(a.checks[0].status, CheckStatus::pass);
  EXPECT_EQ(a.checks[1].status, CheckStatus::pass);
  EXPECT_TRUE(a.checks[2].warning_only);
  const fs::path dir = scratch("suite");
  EXPECT_EQ(emit_report(a, dir).size(), 2u + a.checks.size());
  opt.only = {"C99"};
  EXPECT_THROW(run_suite(opt), Error);
}

TEST(Sweep, ThreadCountDoesNotChangeRows) {
  RunConfig c = parse_config(R"j({"q": 2, "domain": "interval(-1,1)", "h": 0.03125,
                                 "output_times": [0.01, 0.1], "sweep": {"q": [2, 3], "tau0": [1e-5, 2e-5]}})j");
  const Table one = run_sweep(c, 1);
  const Table many = run_sweep(c, 4);
  ASSERT_EQ(one.rows.size(), 4u);
  EXPECT_EQ(to_csv(one), to_csv(many));
  for (const auto& row : one.rows) EXPECT_EQ(row.back(), 0.0);
}

TEST(Cli, ExitCodes) {
  std::string out, err;
  EXPECT_EQ(run({}, &out, &err), 2);
  EXPECT_EQ(run({"frobnicate"}, &out, &err), 2);
  EXPECT_EQ(run({"solve", "--config", "missing.cfg"}, &out, &err), 2);
  EXPECT_NE(err.find("file not found"), std::string::npos);
  EXPECT_EQ(run({"verify", "--suite", "huge"}, &out, &err), 2);
  EXPECT_EQ(run({"report", "--out", scratch("nothing").string()}, &out, &err), 2);
  EXPECT_EQ(run({"--help"}, &out, &err), 0);
}

TEST(Cli, SolveAndConstructCompare) {
  const fs::path dir = scratch("cli");
  const fs::path cfg = dir / "c.json";
  std::ofstream(cfg) << R"j({"q": 2, "domain": "interval(-1,1)", "h": 0.03125, "horizon": 0.5,
                           "output_times": [0.01, 0.1, 0.2, 0.5, 1.0], "initial": {"mode": "constant", "k": 3}})j";
  std::string out, err;
  ASSERT_EQ(run({"solve", "--config", cfg.string(), "--out", (dir / "solve").string()}, &out, &err), 0) << err;
  EXPECT_TRUE(fs::exists(dir / "solve" / "trajectory.csv"));
  EXPECT_TRUE(fs::exists(dir / "solve" / "diagnostics.csv"));
  ASSERT_EQ(run({"construct", "--config", cfg.string(), "--path", "minimal", "--path", "maximal", "--compare",
                 "--out", (dir / "cons").string()},
                &out, &err),
            0)
      << err;
  EXPECT_NE(out.find("coincidence"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "cons" / "coincidence.csv"));
  EXPECT_TRUE(fs::exists(dir / "cons" / "minimal_convergence.json"));
  EXPECT_EQ(run({"construct", "--config", cfg.string(), "--path", "maximal", "--compare", "--out",
                 (dir / "one").string()},
                &out, &err),
            2);
}

TEST(Cli, EnvironmentOverridesOut) {
  const fs::path dir = scratch("env");
  const fs::path cfg = dir / "c.json";
  std::ofstream(cfg) << R"j({"q": 2, "domain": "interval(-1,1)", "h": 0.0625, "horizon": 0.1,
                           "initial": {"mode": "constant", "k": 1}})j";
  ::setenv("PARABLOW_OUT", (dir / "from-env").string().c_str(), 1);
  std::string out, err;
  const int code = run({"solve", "--config", cfg.string(), "--out", (dir / "from-flag").string()}, &out, &err);
  ::unsetenv("PARABLOW_OUT");
  EXPECT_EQ(code, 0) << err;
  EXPECT_TRUE(fs::exists(dir / "from-env" / "trajectory.csv"));
  EXPECT_FALSE(fs::exists(dir / "from-flag"));
}
