#include "parablow/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace parablow {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& kind, const std::string& msg) {
  throw Error(ErrorCode::config_error, kind + ": " + msg);
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

// Walks a JSON object, remembering which keys were consumed so leftovers can be
// reported as unknown.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail("type-mismatch", where() + " must be an object");
  }

  bool has(const char* key) const { return obj_.contains(key); }

  const json* get(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void number(const char* key, double& out) {
    if (const json* v = get(key)) out = as_number(*v, field(key));
  }

  void integer(const char* key, int& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_integer()) fail("type-mismatch", field(key) + " must be an integer");
      out = v->get<int>();
    }
  }

  void boolean(const char* key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) fail("type-mismatch", field(key) + " must be a boolean");
      out = v->get<bool>();
    }
  }

  void string(const char* key, std::string& out) {
    if (const json* v = get(key)) {
      if (!v->is_string()) fail("type-mismatch", field(key) + " must be a string");
      out = v->get<std::string>();
    }
  }

  void numbers(const char* key, std::vector<double>& out) {
    if (const json* v = get(key)) out = as_numbers(*v, field(key));
  }

  Reader child(const char* key) {
    seen_.insert(key);
    return Reader(obj_.at(key), field(key));
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) fail("unknown-key", field(it.key()));
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  static double as_number(const json& v, const std::string& name) {
    if (!v.is_number()) fail("type-mismatch", name + " must be a number");
    return v.get<double>();
  }

  static std::vector<double> as_numbers(const json& v, const std::string& name) {
    if (!v.is_array()) fail("type-mismatch", name + " must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i)
      out.push_back(as_number(v[i], name + "[" + std::to_string(i) + "]"));
    return out;
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

DomainSpec read_domain(const json& v, const std::string& name) {
  if (v.is_string()) {
    try {
      return parse_domain(v.get<std::string>());
    } catch (const Error& e) {
      fail("invariant-violation", name + ": " + e.what());
    }
  }
  Reader r(v, name);
  std::string kind;
  r.string("kind", kind);
  double a = -1, b = 1, radius = 1, inner = 0.5, outer = 1, x0 = -1, x1 = 1, y0 = -1, y1 = 1, hr = 0.25;
  int dim = 1;
  std::vector<double> center{0.0, 0.0};
  r.number("a", a);
  r.number("b", b);
  r.number("radius", radius);
  r.number("inner", inner);
  r.number("outer", outer);
  r.integer("dim", dim);
  r.number("x0", x0);
  r.number("x1", x1);
  r.number("y0", y0);
  r.number("y1", y1);
  r.numbers("center", center);
  r.number("hole_radius", hr);
  r.finish();
  try {
    if (kind == "interval") return DomainSpec::interval(a, b);
    if (kind == "periodic-interval") return DomainSpec::periodic(a, b);
    if (kind == "ball") return DomainSpec::ball(radius, dim);
    if (kind == "annulus") return DomainSpec::annulus(inner, outer, dim);
    if (kind == "exterior-ball") return DomainSpec::exterior_ball(inner, outer, dim);
    if (kind == "rectangle-with-hole") {
      if (center.size() != 2) fail("type-mismatch", name + ".center must have two entries");
      return DomainSpec::rectangle_with_hole(x0, x1, y0, y1, {center[0], center[1]}, hr);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config_error) throw;
    fail("invariant-violation", name + ": " + e.what());
  }
  fail("invariant-violation", name + ".kind '" + kind + "' is not a known domain");
}

LateralData read_lateral(const json& v, const std::string& name) {
  if (v.is_number()) return LateralData::constant(v.get<double>());
  Reader r(v, name);
  std::string kind = "zero";
  double value = 0.0;
  std::vector<double> times, values;
  r.string("kind", kind);
  r.number("value", value);
  r.numbers("times", times);
  r.numbers("values", values);
  r.finish();
  if (kind == "zero") return LateralData::zero();
  if (kind == "constant") return LateralData::constant(value);
  if (kind == "tabulated") return LateralData::tabulated(times, values);
  fail("invariant-violation", name + ".kind '" + kind + "' is not zero|constant|tabulated");
}

InitialData read_initial(const json& v, const std::string& name) {
  Reader r(v, name);
  InitialData d;
  std::string mode = "blow-up";
  r.string("mode", mode);
  r.number("k", d.k);
  r.numbers("k_sequence", d.k_sequence);
  r.numbers("start_times", d.start_times);
  r.finish();
  if (mode == "blow-up") {
    d.mode = InitialData::Mode::blow_up;
  } else if (mode == "constant") {
    d.mode = InitialData::Mode::constant;
  } else {
    fail("invariant-violation", name + ".mode '" + mode + "' is not blow-up|constant");
  }
  return d;
}

void read_stepper(Reader r, StepperConfig& s) {
  std::string schedule = s.schedule == ScheduleKind::geometric ? "geometric" : "fixed";
  std::string backend = s.backend == LinearBackend::automatic ? "automatic" : "krylov";
  r.string("schedule", schedule);
  r.number("tau0", s.tau0);
  r.number("rho", s.rho);
  r.number("tau_max", s.tau_max);
  r.number("newton_atol", s.newton_atol);
  r.number("newton_rtol", s.newton_rtol);
  r.integer("newton_max_iter", s.newton_max_iter);
  r.number("damping", s.damping);
  r.number("linear_tol", s.linear_tol);
  r.integer("linear_max_iter", s.linear_max_iter);
  r.string("backend", backend);
  r.finish();
  if (schedule == "geometric") {
    s.schedule = ScheduleKind::geometric;
  } else if (schedule == "fixed") {
    s.schedule = ScheduleKind::fixed;
  } else {
    fail("invariant-violation", "stepper.schedule must be fixed|geometric");
  }
  if (backend == "automatic") {
    s.backend = LinearBackend::automatic;
  } else if (backend == "krylov") {
    s.backend = LinearBackend::krylov;
  } else {
    fail("invariant-violation", "stepper.backend must be automatic|krylov");
  }
}

std::vector<std::string> read_paths(const json& v) {
  std::vector<std::string> out;
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) fail("type-mismatch", "path[" + std::to_string(i) + "] must be a string");
      out.push_back(v[i].get<std::string>());
    }
  } else {
    fail("type-mismatch", "path must be a string or an array of strings");
  }
  return out;
}

// Rejects duplicate keys while parsing; nlohmann would otherwise keep the last one.
json parse_strict(const std::string& text, const std::string& origin) {
  std::vector<std::set<std::string>> scopes;
  std::vector<std::string> names;
  std::string pending;
  std::size_t search_from = 0;
  auto cb = [&](int, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        scopes.emplace_back();
        names.push_back(pending);
        pending.clear();
        break;
      case json::parse_event_t::object_end:
        scopes.pop_back();
        names.pop_back();
        break;
      case json::parse_event_t::key: {
        const std::string key = parsed.get<std::string>();
        const std::size_t at = text.find("\"" + key + "\"", search_from);
        if (at != std::string::npos) search_from = at + key.size() + 2;
        if (!scopes.back().insert(key).second) {
          std::string path;
          for (const auto& n : names) {
            if (!n.empty()) path += n + ".";
          }
          const auto [line, col] = line_column(text, at == std::string::npos ? text.size() : at);
          fail("duplicate-key", origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                    ": key '" + path + key + "' appears twice");
        }
        pending = key;
        break;
      }
      default:
        break;
    }
    return true;
  };
  try {
    return json::parse(text, cb);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    fail("parse-error", origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                            e.what());
  }
}

}  // namespace

DomainSpec parse_domain(const std::string& text) {
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open ||
      !trim(text.substr(close + 1)).empty())
    throw Error(ErrorCode::config_error, "invariant-violation: malformed domain '" + text + "'");
  const std::string name = trim(text.substr(0, open));
  std::vector<double> args;
  std::stringstream ss(text.substr(open + 1, close - open - 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size())
      throw Error(ErrorCode::config_error, "type-mismatch: domain argument '" + item + "' is not a number");
    args.push_back(v);
  }
  auto need = [&](std::size_t n) {
    if (args.size() != n)
      throw Error(ErrorCode::config_error, "invariant-violation: " + name + " takes " + std::to_string(n) +
                                               " arguments, got " + std::to_string(args.size()));
  };
  auto dim = [](double d) { return static_cast<int>(d); };
  if (name == "interval") {
    need(2);
    return DomainSpec::interval(args[0], args[1]);
  }
  if (name == "periodic-interval") {
    need(2);
    return DomainSpec::periodic(args[0], args[1]);
  }
  if (name == "ball") {
    need(2);
    return DomainSpec::ball(args[0], dim(args[1]));
  }
  if (name == "annulus") {
    need(3);
    return DomainSpec::annulus(args[0], args[1], dim(args[2]));
  }
  if (name == "exterior-ball") {
    need(3);
    return DomainSpec::exterior_ball(args[0], args[1], dim(args[2]));
  }
  if (name == "rectangle-with-hole") {
    need(7);
    return DomainSpec::rectangle_with_hole(args[0], args[1], args[2], args[3], {args[4], args[5]}, args[6]);
  }
  throw Error(ErrorCode::config_error, "invariant-violation: unknown domain '" + name + "'");
}

void RunConfig::validate() const {
  try {
    problem.validate();
    construction.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config_error) throw;
    fail("invariant-violation", e.what());
  }
  if (paths.empty()) fail("invariant-violation", "at least one construction path is required");
  for (const auto& p : paths) {
    if (p != "minimal" && p != "maximal" && p != "lateral")
      fail("invariant-violation", "path '" + p + "' is not minimal|maximal|lateral");
  }
  if (out_dir.empty()) fail("invariant-violation", "out must not be empty");
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  const json root = parse_strict(text, origin);
  RunConfig cfg;
  Reader r(root, "");
  auto& c = cfg.construction;

  if (!r.has("q")) fail("invariant-violation", "q is required");
  r.number("q", cfg.problem.q);
  if (!(cfg.problem.q > 1.0)) fail("invariant-violation", "q must be > 1");
  if (const json* d = r.get("domain")) {
    cfg.problem.domain = read_domain(*d, "domain");
  } else {
    fail("invariant-violation", "domain is required");
  }
  try {
    if (const json* v = r.get("lateral")) cfg.problem.lateral = read_lateral(*v, "lateral");
    if (const json* v = r.get("initial")) cfg.problem.initial = read_initial(*v, "initial");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config_error) throw;
    fail("invariant-violation", e.what());
  }
  r.number("horizon", cfg.problem.horizon);
  r.number("h", c.h);
  if (r.has("stepper")) read_stepper(r.child("stepper"), c.stepper);
  r.numbers("output_times", c.output_times);
  r.number("probe_fraction", c.probe_fraction);
  if (r.has("k_ladder")) {
    Reader k = r.child("k_ladder");
    k.number("initial", c.k_initial);
    k.number("factor", c.k_factor);
    k.number("max", c.k_max);
    k.number("tolerance", c.k_tolerance);
    k.finish();
  }
  r.numbers("exhaustion", c.exhaustion.parameters);
  r.numbers("truncation", c.truncation.parameters);
  if (r.has("lateral_schedules")) {
    Reader s = r.child("lateral_schedules");
    int members = static_cast<int>(c.start_max_members);
    std::vector<double> window{c.window_lo, c.window_hi};
    s.number("start_initial", c.start_initial);
    s.number("start_tolerance", c.start_tolerance);
    s.integer("start_max_members", members);
    s.number("direct_start_time", c.direct_start_time);
    s.numbers("window", window);
    s.number("tolerance", c.schedules_tolerance);
    s.boolean("throw_on_disagreement", c.throw_on_disagreement);
    s.finish();
    if (members < 1) fail("invariant-violation", "lateral_schedules.start_max_members must be >= 1");
    if (window.size() != 2 || !(window[0] < window[1]))
      fail("invariant-violation", "lateral_schedules.window must be [lo, hi] with lo < hi");
    c.start_max_members = static_cast<std::size_t>(members);
    c.window_lo = window[0];
    c.window_hi = window[1];
  }
  if (r.has("elliptic")) {
    Reader e = r.child("elliptic");
    e.number("k_initial", c.elliptic_k_initial);
    e.number("tolerance", c.elliptic_tolerance);
    e.number("k_max", c.elliptic_k_max);
    e.finish();
  }
  if (const json* p = r.get("path")) cfg.paths = read_paths(*p);
  r.string("out", cfg.out_dir);
  if (r.has("sweep")) {
    Reader s = r.child("sweep");
    const char* axes[] = {"q", "h", "tau0", "lambda"};
    std::vector<double>* slots[] = {&cfg.sweep.q, &cfg.sweep.h, &cfg.sweep.tau0, &cfg.sweep.lambda};
    for (int i = 0; i < 4; ++i) {
      if (s.has(axes[i])) {
        s.numbers(axes[i], *slots[i]);
        if (slots[i]->empty()) fail("invariant-violation", s.field(axes[i]) + " must be a non-empty list");
      }
    }
    s.finish();
    if (cfg.sweep.empty()) fail("invariant-violation", "sweep needs at least one axis");
    for (double q : cfg.sweep.q) {
      if (!(q > 1.0)) fail("invariant-violation", "sweep.q entries must be > 1");
    }
  }
  if (const json* s = r.get("seed")) {
    if (!s->is_number_unsigned()) fail("type-mismatch", "seed must be a non-negative integer");
    cfg.seed = s->get<std::uint64_t>();
  }
  r.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "file not found: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace parablow
