#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "parablow/constructions.hpp"

namespace parablow {

struct SweepAxes {
  std::vector<double> q;
  std::vector<double> h;
  std::vector<double> tau0;
  std::vector<double> lambda;
  bool empty() const { return q.empty() && h.empty() && tau0.empty() && lambda.empty(); }
};

struct RunConfig {
  ProblemSpec problem;
  ConstructionConfig construction;
  std::vector<std::string> paths{"maximal"};  // minimal | maximal | lateral
  std::string out_dir = "parablow-out";
  SweepAxes sweep;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Parses "interval(-1,1)", "ball(1,2)", "annulus(0.5,1,2)", "exterior-ball(1,8,2)",
/// "periodic-interval(0,1)" and "rectangle-with-hole(x0,x1,y0,y1,cx,cy,r)".
DomainSpec parse_domain(const std::string& text);

/// JSON text -> validated RunConfig. Unknown and duplicate keys, type mismatches and
/// invariant violations raise config-error with the offending field path.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

}  // namespace parablow
