#ifndef OGC_CONFIG_HPP
#define OGC_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ogc/boundary.hpp"
#include "ogc/brake.hpp"
#include "ogc/metric.hpp"
#include "ogc/multiplicity.hpp"
#include "ogc/shooting.hpp"

namespace ogc {

struct LagrangianSpec {
  Potential V;
  double E = 0.5;
  double margin = 0.0;  // <= 0 selects the default 1e-2 (E - min V)
};

/// Everything a CLI run needs, already turned into library objects.
/// Missing keys take the library defaults; see README for the schema.
struct RunConfig {
  std::string name = "run";
  int dim = 2;
  MetricField metric;
  DomainBoundary domain;
  std::optional<LagrangianSpec> lagrangian;

  MultistartConfig multistart;
  ShootConfig scan_shoot;
  int scan_points = 64;
  BrakeConfig brake;

  // find-ogc: chord between these boundary directions
  std::optional<Vec> find_start;
  std::optional<Vec> find_end;
  int flow_iters_find = 2000;

  int strip_paths = 200;
  std::uint64_t seed = 12345;
  int threads = 0;
  std::string output_dir = "out";
  nlohmann::json source;  // the parsed document, echoed into outputs
};

/// Throws ConfigError with a message naming the offending key.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// LagrangianData built on the config metric; throws ConfigError if the config has no lagrangian block.
LagrangianData lagrangian_data(const RunConfig& cfg);

/// Geometry a run works on: the configured disk, or the Jacobi domain (with
/// finer geodesic steps and shot-based OGC acceptance) when the config has a lagrangian block.
struct ProblemGeometry {
  MetricField metric;
  DomainBoundary boundary;
  MultistartConfig multistart;
  bool jacobi = false;
};

ProblemGeometry problem_geometry(const RunConfig& cfg);

}  // namespace ogc

#endif  // OGC_CONFIG_HPP
