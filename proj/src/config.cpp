#include "ogc/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace ogc {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + key + "' in " + where + " has the wrong type");
  }
}

double positive(const json& obj, const std::string& key, const std::string& where, double fallback) {
  const double v = get<double>(obj, key, where, fallback);
  if (!(v > 0.0)) throw ConfigError("key '" + key + "' in " + where + " must be positive");
  return v;
}

int positive_int(const json& obj, const std::string& key, const std::string& where, int fallback) {
  const int v = get<int>(obj, key, where, fallback);
  if (v <= 0) throw ConfigError("key '" + key + "' in " + where + " must be a positive integer");
  return v;
}

Vec vector_of(const json& obj, const std::string& key, const std::string& where, int dim) {
  const auto v = get<std::vector<double>>(obj, key, where, {});
  if (static_cast<int>(v.size()) != dim)
    throw ConfigError("key '" + key + "' in " + where + " must have " + std::to_string(dim) + " entries");
  return Eigen::Map<const Vec>(v.data(), dim);
}

RadialProfile parse_profile(const json& p) {
  check_keys(p, "metric.profile", {"kind", "coeffs"});
  const auto kind = get<std::string>(p, "kind", "metric.profile", "polynomial");
  const auto coeffs = get<std::vector<double>>(p, "coeffs", "metric.profile", {1.0});
  if (coeffs.empty()) throw ConfigError("metric.profile.coeffs is empty");
  if (kind == "polynomial") return RadialProfile::polynomial(coeffs);
  if (kind == "exp_quadratic") return RadialProfile::exp_quadratic(coeffs[0]);
  throw ConfigError("unknown metric.profile.kind '" + kind + "'");
}

MetricField parse_metric(const json& m, int dim) {
  check_keys(m, "metric", {"family", "dim", "profile", "perturbation"});
  if (m.contains("dim") && get<int>(m, "dim", "metric", dim) != dim) throw ConfigError("metric.dim disagrees with dim");
  const auto family = get<std::string>(m, "family", "metric", "euclidean");
  if (family == "euclidean") return MetricField::euclidean(dim);
  const RadialProfile profile = m.contains("profile") ? parse_profile(m.at("profile")) : RadialProfile{};
  if (family == "radial_conformal") return MetricField::radial_conformal(dim, profile);
  if (family == "perturbed_radial") {
    if (!m.contains("perturbation")) throw ConfigError("metric.perturbation is required for perturbed_radial");
    const json& p = m.at("perturbation");
    check_keys(p, "metric.perturbation", {"kind", "amplitude"});
    Perturbation pert;
    const auto kind = get<std::string>(p, "kind", "metric.perturbation", "skew");
    if (kind == "skew") {
      pert.kind = Perturbation::Kind::Skew;
    } else if (kind == "quadrupole") {
      pert.kind = Perturbation::Kind::Quadrupole;
    } else {
      throw ConfigError("unknown metric.perturbation.kind '" + kind + "'");
    }
    pert.amplitude = get<double>(p, "amplitude", "metric.perturbation", 0.0);
    return MetricField::perturbed_radial(dim, profile, pert);
  }
  throw ConfigError("unknown metric.family '" + family + "'");
}

DomainBoundary parse_domain(const json& d, int dim) {
  check_keys(d, "domain", {"kind", "semi_axes", "delta0"});
  const auto kind = get<std::string>(d, "kind", "domain", "ball");
  DomainBoundary b;
  if (kind == "ball") {
    b = DomainBoundary::unit_ball(dim);
  } else if (kind == "ellipsoid") {
    const auto axes = get<std::vector<double>>(d, "semi_axes", "domain", {});
    if (static_cast<int>(axes.size()) != dim) throw ConfigError("domain.semi_axes must have dim entries");
    for (double a : axes)
      if (!(a > 0.0)) throw ConfigError("domain.semi_axes must be positive");
    b = DomainBoundary::ellipsoid(axes);
  } else {
    throw ConfigError("unknown domain.kind '" + kind + "'");
  }
  b.delta0 = positive(d, "delta0", "domain", b.delta0);
  return b;
}

LagrangianSpec parse_lagrangian(const json& l) {
  check_keys(l, "lagrangian", {"potential", "eps", "energy", "margin"});
  LagrangianSpec s;
  const auto kind = get<std::string>(l, "potential", "lagrangian", "harmonic");
  const double eps = get<double>(l, "eps", "lagrangian", 0.0);
  if (kind == "harmonic") {
    s.V = Potential::harmonic();
  } else if (kind == "cubic") {
    s.V = Potential::cubic(eps);
  } else if (kind == "zero") {
    s.V = Potential::zero();
  } else {
    throw ConfigError("unknown lagrangian.potential '" + kind + "'");
  }
  s.E = get<double>(l, "energy", "lagrangian", 0.5);
  s.margin = get<double>(l, "margin", "lagrangian", 0.0);
  if (s.margin < 0.0) throw ConfigError("lagrangian.margin must be nonnegative");
  return s;
}

void parse_solver(const json& s, RunConfig& cfg) {
  const std::string w = "solver";
  check_keys(s, w,
             {"n", "grid", "max_starts", "flow_iters", "hausdorff_rel", "energy_tol_rel", "K0_samples", "shoot_step",
              "tan_tol", "orth_tol", "max_len", "refine_tol", "refine_iters", "scan_points", "find_flow_iters",
              "strip_paths"});
  MultistartConfig& mc = cfg.multistart;
  mc.n = positive_int(s, "n", w, mc.n);
  mc.grid = positive_int(s, "grid", w, mc.grid);
  mc.max_starts = get<int>(s, "max_starts", w, mc.max_starts);
  if (mc.max_starts < 0) throw ConfigError("solver.max_starts must be nonnegative");
  mc.flow_iters = positive_int(s, "flow_iters", w, mc.flow_iters);
  mc.hausdorff_rel = positive(s, "hausdorff_rel", w, mc.hausdorff_rel);
  mc.energy_tol_rel = positive(s, "energy_tol_rel", w, mc.energy_tol_rel);
  mc.K0_samples = positive_int(s, "K0_samples", w, mc.K0_samples);
  ShootConfig& sh = mc.refine.shoot;
  sh.step = positive(s, "shoot_step", w, sh.step);
  sh.tan_tol = positive(s, "tan_tol", w, sh.tan_tol);
  sh.orth_tol = positive(s, "orth_tol", w, sh.orth_tol);
  sh.max_len = positive(s, "max_len", w, sh.max_len);
  mc.refine.tol = positive(s, "refine_tol", w, mc.refine.tol);
  mc.refine.max_iters = positive_int(s, "refine_iters", w, mc.refine.max_iters);
  cfg.scan_shoot = sh;
  cfg.scan_shoot.path_nodes = mc.n;
  cfg.scan_points = positive_int(s, "scan_points", w, cfg.scan_points);
  if (cfg.scan_points < 16) throw ConfigError("solver.scan_points must be at least 16");
  cfg.flow_iters_find = positive_int(s, "find_flow_iters", w, cfg.flow_iters_find);
  cfg.strip_paths = positive_int(s, "strip_paths", w, cfg.strip_paths);
}

void parse_brake(const json& s, BrakeConfig& b) {
  const std::string w = "brake";
  check_keys(s, w,
             {"brake_tol", "deviation_tol", "energy_tol", "drift_per_time", "initial_step", "max_time", "max_newton",
              "newton_tol", "jacobi_shoot_step", "jacobi_sample_step"});
  b.brake_tol = positive(s, "brake_tol", w, b.brake_tol);
  b.deviation_tol = positive(s, "deviation_tol", w, b.deviation_tol);
  b.energy_tol = positive(s, "energy_tol", w, b.energy_tol);
  b.drift_per_time = positive(s, "drift_per_time", w, b.drift_per_time);
  b.initial_step = positive(s, "initial_step", w, b.initial_step);
  b.max_time = positive(s, "max_time", w, b.max_time);
  b.max_newton = positive_int(s, "max_newton", w, b.max_newton);
  b.newton_tol = positive(s, "newton_tol", w, b.newton_tol);
  b.jacobi_shoot_step = positive(s, "jacobi_shoot_step", w, b.jacobi_shoot_step);
  b.jacobi_sample_step = positive(s, "jacobi_sample_step", w, b.jacobi_sample_step);
}

}  // namespace

RunConfig parse_config(const nlohmann::json& doc) {
  check_keys(doc, "config",
             {"name", "dim", "metric", "domain", "lagrangian", "solver", "brake", "find_ogc", "seed", "threads",
              "output_dir"});
  RunConfig cfg;
  cfg.source = doc;
  cfg.name = get<std::string>(doc, "name", "config", cfg.name);
  const json no_metric = json::object();
  const json& metric_block = doc.contains("metric") ? doc.at("metric") : no_metric;
  const int metric_dim = metric_block.is_object() ? get<int>(metric_block, "dim", "metric", 2) : 2;
  cfg.dim = get<int>(doc, "dim", "config", metric_dim);
  if (cfg.dim < 2 || cfg.dim > 3) throw ConfigError("dim must be 2 or 3");
  cfg.metric = parse_metric(doc.value("metric", json::object()), cfg.dim);
  cfg.domain = parse_domain(doc.value("domain", json::object()), cfg.dim);
  if (doc.contains("lagrangian")) cfg.lagrangian = parse_lagrangian(doc.at("lagrangian"));
  cfg.scan_shoot.path_nodes = cfg.multistart.n;
  if (doc.contains("solver")) parse_solver(doc.at("solver"), cfg);
  if (doc.contains("brake")) parse_brake(doc.at("brake"), cfg.brake);
  if (doc.contains("find_ogc")) {
    const json& f = doc.at("find_ogc");
    check_keys(f, "find_ogc", {"start", "end"});
    cfg.find_start = vector_of(f, "start", "find_ogc", cfg.dim);
    cfg.find_end = vector_of(f, "end", "find_ogc", cfg.dim);
    if (!(cfg.find_start->norm() > 0.0) || !(cfg.find_end->norm() > 0.0))
      throw ConfigError("find_ogc directions must be nonzero");
  }
  cfg.seed = get<std::uint64_t>(doc, "seed", "config", cfg.seed);
  cfg.threads = get<int>(doc, "threads", "config", 0);
  if (cfg.threads < 0) throw ConfigError("threads must be nonnegative");
  cfg.multistart.threads = cfg.threads;
  cfg.output_dir = get<std::string>(doc, "output_dir", "config", cfg.output_dir);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
  return parse_config(doc);
}

LagrangianData lagrangian_data(const RunConfig& cfg) {
  if (!cfg.lagrangian) throw ConfigError("config has no lagrangian block");
  return {cfg.metric, cfg.lagrangian->V, cfg.lagrangian->E};
}

ProblemGeometry problem_geometry(const RunConfig& cfg) {
  ProblemGeometry p;
  p.multistart = cfg.multistart;
  if (!cfg.lagrangian) {
    p.metric = cfg.metric;
    p.boundary = cfg.domain;
    return p;
  }
  const JacobiDomain J = jacobi_metric(lagrangian_data(cfg), cfg.lagrangian->margin);
  p.metric = J.metric;
  p.boundary = J.boundary;
  p.jacobi = true;
  p.multistart.refine.shoot.step = std::min(p.multistart.refine.shoot.step, cfg.brake.jacobi_shoot_step);
  p.multistart.refine.sample_step = std::min(p.multistart.refine.sample_step, cfg.brake.jacobi_sample_step);
  p.multistart.refine.discrete_check = false;
  return p;
}

}  // namespace ogc
