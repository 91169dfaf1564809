#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "ogc/brake.hpp"
#include "ogc/config.hpp"
#include "ogc/descent.hpp"
#include "ogc/multiplicity.hpp"
#include "ogc/shooting.hpp"
#include "ogc/transversality.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ogc;

namespace {

struct Output {
  fs::path dir;

  explicit Output(const RunConfig& cfg) {
    const char* env = std::getenv("OGC_OUTPUT_DIR");
    dir = env && *env ? fs::path(env) : fs::path(cfg.output_dir);
    fs::create_directories(dir);
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << text;
  }
  void write(const std::string& name, const json& j) const { write(name, j.dump(2) + "\n"); }
};

int run_scan(const RunConfig& cfg) {
  const ProblemGeometry p = problem_geometry(cfg);
  ShootConfig sc = cfg.scan_shoot;
  if (p.jacobi) sc.step = p.multistart.refine.shoot.step;
  const ScanReport rep = scan_OT_chords(p.metric, p.boundary, cfg.scan_points, sc, cfg.threads);
  int orthogonal = 0, verified = 0;
  double max_residual = 0.0;
  for (const auto& e : rep.entries) {
    if (e.shot.kind != ExitKind::Orthogonal) continue;
    ++orthogonal;
    if (p.jacobi || e.shot.path.node_count() < 3) continue;
    const CriticalReport cr = verify_critical(e.shot.path, p.boundary, p.metric, cfg.multistart.refine.critical);
    verified += cr.classification == Classification::OGC;
    max_residual = std::max(max_residual, cr.residual_interior);
  }
  Output out(cfg);
  out.write("scan_findings.csv", scan_to_csv(rep, true));
  out.write("scan_all.csv", scan_to_csv(rep, false));
  out.write("scan_summary.json", json{{"config", cfg.name},
                                      {"shots", rep.entries.size()},
                                      {"ot_chords", rep.tangent.size()},
                                      {"grazing", rep.grazing.size()},
                                      {"no_return", rep.no_return},
                                      {"min_abs_exit_cos", rep.min_abs_exit_cos},
                                      {"orthogonal", orthogonal},
                                      {"orthogonal_verified", verified},
                                      {"max_interior_residual", max_residual}});
  std::printf("scan-ot: %zu shots, %zu O-T chords, min |exit_cos| = %.6g\n", rep.entries.size(), rep.tangent.size(),
              rep.min_abs_exit_cos);
  return 0;
}

int run_find(const RunConfig& cfg) {
  if (!cfg.find_start || !cfg.find_end) throw ConfigError("find-ogc needs a find_ogc block with start and end");
  const ProblemGeometry p = problem_geometry(cfg);
  const int n = p.multistart.n;
  const DiscretePath c =
      chord(p.boundary, p.boundary.boundary_point(*cfg.find_start), p.boundary.boundary_point(*cfg.find_end), n);
  FlowConfig fc = p.multistart.flow;
  fc.max_iters = cfg.flow_iters_find;
  const FlowResult fr = flow(c, p.boundary, p.metric, fc);
  RefineConfig rc = p.multistart.refine;
  rc.shoot.path_nodes = n;
  RefineResult best;
  for (const Vec& a0 : {fr.path.front(), fr.path.back()}) {
    try {
      best = ogc_refine(p.metric, p.boundary, a0, rc);
    } catch (const std::exception& e) {
      best = {};
      best.failure = e.what();
    }
    if (best.ok) break;
  }
  Output out(cfg);
  json doc{{"config", cfg.name},
           {"flow_status", to_string(fr.status)},
           {"flow_iterations", fr.iterations},
           {"flow_energy", energy(p.metric, fr.path)},
           {"refined", best.ok}};
  if (best.ok) {
    doc["refine_iterations"] = best.iterations;
    doc["tangential"] = best.tangential;
    doc["report"] = report_to_json(best.report);
    doc["path"] = path_to_json(best.path);
    out.write("ogc_path.csv", path_to_csv(best.path));
  } else {
    doc["failure"] = best.failure;
    const CriticalReport rep = verify_critical(fr.path, p.boundary, p.metric, rc.critical);
    doc["report"] = report_to_json(rep);
    doc["path"] = path_to_json(fr.path);
    out.write("ogc_path.csv", path_to_csv(fr.path));
  }
  out.write("ogc.json", doc);
  out.write("flow_trace.csv", trace_to_csv(fr.trace));
  std::printf("find-ogc: refined=%d\n", best.ok ? 1 : 0);
  return 0;
}

int run_multiplicity(const RunConfig& cfg) {
  const ProblemGeometry p = problem_geometry(cfg);
  MultistartStats st;
  const OGCCatalog cat = multistart(p.metric, p.boundary, p.multistart, &st);
  json doc = catalog_to_json(cat);
  doc["config"] = cfg.name;
  doc["stats"] = {{"pairs", st.pairs},       {"in_strip", st.in_strip}, {"refined", st.refined},
                  {"verified", st.verified}, {"inserted", st.inserted}, {"K0", st.K0},
                  {"M0", st.M0},             {"strip_lower", st.lower}, {"strip_upper", st.upper}};
  Output out(cfg);
  out.write("catalog.json", doc);
  out.write("catalog_summary.csv", catalog_summary_csv(cat));
  if (cfg.dim == 2) out.write("catalog.svg", catalog_svg(p.boundary, cat));
  std::printf("multiplicity: %d distinct OGCs (target %d)\n", cat.size(), cat.target());
  const auto spectrum = cat.spectrum();
  for (std::size_t k = 0; k < spectrum.size() && k < 8; ++k) std::printf("  energy %.10g\n", spectrum[k]);
  if (spectrum.size() > 8) std::printf("  ... (%zu more)\n", spectrum.size() - 8);
  return 0;
}

int run_brake(const RunConfig& cfg) {
  const LagrangianData L = lagrangian_data(cfg);
  const BrakeCatalog cat = brake_multiplicity(L, cfg.multistart, cfg.brake, cfg.lagrangian->margin);
  json doc = brake_catalog_to_json(cat);
  doc["config"] = cfg.name;
  Output out(cfg);
  out.write("brake.json", doc);
  for (std::size_t k = 0; k < cat.orbits.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "orbit_%03zu.csv", k);
    out.write(name, orbit_to_csv(cat.orbits[k]));
  }
  if (cfg.dim == 2) out.write("brake.svg", brake_svg(L, jacobi_metric(L, cfg.lagrangian->margin), cat));
  std::printf("brake: %zu distinct brake orbits (target %d), %zu conversion failures\n", cat.orbits.size(),
              cat.target, cat.failures.size());
  return 0;
}

int run_transversality(const RunConfig& cfg) {
  const MetricField m = MetricField::euclidean(3);
  const Vec p = Vec::Unit(3, 0), v = Vec::Unit(3, 0);
  const DomainBoundary sphere = sphere_surface(Vec::Zero(3), 1.0);
  struct Case {
    std::string name;
    DomainBoundary S2;
  };
  Vec axis_point(3);
  axis_point << 1.0, 1.0, 0.0;
  const std::vector<Case> cases{{"sphere/plane", plane_surface(p, Vec::Unit(3, 1))},
                                {"sphere/cylinder", cylinder_surface(axis_point, Vec::Unit(3, 2), 1.0)}};
  std::string csv = "instance,fixed,normal_component,alpha_vv,branch_b,family,branch,lemma_criterion,lemma_brute\n";
  json rows = json::array();
  char buf[256];
  for (const auto& c : cases) {
    const HypersurfaceData d1 = hypersurface_data(sphere, m, p), d2 = hypersurface_data(c.S2, m, p);
    const FamilyCheck fam = check_transversal_family(d1, d2, m, v);
    const LinalgCheck lem = linalg_lemma_check(assemble_instance(d1, d2, m, v));
    std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%s,%s,%s,%s,%s\n", c.name.c_str(),
                  to_string(fam.a.decision).c_str(), fam.a.normal_component, fam.alpha_vv,
                  to_string(fam.b).c_str(), to_string(fam.decision).c_str(), to_string(fam.branch).c_str(),
                  to_string(lem.criterion).c_str(), to_string(lem.brute).c_str());
    csv += buf;
    rows.push_back({{"instance", c.name},
                    {"fixed", to_string(fam.a.decision)},
                    {"family", to_string(fam.decision)},
                    {"branch", to_string(fam.branch)},
                    {"alpha_vv", fam.alpha_vv},
                    {"lemma_criterion", to_string(lem.criterion)},
                    {"lemma_brute", to_string(lem.brute)}});
  }
  std::mt19937_64 rng(cfg.seed);
  int agree = 0, total = 0, transversal = 0;
  for (int k = 0; k < 1000; ++k) {
    const int d = 2 + k % 4;
    const LinalgCheck r = linalg_lemma_check(random_linalg_instance(d, k % 2 == 1, rng));
    ++total;
    agree += r.criterion == r.brute && r.criterion != Decision::Indeterminate;
    transversal += r.brute == Decision::True;
  }
  Output out(cfg);
  out.write("transversality.csv", csv);
  out.write("transversality.json", json{{"instances", rows},
                                        {"random_lemma", {{"total", total}, {"agree", agree},
                                                          {"transversal", transversal}}},
                                        {"seed", cfg.seed}});
  std::printf("transversality-demo: lemma agreement %d/%d\n", agree, total);
  return 0;
}

int run_constants(const RunConfig& cfg) {
  ProblemGeometry p = problem_geometry(cfg);
  validate_delta0(p.boundary, p.metric);
  const K0Estimate k0 = estimate_K0(p.boundary, p.metric, p.multistart.K0_samples);
  p.boundary.K0 = k0.inflated;
  json doc{{"config", cfg.name}, {"delta0", p.boundary.delta0}, {"K0_raw", k0.raw}, {"K0", k0.inflated}};
  bool holds = false;
  try {
    const M0Estimate m0 = estimate_M0(p.metric, p.boundary, std::max(8, std::min(p.multistart.grid, 16)));
    doc["M0"] = m0.M0;
    doc["M0_sq_raw"] = m0.raw_sq;
    holds = m0.inequality_holds;
  } catch (const ConsistencyError& e) {
    doc["M0_error"] = e.what();
  }
  doc["delta0_over_K0"] = p.boundary.delta0 / p.boundary.K0;
  doc["inequality"] = holds ? "PASS" : "FAIL";
  std::mt19937_64 rng(cfg.seed);
  const StripSuiteReport s = strip_suite(p.boundary, p.metric, cfg.strip_paths, 64, rng);
  doc["strip"] = {{"paths", s.paths},
                  {"lemma_checks", s.lemma_checks},
                  {"lemma_violations", s.lemma_violations},
                  {"corollary_checks", s.corollary_checks},
                  {"corollary_violations", s.corollary_violations},
                  {"max_ratio", s.max_ratio}};
  Output out(cfg);
  out.write("constants.json", doc);
  std::printf("constants: K0 = %.6g, M0 > delta0/K0: %s, strip violations %d/%d\n", k0.inflated,
              holds ? "PASS" : "FAIL", s.lemma_violations + s.corollary_violations,
              s.lemma_checks + s.corollary_checks);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orthogonal geodesic chords, transversality checks and brake orbits"};
  app.require_subcommand(1);
  std::string config_path;
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&);
    bool needs_config;
  };
  const Sub subs[] = {
      {"scan-ot", "orthogonal shots from a boundary grid; lists O-T chords", run_scan, true},
      {"find-ogc", "descent and shooting refinement from one chord", run_find, true},
      {"multiplicity", "multistart catalog of distinct OGCs", run_multiplicity, true},
      {"brake", "brake orbits through the Jacobi metric", run_brake, true},
      {"transversality-demo", "transversality criteria on reference instances", run_transversality, false},
      {"constants", "delta0, K0, M0 and the strip inequalities", run_constants, true},
  };
  std::vector<CLI::App*> apps;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    auto* opt = sub->add_option("-c,--config", config_path, "JSON run configuration");
    if (s.needs_config) opt->required();
    apps.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  for (std::size_t k = 0; k < apps.size(); ++k) {
    if (!apps[k]->parsed()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const RunConfig cfg = config_path.empty() ? parse_config(json::object()) : load_config(config_path);
      const int code = subs[k].run(cfg);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::fprintf(stderr, "%s finished in %.2f s\n", subs[k].name, secs);
      return code;
    } catch (const ConfigError& e) {
      std::fprintf(stderr, "configuration error: %s\n", e.what());
      return 2;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
    }
  }
  return 2;
}
