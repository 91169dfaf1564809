// Acceptance checks, one PASS/FAIL line per criterion. Usage: acceptance [N ...]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ogc/brake.hpp"
#include "ogc/config.hpp"
#include "ogc/descent.hpp"
#include "ogc/multiplicity.hpp"
#include "ogc/shooting.hpp"
#include "ogc/transversality.hpp"

namespace fs = std::filesystem;
using namespace ogc;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig config(const std::string& name) { return load_config(std::string(OGC_CONFIG_DIR) + "/" + name + ".json"); }

// Midpoint-rule energy, written out here instead of calling the library.
double oracle_energy(const MetricField& m, const DiscretePath& x) {
  const int n = x.segments();
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec d = x.node(i + 1) - x.node(i);
    const Vec mid = 0.5 * (x.node(i) + x.node(i + 1));
    const double s = m.norm(mid, d);
    e += n * s * s;
  }
  return e;
}

OGCCatalog run_multistart(const RunConfig& cfg, double* secs = nullptr) {
  const ProblemGeometry p = problem_geometry(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  OGCCatalog cat = multistart(p.metric, p.boundary, p.multistart);
  if (secs) *secs = seconds_since(t0);
  cat.sort_by_energy();
  return cat;
}

Outcome disk() {
  Outcome o;
  const RunConfig cfg = config("euclidean_disk");
  o.require(cfg.multistart.n == 128 && cfg.multistart.grid == 16, "config is not n=128, grid=16");
  double secs = 0.0;
  const OGCCatalog cat = run_multistart(cfg, &secs);
  const MetricField m = MetricField::euclidean(2);
  o.require(cat.size() >= 2, "only " + std::to_string(cat.size()) + " OGCs");
  double worst_e = 0.0, worst_angle = 0.0, worst_antipodal = 0.0;
  for (const auto& e : cat.entries()) {
    worst_e = std::max(worst_e, std::abs(oracle_energy(m, e.path) - 4.0));
    worst_antipodal = std::max(worst_antipodal, (e.path.front() + e.path.back()).norm());
    // Oracle: angle between the end segment and the radial direction.
    const int n = e.path.segments();
    const Vec a = e.path.node(1) - e.path.node(0), b = e.path.node(n) - e.path.node(n - 1);
    const double ca = std::abs(a.normalized().dot(e.path.front().normalized()));
    const double cb = std::abs(b.normalized().dot(e.path.back().normalized()));
    worst_angle = std::max({worst_angle, std::acos(std::min(1.0, ca)), std::acos(std::min(1.0, cb))});
  }
  o.require(worst_e < 1e-3, "energy error " + fmt("%.3g", worst_e));
  o.require(worst_angle < 1e-6, "endpoint angle " + fmt("%.3g", worst_angle));
  o.require(worst_antipodal < 1e-6, "endpoints not antipodal " + fmt("%.3g", worst_antipodal));
  o.require(secs < 60.0, "runtime " + fmt("%.1f s", secs));
  o.detail = std::to_string(cat.size()) + " OGCs, max |E-4| " + fmt("%.2e", worst_e) + ", max angle " +
             fmt("%.2e", worst_angle) + ", " + fmt("%.1f s", secs) + (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

Outcome ellipse() {
  Outcome o;
  const RunConfig cfg = config("ellipse");
  const OGCCatalog cat = run_multistart(cfg);
  const MetricField m = MetricField::euclidean(2);
  o.require(cat.size() == 2, std::to_string(cat.size()) + " OGCs instead of 2");
  std::vector<double> e;
  for (const auto& c : cat.entries()) e.push_back(oracle_energy(m, c.path));
  std::sort(e.begin(), e.end());
  if (e.size() == 2) {
    o.require(std::abs(e[0] - 4.0) < 4e-3, "minor axis energy " + fmt("%.6g", e[0]));
    o.require(std::abs(e[1] - 16.0) < 16e-3, "major axis energy " + fmt("%.6g", e[1]));
  }
  std::string list;
  for (double v : e) list += fmt(" %.6f", v);
  o.detail = "energies" + list + (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

Outcome radial_scan() {
  Outcome o;
  const RunConfig cfg = config("radial_conformal");
  const ProblemGeometry p = problem_geometry(cfg);
  const ScanReport rep = scan_OT_chords(p.metric, p.boundary, 64, cfg.scan_shoot);
  o.require(rep.tangent.empty(), std::to_string(rep.tangent.size()) + " O-T chords");
  o.require(rep.min_abs_exit_cos > 0.99, "min |exit_cos| " + fmt("%.6g", rep.min_abs_exit_cos));
  int orth = 0, ok = 0;
  double worst = 0.0;
  for (const auto& e : rep.entries) {
    if (e.shot.kind != ExitKind::Orthogonal) continue;
    ++orth;
    const CriticalReport cr = verify_critical(e.shot.path, p.boundary, p.metric);
    worst = std::max(worst, cr.residual_interior);
    ok += cr.classification == Classification::OGC && cr.residual_interior < 1e-6;
  }
  o.require(orth > 0 && ok == orth, std::to_string(ok) + "/" + std::to_string(orth) + " shots verify");
  o.detail = std::to_string(rep.entries.size()) + " shots, " + std::to_string(rep.tangent.size()) +
             " O-T, min |cos| " + fmt("%.9f", rep.min_abs_exit_cos) + ", " + std::to_string(ok) + "/" +
             std::to_string(orth) + " verified, max residual " + fmt("%.2e", worst) +
             (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

Outcome perturbed() {
  Outcome o;
  const RunConfig cfg = config("perturbed_radial");
  const ProblemGeometry p = problem_geometry(cfg);
  const ScanReport rep = scan_OT_chords(p.metric, p.boundary, cfg.scan_points, cfg.scan_shoot);
  o.require(rep.tangent.empty(), std::to_string(rep.tangent.size()) + " O-T chords");
  const OGCCatalog cat = run_multistart(cfg);
  o.require(cat.size() >= 2, "only " + std::to_string(cat.size()) + " OGCs");
  double worst_speed = 0.0, worst_angle = 0.0;
  int lambda_present = 0, not_ogc = 0;
  for (const auto& e : cat.entries()) {
    const CriticalReport cr = verify_critical(e.path, p.boundary, p.metric);
    not_ogc += cr.classification != Classification::OGC;
    lambda_present += !cr.lambda.empty();
    worst_speed = std::max(worst_speed, cr.speed_variation);
    worst_angle = std::max({worst_angle, cr.endpoint_angles[0], cr.endpoint_angles[1]});
  }
  o.require(not_ogc == 0, std::to_string(not_ogc) + " entries fail verification");
  o.require(lambda_present == 0, std::to_string(lambda_present) + " entries touch the boundary");
  o.require(worst_speed < 1e-6, "speed variation " + fmt("%.3g", worst_speed));
  o.require(worst_angle < 1e-6, "endpoint angle " + fmt("%.3g", worst_angle));
  o.detail = "scan " + std::to_string(rep.tangent.size()) + " O-T, " + std::to_string(cat.size()) +
             " OGCs, speed var " + fmt("%.2e", worst_speed) + ", angle " + fmt("%.2e", worst_angle) +
             (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

Outcome ball3() {
  Outcome o;
  const RunConfig cfg = config("euclidean_ball3");
  o.require(cfg.multistart.n == 96 && cfg.multistart.grid == 12, "config is not n=96, grid=12");
  double secs = 0.0;
  const OGCCatalog cat = run_multistart(cfg, &secs);
  const MetricField m = MetricField::euclidean(3);
  double worst = 0.0;
  for (const auto& e : cat.entries()) worst = std::max(worst, std::abs(oracle_energy(m, e.path) - 4.0));
  o.require(cat.size() >= 3, "only " + std::to_string(cat.size()) + " OGCs");
  o.require(worst < 1e-3, "energy error " + fmt("%.3g", worst));
  o.require(secs < 600.0, "runtime " + fmt("%.1f s", secs));
  o.detail = std::to_string(cat.size()) + " OGCs, max |E-4| " + fmt("%.2e", worst) + ", " + fmt("%.1f s", secs) +
             (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

std::vector<fs::path> shipped_configs() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(OGC_CONFIG_DIR))
    if (e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

Outcome constants() {
  Outcome o;
  std::ostringstream summary;
  for (const fs::path& path : shipped_configs()) {
    const RunConfig cfg = load_config(path.string());
    ProblemGeometry p = problem_geometry(cfg);
    p.boundary.K0 = estimate_K0(p.boundary, p.metric, p.multistart.K0_samples).inflated;
    const std::string name = path.stem().string();
    double m0 = 0.0;
    try {
      m0 = estimate_M0(p.metric, p.boundary, std::max(8, std::min(p.multistart.grid, 16))).M0;
    } catch (const ConsistencyError&) {
    }
    const double ratio = p.boundary.delta0 / p.boundary.K0;
    o.require(m0 > ratio, name + ": M0 " + fmt("%.4g", m0) + " <= " + fmt("%.4g", ratio));
    std::mt19937_64 rng(cfg.seed);
    const StripSuiteReport s = strip_suite(p.boundary, p.metric, 200, 64, rng);
    o.require(s.paths == 200, name + ": strip suite ran " + std::to_string(s.paths) + " paths");
    o.require(s.lemma_violations == 0 && s.corollary_violations == 0,
              name + ": strip violations " + std::to_string(s.lemma_violations + s.corollary_violations));
    o.require(s.corollary_checks > 0, name + ": corollary never exercised");
    summary << name << " M0/ratio=" << fmt("%.3g", m0 / ratio) << " ";
  }
  o.detail = summary.str() + (o.detail.empty() ? "" : "| " + o.detail);
  return o;
}

TangentField reversed(const TangentField& v) { return v.rowwise().reverse(); }

Outcome descent() {
  Outcome o;
  const RunConfig cfg = config("perturbed_radial");
  const ProblemGeometry p = problem_geometry(cfg);
  std::mt19937_64 rng(cfg.seed);
  FlowConfig fc;

  // Monotonicity with an independent energy evaluation after every accepted step.
  int increases = 0, steps = 0;
  for (int s = 0; s < 20; ++s) {
    DiscretePath x = random_admissible_path(p.boundary, 64, rng);
    double f = energy(p.metric, x);
    double prev = oracle_energy(p.metric, x);
    double h = fc.initial_step_scale / (1.0 + std::sqrt(f));
    for (int it = 0; it < 100; ++it) {
      const DescentDirection d = descent_direction(x, fc.cone, p.boundary, p.metric);
      if (!(d.steepness > 0.0)) break;
      const double taken = descent_step(x, f, d, h, p.boundary, p.metric, fc);
      if (taken == 0.0) break;
      const double now = oracle_energy(p.metric, x);
      increases += now > prev;
      prev = now;
      ++steps;
      h = std::min(2.0 * taken, fc.max_step);
    }
  }
  o.require(increases == 0, std::to_string(increases) + " energy increases");

  // One step from x and from reverse(x) must be mirror images.
  double worst_eq = 0.0;
  for (int s = 0; s < 10; ++s) {
    DiscretePath x = random_admissible_path(p.boundary, 64, rng);
    DiscretePath y = reverse(x);
    double fx = energy(p.metric, x), fy = energy(p.metric, y);
    const DescentDirection dx = descent_direction(x, fc.cone, p.boundary, p.metric);
    const DescentDirection dy = descent_direction(y, fc.cone, p.boundary, p.metric);
    worst_eq = std::max(worst_eq, (reversed(dx.v) - dy.v).cwiseAbs().maxCoeff());
    const double h = fc.initial_step_scale / (1.0 + std::sqrt(fx));
    descent_step(x, fx, dx, h, p.boundary, p.metric, fc);
    descent_step(y, fy, dy, h, p.boundary, p.metric, fc);
    worst_eq = std::max(worst_eq, dist_inf(x, reverse(y)));
  }
  o.require(worst_eq < 1e-12, "reversal mismatch " + fmt("%.3g", worst_eq));

  // Analytic gradient against central differences of the independent energy.
  std::normal_distribution<double> normal;
  double worst_fd = 0.0;
  for (int k = 0; k < 50; ++k) {
    const DiscretePath x = random_admissible_path(p.boundary, 32, rng);
    TangentField v(x.dim(), x.node_count());
    for (int i = 0; i < v.size(); ++i) v(i) = normal(rng);
    const double h = 1e-6;
    const double fd =
        (oracle_energy(p.metric, DiscretePath(x.nodes() + h * v)) - oracle_energy(p.metric, DiscretePath(x.nodes() - h * v))) /
        (2 * h);
    const double an = directional_derivative(energy_gradient(p.metric, x), v);
    worst_fd = std::max(worst_fd, std::abs(an - fd) / std::max(std::abs(fd), 1e-12));
  }
  o.require(worst_fd < 1e-5, "gradient relative error " + fmt("%.3g", worst_fd));
  o.detail = std::to_string(steps) + " steps, " + std::to_string(increases) + " increases, reversal " +
             fmt("%.2e", worst_eq) + ", FD rel err " + fmt("%.2e", worst_fd) +
             (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

Outcome transversality() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(12345);
  int agree = 0;
  for (int k = 0; k < 1000; ++k) {
    const LinalgCheck r = linalg_lemma_check(random_linalg_instance(2 + k % 4, k % 2 == 1, rng));
    agree += r.criterion == r.brute && r.criterion != Decision::Indeterminate;
  }
  o.require(agree == 1000, "lemma agreement " + std::to_string(agree) + "/1000");

  const MetricField m = MetricField::euclidean(3);
  const Vec p = Vec::Unit(3, 0), v = Vec::Unit(3, 0);
  const HypersurfaceData S1 = hypersurface_data(sphere_surface(Vec::Zero(3), 1.0), m, p);
  const FamilyCheck plane = check_transversal_family(S1, hypersurface_data(plane_surface(p, Vec::Unit(3, 1)), m, p), m, v);
  Vec axis_point(3);
  axis_point << 1.0, 1.0, 0.0;
  const FamilyCheck cyl = check_transversal_family(
      S1, hypersurface_data(cylinder_surface(axis_point, Vec::Unit(3, 2), 1.0), m, p), m, v);
  o.require(plane.decision == Decision::False, "sphere/plane gives " + to_string(plane.decision));
  o.require(cyl.decision == Decision::True && cyl.b == Decision::True,
            "sphere/cylinder gives " + to_string(cyl.decision) + " via " + to_string(cyl.branch));
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, "runtime " + fmt("%.2f s", secs));
  o.detail = std::to_string(agree) + "/1000 agree, plane " + to_string(plane.decision) + ", cylinder " +
             to_string(cyl.decision) + " (branch " + to_string(cyl.branch) + "), " + fmt("%.2f s", secs) +
             (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

BrakeCatalog brake_run(const RunConfig& cfg) {
  return brake_multiplicity(lagrangian_data(cfg), cfg.multistart, cfg.brake, cfg.lagrangian->margin);
}

int verified_count(const BrakeCatalog& c) {
  return static_cast<int>(std::count_if(c.reports.begin(), c.reports.end(), [](const BrakeReport& r) { return r.ok; }));
}

Outcome brake() {
  Outcome o;
  const RunConfig hcfg = config("harmonic_brake");
  const LagrangianData L = lagrangian_data(hcfg);
  const BrakeCatalog h = brake_run(hcfg);
  o.require(!h.orbits.empty(), "no harmonic orbits");
  double dev = 0.0, period = 0.0, eres = 0.0, speed = 0.0;
  for (const BrakeOrbit& orb : h.orbits) {
    const Vec e = orb.q.front();
    for (std::size_t i = 0; i < orb.t.size(); ++i) {
      const double t = orb.t[i] - orb.t.front();
      dev = std::max(dev, (orb.q[i] - std::cos(t) * e).norm());
      eres = std::max(eres, std::abs(0.5 * orb.qdot[i].squaredNorm() + 0.5 * orb.q[i].squaredNorm() - L.E));
    }
    period = std::max(period, std::abs(orb.half_period() - std::numbers::pi));
    speed = std::max({speed, orb.qdot.front().norm(), orb.qdot.back().norm()});
  }
  o.require(dev < 1e-5, "deviation from cos(t)e " + fmt("%.3g", dev));
  o.require(period < 1e-3, "half-period error " + fmt("%.3g", period));
  o.require(eres < 1e-6, "energy residual " + fmt("%.3g", eres));
  o.require(speed < 1e-6, "end speed " + fmt("%.3g", speed));

  const BrakeCatalog h3 = brake_run(config("harmonic_brake3"));
  o.require(verified_count(h3) >= 3, "dim 3: " + std::to_string(verified_count(h3)) + " verified orbits");
  const BrakeCatalog c = brake_run(config("cubic_brake"));
  o.require(verified_count(c) >= 2, "cubic: " + std::to_string(verified_count(c)) + " verified orbits");
  o.detail = "harmonic " + std::to_string(h.orbits.size()) + " orbits, dev " + fmt("%.2e", dev) + ", |T-pi| " +
             fmt("%.2e", period) + ", energy " + fmt("%.2e", eres) + ", end speed " + fmt("%.2e", speed) +
             "; dim3 " + std::to_string(verified_count(h3)) + "; cubic " + std::to_string(verified_count(c)) +
             (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool run_cli(const std::string& sub, const fs::path& cfg, const fs::path& out) {
  std::string cmd = "OGC_OUTPUT_DIR='" + out.string() + "' '" + OGC_CLI_PATH + "' " + sub;
  if (!cfg.empty()) cmd += " -c '" + cfg.string() + "'";
  cmd += " >'" + (out / (sub + ".stdout")).string() + "' 2>/dev/null";
  fs::create_directories(out);
  return std::system(cmd.c_str()) == 0;
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "ogc_acceptance_determinism";
  fs::remove_all(root);
  struct Job {
    std::string sub;
    fs::path cfg;
  };
  std::vector<Job> jobs{{"transversality-demo", {}}};
  for (const fs::path& c : shipped_configs()) {
    const RunConfig cfg = load_config(c.string());
    jobs.push_back({"constants", c});
    if (cfg.lagrangian) {
      jobs.push_back({"brake", c});
    } else {
      jobs.push_back({"scan-ot", c});
      jobs.push_back({"multiplicity", c});
      if (cfg.find_start) jobs.push_back({"find-ogc", c});
    }
  }
  int files = 0;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const std::string tag = jobs[k].sub + "_" + (jobs[k].cfg.empty() ? "default" : jobs[k].cfg.stem().string());
    const fs::path a = root / "a" / tag, b = root / "b" / tag;
    if (!run_cli(jobs[k].sub, jobs[k].cfg, a) || !run_cli(jobs[k].sub, jobs[k].cfg, b)) {
      o.require(false, tag + " exited nonzero");
      continue;
    }
    std::vector<fs::path> names;
    for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename());
    std::size_t count_b = std::distance(fs::directory_iterator(b), fs::directory_iterator{});
    o.require(names.size() == count_b, tag + ": different file sets");
    for (const fs::path& n : names) {
      ++files;
      o.require(fs::exists(b / n) && slurp(a / n) == slurp(b / n), tag + "/" + n.string() + " differs");
    }
  }
  o.detail = std::to_string(jobs.size()) + " runs, " + std::to_string(files) + " files compared" +
             (o.detail.empty() ? "" : " | " + o.detail);
  fs::remove_all(root);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "disk diameters", disk},
      {2, "ellipse axes", ellipse},
      {3, "radial scan", radial_scan},
      {4, "perturbed multiplicity", perturbed},
      {5, "ball3 multiplicity", ball3},
      {6, "constants and strip bounds", constants},
      {7, "descent invariants", descent},
      {8, "transversality", transversality},
      {9, "brake orbits", brake},
      {10, "determinism", determinism},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (const Criterion& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    Outcome r;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", r.pass ? "PASS" : "FAIL", c.id, c.name, r.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    failures += !r.pass;
  }
  return failures == 0 ? 0 : 1;
}
