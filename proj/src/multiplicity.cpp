#include "ogc/multiplicity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>

#include "ogc/parallel.hpp"

namespace ogc {

namespace {

double point_segment_distance(const Vec& p, const Vec& a, const Vec& b) {
  const Vec d = b - a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - a - t * d).norm();
}

// max over nodes of x1 of the distance to the polyline x2.
double directed_distance(const DiscretePath& x1, const DiscretePath& x2, double stop_above) {
  double worst = 0.0;
  for (int i = 0; i < x1.node_count(); ++i) {
    const Vec p = x1.node(i);
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < x2.segments() && best > worst; ++j)
      best = std::min(best, point_segment_distance(p, x2.node(j), x2.node(j + 1)));
    if (x2.segments() == 0) best = (p - x2.node(0)).norm();
    worst = std::max(worst, best);
    if (worst > stop_above) break;
  }
  return worst;
}

bool lex_less(const Vec& a, const Vec& b) {
  for (int k = 0; k < a.size(); ++k) {
    if (a(k) < b(k)) return true;
    if (a(k) > b(k)) return false;
  }
  return false;
}

}  // namespace

double hausdorff_distance(const DiscretePath& x1, const DiscretePath& x2, double stop_above) {
  const double d12 = directed_distance(x1, x2, stop_above);
  if (d12 > stop_above) return d12;
  return std::max(d12, directed_distance(x2, x1, stop_above));
}

DistinctResult compare_ogcs(const MetricField& m, const DiscretePath& x1, const DiscretePath& x2, double tol,
                            double energy_tol_rel) {
  DistinctResult r;
  // The image distance is already blind to orientation; the reversed copy is
  // compared as well so the result never depends on parameter direction.
  const double d = std::min(hausdorff_distance(x1, x2, tol), hausdorff_distance(x1, reverse(x2), tol));
  r.hausdorff = d;
  r.distinct = !(d < tol);
  if (!r.distinct) {
    const double f1 = energy(m, x1), f2 = energy(m, x2);
    r.energy_consistent = std::abs(f1 - f2) < energy_tol_rel * std::max(f1, f2);
  }
  return r;
}

bool distinct(const DiscretePath& x1, const DiscretePath& x2, double tol) {
  return !(std::min(hausdorff_distance(x1, x2, tol), hausdorff_distance(x1, reverse(x2), tol)) < tol);
}

DiscretePath canonical_orientation(const DiscretePath& x) {
  return lex_less(x.back(), x.front()) ? reverse(x) : x;
}

bool OGCCatalog::insert(DiscretePath path, const CriticalReport& report, int source) {
  if (report.classification != Classification::OGC) throw UsageError("catalog accepts verified OGCs only");
  path = canonical_orientation(path);
  for (const auto& e : entries_) {
    const DistinctResult d = compare_ogcs(*metric_, e.path, path, tol_, energy_tol_rel_);
    if (!d.distinct) {
      if (!d.energy_consistent) ++violations_;
      return false;
    }
  }
  CatalogEntry e;
  e.energy = energy(*metric_, path);
  e.start = path.front();
  e.end = path.back();
  e.report = report;
  e.source = source;
  e.path = std::move(path);
  entries_.push_back(std::move(e));
  return true;
}

std::vector<double> OGCCatalog::spectrum() const {
  std::vector<double> s;
  for (const auto& e : entries_) s.push_back(e.energy);
  std::sort(s.begin(), s.end());
  return s;
}

void OGCCatalog::sort_by_energy() {
  std::stable_sort(entries_.begin(), entries_.end(), [](const CatalogEntry& a, const CatalogEntry& b) {
    return a.energy < b.energy || (a.energy == b.energy && a.source < b.source);
  });
}

OGCCatalog multistart(const MetricField& m, DomainBoundary b, const MultistartConfig& cfg, MultistartStats* stats) {
  MultistartStats st;
  if (!(b.K0 > 0.0)) b.K0 = estimate_K0(b, m, cfg.K0_samples).inflated;
  const M0Estimate m0 = estimate_M0(m, b, std::max(8, std::min(cfg.grid, 16)));
  st.K0 = b.K0;
  st.M0 = m0.M0;
  st.lower = b.delta0 * b.delta0 / (b.K0 * b.K0);
  st.upper = m0.M0 * m0.M0;

  const auto samples = boundary_grid(b, cfg.grid);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < static_cast<int>(samples.size()); ++i)
    for (int j = i + 1; j < static_cast<int>(samples.size()); ++j) pairs.emplace_back(i, j);
  if (cfg.max_starts > 0 && static_cast<int>(pairs.size()) > cfg.max_starts) {
    std::vector<std::pair<int, int>> picked;
    const double stride = static_cast<double>(pairs.size()) / cfg.max_starts;
    for (int k = 0; k < cfg.max_starts; ++k) picked.push_back(pairs[static_cast<std::size_t>(k * stride)]);
    pairs = std::move(picked);
  }
  st.pairs = static_cast<int>(pairs.size());

  struct Outcome {
    bool in_strip = false;
    bool refined = false;
    std::optional<DiscretePath> path;
    CriticalReport report;
  };
  std::vector<Outcome> out(pairs.size());
  FlowConfig fc = cfg.flow;
  fc.max_iters = cfg.flow_iters;
  RefineConfig rc = cfg.refine;
  rc.shoot.path_nodes = cfg.n;

  parallel_for(static_cast<int>(pairs.size()), cfg.threads, [&](int k) {
    Outcome& o = out[k];
    const DiscretePath c = chord(b, samples[pairs[k].first].point, samples[pairs[k].second].point, cfg.n);
    const double f = energy(m, c);
    if (f < st.lower || f > st.upper) return;
    o.in_strip = true;
    const FlowResult fr = flow(c, b, m, fc);
    for (const Vec& a0 : {fr.path.front(), fr.path.back()}) {
      RefineResult rr;
      try {
        rr = ogc_refine(m, b, a0, rc);
      } catch (const std::exception&) {
        continue;
      }
      if (rr.ok) {
        o.refined = true;
        o.path = rr.path;
        o.report = rr.report;
        return;
      }
    }
    // Refinement failed from both ends; keep the descent output if it verifies by itself.
    const CriticalReport rep = verify_critical(fr.path, b, m, rc.critical);
    if (rep.classification == Classification::OGC) {
      o.path = fr.path;
      o.report = rep;
    }
  });

  OGCCatalog cat(m, cfg.hausdorff_rel * 2.0 * b.bounding_radius, cfg.energy_tol_rel, m.dim());
  for (int k = 0; k < static_cast<int>(out.size()); ++k) {
    st.in_strip += out[k].in_strip;
    st.refined += out[k].refined;
    if (!out[k].path) continue;
    ++st.verified;
    st.inserted += cat.insert(*out[k].path, out[k].report, k);
  }
  cat.sort_by_energy();
  if (stats) *stats = st;
  return cat;
}

nlohmann::json catalog_to_json(const OGCCatalog& catalog) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : catalog.entries()) {
    entries.push_back({{"energy", e.energy},
                       {"source", e.source},
                       {"start", std::vector<double>(e.start.data(), e.start.data() + e.start.size())},
                       {"end", std::vector<double>(e.end.data(), e.end.data() + e.end.size())},
                       {"report", report_to_json(e.report)},
                       {"path", path_to_json(e.path)}});
  }
  return {{"count", catalog.size()},
          {"target", catalog.target()},
          {"tolerance", catalog.tolerance()},
          {"consistency_violations", catalog.consistency_violations()},
          {"spectrum", catalog.spectrum()},
          {"entries", entries}};
}

std::string catalog_summary_csv(const OGCCatalog& catalog) {
  std::ostringstream os;
  os << "index,energy,start_angles,end_angles\n";
  char buf[64];
  auto angles = [&](const Vec& p) {
    std::string s;
    const auto a = boundary_angles(p);
    for (std::size_t k = 0; k < a.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", a[k]);
      s += (k ? ";" : "") + std::string(buf);
    }
    return s;
  };
  for (int i = 0; i < catalog.size(); ++i) {
    const auto& e = catalog.entries()[i];
    std::snprintf(buf, sizeof buf, "%d,%.17g,", i, e.energy);
    os << buf << angles(e.start) << ',' << angles(e.end) << '\n';
  }
  return os.str();
}

std::string catalog_svg(const DomainBoundary& b, const OGCCatalog& catalog) {
  if (b.dim != 2) throw UsageError("SVG rendering is available in dim 2 only");
  const double size = 400.0, r = b.bounding_radius * 1.05;
  auto px = [&](const Vec& p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f,%.3f", (p(0) / r + 1.0) * size / 2, (1.0 - p(1) / r) * size / 2);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"0 0 400 400\">\n";
  os << "<polygon fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
  for (int k = 0; k < 256; ++k) {
    const double t = 2.0 * std::numbers::pi * k / 256;
    Vec u(2);
    u << std::cos(t), std::sin(t);
    os << (k ? " " : "") << px(b.boundary_point(u));
  }
  os << "\"/>\n";
  for (const auto& e : catalog.entries()) {
    os << "<polyline fill=\"none\" stroke=\"#c03020\" stroke-width=\"1\" points=\"";
    for (int i = 0; i < e.path.node_count(); ++i) os << (i ? " " : "") << px(e.path.node(i));
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

double RoundSphere::distance(const Vec& a, const Vec& b) const {
  const double c = std::clamp(a.dot(b) / (radius * radius), -1.0, 1.0);
  // atan2 form keeps accuracy for nearby points.
  const double s = (a - c * b).norm() / radius;
  return radius * std::atan2(s, c);
}

Vec RoundSphere::exp(const Vec& p, const Vec& u, double t) const {
  return std::cos(t / radius) * p + radius * std::sin(t / radius) * u;
}

Vec RoundSphere::direction(const Vec& p, const Vec& q) const {
  const Vec w = q - (p.dot(q) / (radius * radius)) * p;
  if (!(w.norm() > 1e-14 * radius)) throw UsageError("direction undefined for equal or antipodal points");
  return w.normalized();
}

double estimate_injectivity_radius(const RoundSphere& s, int samples, double step, double safety) {
  const int d = s.dim;
  double shortest = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= samples; ++k) {
    Vec p = (halton(k, d).array() - 0.5).matrix();
    if (!(p.norm() > 1e-6)) continue;
    p *= s.radius / p.norm();
    Vec u = (halton(k + samples, d).array() - 0.5).matrix();
    u -= (u.dot(p) / p.squaredNorm()) * p;
    if (!(u.norm() > 1e-6)) continue;
    u.normalize();
    // Ambient form of the sphere's geodesic equation: x'' = -|x'|^2 x / R^2.
    auto acc = [&](const Vec& x, const Vec& v) -> Vec { return -(v.squaredNorm() / x.squaredNorm()) * x; };
    Vec x = p, v = u;
    double t = 0.0, prev2 = 0.0, prev = 0.0;
    bool away = false;
    const double limit = 100.0 * s.radius;
    while (t < limit) {
      const Vec k1 = acc(x, v), l1 = v;
      const Vec k2 = acc(x + 0.5 * step * l1, v + 0.5 * step * k1), l2 = v + 0.5 * step * k1;
      const Vec k3 = acc(x + 0.5 * step * l2, v + 0.5 * step * k2), l3 = v + 0.5 * step * k2;
      const Vec k4 = acc(x + step * l3, v + step * k3), l4 = v + step * k3;
      x += (step / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
      v += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t += step;
      const double dist = (x - p).norm();
      if (dist > 0.5 * s.radius) away = true;
      if (away && prev < prev2 && prev <= dist) {
        // Parabola through the last three samples locates the return time.
        const double denom = prev2 - 2.0 * prev + dist;
        const double shift = denom > 0.0 ? 0.5 * (prev2 - dist) / denom : 0.0;
        shortest = std::min(shortest, t - step + shift * step);
        break;
      }
      prev2 = prev;
      prev = dist;
    }
  }
  if (!std::isfinite(shortest)) throw NumericError("no closed geodesic found while estimating the injectivity radius");
  return (1.0 - safety) * 0.5 * shortest;
}

Vec SeparatingHomotopy::operator()(double tau, const Vec& A, const Vec& B) const {
  if (tau <= 0.0) return B;
  const double d = sphere_.distance(A, B);
  if (d >= delta_g_) return B;
  tau = std::min(tau, tau_max());
  const double target = d + tau * (delta_g_ - d) / (delta_g_ - alpha_);
  return sphere_.exp(A, sphere_.direction(A, B), target);
}

SeparatingHomotopy separate_endpoints(const std::vector<std::pair<Vec, Vec>>& C, double alpha,
                                      const RoundSphere& sphere, double delta_g) {
  if (!(alpha > 0.0)) throw UsageError("separating homotopy needs alpha > 0");
  if (!(alpha < delta_g)) throw UsageError("separating homotopy needs alpha < delta_g");
  for (const auto& [A, B] : C)
    if (sphere.distance(A, B) < alpha * (1.0 - 1e-12))
      throw UsageError("a pair in C is closer than alpha");
  return SeparatingHomotopy(sphere, alpha, delta_g);
}

}  // namespace ogc
