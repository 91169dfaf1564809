#include "ogc/descent.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "ogc/stencil.hpp"

namespace ogc {

TangentField project_to_cone(const DiscretePath& x, const TangentField& w, const ConeSpec& cone,
                             const DomainBoundary& b, const MetricField& m) {
  if (w.rows() != x.dim() || w.cols() != x.node_count()) throw UsageError("tangent field size mismatch");
  TangentField v = w;
  const int n = x.segments();
  for (int i = 0; i <= n; ++i) {
    const Vec p = x.node(i);
    const bool endpoint = i == 0 || i == n;
    if (!endpoint && b.phi(p) < -cone.delta) continue;
    const Vec nu = unit_normal(b, m, p);
    const Vec vi = v.col(i);
    const double c = m.inner(p, nu, vi);
    if (endpoint || c > 0.0) v.col(i) = vi - c * nu;
  }
  return v;
}

TangentField sobolev_gradient(const TangentField& covector) {
  const int nodes = static_cast<int>(covector.cols());
  const int n = nodes - 1;
  if (n < 1) throw UsageError("sobolev_gradient needs at least two nodes");
  // Tridiagonal: diag n+1 at the ends, 2n inside; off-diagonal -n.
  std::vector<double> diag(nodes, 2.0 * n), cprime(nodes);
  diag.front() = diag.back() = n + 1.0;
  const double off = -static_cast<double>(n);
  TangentField out(covector.rows(), nodes);
  std::vector<double> denom(nodes);
  denom[0] = diag[0];
  cprime[0] = off / denom[0];
  for (int i = 1; i < nodes; ++i) {
    denom[i] = diag[i] - off * cprime[i - 1];
    cprime[i] = off / denom[i];
  }
  for (int r = 0; r < covector.rows(); ++r) {
    std::vector<double> d(nodes);
    d[0] = covector(r, 0) / denom[0];
    for (int i = 1; i < nodes; ++i) d[i] = (covector(r, i) - off * d[i - 1]) / denom[i];
    out(r, nodes - 1) = d[nodes - 1];
    for (int i = nodes - 2; i >= 0; --i) out(r, i) = d[i] - cprime[i] * out(r, i + 1);
  }
  return out;
}

namespace {

DescentDirection normalised_direction(const DiscretePath& x, const TangentField& grad, const TangentField& w,
                                      const ConeSpec& cone, const DomainBoundary& b, const MetricField& m) {
  DescentDirection d;
  d.v = project_to_cone(x, -w, cone, b, m);
  const double ns = norm_star(d.v);
  if (!(ns > 0.0)) {
    d.v.setZero();
    return d;
  }
  d.v /= ns;
  d.steepness = -directional_derivative(grad, d.v);
  return d;
}

}  // namespace

DescentDirection descent_direction(const DiscretePath& x, const ConeSpec& cone, const DomainBoundary& b,
                                   const MetricField& m, GradientMetric metric) {
  const TangentField grad = energy_gradient(m, x);
  DescentDirection d;
  if (metric == GradientMetric::Sobolev) {
    d = normalised_direction(x, grad, sobolev_gradient(grad), cone, b, m);
    if (d.steepness > 0.0) return d;
  }
  d = normalised_direction(x, grad, grad, cone, b, m);
  if (!(d.steepness > 0.0)) {
    d.v.setZero();
    d.steepness = 0.0;
  }
  return d;
}

DiscretePath feasibility_project(const DiscretePath& x, const DomainBoundary& b, const MetricField& m) {
  DiscretePath out = x;
  const int n = x.segments();
  for (int i = 0; i <= n; ++i) {
    const Vec p = x.node(i);
    const double ph = b.phi(p);
    const bool endpoint = i == 0 || i == n;
    if (!endpoint && ph <= 0.0) continue;
    if (endpoint && ph == 0.0) continue;
    out.nodes().col(i) = retract_to_boundary(b, m, p);
  }
  return out;
}

double descent_step(DiscretePath& x, double& energy_value, const DescentDirection& dir, double h,
                    const DomainBoundary& b, const MetricField& m, const FlowConfig& cfg) {
  for (; h >= cfg.min_step; h *= cfg.backtrack) {
    DiscretePath candidate;
    try {
      candidate = feasibility_project(DiscretePath(x.nodes() + h * dir.v), b, m);
    } catch (const UsageError&) {
      continue;
    } catch (const NumericError&) {
      continue;
    } catch (const DegenerateBoundaryError&) {
      continue;
    }
    const double fc = energy(m, candidate);
    if (fc <= energy_value - cfg.armijo * h * dir.steepness) {
      x = std::move(candidate);
      energy_value = fc;
      return h;
    }
  }
  return 0.0;
}

FlowResult flow(const DiscretePath& x0, const DomainBoundary& b, const MetricField& m, const FlowConfig& cfg) {
  FlowResult res;
  res.path = x0;
  double f = energy(m, x0);
  if (f == 0.0) {
    res.status = FlowStatus::Converged;
    res.trace.push_back({0, 0.0, 0.0, 0.0});
    return res;
  }
  double h = cfg.initial_step_scale / (1.0 + std::sqrt(f));
  for (int iter = 0;; ++iter) {
    const DescentDirection dir = descent_direction(res.path, cfg.cone, b, m, cfg.metric);
    res.trace.push_back({iter, f, dir.steepness, 0.0});
    res.iterations = iter;
    if (dir.steepness < cfg.tol_crit_scale * (1.0 + f)) {
      res.status = FlowStatus::Converged;
      break;
    }
    if (iter >= cfg.max_iters) {
      res.status = FlowStatus::MaxIterations;
      break;
    }
    const double taken = descent_step(res.path, f, dir, h, b, m, cfg);
    if (taken == 0.0) {
      res.status = FlowStatus::Stalled;
      break;
    }
    res.trace.back().step = taken;
    h = std::min(2.0 * taken, cfg.max_step);
  }
  return res;
}

std::string to_string(FlowStatus status) {
  switch (status) {
    case FlowStatus::Converged: return "converged";
    case FlowStatus::MaxIterations: return "max_iterations";
    case FlowStatus::Stalled: return "stalled";
  }
  return "unknown";
}

std::string trace_to_csv(const std::vector<FlowTraceEntry>& trace) {
  std::ostringstream os;
  os << "iter,energy,steepness,step\n";
  char buf[128];
  for (const auto& e : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", e.iter, e.energy, e.steepness, e.step);
    os << buf;
  }
  return os.str();
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Constant: return "Constant";
    case Classification::OGC: return "OGC";
    case Classification::BoundaryCritical: return "BoundaryCritical";
    case Classification::NotCritical: return "NotCritical";
  }
  return "NotCritical";
}

std::vector<std::pair<int, double>> lambda_profile(const DiscretePath& x, const DomainBoundary& b,
                                                   const MetricField& m, double tol_contact) {
  std::vector<std::pair<int, double>> out;
  const int n = x.segments();
  if (n < 2) return out;
  const UniformDifferentiator diff(n, 9);
  const Eigen::MatrixXd xd = diff.first(x.nodes());
  for (int i = 1; i < n; ++i) {
    const Vec p = x.node(i);
    if (b.phi(p) < -tol_contact) continue;
    const Vec v = xd.col(i);
    const Mat h = hessian_phi(b, m, p);
    out.emplace_back(i, v.dot(h * v) / grad_phi_norm(b, m, p));
  }
  return out;
}

CriticalReport verify_critical(const DiscretePath& x, const DomainBoundary& b, const MetricField& m,
                               const CriticalTolerances& tol) {
  CriticalReport r;
  const int n = x.segments();
  r.energy = energy(m, x);
  const double spread = (x.nodes().colwise() - x.nodes().col(0)).cwiseAbs().maxCoeff();
  if (spread == 0.0 || r.energy < 1e-14 || n < 2) {
    r.classification = Classification::Constant;
    return r;
  }
  const UniformDifferentiator diff(n, 9);
  const Eigen::MatrixXd xd = diff.first(x.nodes());
  const Eigen::MatrixXd xdd = diff.second(x.nodes());

  r.interior_strictly_inside = true;
  for (int i = 1; i < n; ++i) {
    const Vec p = x.node(i);
    if (b.phi(p) >= -tol.tol_contact) {
      r.interior_strictly_inside = false;
      const Vec v = xd.col(i);
      const Vec nu = unit_normal(b, m, p);
      r.tangency_max = std::max(r.tangency_max, std::abs(m.inner(p, nu, v)) / m.norm(p, v));
      continue;
    }
    const Vec acc = Vec(xdd.col(i)) + christoffel_contract(m, p, xd.col(i), xd.col(i));
    r.residual_interior = std::max(r.residual_interior, m.norm(p, acc));
  }
  r.lambda = lambda_profile(x, b, m, tol.tol_contact);
  r.lambda_max = -std::numeric_limits<double>::infinity();
  for (const auto& [i, l] : r.lambda) r.lambda_max = std::max(r.lambda_max, l);
  if (r.lambda.empty()) r.lambda_max = 0.0;

  std::vector<double> speed(n + 1);
  double mean = 0.0;
  for (int i = 0; i <= n; ++i) {
    speed[i] = m.inner(x.node(i), xd.col(i), xd.col(i));
    mean += speed[i];
  }
  mean /= n + 1;
  r.mean_speed = mean;
  for (double s : speed) r.speed_variation = std::max(r.speed_variation, std::abs(s - mean));

  for (int e = 0; e < 2; ++e) {
    const int i = e == 0 ? 0 : n;
    const Vec p = x.node(i);
    const Vec v = xd.col(i);
    const Vec nu = unit_normal(b, m, p);
    const double c = m.inner(p, nu, v);
    const double t = m.norm(p, v - c * nu);
    // Leaving along -nu at the start, arriving along +nu at the end.
    r.endpoint_angles[e] = std::atan2(t, e == 0 ? -c : c);
  }

  for (int i = 0; i + 1 < n; ++i) {
    const Vec d0 = x.node(i + 1) - x.node(i);
    const Vec d1 = x.node(i + 2) - x.node(i + 1);
    const double nn = d0.norm() * d1.norm();
    if (nn == 0.0) {
      r.c1_max_angle = std::numbers::pi;
      break;
    }
    const double cross = std::sqrt(std::max(0.0, nn * nn - d0.dot(d1) * d0.dot(d1)));
    r.c1_max_angle = std::max(r.c1_max_angle, std::atan2(cross, d0.dot(d1)));
  }

  const double scale = 1.0 + r.energy;
  const bool smooth = r.residual_interior <= tol.tol_res * scale && r.speed_variation <= tol.tol_speed * scale &&
                      r.endpoint_angles[0] <= tol.tol_angle && r.endpoint_angles[1] <= tol.tol_angle &&
                      r.c1_max_angle <= tol.tol_c1;
  if (smooth && r.interior_strictly_inside) {
    r.classification = Classification::OGC;
  } else if (smooth && !r.lambda.empty() && r.lambda_max <= tol.tol_lambda * scale &&
             r.tangency_max <= tol.tol_tangency) {
    r.classification = Classification::BoundaryCritical;
  } else {
    r.classification = Classification::NotCritical;
  }
  return r;
}

nlohmann::json report_to_json(const CriticalReport& r) {
  nlohmann::json lambda = nlohmann::json::array();
  for (const auto& [i, l] : r.lambda) lambda.push_back({{"node", i}, {"lambda", l}});
  return {{"classification", to_string(r.classification)},
          {"energy", r.energy},
          {"residual_interior", r.residual_interior},
          {"lambda", lambda},
          {"lambda_max", r.lambda_max},
          {"tangency_max", r.tangency_max},
          {"speed_variation", r.speed_variation},
          {"mean_speed", r.mean_speed},
          {"endpoint_angles", {r.endpoint_angles[0], r.endpoint_angles[1]}},
          {"c1_max_angle", r.c1_max_angle},
          {"interior_strictly_inside", r.interior_strictly_inside}};
}

}  // namespace ogc
