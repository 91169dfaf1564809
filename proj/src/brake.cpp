#include "ogc/brake.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "ogc/parallel.hpp"
#include "ogc/shooting.hpp"

namespace ogc {

double Potential::value(const Vec& q) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Harmonic: return 0.5 * q.squaredNorm();
    case Kind::Cubic: return 0.5 * q.squaredNorm() + eps * q(0) * q(0) * q(0);
  }
  return 0.0;
}

Vec Potential::gradient(const Vec& q) const {
  if (kind == Kind::Zero) return Vec::Zero(q.size());
  Vec g = q;
  if (kind == Kind::Cubic) g(0) += 3.0 * eps * q(0) * q(0);
  return g;
}

Mat Potential::hessian(const Vec& q) const {
  const int d = static_cast<int>(q.size());
  if (kind == Kind::Zero) return Mat::Zero(d, d);
  Mat h = Mat::Identity(d, d);
  if (kind == Kind::Cubic) h(0, 0) += 6.0 * eps * q(0);
  return h;
}

std::string to_string(Potential::Kind k) {
  switch (k) {
    case Potential::Kind::Zero: return "zero";
    case Potential::Kind::Harmonic: return "harmonic";
    case Potential::Kind::Cubic: return "cubic";
  }
  return "zero";
}

Vec lagrangian_acceleration(const LagrangianData& L, const Vec& q, const Vec& qd) {
  return geodesic_acceleration(L.base, q, qd) - L.base.raise(q, L.V.gradient(q));
}

double mechanical_energy(const LagrangianData& L, const Vec& q, const Vec& qd) {
  return 0.5 * L.base.inner(q, qd, qd) + L.V.value(q);
}

namespace {

// Distance from the origin to {V = level} along the unit direction u.
double ray_radius(const Potential& V, const Vec& u, double level) {
  double hi = 0.5;
  while (V.value(hi * u) <= level) {
    hi *= 2.0;
    if (hi > 1e3) throw ConfigError("sublevel set of V is unbounded along a sampled ray");
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (V.value(mid * u) <= level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<Vec> sample_directions(int dim, int count) {
  std::vector<Vec> dirs;
  for (int i = 0; i < dim; ++i)
    for (double s : {-1.0, 1.0}) {
      Vec u = Vec::Zero(dim);
      u(i) = s;
      dirs.push_back(u);
    }
  for (int k = 1; dirs.size() < static_cast<std::size_t>(count); ++k) {
    Vec u = (halton(k, dim).array() - 0.5).matrix();
    if (u.norm() > 1e-3) dirs.push_back(u.normalized());
  }
  return dirs;
}

void rk4(const LagrangianData& L, Vec& q, Vec& v, double h) {
  const Vec a1 = lagrangian_acceleration(L, q, v);
  const Vec q2 = q + 0.5 * h * v, v2 = v + 0.5 * h * a1;
  const Vec a2 = lagrangian_acceleration(L, q2, v2);
  const Vec q3 = q + 0.5 * h * v2, v3 = v + 0.5 * h * a2;
  const Vec a3 = lagrangian_acceleration(L, q3, v3);
  const Vec q4 = q + h * v3, v4 = v + h * a3;
  const Vec a4 = lagrangian_acceleration(L, q4, v4);
  q += (h / 6.0) * (v + 2.0 * v2 + 2.0 * v3 + v4);
  v += (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
}

// Kutta's 3/8 rule, used only for verification.
void rk38(const LagrangianData& L, Vec& q, Vec& v, double h) {
  const Vec k1q = v, k1v = lagrangian_acceleration(L, q, v);
  const Vec q2 = q + h / 3.0 * k1q, v2 = v + h / 3.0 * k1v;
  const Vec k2q = v2, k2v = lagrangian_acceleration(L, q2, v2);
  const Vec q3 = q + h * (-k1q / 3.0 + k2q), v3 = v + h * (-k1v / 3.0 + k2v);
  const Vec k3q = v3, k3v = lagrangian_acceleration(L, q3, v3);
  const Vec q4 = q + h * (k1q - k2q + k3q), v4 = v + h * (k1v - k2v + k3v);
  const Vec k4q = v4, k4v = lagrangian_acceleration(L, q4, v4);
  q += (h / 8.0) * (k1q + 3.0 * k2q + 3.0 * k3q + k4q);
  v += (h / 8.0) * (k1v + 3.0 * k2v + 3.0 * k3v + k4v);
}

// Integrates until dV/dt changes sign from positive to nonpositive, i.e. V
// reaches a local maximum along the motion. The crossing is bisected.
BrakeOrbit integrate_to_turning(const LagrangianData& L, const Vec& q0, const Vec& v0, double h, double max_time,
                                double chart_radius) {
  BrakeOrbit o;
  o.step = h;
  Vec q = q0, v = v0;
  double t = 0.0;
  auto push = [&](double tt, const Vec& qq, const Vec& vv) {
    o.t.push_back(tt);
    o.q.push_back(qq);
    o.qdot.push_back(vv);
    o.energy_residual.push_back(std::abs(mechanical_energy(L, qq, vv) - L.E));
  };
  push(t, q, v);
  bool seen_positive = false;
  while (t < max_time) {
    const Vec qs = q, vs = v;
    rk4(L, q, v, h);
    const double s = L.V.gradient(q).dot(v);
    if (seen_positive && s <= 0.0) {
      double lo = 0.0, hi = h;
      Vec qe = q, ve = v;
      for (int it = 0; it < 200 && hi - lo > 4e-16 * h; ++it) {
        const double mid = 0.5 * (lo + hi);
        Vec qm = qs, vm = vs;
        rk4(L, qm, vm, mid);
        if (L.V.gradient(qm).dot(vm) > 0.0) {
          lo = mid;
        } else {
          hi = mid;
          qe = qm;
          ve = vm;
        }
      }
      push(t + hi, qe, ve);
      return o;
    }
    if (s > 0.0) seen_positive = true;
    t += h;
    push(t, q, v);
    if (!(q.norm() < chart_radius)) break;
  }
  throw NumericError("no turning point: the potential never brakes the motion");
}

Vec project_to_shell(const LagrangianData& L, Vec q) {
  for (int it = 0; it < 50; ++it) {
    const double f = L.V.value(q) - L.E;
    const Vec g = L.V.gradient(q);
    if (std::abs(f) <= 1e-15 * (1.0 + std::abs(L.E)) || !(g.squaredNorm() > 0.0)) break;
    q -= (f / g.squaredNorm()) * g;
  }
  return q;
}

double max_drift_per_time(const BrakeOrbit& o) {
  double worst = 0.0;
  for (double r : o.energy_residual) worst = std::max(worst, r);
  return worst / std::max(o.half_period(), 1.0);
}

}  // namespace

MetricField jacobi_metric_field(const LagrangianData& L, double floor) {
  // Below `floor`, E - V is replaced by a smooth positive continuation so that
  // RK4 stages overshooting the shrunk boundary stay defined.
  const LagrangianData Lc = L;
  auto weight = [Lc, floor](const Vec& x, double* slope) {
    const double w = Lc.E - Lc.V.value(x);
    if (floor <= 0.0 && !(w > 0.0)) throw ConfigError("Jacobi metric evaluated outside {V < E}");
    if (floor <= 0.0 || w >= floor) {
      if (slope) *slope = 1.0;
      return w;
    }
    const double e = std::exp((w - floor) / floor);
    if (slope) *slope = e;
    return floor * e;
  };
  const int d = L.base.dim();
  if (L.base.is_conformal()) {
    ConformalFactor f;
    f.value = [Lc, weight](const Vec& x) { return weight(x, nullptr) * Lc.base.factor().value(x); };
    f.gradient = [Lc, weight](const Vec& x) -> Vec {
      double slope = 0.0;
      const double w = weight(x, &slope);
      return -slope * Lc.base.factor().value(x) * Lc.V.gradient(x) + w * Lc.base.factor().gradient(x);
    };
    return MetricField::conformal(d, f, MetricField::Family::Jacobi);
  }
  auto eval = [Lc, weight](const Vec& x) -> Mat { return weight(x, nullptr) * Lc.base.at(x); };
  auto derivs = [Lc, weight](const Vec& x) {
    double slope = 0.0;
    const double w = weight(x, &slope);
    const Vec dV = Lc.V.gradient(x);
    const Mat g = Lc.base.at(x);
    MetricDerivatives base = Lc.base.derivatives(x), out;
    for (int k = 0; k < x.size(); ++k) out[k] = -slope * dV(k) * g + w * base[k];
    return out;
  };
  return MetricField::general(d, eval, derivs);
}

JacobiDomain jacobi_metric(const LagrangianData& L, double margin) {
  const int d = L.base.dim();
  if (d < 2) throw ConfigError("Jacobi metric needs dim >= 2");
  const Vec origin = Vec::Zero(d);
  if (!(L.V.value(origin) < L.E)) throw ConfigError("chart origin is not inside the sublevel {V < E}");
  const auto dirs = sample_directions(d, 64);
  double shell = 0.0;
  for (const Vec& u : dirs) shell = std::max(shell, ray_radius(L.V, u, L.E));
  double min_V = L.V.value(origin);
  for (int k = 1; k <= 4096; ++k) {
    const Vec p = (2.0 * halton(k, d) - Vec::Ones(d)) * shell;
    const double v = L.V.value(p);
    if (v <= L.E) min_V = std::min(min_V, v);
  }
  if (!(margin > 0.0)) margin = 1e-2 * (L.E - min_V);
  const double level = L.E - margin;
  if (!(L.V.value(origin) < level)) throw ConfigError("margin too large: the shrunk domain misses the origin");

  // Star-shapedness and regularity on sampled rays.
  double bound = 0.0;
  for (const Vec& u : dirs) {
    const double r = ray_radius(L.V, u, level);
    bound = std::max(bound, r);
    int changes = 0;
    bool inside = true;
    for (int k = 1; k <= 400; ++k) {
      const bool in = L.V.value((1.2 * shell * k / 400.0) * u) <= level;
      if (in != inside) ++changes;
      inside = in;
    }
    if (changes != 1) throw ConfigError("shrunk domain is not star-shaped along a sampled ray");
    if (!(L.V.gradient(ray_radius(L.V, u, L.E) * u).norm() > 1e-6))
      throw ConfigError("grad V degenerates on the energy shell");
  }

  JacobiDomain J;
  J.margin = margin;
  J.min_V = min_V;
  J.metric = jacobi_metric_field(L, 0.25 * margin);
  const Potential V = L.V;
  J.boundary = DomainBoundary::level_set(d, [V, level](const Vec& x) { return V.value(x) - level; }, bound * 1.02);
  J.boundary.kind = "jacobi";
  J.boundary.grad = [V](const Vec& x) -> Vec { return V.gradient(x); };
  J.boundary.hess = [V](const Vec& x) -> Mat { return V.hessian(x); };
  J.boundary.radius = [V, level](const Vec& u) { return ray_radius(V, u, level); };
  J.boundary.delta0 = std::min(0.2, 0.5 * margin);
  return J;
}

BrakeOrbit brake_from_rest(const LagrangianData& L, const Vec& q0, double step, double max_time) {
  return integrate_to_turning(L, q0, Vec::Zero(q0.size()), step, max_time, 1e6);
}

BrakeOrbit ogc_to_brake(const LagrangianData& L, const JacobiDomain& J, const DiscretePath& ogc,
                        const BrakeConfig& cfg) {
  const int n = ogc.segments();
  if (n < 2) throw UsageError("ogc_to_brake needs a path with at least two segments");
  const int mid = n / 2;
  const Vec c = ogc.node(mid);
  const Vec dir = ogc.node(mid + 1) - ogc.node(mid - 1);
  const double w = L.E - L.V.value(c);
  if (!(w > 0.0) || !(dir.norm() > 0.0)) throw UsageError("OGC midpoint is not a regular interior point");
  const Vec qd = std::sqrt(2.0 * w) * dir / L.base.norm(c, dir);
  const double chart = 10.0 * J.boundary.bounding_radius;

  // Backwards from the midpoint to the first turning point.
  const BrakeOrbit back = integrate_to_turning(L, c, -qd, cfg.initial_step / 4.0, cfg.max_time, chart);
  Vec qa = project_to_shell(L, back.q.back());

  // Step calibration on the energy drift.
  double h = cfg.initial_step;
  BrakeOrbit orbit = brake_from_rest(L, qa, h, cfg.max_time);
  for (int k = 0; k < 12 && max_drift_per_time(orbit) >= cfg.drift_per_time; ++k) {
    h *= 0.5;
    orbit = brake_from_rest(L, qa, h, cfg.max_time);
  }

  // Gauss-Newton on the start point in the shell so that the far turning point is at rest.
  DomainBoundary shell = DomainBoundary::level_set(L.base.dim(), [&L](const Vec& x) { return L.V.value(x) - L.E; },
                                                   J.boundary.bounding_radius * 2.0);
  shell.grad = [&L](const Vec& x) -> Vec { return L.V.gradient(x); };
  auto end_velocity = [&](const Vec& q0, BrakeOrbit* keep) {
    BrakeOrbit o = brake_from_rest(L, q0, h, cfg.max_time);
    const Vec r = o.qdot.back();
    if (keep) *keep = std::move(o);
    return r;
  };
  Vec r = orbit.qdot.back();
  int it = 0;
  for (; it < cfg.max_newton && r.norm() > cfg.newton_tol; ++it) {
    const Mat T = boundary_tangent_basis(shell, qa);
    Eigen::MatrixXd jac(r.size(), T.cols());
    const double fd = 1e-7;
    for (int j = 0; j < T.cols(); ++j)
      jac.col(j) = (end_velocity(project_to_shell(L, qa + fd * Vec(T.col(j))), nullptr) - r) / fd;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd du = svd.solve(-Eigen::VectorXd(r));
    bool accepted = false;
    for (double lam = 1.0; lam > 1e-4; lam *= 0.5) {
      const Vec qt = project_to_shell(L, qa + T * Vec(lam * du));
      BrakeOrbit ot;
      const Vec rt = end_velocity(qt, &ot);
      if (rt.norm() < r.norm()) {
        qa = qt;
        r = rt;
        orbit = std::move(ot);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!(r.norm() < cfg.brake_tol)) {
    std::ostringstream os;
    os << "brake shooting failed: final speed " << r.norm() << " after " << it << " Gauss-Newton steps";
    throw NumericError(os.str());
  }
  return orbit;
}

BrakeReport verify_brake(const LagrangianData& L, const BrakeOrbit& orbit, const BrakeConfig& cfg) {
  BrakeReport rep;
  const std::size_t N = orbit.t.size();
  if (N < 2) throw UsageError("orbit has fewer than two samples");
  Vec q = orbit.q[0], v = orbit.qdot[0];
  for (std::size_t i = 0; i < N; ++i) {
    if (i > 0) {
      const double dt = orbit.t[i] - orbit.t[i - 1];
      rk38(L, q, v, 0.5 * dt);
      rk38(L, q, v, 0.5 * dt);
    }
    rep.deviation = std::max(rep.deviation, (q - orbit.q[i]).norm());
    rep.energy_residual =
        std::max(rep.energy_residual, std::abs(mechanical_energy(L, orbit.q[i], orbit.qdot[i]) - L.E));
  }
  for (int e = 0; e < 2; ++e) {
    const std::size_t i = e == 0 ? 0 : N - 1;
    rep.brake_speed[e] = L.base.norm(orbit.q[i], orbit.qdot[i]);
    rep.brake_level[e] = std::abs(L.V.value(orbit.q[i]) - L.E);
  }
  // Continue through the final brake instant; a brake orbit retraces itself.
  q = orbit.q[N - 1];
  v = orbit.qdot[N - 1];
  for (std::size_t j = 1; j < N; ++j) {
    const double dt = orbit.t[N - j] - orbit.t[N - j - 1];
    rk38(L, q, v, 0.5 * dt);
    rk38(L, q, v, 0.5 * dt);
    rep.reflection = std::max(rep.reflection, (q - orbit.q[N - 1 - j]).norm());
  }
  const double etol = cfg.energy_tol * (1.0 + std::abs(L.E));
  rep.brake_ok = rep.brake_speed[0] < cfg.brake_tol && rep.brake_speed[1] < cfg.brake_tol &&
                 rep.brake_level[0] < etol && rep.brake_level[1] < etol;
  rep.ok = rep.brake_ok && rep.deviation < cfg.deviation_tol && rep.energy_residual < etol &&
           rep.reflection < cfg.deviation_tol;
  return rep;
}

BrakeOrbit reverse(const BrakeOrbit& orbit) {
  BrakeOrbit r;
  r.step = orbit.step;
  const double T = orbit.t.empty() ? 0.0 : orbit.t.back();
  for (std::size_t k = orbit.t.size(); k-- > 0;) {
    r.t.push_back(T - orbit.t[k]);
    r.q.push_back(orbit.q[k]);
    r.qdot.push_back(-orbit.qdot[k]);
    r.energy_residual.push_back(orbit.energy_residual[k]);
  }
  return r;
}

namespace {

Vec hermite(const BrakeOrbit& o, double t) {
  auto it = std::upper_bound(o.t.begin(), o.t.end(), t);
  std::size_t i = it == o.t.begin() ? 0 : static_cast<std::size_t>(it - o.t.begin()) - 1;
  i = std::min(i, o.t.size() - 2);
  const double h = o.t[i + 1] - o.t[i];
  const double s = std::clamp((t - o.t[i]) / h, 0.0, 1.0);
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * o.q[i] + h10 * h * o.qdot[i] + h01 * o.q[i + 1] + h11 * h * o.qdot[i + 1];
}

Vec hermite_velocity(const BrakeOrbit& o, double t) {
  auto it = std::upper_bound(o.t.begin(), o.t.end(), t);
  std::size_t i = it == o.t.begin() ? 0 : static_cast<std::size_t>(it - o.t.begin()) - 1;
  i = std::min(i, o.t.size() - 2);
  const double h = o.t[i + 1] - o.t[i];
  const double s = std::clamp((t - o.t[i]) / h, 0.0, 1.0);
  const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
  const double d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
  return (d00 * o.q[i] + d01 * o.q[i + 1]) / h + d10 * o.qdot[i] + d11 * o.qdot[i + 1];
}

}  // namespace

DiscretePath orbit_to_path(const BrakeOrbit& orbit, int n) {
  if (orbit.t.size() < 2 || n < 1) throw UsageError("orbit_to_path needs two samples and n >= 1");
  Eigen::MatrixXd nodes(orbit.q[0].size(), n + 1);
  const double t0 = orbit.t.front(), T = orbit.half_period();
  for (int i = 0; i <= n; ++i) nodes.col(i) = hermite(orbit, t0 + T * i / n);
  nodes.col(0) = orbit.q.front();
  nodes.col(n) = orbit.q.back();
  return DiscretePath(std::move(nodes));
}

JacobiIdentity jacobi_length_identity(const LagrangianData& L, const JacobiDomain& J, const DiscretePath& ogc,
                                      const BrakeOrbit& orbit) {
  JacobiIdentity id;
  // Five-point Gauss-Legendre on each segment of the polyline.
  static constexpr double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                   0.9061798459386640};
  static constexpr double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                   0.4786286704993665, 0.2369268850561891};
  for (int i = 0; i < ogc.segments(); ++i) {
    const Vec a = ogc.node(i), d = ogc.node(i + 1) - ogc.node(i);
    for (int k = 0; k < 5; ++k) id.ogc_length += 0.5 * gw[k] * J.metric.norm(a + 0.5 * (1.0 + gx[k]) * d, d);
  }
  // Dense Hermite resampling; the integrand is cut where the orbit leaves the shrunk domain.
  const double level = L.E - J.margin;
  auto integrand = [&](const Vec& q, const Vec& v) {
    const double w = std::max(0.0, L.E - L.V.value(q));
    return std::sqrt(2.0 * w) * L.base.norm(q, v) / std::sqrt(2.0);
  };
  const int sub = 16;
  for (std::size_t i = 0; i + 1 < orbit.t.size(); ++i) {
    const double h = (orbit.t[i + 1] - orbit.t[i]) / sub;
    for (int k = 0; k < sub; ++k) {
      const double ta = orbit.t[i] + k * h, tb = ta + h;
      const Vec qa = hermite(orbit, ta), qb = hermite(orbit, tb);
      const double pa = L.V.value(qa) - level, pb = L.V.value(qb) - level;
      if (pa > 0.0 && pb > 0.0) continue;
      const double fa = integrand(qa, hermite_velocity(orbit, ta));
      const double fb = integrand(qb, hermite_velocity(orbit, tb));
      if (pa <= 0.0 && pb <= 0.0) {
        id.orbit_integral += 0.5 * h * (fa + fb);
      } else {
        const double theta = pa / (pa - pb);  // fraction of the sub-interval at the crossing
        const double fc = fa + theta * (fb - fa);
        id.orbit_integral += pa <= 0.0 ? 0.5 * theta * h * (fa + fc) : 0.5 * (1.0 - theta) * h * (fc + fb);
      }
    }
  }
  id.relative_error = std::abs(id.ogc_length - id.orbit_integral) / std::max(id.ogc_length, 1e-300);
  return id;
}

BrakeCatalog brake_multiplicity(const LagrangianData& L, const MultistartConfig& mcfg, const BrakeConfig& bcfg,
                                double margin) {
  const JacobiDomain J = jacobi_metric(L, margin);
  MultistartConfig mc = mcfg;
  mc.refine.shoot.step = std::min(mc.refine.shoot.step, bcfg.jacobi_shoot_step);
  mc.refine.sample_step = std::min(mc.refine.sample_step, bcfg.jacobi_sample_step);
  mc.refine.discrete_check = false;
  const OGCCatalog cat = multistart(J.metric, J.boundary, mc);
  BrakeCatalog out;
  out.ogc_count = cat.size();
  out.target = L.base.dim();

  struct Job {
    bool ok = false;
    std::string failure;
    BrakeOrbit orbit;
    BrakeReport report;
    double jacobi_error = 0.0;
  };
  std::vector<Job> jobs(cat.entries().size());
  parallel_for(static_cast<int>(jobs.size()), mcfg.threads, [&](int k) {
    Job& j = jobs[k];
    try {
      j.orbit = ogc_to_brake(L, J, cat.entries()[k].path, bcfg);
      j.report = verify_brake(L, j.orbit, bcfg);
      j.jacobi_error = jacobi_length_identity(L, J, cat.entries()[k].path, j.orbit).relative_error;
      j.ok = j.report.ok;
      if (!j.ok) j.failure = "orbit failed verification";
    } catch (const std::exception& e) {
      j.failure = e.what();
    }
  });

  const double tol = mcfg.hausdorff_rel * 2.0 * J.boundary.bounding_radius;
  std::vector<DiscretePath> images;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (!jobs[k].ok) {
      out.failures.push_back("entry " + std::to_string(k) + ": " + jobs[k].failure);
      continue;
    }
    const DiscretePath img = orbit_to_path(jobs[k].orbit, 128);
    bool fresh = true;
    for (const auto& other : images) fresh = fresh && distinct(img, other, tol);
    if (!fresh) continue;
    images.push_back(img);
    out.orbits.push_back(std::move(jobs[k].orbit));
    out.reports.push_back(jobs[k].report);
    out.jacobi_errors.push_back(jobs[k].jacobi_error);
  }
  return out;
}

std::string orbit_to_csv(const BrakeOrbit& orbit) {
  std::ostringstream os;
  const int d = orbit.q.empty() ? 0 : static_cast<int>(orbit.q[0].size());
  os << "t";
  for (int k = 0; k < d; ++k) os << ",q" << k;
  for (int k = 0; k < d; ++k) os << ",qdot" << k;
  os << ",energy_residual\n";
  char buf[64];
  for (std::size_t i = 0; i < orbit.t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", orbit.t[i]);
    os << buf;
    for (int k = 0; k < d; ++k) {
      std::snprintf(buf, sizeof buf, ",%.17g", orbit.q[i](k));
      os << buf;
    }
    for (int k = 0; k < d; ++k) {
      std::snprintf(buf, sizeof buf, ",%.17g", orbit.qdot[i](k));
      os << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g\n", orbit.energy_residual[i]);
    os << buf;
  }
  return os.str();
}

nlohmann::json brake_catalog_to_json(const BrakeCatalog& catalog) {
  auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json orbits = nlohmann::json::array();
  for (std::size_t k = 0; k < catalog.orbits.size(); ++k) {
    const auto& o = catalog.orbits[k];
    const auto& r = catalog.reports[k];
    orbits.push_back({{"half_period", o.half_period()},
                      {"step", o.step},
                      {"start", vec(o.q.front())},
                      {"end", vec(o.q.back())},
                      {"deviation", r.deviation},
                      {"energy_residual", r.energy_residual},
                      {"brake_speed", {r.brake_speed[0], r.brake_speed[1]}},
                      {"reflection", r.reflection},
                      {"jacobi_relative_error", catalog.jacobi_errors[k]},
                      {"verified", r.ok}});
  }
  return {{"count", catalog.orbits.size()},
          {"target", catalog.target},
          {"ogc_count", catalog.ogc_count},
          {"failures", catalog.failures},
          {"orbits", orbits}};
}

std::string brake_svg(const LagrangianData& L, const JacobiDomain& J, const BrakeCatalog& catalog) {
  if (L.base.dim() != 2) throw UsageError("SVG rendering is available in dim 2 only");
  double r = 0.0;
  std::vector<Vec> shell;
  for (int k = 0; k < 256; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 256;
    Vec u(2);
    u << std::cos(a), std::sin(a);
    shell.push_back(ray_radius(L.V, u, L.E) * u);
    r = std::max(r, shell.back().norm());
  }
  r *= 1.05;
  (void)J;
  auto px = [&](const Vec& p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f,%.3f", (p(0) / r + 1.0) * 200.0, (1.0 - p(1) / r) * 200.0);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"0 0 400 400\">\n";
  os << "<polygon fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
  for (std::size_t k = 0; k < shell.size(); ++k) os << (k ? " " : "") << px(shell[k]);
  os << "\"/>\n";
  for (const auto& o : catalog.orbits) {
    const DiscretePath p = orbit_to_path(o, 128);
    os << "<polyline fill=\"none\" stroke=\"#2050c0\" stroke-width=\"1\" points=\"";
    for (int i = 0; i < p.node_count(); ++i) os << (i ? " " : "") << px(p.node(i));
    os << "\"/>\n";
    for (const Vec& e : {o.q.front(), o.q.back()}) {
      const std::string c = px(e);
      const auto comma = c.find(',');
      os << "<circle cx=\"" << c.substr(0, comma) << "\" cy=\"" << c.substr(comma + 1)
         << "\" r=\"3\" fill=\"#c03020\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace ogc
