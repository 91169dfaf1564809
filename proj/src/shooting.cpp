#include "ogc/shooting.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "ogc/parallel.hpp"

namespace ogc {

void geodesic_rk4_step(const MetricField& m, Vec& x, Vec& v, double h) {
  const Vec a1 = geodesic_acceleration(m, x, v);
  const Vec x2 = x + 0.5 * h * v, v2 = v + 0.5 * h * a1;
  const Vec a2 = geodesic_acceleration(m, x2, v2);
  const Vec x3 = x + 0.5 * h * v2, v3 = v + 0.5 * h * a2;
  const Vec a3 = geodesic_acceleration(m, x3, v3);
  const Vec x4 = x + h * v3, v4 = v + h * a3;
  const Vec a4 = geodesic_acceleration(m, x4, v4);
  x += (h / 6.0) * (v + 2.0 * v2 + 2.0 * v3 + v4);
  v += (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
}

GeodesicTrajectory integrate_geodesic(const MetricField& m, const Vec& p, const Vec& v, double step,
                                      double max_len, double chart_radius) {
  if (!(step > 0.0)) throw UsageError("integration step must be positive");
  if (v.norm() == 0.0) throw UsageError("initial velocity must be nonzero");
  GeodesicTrajectory tr;
  Vec x = p, w = v;
  double t = 0.0;
  tr.t.push_back(t);
  tr.x.push_back(x);
  tr.v.push_back(w);
  while (t < max_len) {
    const double h = std::min(step, max_len - t);
    geodesic_rk4_step(m, x, w, h);
    t += h;
    tr.t.push_back(t);
    tr.x.push_back(x);
    tr.v.push_back(w);
    if (x.norm() > chart_radius) {
      tr.left_chart = true;
      break;
    }
  }
  return tr;
}

std::string to_string(ExitKind k) {
  switch (k) {
    case ExitKind::Orthogonal: return "Orthogonal";
    case ExitKind::Tangent: return "Tangent";
    case ExitKind::Transversal: return "Transversal";
    case ExitKind::NoReturn: return "NoReturn";
  }
  return "NoReturn";
}

DiscretePath sample_geodesic(const MetricField& m, const DomainBoundary& b, const Vec& A, const Vec& v0,
                             double length, int n, double max_step) {
  if (n < 1 || !(length > 0.0)) throw UsageError("sample_geodesic needs n >= 1 and positive length");
  Eigen::MatrixXd nodes(A.size(), n + 1);
  // A few Newton corrections of the length put the last node on the boundary
  // without moving it off the integrated curve.
  for (int pass = 0; pass < 4; ++pass) {
    const int sub = std::max(1, static_cast<int>(std::ceil(length / (n * max_step))));
    const double h = length / (static_cast<double>(n) * sub);
    Vec x = A, v = v0;
    nodes.col(0) = A;
    for (int i = 1; i <= n; ++i) {
      for (int k = 0; k < sub; ++k) geodesic_rk4_step(m, x, v, h);
      nodes.col(i) = x;
    }
    const double ph = b.phi(x);
    const double rate = b.differential(x).dot(v);
    if (std::abs(ph) <= 1e-15 || rate == 0.0) break;
    length -= ph / rate;
  }
  const Vec last = nodes.col(n);
  if (std::abs(b.phi(last)) <= b.delta0) nodes.col(n) = retract_to_boundary(b, m, last);
  return DiscretePath(std::move(nodes));
}

ShotResult shoot_orthogonal(const MetricField& m, const DomainBoundary& b, const Vec& A, const ShootConfig& cfg) {
  if (std::abs(b.phi(A)) > 1e-8) throw UsageError("shoot_orthogonal: start point is not on the boundary");
  ShotResult res;
  res.start = A;
  const Vec v0 = -unit_normal(b, m, A);
  Vec x = A, v = v0;
  double t = 0.0;
  bool inside = false;
  double phi_prev2 = 0.0, phi_prev = 0.0;
  double t_prev = 0.0;
  Vec x_prev = A;
  while (t < cfg.max_len) {
    const Vec xs = x, vs = v;
    const double h = cfg.step;
    geodesic_rk4_step(m, x, v, h);
    if (!b.in_chart(x)) return res;
    const double ph = b.phi(x);
    if (inside && ph >= 0.0) {
      // phi(xs) < 0 <= phi(x): bisect the step length.
      double lo = 0.0, hi = h;
      Vec xe = x, ve = v;
      for (int it = 0; it < 200 && hi - lo > 4e-16 * h; ++it) {
        const double mid = 0.5 * (lo + hi);
        Vec xm = xs, vm = vs;
        geodesic_rk4_step(m, xm, vm, mid);
        const double pm = b.phi(xm);
        if (pm < 0.0) {
          lo = mid;
        } else {
          hi = mid;
          xe = xm;
          ve = vm;
          if (pm == 0.0) break;
        }
      }
      t += hi;
      res.exit = xe;
      res.exit_velocity = ve;
      res.length = t * m.norm(A, v0);
      const Vec nu = unit_normal(b, m, xe);
      res.exit_cos = m.inner(xe, ve, nu) / m.norm(xe, ve);
      if (res.exit_cos > 1.0 - cfg.orth_tol)
        res.kind = ExitKind::Orthogonal;
      else if (std::abs(res.exit_cos) < cfg.tan_tol)
        res.kind = ExitKind::Tangent;
      else
        res.kind = ExitKind::Transversal;
      if (cfg.sample_path) res.path = sample_geodesic(m, b, A, v0, t, cfg.path_nodes, cfg.step);
      return res;
    }
    if (ph < 0.0) {
      // Local maximum of phi at the previous sample, close to the boundary: grazing.
      if (inside && phi_prev > phi_prev2 && phi_prev >= ph && phi_prev > -cfg.graze_tol)
        res.grazing.push_back({t_prev, x_prev, phi_prev});
      inside = true;
    }
    phi_prev2 = phi_prev;
    phi_prev = ph;
    t_prev = t + h;
    x_prev = x;
    t += h;
  }
  return res;
}

ScanReport scan_OT_chords(const MetricField& m, const DomainBoundary& b, int grid, const ShootConfig& cfg,
                          int threads) {
  if (grid < 16) throw UsageError("scan_OT_chords needs at least 16 samples per boundary coordinate");
  const auto samples = boundary_grid(b, grid);
  ScanReport rep;
  rep.entries.resize(samples.size());
  parallel_for(static_cast<int>(samples.size()), threads, [&](int i) {
    rep.entries[i] = {samples[i].index, samples[i].angles, shoot_orthogonal(m, b, samples[i].point, cfg)};
  });
  for (int i = 0; i < static_cast<int>(rep.entries.size()); ++i) {
    const ShotResult& s = rep.entries[i].shot;
    if (!s.grazing.empty()) rep.grazing.push_back(i);
    if (s.kind == ExitKind::NoReturn) {
      ++rep.no_return;
      continue;
    }
    rep.min_abs_exit_cos = std::min(rep.min_abs_exit_cos, std::abs(s.exit_cos));
    if (s.kind == ExitKind::Tangent) rep.tangent.push_back(i);
  }
  return rep;
}

std::string scan_to_csv(const ScanReport& report, bool findings_only) {
  std::ostringstream os;
  os << "index,start_angles,exit_angles,exit_cos,length,kind\n";
  char buf[64];
  auto angles = [&](const std::vector<double>& a) {
    std::string s;
    for (std::size_t k = 0; k < a.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", a[k]);
      s += (k ? ";" : "") + std::string(buf);
    }
    return s;
  };
  auto emit = [&](const ScanEntry& e) {
    os << e.index << ',' << angles(e.start_angles) << ',';
    if (e.shot.kind != ExitKind::NoReturn) os << angles(boundary_angles(e.shot.exit));
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,", e.shot.exit_cos, e.shot.length);
    os << buf << to_string(e.shot.kind) << '\n';
  };
  if (findings_only) {
    for (int i : report.tangent) emit(report.entries[i]);
  } else {
    for (const auto& e : report.entries) emit(e);
  }
  return os.str();
}

Mat boundary_tangent_basis(const DomainBoundary& b, const Vec& p) {
  const Vec w = b.differential(p);
  if (!(w.norm() > 0.0)) throw DegenerateBoundaryError("no tangent basis where grad phi vanishes");
  const int n = static_cast<int>(w.size());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd(w.normalized()));
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return q.rightCols(n - 1);
}

namespace {

struct ExitResidual {
  Vec r;               // unit exit velocity minus outward unit normal
  double tangential = 0.0;
  ShotResult shot;
};

bool evaluate_residual(const MetricField& m, const DomainBoundary& b, const Vec& A, const ShootConfig& cfg,
                       ExitResidual& out) {
  out.shot = shoot_orthogonal(m, b, A, cfg);
  if (out.shot.kind == ExitKind::NoReturn) return false;
  const Vec& xe = out.shot.exit;
  const Vec& ve = out.shot.exit_velocity;
  const Vec nu = unit_normal(b, m, xe);
  const double speed = m.norm(xe, ve);
  const double c = m.inner(xe, ve, nu);
  out.r = ve / speed - nu;
  out.tangential = m.norm(xe, ve - c * nu) / speed;
  return true;
}

}  // namespace

RefineResult ogc_refine(const MetricField& m, const DomainBoundary& b, const Vec& A0, const RefineConfig& cfg) {
  RefineResult res;
  ShootConfig sc = cfg.shoot;
  sc.sample_path = false;
  Vec A = std::abs(b.phi(A0)) <= 1e-12 ? A0 : b.boundary_point(A0);
  ExitResidual cur;
  if (!evaluate_residual(m, b, A, sc, cur)) {
    res.failure = "shot from the start point does not return";
    return res;
  }
  const int dim = static_cast<int>(A.size());
  for (res.iterations = 0;; ++res.iterations) {
    res.tangential = cur.tangential;
    if (cur.tangential < cfg.tol && cur.shot.exit_cos > 0.0) break;
    if (res.iterations >= cfg.max_iters) {
      res.failure = "no convergence";
      return res;
    }
    const Mat basis = boundary_tangent_basis(b, A);
    Eigen::MatrixXd jac(dim, dim - 1);
    for (int j = 0; j < dim - 1; ++j) {
      ExitResidual pert;
      const Vec Ap = b.boundary_point(A + cfg.fd_step * Vec(basis.col(j)));
      if (!evaluate_residual(m, b, Ap, sc, pert)) {
        res.failure = "perturbed shot does not return";
        return res;
      }
      jac.col(j) = (pert.r - cur.r) / cfg.fd_step;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 1e-12 * std::max(1.0, sv(0)))) {
      res.failure = "singular Jacobian";
      return res;
    }
    Eigen::VectorXd du = svd.solve(-Eigen::VectorXd(cur.r));
    if (du.norm() > 0.5) du *= 0.5 / du.norm();
    bool accepted = false;
    for (double lam = 1.0; lam > 1e-4; lam *= 0.5) {
      ExitResidual trial;
      const Vec At = b.boundary_point(A + basis * Vec(lam * du));
      if (!evaluate_residual(m, b, At, sc, trial)) continue;
      if (trial.r.norm() < cur.r.norm()) {
        A = At;
        cur = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.failure = "line search failed";
      return res;
    }
  }
  res.start = A;
  res.shot = cur.shot;
  const Vec v0 = -unit_normal(b, m, A);
  res.path = sample_geodesic(m, b, A, v0, cur.shot.length / m.norm(A, v0), cfg.shoot.path_nodes,
                             std::min(cfg.sample_step, cfg.shoot.step));
  res.shot.path = res.path;
  res.report = verify_critical(res.path, b, m, cfg.critical);
  if (!cfg.discrete_check) {
    const double angle_tol = cfg.critical.tol_angle;
    if (res.report.endpoint_angles[0] > angle_tol || res.report.endpoint_angles[1] > angle_tol ||
        !res.report.interior_strictly_inside) {
      res.failure = "refined shot is not an orthogonal chord";
      return res;
    }
    res.report.classification = Classification::OGC;
  } else if (res.report.classification != Classification::OGC) {
    res.failure = "refined path fails the critical-curve check";
    return res;
  }
  res.ok = true;
  return res;
}

}  // namespace ogc
