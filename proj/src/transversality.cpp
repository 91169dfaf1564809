#include "ogc/transversality.hpp"

#include <algorithm>
#include <cmath>

#include "ogc/shooting.hpp"

namespace ogc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Orthonormal basis of the column space, with numerical rank relative to the largest singular value.
MatrixXd column_basis(const MatrixXd& M, double tol = 1e-10) {
  if (M.cols() == 0) return MatrixXd(M.rows(), 0);
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  int r = 0;
  while (r < s.size() && s(r) > tol * std::max(s(0), 1e-300)) ++r;
  return svd.matrixU().leftCols(r);
}

int numerical_rank(const MatrixXd& M, double tol = 1e-10) { return static_cast<int>(column_basis(M, tol).cols()); }

// Null space of a wide matrix, as orthonormal columns.
MatrixXd null_space(const MatrixXd& M, double tol = 1e-10) {
  const int n = static_cast<int>(M.cols());
  if (M.rows() == 0) return MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int r = 0;
  while (r < s.size() && s(r) > tol * std::max(s(0), 1e-300)) ++r;
  return svd.matrixV().rightCols(n - r);
}

}  // namespace

std::string to_string(Decision d) {
  switch (d) {
    case Decision::False: return "false";
    case Decision::True: return "true";
    case Decision::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

std::string to_string(Branch b) {
  switch (b) {
    case Branch::None: return "none";
    case Branch::A: return "a";
    case Branch::B: return "b";
    case Branch::Both: return "a+b";
  }
  return "none";
}

Decision threshold_decision(double value, double scale, double tol) {
  const double t = tol * scale;
  if (value > 10.0 * t) return Decision::True;
  if (value < 0.1 * t) return Decision::False;
  return Decision::Indeterminate;
}

DomainBoundary sphere_surface(const Vec& center, double radius) {
  DomainBoundary s = DomainBoundary::level_set(
      static_cast<int>(center.size()),
      [center, radius](const Vec& x) { return ((x - center).squaredNorm() - radius * radius) / (2.0 * radius); },
      center.norm() + radius);
  s.kind = "sphere";
  s.grad = [center, radius](const Vec& x) -> Vec { return (x - center) / radius; };
  s.hess = [radius](const Vec& x) -> Mat {
    return Mat::Identity(x.size(), x.size()) / radius;
  };
  return s;
}

DomainBoundary plane_surface(const Vec& point, const Vec& normal) {
  const Vec nn = normal.normalized();
  DomainBoundary s = DomainBoundary::level_set(
      static_cast<int>(point.size()), [point, nn](const Vec& x) { return nn.dot(x - point); }, 1e3);
  s.kind = "plane";
  s.grad = [nn](const Vec&) -> Vec { return nn; };
  s.hess = [](const Vec& x) -> Mat { return Mat::Zero(x.size(), x.size()); };
  return s;
}

DomainBoundary cylinder_surface(const Vec& axis_point, const Vec& axis_dir, double radius) {
  const Vec d = axis_dir.normalized();
  auto radial = [axis_point, d](const Vec& x) -> Vec {
    const Vec w = x - axis_point;
    return w - w.dot(d) * d;
  };
  DomainBoundary s = DomainBoundary::level_set(
      static_cast<int>(axis_point.size()),
      [radial, radius](const Vec& x) { return (radial(x).squaredNorm() - radius * radius) / (2.0 * radius); }, 1e3);
  s.kind = "cylinder";
  s.grad = [radial, radius](const Vec& x) -> Vec { return radial(x) / radius; };
  s.hess = [d, radius](const Vec& x) -> Mat {
    return (Mat::Identity(x.size(), x.size()) - d * d.transpose()) / radius;
  };
  return s;
}

HypersurfaceData hypersurface_data(const DomainBoundary& S, const MetricField& m, const Vec& p) {
  if (std::abs(S.phi(p)) > 1e-8) throw UsageError("point is not on the hypersurface");
  HypersurfaceData h;
  h.p = p;
  const Vec dF = S.differential(p);
  const Vec grad = m.raise(p, dF);
  h.grad_norm = std::sqrt(dF.dot(grad));
  if (!(h.grad_norm > 1e-12)) throw DegenerateBoundaryError("defining function is critical at p");
  h.normal = grad / h.grad_norm;
  const int d = static_cast<int>(p.size());
  const MatrixXd ker = null_space(MatrixXd(dF.transpose()));
  // Gram-Schmidt in the metric g.
  const Mat g = m.at(p);
  h.tangent = Mat(d, d - 1);
  for (int j = 0; j < d - 1; ++j) {
    Vec u = ker.col(j);
    for (int i = 0; i < j; ++i) u -= (Vec(h.tangent.col(i)).dot(g * u)) * Vec(h.tangent.col(i));
    h.tangent.col(j) = u / std::sqrt(u.dot(g * u));
  }
  h.hessian = hessian_phi(S, m, p);
  return h;
}

Vec second_fundamental_form(const HypersurfaceData& S, const Vec& u, const Vec& u2) {
  return (-u.dot(S.hessian * u2) / S.grad_norm) * S.normal;
}

Mat shape_operator(const HypersurfaceData& S, const MetricField& m, const Vec& v) {
  const double c = m.inner(S.p, S.normal, v);
  const Mat& E = S.tangent;
  return (c / S.grad_norm) * Mat(E.transpose() * S.hessian * E);
}

Vec shape_operator_apply(const HypersurfaceData& S, const MetricField& m, const Vec& v, const Vec& u) {
  const Mat& E = S.tangent;
  const Vec coords = E.transpose() * m.at(S.p) * u;
  return E * (shape_operator(S, m, v) * coords);
}

Mat tangent_intersection(const HypersurfaceData& S1, const HypersurfaceData& S2) {
  // w lies in both tangent spaces iff w = E1 a = E2 b.
  const int d = static_cast<int>(S1.p.size());
  MatrixXd stacked(d, 2 * d - 2);
  stacked << MatrixXd(S1.tangent), -MatrixXd(S2.tangent);
  const MatrixXd ns = null_space(stacked);
  return column_basis(MatrixXd(S1.tangent) * ns.topRows(d - 1));
}

namespace {

void check_pair(const HypersurfaceData& S1, const HypersurfaceData& S2, const MetricField& m, const Vec& v) {
  const double nv = m.norm(S1.p, v);
  if (!(nv > 0.0)) throw UsageError("v must be nonzero");
  const double c1 = m.inner(S1.p, v, S1.normal);
  if (m.norm(S1.p, v - c1 * S1.normal) > 1e-9 * nv) throw UsageError("v is not normal to S1");
  if (std::abs(m.inner(S1.p, v, S2.normal)) > 1e-9 * nv) throw UsageError("v is not tangent to S2");
  MatrixXd span(S1.p.size(), 2 * S1.tangent.cols());
  span << MatrixXd(S1.tangent), MatrixXd(S2.tangent);
  if (numerical_rank(span, 1e-8) < S1.p.size()) throw UsageError("hypersurfaces are not transversal at p");
}

}  // namespace

std::vector<Vec> subspace_Av(const HypersurfaceData& S1, const HypersurfaceData& S2, const MetricField& m,
                             const Vec& v) {
  check_pair(S1, S2, m, v);
  const MatrixXd W = tangent_intersection(S1, S2);
  std::vector<Vec> out;
  for (int j = 0; j < W.cols(); ++j) {
    const Vec w = W.col(j);
    out.push_back(shape_operator_apply(S1, m, v, w) - second_fundamental_form(S2, w, v));
  }
  return out;
}

FixedCheck check_transversal_fixed(const HypersurfaceData& S1, const HypersurfaceData& S2, const MetricField& m,
                                   const Vec& v) {
  FixedCheck r;
  const auto span = subspace_Av(S1, S2, m, v);
  double scale = 1.0;
  for (const Vec& a : span) {
    scale = std::max(scale, m.norm(S1.p, a));
    const double c = std::abs(m.inner(S1.p, a, S2.normal));
    if (c > r.normal_component || r.witness.size() == 0) {
      r.normal_component = std::max(r.normal_component, c);
      r.witness = a;
    }
  }
  r.decision = threshold_decision(r.normal_component, scale);
  if (r.decision != Decision::True) r.witness = Vec();
  return r;
}

FamilyCheck check_transversal_family(const HypersurfaceData& S1, const HypersurfaceData& S2, const MetricField& m,
                                     const Vec& v) {
  FamilyCheck r;
  r.a = check_transversal_fixed(S1, S2, m, v);
  r.alpha_vv = m.norm(S2.p, second_fundamental_form(S2, v, v));
  const double nv = m.norm(S1.p, v);
  r.b = threshold_decision(r.alpha_vv, std::max(1.0, nv * nv));
  const bool a = r.a.decision == Decision::True, b = r.b == Decision::True;
  r.branch = a && b ? Branch::Both : a ? Branch::A : b ? Branch::B : Branch::None;
  if (a || b)
    r.decision = Decision::True;
  else if (r.a.decision == Decision::False && r.b == Decision::False)
    r.decision = Decision::False;
  else
    r.decision = Decision::Indeterminate;
  return r;
}

LinalgCheck linalg_lemma_check(const LinalgInstance& inst, double tol) {
  const int d = static_cast<int>(inst.V1.rows());
  if (inst.V2.rows() != d || inst.A.rows() != d || inst.A.cols() != d || inst.alpha.rows() != d ||
      inst.alpha.cols() != d || (inst.Vt2.cols() > 0 && inst.Vt2.rows() != d))
    throw UsageError("linalg instance has inconsistent sizes");
  const MatrixXd B1 = column_basis(inst.V1), B2 = column_basis(inst.V2);
  if (B2.cols() != d - 1) throw UsageError("V2 must have codimension 1");
  MatrixXd sum(d, B1.cols() + B2.cols());
  sum << B1, B2;
  if (numerical_rank(sum) != d) throw UsageError("V1 + V2 must span V");
  if (inst.Vt2.cols() > 0) {
    MatrixXd ext(d, B2.cols() + inst.Vt2.cols());
    ext << B2, inst.Vt2;
    if (numerical_rank(ext) != d - 1) throw UsageError("Vtilde2 must lie in V2");
  }
  MatrixXd img(d, 2 * B1.cols());
  img << B1, inst.A * B1;
  if (numerical_rank(img) != B1.cols()) throw UsageError("A must map V1 into V1");

  LinalgCheck r;
  const Eigen::JacobiSVD<MatrixXd> svd2(B2, Eigen::ComputeFullU);
  const VectorXd nu = svd2.matrixU().col(d - 1);  // Euclidean normal of V2
  // V1 cap V2 = { B1 c : nu . B1 c = 0 }.
  const MatrixXd Q = B1 * null_space(MatrixXd(nu.transpose() * B1));
  double comp = 0.0, scale = 1.0;
  for (int j = 0; j < Q.cols(); ++j) {
    const VectorXd a = inst.A * Q.col(j) - inst.alpha * Q.col(j);
    comp = std::max(comp, std::abs(nu.dot(a)));
    scale = std::max(scale, a.norm());
  }
  r.criterion = threshold_decision(comp, scale, tol);

  const int c1 = static_cast<int>(B1.cols()), ct = static_cast<int>(inst.Vt2.cols()), c2 = d - 1;
  MatrixXd W = MatrixXd::Zero(2 * d, c1 + ct + 2 * c2);
  W.block(0, 0, d, c1) = B1;
  W.block(d, 0, d, c1) = inst.A * B1;
  if (ct > 0) W.block(d, c1, d, ct) = inst.Vt2;
  W.block(0, c1 + ct, d, c2) = B2;
  W.block(d, c1 + ct, d, c2) = inst.alpha * B2;
  W.block(d, c1 + ct + c2, d, c2) = B2;
  const Eigen::JacobiSVD<MatrixXd> svdw(W);
  const VectorXd s = svdw.singularValues();
  r.rank = 0;
  while (r.rank < s.size() && s(r.rank) > tol * s(0)) ++r.rank;
  r.brute = s.size() < 2 * d ? Decision::False : threshold_decision(s(2 * d - 1), s(0), tol);
  return r;
}

LinalgInstance random_linalg_instance(int d, bool degenerate, std::mt19937_64& rng) {
  if (d < 2) throw UsageError("linalg instances need dim >= 2");
  std::normal_distribution<double> gauss;
  auto randn = [&](int r, int c) {
    MatrixXd M(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) M(i, j) = gauss(rng);
    return M;
  };
  const int k1 = std::uniform_int_distribution<int>(1, d)(rng);
  const int kt = std::uniform_int_distribution<int>(0, d - 1)(rng);
  LinalgInstance inst;
  inst.V2 = randn(d, d - 1);
  inst.V1 = randn(d, k1);
  inst.Vt2 = inst.V2 * randn(d - 1, kt);
  const MatrixXd B1 = column_basis(inst.V1);
  inst.A = B1 * randn(k1, k1) * B1.transpose();
  inst.alpha = randn(d, d);
  if (degenerate) {
    const Eigen::JacobiSVD<MatrixXd> svd2(inst.V2, Eigen::ComputeFullU);
    const VectorXd nu = svd2.matrixU().col(d - 1);
    const MatrixXd Q = B1 * null_space(MatrixXd(nu.transpose() * B1));
    inst.alpha += nu * (nu.transpose() * (inst.A - inst.alpha)) * Q * Q.transpose();
  }
  return inst;
}

LinalgInstance assemble_instance(const HypersurfaceData& S1, const HypersurfaceData& S2, const MetricField& m,
                                 const Vec& v) {
  LinalgInstance inst;
  inst.V1 = S1.tangent;
  inst.V2 = S2.tangent;
  inst.Vt2 = MatrixXd(v);
  const Mat& E1 = S1.tangent;
  inst.A = E1 * shape_operator(S1, m, v) * E1.transpose() * m.at(S1.p);
  // alpha^{S2}(u, v) = -H2(u, v) / |grad F2| * nu2, linear in u.
  inst.alpha = -(S2.normal * (S2.hessian * v).transpose()) / S2.grad_norm;
  return inst;
}

namespace {

// Foot of the gradient flow of F on {F = 0}, by Newton steps along grad F.
Vec project_to_level(const DomainBoundary& S, Vec x) {
  for (int it = 0; it < 50; ++it) {
    const double f = S.phi(x);
    if (std::abs(f) < 1e-15) break;
    const Vec d = S.differential(x);
    x -= (f / d.squaredNorm()) * d;
  }
  return x;
}

}  // namespace

FamilyIntersection find_family_intersection(const DomainBoundary& S1, const DomainBoundary& S2,
                                            const MetricField& m, const Vec& p0) {
  const int d = static_cast<int>(p0.size());
  const Mat E = null_space(MatrixXd(S1.differential(p0).transpose()));
  struct State {
    Vec x, q, v;
  };
  auto evaluate = [&](const VectorXd& z, State& st) {
    st.x = project_to_level(S1, p0 + E * Vec(z.head(d - 1)));
    const double t = z(d - 1);
    st.q = st.x;
    st.v = unit_normal(S1, m, st.x);
    const int steps = static_cast<int>(std::ceil(std::abs(t) / 1e-3));
    for (int k = 0; k < steps; ++k) geodesic_rk4_step(m, st.q, st.v, t / steps);
    VectorXd r(2);
    r << S2.phi(st.q), S2.differential(st.q).dot(st.v);
    return r;
  };
  FamilyIntersection out;
  VectorXd z = VectorXd::Zero(d);
  State st;
  MatrixXd J(2, d);
  for (int it = 0; it < 50; ++it) {
    const VectorXd r = evaluate(z, st);
    const double h = 1e-6;
    for (int k = 0; k < d; ++k) {
      VectorXd zp = z, zm = z;
      zp(k) += h;
      zm(k) -= h;
      State tmp;
      J.col(k) = (evaluate(zp, tmp) - evaluate(zm, tmp)) / (2.0 * h);
    }
    out.residual = r.norm();
    if (out.residual < 1e-12) break;
    const VectorXd step = J.completeOrthogonalDecomposition().solve(-r);
    if (!std::isfinite(step.norm()) || step.norm() > 0.5) return out;
    z += step;
  }
  if (!(out.residual < 1e-10)) return out;
  out.found = true;
  out.x = st.x;
  out.t = z(d - 1);
  out.q = st.q;
  out.velocity = st.v;
  const Eigen::JacobiSVD<MatrixXd> svd(J);
  const VectorXd s = svd.singularValues();
  out.sigma_ratio = s(0) > 0.0 ? s(s.size() - 1) / s(0) : 0.0;
  // Central differences at h = 1e-6 carry roughly 1e-8 relative noise.
  out.transversal = threshold_decision(out.sigma_ratio, 1.0, 1e-6);
  return out;
}

StabilityProbe perturbation_probe(const DomainBoundary& S1, const DomainBoundary& S2, const Vec& p0, int trials,
                                  double scale, std::mt19937_64& rng) {
  const int d = static_cast<int>(p0.size());
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto sym = [&] {
    Mat M(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j) M(i, j) = M(j, i) = unif(rng);
    return M;
  };
  StabilityProbe probe;
  for (int t = 0; t < trials; ++t) {
    const Mat P0 = sym();
    std::array<Mat, kMaxDim> Pk;
    for (int k = 0; k < d; ++k) Pk[k] = sym();
    auto eval = [=](const Vec& x) -> Mat {
      Mat g = Mat::Identity(d, d) + scale * P0;
      for (int k = 0; k < d; ++k) g += scale * x(k) * Pk[k];
      return g;
    };
    auto derivs = [=](const Vec&) {
      MetricDerivatives out;
      for (int k = 0; k < d; ++k) out[k] = scale * Pk[k];
      return out;
    };
    const MetricField m = MetricField::general(d, eval, derivs);
    ++probe.trials;
    const FamilyIntersection fi = find_family_intersection(S1, S2, m, p0);
    if (!fi.found) continue;
    ++probe.found;
    probe.max_shift = std::max(probe.max_shift, (fi.x - p0).norm());
    if (fi.transversal == Decision::True) ++probe.flagged;
  }
  return probe;
}

}  // namespace ogc
