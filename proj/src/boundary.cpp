#include "ogc/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ogc {

namespace {

constexpr double kFdStep = 1e-5;
constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};

double radical_inverse(int k, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (k > 0) {
    r += f * (k % base);
    k /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

Vec halton(int k, int dim) {
  Vec h(dim);
  for (int i = 0; i < dim; ++i) h(i) = radical_inverse(k, kPrimes[i]);
  return h;
}

Vec DomainBoundary::differential(const Vec& p) const {
  if (grad) return grad(p);
  Vec g(p.size());
  Vec pp = p, pm = p;
  for (int k = 0; k < p.size(); ++k) {
    pp(k) = p(k) + kFdStep;
    pm(k) = p(k) - kFdStep;
    g(k) = (phi(pp) - phi(pm)) / (2.0 * kFdStep);
    pp(k) = pm(k) = p(k);
  }
  return g;
}

Mat DomainBoundary::second_differential(const Vec& p) const {
  if (hess) return hess(p);
  const int n = static_cast<int>(p.size());
  Mat h(n, n);
  Vec pp = p, pm = p;
  for (int k = 0; k < n; ++k) {
    pp(k) = p(k) + kFdStep;
    pm(k) = p(k) - kFdStep;
    h.col(k) = (differential(pp) - differential(pm)) / (2.0 * kFdStep);
    pp(k) = pm(k) = p(k);
  }
  return 0.5 * (h + h.transpose());
}

double DomainBoundary::boundary_radius(const Vec& direction) const {
  const Vec u = direction.normalized();
  if (radius) return radius(u);
  // Bisection along the ray; the disk is star-shaped about the origin.
  double lo = 0.0, hi = bounding_radius * 1.5;
  if (phi(Vec::Zero(dim)) >= 0.0) throw ConfigError("origin is not inside the domain");
  if (phi(hi * u) <= 0.0) throw ConfigError("domain extends beyond its bounding radius");
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid * u) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Vec DomainBoundary::boundary_point(const Vec& direction) const {
  const Vec u = direction.normalized();
  return boundary_radius(u) * u;
}

DomainBoundary DomainBoundary::unit_ball(int dim) {
  DomainBoundary b;
  b.kind = "ball";
  b.dim = dim;
  b.phi = [](const Vec& x) { return x.norm() - 1.0; };
  b.grad = [](const Vec& x) -> Vec {
    const double r = x.norm();
    if (r == 0.0) return Vec::Zero(x.size());
    return x / r;
  };
  b.hess = [](const Vec& x) -> Mat {
    const int n = static_cast<int>(x.size());
    const double r = x.norm();
    if (r == 0.0) return Mat::Zero(n, n);
    const Vec u = x / r;
    return (Mat::Identity(n, n) - u * u.transpose()) / r;
  };
  b.radius = [](const Vec&) { return 1.0; };
  b.bounding_radius = 1.0;
  return b;
}

DomainBoundary DomainBoundary::ellipsoid(std::vector<double> semi_axes) {
  const int n = static_cast<int>(semi_axes.size());
  if (n < 2 || n > kMaxDim) throw ConfigError("ellipsoid needs 2..6 semi-axes");
  Vec inv2(n);
  for (int i = 0; i < n; ++i) {
    if (!(semi_axes[i] > 0.0)) throw ConfigError("ellipsoid semi-axes must be positive");
    inv2(i) = 1.0 / (semi_axes[i] * semi_axes[i]);
  }
  DomainBoundary b;
  b.kind = "ellipsoid";
  b.dim = n;
  b.phi = [inv2](const Vec& x) { return x.cwiseProduct(x).dot(inv2) - 1.0; };
  b.grad = [inv2](const Vec& x) -> Vec { return 2.0 * x.cwiseProduct(inv2); };
  b.hess = [inv2](const Vec&) -> Mat { return Mat(2.0 * inv2.asDiagonal()); };
  b.radius = [inv2](const Vec& u) { return 1.0 / std::sqrt(u.cwiseProduct(u).dot(inv2)); };
  b.bounding_radius = *std::max_element(semi_axes.begin(), semi_axes.end());
  return b;
}

DomainBoundary DomainBoundary::level_set(int dim, std::function<double(const Vec&)> phi,
                                         double bounding_radius) {
  DomainBoundary b;
  b.dim = dim;
  b.phi = std::move(phi);
  b.bounding_radius = bounding_radius;
  return b;
}

Vec grad_phi(const DomainBoundary& b, const MetricField& m, const Vec& p) {
  return m.raise(p, b.differential(p));
}

double grad_phi_norm(const DomainBoundary& b, const MetricField& m, const Vec& p) {
  const Vec d = b.differential(p);
  return std::sqrt(std::max(0.0, d.dot(m.raise(p, d))));
}

Vec unit_normal(const DomainBoundary& b, const MetricField& m, const Vec& p) {
  const Vec d = b.differential(p);
  const Vec up = m.raise(p, d);
  const double norm2 = d.dot(up);
  if (!(norm2 > 1e-20)) throw DegenerateBoundaryError("gradient of phi vanishes; no normal");
  return up / std::sqrt(norm2);
}

Vec retract_to_boundary(const DomainBoundary& b, const MetricField& m, const Vec& p) {
  const double phi0 = b.phi(p);
  if (std::abs(phi0) > b.delta0 * (1.0 + 1e-9)) {
    std::ostringstream os;
    os << "retraction requested outside the band: phi = " << phi0 << ", delta0 = " << b.delta0;
    throw UsageError(os.str());
  }
  // Along flow lines of grad phi rescaled by -phi / |grad phi|^2, phi decays like exp(-sigma).
  auto field = [&](const Vec& q) -> Vec {
    const Vec d = b.differential(q);
    const Vec up = m.raise(q, d);
    const double norm2 = d.dot(up);
    if (!(norm2 > 1e-20)) throw DegenerateBoundaryError("gradient of phi vanishes during retraction");
    return (-b.phi(q) / norm2) * up;
  };
  constexpr double kStep = 0.5;
  constexpr int kMaxSteps = 400;
  Vec q = p;
  for (int it = 0; it < kMaxSteps && std::abs(b.phi(q)) > 1e-13; ++it) {
    const Vec k1 = field(q);
    const Vec k2 = field(q + 0.5 * kStep * k1);
    const Vec k3 = field(q + 0.5 * kStep * k2);
    const Vec k4 = field(q + kStep * k3);
    q += (kStep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  for (int it = 0; it < 4 && std::abs(b.phi(q)) > 0.0; ++it) q += field(q);
  if (!(std::abs(b.phi(q)) <= 1e-12)) throw NumericError("retraction flow did not converge");
  return q;
}

Mat hessian_phi(const DomainBoundary& b, const MetricField& m, const Vec& p) {
  Mat h = b.second_differential(p);
  const Vec d = b.differential(p);
  const auto gamma = christoffel(m, p);
  for (int k = 0; k < m.dim(); ++k) h -= d(k) * gamma[k];
  return 0.5 * (h + h.transpose());
}

K0Estimate estimate_K0(const DomainBoundary& b, const MetricField& m, int samples) {
  if (samples < 1) throw UsageError("estimate_K0 needs at least one sample");
  K0Estimate est;
  const double r = b.bounding_radius;
  for (int k = 1; k <= samples; ++k) {
    const Vec p = (2.0 * halton(k, b.dim) - Vec::Ones(b.dim)) * r;
    if (b.phi(p) > 0.0) continue;
    est.raw = std::max(est.raw, grad_phi_norm(b, m, p));
    ++est.samples;
  }
  // The boundary itself belongs to the closed disk; include the axis points.
  for (int i = 0; i < b.dim; ++i)
    for (double sgn : {-1.0, 1.0}) {
      Vec u = Vec::Zero(b.dim);
      u(i) = sgn;
      est.raw = std::max(est.raw, grad_phi_norm(b, m, b.boundary_point(u)));
    }
  est.inflated = 1.05 * est.raw;
  return est;
}

void validate_delta0(const DomainBoundary& b, const MetricField& m, int samples, double threshold) {
  if (!(b.delta0 > 0.0)) throw ConfigError("delta0 must be positive");
  const double r = b.bounding_radius * 1.5;
  for (int k = 1; k <= samples; ++k) {
    const Vec p = (2.0 * halton(k, b.dim) - Vec::Ones(b.dim)) * r;
    if (std::abs(b.phi(p)) > b.delta0) continue;
    if (!(grad_phi_norm(b, m, p) > threshold)) {
      std::ostringstream os;
      os << "grad phi degenerates inside the delta0 band at |x| = " << p.norm();
      throw DegenerateBoundaryError(os.str());
    }
  }
}

}  // namespace ogc
