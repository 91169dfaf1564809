#ifndef OGC_BOUNDARY_HPP
#define OGC_BOUNDARY_HPP

#include <functional>
#include <string>
#include <vector>

#include "ogc/metric.hpp"
#include "ogc/types.hpp"

namespace ogc {

/// Level-set description of the disk: phi < 0 inside, phi = 0 on the
/// boundary, phi > 0 outside. The disk must be star-shaped about the
/// origin; `radius` returns the boundary distance along a unit direction.
///
/// Euclidean derivatives come from the closures when present and from
/// central differences (h = 1e-5) otherwise. Riemannian quantities are
/// assembled from them together with a MetricField.
struct DomainBoundary {
  std::string kind = "level_set";
  int dim = 0;
  std::function<double(const Vec&)> phi;
  std::function<Vec(const Vec&)> grad;     // Euclidean differential of phi
  std::function<Mat(const Vec&)> hess;     // Euclidean second derivatives of phi
  std::function<double(const Vec&)> radius;
  double delta0 = 0.2;
  double K0 = 0.0;                 // set by estimate_K0
  double bounding_radius = 1.0;    // every point of the closed disk has |x| <= bounding_radius

  double value(const Vec& p) const { return phi(p); }
  Vec differential(const Vec& p) const;
  Mat second_differential(const Vec& p) const;
  double boundary_radius(const Vec& direction) const;
  /// Boundary point in the direction of `direction` (need not be unit).
  Vec boundary_point(const Vec& direction) const;
  bool in_chart(const Vec& p, double margin = 0.1) const {
    return p.norm() <= bounding_radius * (1.0 + margin);
  }

  static DomainBoundary unit_ball(int dim);
  static DomainBoundary ellipsoid(std::vector<double> semi_axes);
  static DomainBoundary level_set(int dim, std::function<double(const Vec&)> phi,
                                  double bounding_radius);
};

/// Riemannian gradient g^{-1} d(phi).
Vec grad_phi(const DomainBoundary& b, const MetricField& m, const Vec& p);
double grad_phi_norm(const DomainBoundary& b, const MetricField& m, const Vec& p);

/// Outward g-unit normal of the level set through p.
Vec unit_normal(const DomainBoundary& b, const MetricField& m, const Vec& p);

/// Foot point of the flow line of grad phi through p on the boundary.
Vec retract_to_boundary(const DomainBoundary& b, const MetricField& m, const Vec& p);

/// Covariant Hessian of phi as a symmetric bilinear form in chart coordinates:
/// H_ij = d_i d_j phi - Gamma^k_ij d_k phi.
Mat hessian_phi(const DomainBoundary& b, const MetricField& m, const Vec& p);

struct K0Estimate {
  double raw = 0.0;
  double inflated = 0.0;
  int samples = 0;
};

/// max of |grad phi|_g over a nested quasi-uniform (Halton) sample of the
/// closed disk, and that value inflated by 5%.
K0Estimate estimate_K0(const DomainBoundary& b, const MetricField& m, int samples);

/// Checks |grad phi|_g > threshold on the band |phi| <= delta0 by sampling.
/// Throws DegenerateBoundaryError on failure.
void validate_delta0(const DomainBoundary& b, const MetricField& m, int samples = 4096,
                     double threshold = 1e-6);

/// Halton point k (k >= 1) in [0,1)^dim.
Vec halton(int k, int dim);

}  // namespace ogc

#endif  // OGC_BOUNDARY_HPP
