#ifndef OGC_DESCENT_HPP
#define OGC_DESCENT_HPP

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ogc/boundary.hpp"
#include "ogc/metric.hpp"
#include "ogc/path.hpp"

namespace ogc {

/// Admissible variations: tangent to the boundary at the endpoints, not
/// pointing outwards at interior nodes within `delta` of the boundary.
struct ConeSpec {
  double delta = 0.2;
  double endpoint_tol = 1e-8;
};

/// Clips outward normal components: exactly at the endpoints, and where
/// positive at interior nodes with phi >= -delta.
TangentField project_to_cone(const DiscretePath& x, const TangentField& w, const ConeSpec& cone,
                             const DomainBoundary& b, const MetricField& m);

/// Which inner product turns dF into a gradient vector.
enum class GradientMetric {
  Nodal,    // plain node-wise (Euclidean) gradient
  Sobolev,  // Riesz representative for <U,V> = U0.V0 + Un.Vn + int U'.V'
};

/// Riesz representative of a node covector under the Sobolev inner product.
TangentField sobolev_gradient(const TangentField& covector);

struct DescentDirection {
  TangentField v;          // norm_star(v) == 1, or zero
  double steepness = 0.0;  // -dF(x)[v] >= 0
};

DescentDirection descent_direction(const DiscretePath& x, const ConeSpec& cone, const DomainBoundary& b,
                                   const MetricField& m, GradientMetric metric = GradientMetric::Sobolev);

/// Retracts endpoints and interior nodes with phi > 0 onto the boundary.
/// Throws UsageError when such a node lies outside the delta0 band.
DiscretePath feasibility_project(const DiscretePath& x, const DomainBoundary& b, const MetricField& m);

struct FlowConfig {
  int max_iters = 2000;
  double tol_crit_scale = 1e-7;      // stop when steepness < scale * (1 + F)
  double armijo = 1e-4;
  double backtrack = 0.5;
  double initial_step_scale = 1e-2;  // first trial step scale / (1 + sqrt(F))
  double max_step = 0.5;
  double min_step = 1e-14;
  ConeSpec cone;
  GradientMetric metric = GradientMetric::Sobolev;
};

struct FlowTraceEntry {
  int iter = 0;
  double energy = 0.0;
  double steepness = 0.0;
  double step = 0.0;
};

enum class FlowStatus { Converged, MaxIterations, Stalled };

struct FlowResult {
  DiscretePath path;
  std::vector<FlowTraceEntry> trace;
  FlowStatus status = FlowStatus::MaxIterations;
  int iterations = 0;
};

/// One projected descent step with backtracking from trial step h.
/// Returns the accepted step length, or 0 if no step was accepted.
double descent_step(DiscretePath& x, double& energy_value, const DescentDirection& dir, double h,
                    const DomainBoundary& b, const MetricField& m, const FlowConfig& cfg);

FlowResult flow(const DiscretePath& x0, const DomainBoundary& b, const MetricField& m, const FlowConfig& cfg = {});

std::string to_string(FlowStatus status);
std::string trace_to_csv(const std::vector<FlowTraceEntry>& trace);

struct CriticalTolerances {
  double tol_contact = 1e-6;
  double tol_res = 1e-6;       // scaled by 1 + F
  double tol_angle = 1e-6;     // radians
  double tol_speed = 1e-6;     // scaled by 1 + F
  double tol_lambda = 1e-6;    // scaled by 1 + F
  double tol_tangency = 1e-6;  // |g(nu, x')| / |x'|
  double tol_c1 = 0.2;         // radians between consecutive segments
};

enum class Classification { Constant, OGC, BoundaryCritical, NotCritical };
std::string to_string(Classification c);

struct CriticalReport {
  double energy = 0.0;
  double residual_interior = 0.0;
  std::vector<std::pair<int, double>> lambda;  // (node, multiplier) on the contact set
  double lambda_max = 0.0;
  double tangency_max = 0.0;
  double speed_variation = 0.0;
  double mean_speed = 0.0;
  double endpoint_angles[2] = {0.0, 0.0};
  double c1_max_angle = 0.0;
  bool interior_strictly_inside = false;
  Classification classification = Classification::NotCritical;
};

/// Multiplier g(H^phi[x'], x') / |grad phi|_g on interior nodes with phi >= -tol_contact.
std::vector<std::pair<int, double>> lambda_profile(const DiscretePath& x, const DomainBoundary& b,
                                                   const MetricField& m, double tol_contact = 1e-6);

CriticalReport verify_critical(const DiscretePath& x, const DomainBoundary& b, const MetricField& m,
                               const CriticalTolerances& tol = {});

nlohmann::json report_to_json(const CriticalReport& r);

}  // namespace ogc

#endif  // OGC_DESCENT_HPP
