#ifndef OGC_BRAKE_HPP
#define OGC_BRAKE_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "ogc/boundary.hpp"
#include "ogc/metric.hpp"
#include "ogc/multiplicity.hpp"
#include "ogc/path.hpp"

namespace ogc {

/// V(q) = |q|^2 / 2 + eps * q_1^3 (Cubic), |q|^2 / 2 (Harmonic) or 0 (Zero).
struct Potential {
  enum class Kind { Zero, Harmonic, Cubic };
  Kind kind = Kind::Harmonic;
  double eps = 0.0;

  double value(const Vec& q) const;
  Vec gradient(const Vec& q) const;
  Mat hessian(const Vec& q) const;

  static Potential zero() { return {Kind::Zero, 0.0}; }
  static Potential harmonic() { return {Kind::Harmonic, 0.0}; }
  static Potential cubic(double eps) { return {Kind::Cubic, eps}; }
};

std::string to_string(Potential::Kind k);

/// Natural system with kinetic metric g, potential V and energy level E.
struct LagrangianData {
  MetricField base;
  Potential V;
  double E = 0.5;
};

/// Jacobi metric (E - V) g restricted to {V <= E - margin}, with phi = V - (E - margin).
struct JacobiDomain {
  MetricField metric;
  DomainBoundary boundary;
  double margin = 0.0;
  double min_V = 0.0;
};

/// (E - V) g on the whole chart. With floor > 0, E - V is continued smoothly
/// and positively where it drops below floor; with floor = 0, evaluating
/// where V >= E throws ConfigError.
MetricField jacobi_metric_field(const LagrangianData& L, double floor = 0.0);

/// margin <= 0 selects 1e-2 (E - min V). Throws ConfigError when the chart
/// origin is not inside the shrunk domain, the domain is not star-shaped
/// on sampled rays, or grad V degenerates near the energy shell.
JacobiDomain jacobi_metric(const LagrangianData& L, double margin = 0.0);

/// Acceleration of D/dt q' = -grad V in chart coordinates.
Vec lagrangian_acceleration(const LagrangianData& L, const Vec& q, const Vec& qd);
double mechanical_energy(const LagrangianData& L, const Vec& q, const Vec& qd);

struct BrakeOrbit {
  std::vector<double> t;
  std::vector<Vec> q;
  std::vector<Vec> qdot;
  std::vector<double> energy_residual;
  double step = 0.0;
  double half_period() const { return t.empty() ? 0.0 : t.back() - t.front(); }
};

struct BrakeConfig {
  double brake_tol = 1e-6;
  double deviation_tol = 1e-5;
  double energy_tol = 1e-6;          // scaled by 1 + |E|
  double drift_per_time = 1e-8;      // energy drift target for the step calibration
  double initial_step = 0.02;
  double max_time = 100.0;
  int max_newton = 30;
  double newton_tol = 1e-10;
  // Geodesic steps on the Jacobi domain; the Euclidean speed grows like (E - V)^(-1/2) near its boundary.
  double jacobi_shoot_step = 1e-4;
  double jacobi_sample_step = 2e-5;
};

/// Turns a Jacobi OGC into a brake orbit: physical velocity at the OGC
/// midpoint, backward integration to the first turning point, Gauss-Newton
/// shooting from rest on {V = E} so that the velocity vanishes again at the
/// next turning point, then a calibrated RK4 pass storing the orbit.
/// Throws NumericError when no turning point exists or braking fails.
BrakeOrbit ogc_to_brake(const LagrangianData& L, const JacobiDomain& J, const DiscretePath& ogc,
                        const BrakeConfig& cfg = {});

/// Orbit from rest at a point of {V = E} up to the next turning point.
BrakeOrbit brake_from_rest(const LagrangianData& L, const Vec& q0, double step, double max_time = 100.0);

struct BrakeReport {
  double deviation = 0.0;         // stored orbit vs an independent re-integration
  double energy_residual = 0.0;   // max |1/2 |q'|^2 + V - E|
  double brake_speed[2] = {0.0, 0.0};
  double brake_level[2] = {0.0, 0.0};  // |V - E| at the ends
  double reflection = 0.0;        // orbit continued through the final brake instant vs its mirror
  bool brake_ok = false;
  bool ok = false;
};

/// Re-integrates with the 3/8-rule Runge-Kutta method at half the stored step.
BrakeReport verify_brake(const LagrangianData& L, const BrakeOrbit& orbit, const BrakeConfig& cfg = {});

/// Time-reversed orbit (also a brake orbit).
BrakeOrbit reverse(const BrakeOrbit& orbit);

/// Positions resampled at n + 1 uniform times with cubic Hermite interpolation.
DiscretePath orbit_to_path(const BrakeOrbit& orbit, int n);

struct JacobiIdentity {
  double ogc_length = 0.0;      // g_J-length of the OGC polyline
  double orbit_integral = 0.0;  // (1/sqrt 2) int sqrt(2(E - V)) |q'| dt over the shrunk domain
  double relative_error = 0.0;
};

JacobiIdentity jacobi_length_identity(const LagrangianData& L, const JacobiDomain& J, const DiscretePath& ogc,
                                      const BrakeOrbit& orbit);

struct BrakeCatalog {
  std::vector<BrakeOrbit> orbits;
  std::vector<BrakeReport> reports;
  std::vector<double> jacobi_errors;
  std::vector<std::string> failures;
  int ogc_count = 0;
  int target = 0;
};

/// Multistart on the Jacobi domain, conversion of every OGC, verification,
/// and deduplication of orbit images.
BrakeCatalog brake_multiplicity(const LagrangianData& L, const MultistartConfig& mcfg, const BrakeConfig& bcfg = {},
                                double margin = 0.0);

std::string orbit_to_csv(const BrakeOrbit& orbit);
nlohmann::json brake_catalog_to_json(const BrakeCatalog& catalog);
/// Dim-2 configuration-space traces with brake points marked and the shell V = E drawn.
std::string brake_svg(const LagrangianData& L, const JacobiDomain& J, const BrakeCatalog& catalog);

}  // namespace ogc

#endif  // OGC_BRAKE_HPP
