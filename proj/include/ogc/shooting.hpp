#ifndef OGC_SHOOTING_HPP
#define OGC_SHOOTING_HPP

#include <string>
#include <vector>

#include "ogc/boundary.hpp"
#include "ogc/descent.hpp"
#include "ogc/metric.hpp"
#include "ogc/path.hpp"

namespace ogc {

struct GeodesicTrajectory {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> v;
  bool left_chart = false;
};

/// One classical RK4 step of x'' = -Gamma(x', x').
void geodesic_rk4_step(const MetricField& m, Vec& x, Vec& v, double h);

/// Fixed-step RK4 integration of the geodesic equation from (p, v) up to
/// parameter max_len. Stops early if |x| exceeds chart_radius.
GeodesicTrajectory integrate_geodesic(const MetricField& m, const Vec& p, const Vec& v, double step,
                                      double max_len, double chart_radius = 1e300);

struct ShootConfig {
  double step = 1e-3;
  double max_len = 50.0;
  double tan_tol = 1e-3;
  double orth_tol = 1e-6;
  double graze_tol = 1e-8;
  int path_nodes = 128;
  bool sample_path = true;
};

enum class ExitKind { Orthogonal, Tangent, Transversal, NoReturn };
std::string to_string(ExitKind k);

/// Local maximum of phi along a shot that stays inside but comes within graze_tol of the boundary.
struct GrazeEvent {
  double t = 0.0;
  Vec x;
  double phi = 0.0;
};

struct ShotResult {
  Vec start;
  Vec exit;
  Vec exit_velocity;
  double exit_cos = 0.0;  // g(x', nu) / |x'|_g at the exit
  double length = 0.0;    // g-length from start to exit
  DiscretePath path;      // uniform resampling, filled when requested
  ExitKind kind = ExitKind::NoReturn;
  std::vector<GrazeEvent> grazing;
};

/// Shoots the unit-speed geodesic from boundary point A along the inward
/// normal until phi changes sign; the crossing is located by bisection on
/// the last step.
ShotResult shoot_orthogonal(const MetricField& m, const DomainBoundary& b, const Vec& A, const ShootConfig& cfg = {});

/// Re-integrates the geodesic from (A, v0) over [0, length] with a step
/// dividing length/n exactly and returns the n-segment sample. The last
/// node is retracted onto the boundary.
DiscretePath sample_geodesic(const MetricField& m, const DomainBoundary& b, const Vec& A, const Vec& v0,
                             double length, int n, double max_step = 1e-3);

struct ScanEntry {
  int index = 0;
  std::vector<double> start_angles;
  ShotResult shot;
};

struct ScanReport {
  std::vector<ScanEntry> entries;   // every shot, grid order
  std::vector<int> tangent;         // indices into entries with kind Tangent
  std::vector<int> grazing;         // indices into entries that graze
  double min_abs_exit_cos = 1.0;    // over returning shots
  int no_return = 0;
};

/// Orthogonal shots from a boundary grid; an empty `tangent` list certifies
/// the absence of O-T chords at scan resolution only.
ScanReport scan_OT_chords(const MetricField& m, const DomainBoundary& b, int grid, const ShootConfig& cfg = {},
                          int threads = 0);

std::string scan_to_csv(const ScanReport& report, bool findings_only = false);

struct RefineConfig {
  int max_iters = 50;
  double tol = 1e-10;      // tangential part of the unit exit velocity
  double fd_step = 1e-7;
  double sample_step = 2.5e-4;  // RK4 step used for the returned path
  ShootConfig shoot;
  CriticalTolerances critical;
  // When false the converged shot is accepted on endpoint angles and interior
  // position alone, for metrics whose midpoint energy is under-resolved at path_nodes.
  bool discrete_check = true;
};

struct RefineResult {
  bool ok = false;
  std::string failure;
  Vec start;
  ShotResult shot;
  DiscretePath path;
  CriticalReport report;
  int iterations = 0;
  double tangential = 0.0;
};

/// Gauss-Newton on the start point A (in a tangent chart of the boundary)
/// driving the tangential exit velocity of the orthogonal shot to zero.
RefineResult ogc_refine(const MetricField& m, const DomainBoundary& b, const Vec& A0, const RefineConfig& cfg = {});

/// Euclidean orthonormal basis (dim x dim-1) of the tangent space of the level set at p.
Mat boundary_tangent_basis(const DomainBoundary& b, const Vec& p);

}  // namespace ogc

#endif  // OGC_SHOOTING_HPP
