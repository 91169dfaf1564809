#ifndef OGC_MULTIPLICITY_HPP
#define OGC_MULTIPLICITY_HPP

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ogc/boundary.hpp"
#include "ogc/descent.hpp"
#include "ogc/metric.hpp"
#include "ogc/path.hpp"
#include "ogc/shooting.hpp"

namespace ogc {

/// Symmetric Hausdorff distance between the images of two polylines
/// (nodes of one against the segments of the other, both ways). Stops
/// early and returns a value > stop_above as soon as one is known.
double hausdorff_distance(const DiscretePath& x1, const DiscretePath& x2,
                          double stop_above = std::numeric_limits<double>::infinity());

struct DistinctResult {
  bool distinct = true;
  double hausdorff = 0.0;
  bool energy_consistent = true;  // only meaningful when !distinct
};

/// Image comparison of two verified OGC paths, modulo reversal. When the
/// images agree the energies must agree within energy_tol_rel * F(x1).
DistinctResult compare_ogcs(const MetricField& m, const DiscretePath& x1, const DiscretePath& x2, double tol,
                            double energy_tol_rel = 1e-4);

bool distinct(const DiscretePath& x1, const DiscretePath& x2, double tol);

struct CatalogEntry {
  DiscretePath path;
  double energy = 0.0;
  Vec start;
  Vec end;
  CriticalReport report;
  int source = -1;  // start-pair index that produced the entry
};

class OGCCatalog {
 public:
  OGCCatalog() = default;
  OGCCatalog(const MetricField& m, double tol, double energy_tol_rel, int target)
      : metric_(&m), tol_(tol), energy_tol_rel_(energy_tol_rel), target_(target) {}

  /// Inserts a verified OGC unless an image-equal entry exists. The stored
  /// orientation starts at the lexicographically smaller endpoint.
  bool insert(DiscretePath path, const CriticalReport& report, int source = -1);

  const std::vector<CatalogEntry>& entries() const { return entries_; }
  int size() const { return static_cast<int>(entries_.size()); }
  int target() const { return target_; }
  double tolerance() const { return tol_; }
  int consistency_violations() const { return violations_; }
  /// Energies in nondecreasing order.
  std::vector<double> spectrum() const;
  /// Sorts entries by energy (ties by source index).
  void sort_by_energy();

 private:
  const MetricField* metric_ = nullptr;
  double tol_ = 1e-3;
  double energy_tol_rel_ = 1e-4;
  int target_ = 0;
  int violations_ = 0;
  std::vector<CatalogEntry> entries_;
};

/// Orientation with the lexicographically smaller endpoint first.
DiscretePath canonical_orientation(const DiscretePath& x);

struct MultistartConfig {
  int n = 128;           // segments per path
  int grid = 16;         // boundary samples per coordinate
  int max_starts = 0;    // 0 keeps every pair; otherwise a deterministic subsample
  int flow_iters = 25;
  double hausdorff_rel = 1e-3;  // distinctness tolerance relative to the domain diameter
  double energy_tol_rel = 1e-4;
  int K0_samples = 4096;
  int threads = 0;
  FlowConfig flow;
  RefineConfig refine;
};

struct MultistartStats {
  int pairs = 0;
  int in_strip = 0;
  int refined = 0;
  int verified = 0;
  int inserted = 0;
  double K0 = 0.0;
  double M0 = 0.0;
  double lower = 0.0;  // delta0^2 / K0^2
  double upper = 0.0;  // M0^2
};

/// Multistart over chord pairs: strip filter, short descent, shooting
/// refinement, verification and deduplicated insertion in pair order.
/// The count is numerical evidence, not a proof of multiplicity.
OGCCatalog multistart(const MetricField& m, DomainBoundary b, const MultistartConfig& cfg,
                      MultistartStats* stats = nullptr);

nlohmann::json catalog_to_json(const OGCCatalog& catalog);
std::string catalog_summary_csv(const OGCCatalog& catalog);
/// Dim-2 rendering of the boundary and all cataloged chords.
std::string catalog_svg(const DomainBoundary& b, const OGCCatalog& catalog);

/// Round sphere of radius R in R^{dim}, the induced metric on the boundary
/// of a Euclidean ball.
struct RoundSphere {
  int dim = 2;
  double radius = 1.0;

  double distance(const Vec& a, const Vec& b) const;
  /// Unit-speed great circle through p with unit tangent u, at arclength t.
  Vec exp(const Vec& p, const Vec& u, double t) const;
  /// Unit tangent at p of the minimal geodesic towards q (p != +-q).
  Vec direction(const Vec& p, const Vec& q) const;
};

/// Half the shortest closed geodesic loop found by integrating the sphere's
/// geodesic equation from sampled points and directions, reduced by
/// `safety` (0.2 removes 20%).
double estimate_injectivity_radius(const RoundSphere& s, int samples = 16, double step = 1e-3,
                                   double safety = 0.2);

/// Endpoint-separating homotopy on the boundary: moves B away from A along
/// their geodesic so that dist(A, s(tau)) = d + tau (delta_g - d) / (delta_g - alpha)
/// for tau in [0, delta_g - alpha], leaving pairs with d >= delta_g fixed.
class SeparatingHomotopy {
 public:
  SeparatingHomotopy(RoundSphere sphere, double alpha, double delta_g)
      : sphere_(sphere), alpha_(alpha), delta_g_(delta_g) {}
  double tau_max() const { return delta_g_ - alpha_; }
  double alpha() const { return alpha_; }
  double delta_g() const { return delta_g_; }
  Vec operator()(double tau, const Vec& A, const Vec& B) const;

 private:
  RoundSphere sphere_;
  double alpha_;
  double delta_g_;
};

/// Throws UsageError when alpha >= delta_g or a pair in C is closer than alpha.
SeparatingHomotopy separate_endpoints(const std::vector<std::pair<Vec, Vec>>& C, double alpha,
                                      const RoundSphere& sphere, double delta_g);

}  // namespace ogc

#endif  // OGC_MULTIPLICITY_HPP
