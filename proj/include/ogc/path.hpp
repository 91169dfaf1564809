#ifndef OGC_PATH_HPP
#define OGC_PATH_HPP

#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "ogc/boundary.hpp"
#include "ogc/metric.hpp"
#include "ogc/types.hpp"

namespace ogc {

/// Polyline x_0..x_n on the uniform grid s_i = i/n, stored column-wise.
class DiscretePath {
 public:
  DiscretePath() = default;
  explicit DiscretePath(Eigen::MatrixXd nodes);

  int dim() const { return static_cast<int>(nodes_.rows()); }
  int segments() const { return static_cast<int>(nodes_.cols()) - 1; }
  int node_count() const { return static_cast<int>(nodes_.cols()); }
  Vec node(int i) const { return nodes_.col(i); }
  Vec front() const { return nodes_.col(0); }
  Vec back() const { return nodes_.col(nodes_.cols() - 1); }
  const Eigen::MatrixXd& nodes() const { return nodes_; }
  Eigen::MatrixXd& nodes() { return nodes_; }

  bool operator==(const DiscretePath& other) const { return nodes_ == other.nodes_; }

 private:
  Eigen::MatrixXd nodes_;
};

/// One tangent vector per node, same layout as DiscretePath::nodes().
using TangentField = Eigen::MatrixXd;

struct AdmissibilityReport {
  double max_endpoint_phi = 0.0;  // max |phi| over the two endpoints
  double max_phi = 0.0;           // max phi over all nodes
  bool admissible = false;
};

/// Endpoints on the boundary and every node in the closed disk, both within tol.
AdmissibilityReport check_admissible(const DomainBoundary& b, const DiscretePath& x, double tol = 1e-8);

/// Midpoint-rule energy n * sum_i d_i^T g(m_i) d_i with d_i = x_{i+1} - x_i.
double energy(const MetricField& m, const DiscretePath& x);

/// Energy of the segments between nodes a and b (a < b), i.e. the integral of g(x', x') over [a/n, b/n].
double partial_energy(const MetricField& m, const DiscretePath& x, int a, int b);

/// Node-wise gradient of the discrete energy; sum_i <grad_i, V_i> = dF(x)[V].
TangentField energy_gradient(const MetricField& m, const DiscretePath& x);

/// dF(x)[V] from the node gradient.
double directional_derivative(const TangentField& gradient, const TangentField& v);

double dist_star(const DiscretePath& x1, const DiscretePath& x2);
double dist_inf(const DiscretePath& x1, const DiscretePath& x2);
double norm_star(const TangentField& v);

DiscretePath reverse(const DiscretePath& x);

/// Chord family: Psi^{-1}((1-s) Psi(A) + s Psi(B)) with Psi the radial
/// normalisation of the star-shaped disk onto the unit ball.
DiscretePath chord(const DomainBoundary& b, const Vec& A, const Vec& B, int n);

/// Angular coordinates of a boundary point: {theta} in dim 2, {polar, azimuth} in dim 3.
std::vector<double> boundary_angles(const Vec& p);

struct BoundarySample {
  int index = 0;
  int chart = 0;
  std::vector<double> angles;
  Vec point;
};

/// Boundary grid: `grid` angles in dim 2; a grid x grid polar/azimuth chart
/// in dim 3 plus a rotated chart covering the polar caps.
std::vector<BoundarySample> boundary_grid(const DomainBoundary& b, int grid);

struct M0Estimate {
  double raw_sq = 0.0;       // max sampled chord energy
  double M0 = 0.0;           // sqrt(raw_sq), inflated 5%
  double ratio_bound = 0.0;  // delta0 / K0
  bool inequality_holds = false;
};

/// Throws ConsistencyError when M0 > delta0/K0 fails. Requires b.K0 > 0.
M0Estimate estimate_M0(const MetricField& m, const DomainBoundary& b, int grid);

struct StripReport {
  double max_abs_phi = 0.0;  // left side of the strip inequality
  double bound = 0.0;        // K0 sqrt(b-a) [int g(x',x')]^(1/2)
  double slack = 0.0;
  bool lemma_holds = false;
  bool corollary_applicable = false;  // both ends on the boundary and small energy
  double min_phi = 0.0;
  bool corollary_holds = true;
};

/// Checks the strip bound on nodes [a_idx, b_idx]; x(a_idx) must lie on the boundary.
StripReport strip_bound_check(const DomainBoundary& b, const MetricField& m, const DiscretePath& x,
                              int a_idx, int b_idx);

/// Random admissible path: chord between random boundary points plus a
/// smooth interior bump, shrunk until every node lies in the closed disk.
DiscretePath random_admissible_path(const DomainBoundary& b, int n, std::mt19937_64& rng,
                                    double amplitude = 0.3);

struct StripSuiteReport {
  int paths = 0;
  int lemma_checks = 0;
  int lemma_violations = 0;
  int corollary_checks = 0;
  int corollary_violations = 0;
  double max_ratio = 0.0;  // max |phi| / bound over the lemma checks
};

/// Strip lemma on every prefix of `paths` random admissible paths (and of
/// their reverses); the corollary wherever it applies. Odd-numbered paths
/// are short bumped chords so the corollary is exercised. Needs b.K0 > 0.
StripSuiteReport strip_suite(const DomainBoundary& b, const MetricField& m, int paths, int n,
                             std::mt19937_64& rng);

// Serialisation with 17 significant digits.
std::string path_to_csv(const DiscretePath& x);
DiscretePath path_from_csv(const std::string& text);
nlohmann::json path_to_json(const DiscretePath& x);
DiscretePath path_from_json(const nlohmann::json& j);

}  // namespace ogc

#endif  // OGC_PATH_HPP
