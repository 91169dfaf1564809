#ifndef OGC_TRANSVERSALITY_HPP
#define OGC_TRANSVERSALITY_HPP

#include <random>
#include <string>
#include <vector>

#include "ogc/boundary.hpp"
#include "ogc/metric.hpp"
#include "ogc/types.hpp"

namespace ogc {

/// Outcome of a rank decision; values within a factor 10 of the tolerance
/// are Indeterminate.
enum class Decision { False, True, Indeterminate };
std::string to_string(Decision d);

/// Compares `value` against tol * scale with the factor-10 indeterminate band.
Decision threshold_decision(double value, double scale, double tol = 1e-8);

// Hypersurfaces are level sets {F = 0}; DomainBoundary carries F and its derivatives.
DomainBoundary sphere_surface(const Vec& center, double radius);
DomainBoundary plane_surface(const Vec& point, const Vec& normal);
/// Round cylinder of the given radius around the line through axis_point along axis_dir.
DomainBoundary cylinder_surface(const Vec& axis_point, const Vec& axis_dir, double radius);

/// Extrinsic data of a hypersurface at p: unit normal along grad F, a
/// g-orthonormal tangent basis and the covariant Hessian of F.
struct HypersurfaceData {
  Vec p;
  Vec normal;
  Mat tangent;  // dim x (dim - 1)
  double grad_norm = 0.0;
  Mat hessian;
};

/// Throws UsageError if |F(p)| > 1e-8.
HypersurfaceData hypersurface_data(const DomainBoundary& S, const MetricField& m, const Vec& p);

/// alpha(u, u') = -H(u, u') / |grad F|_g * normal, the normal part of the
/// covariant derivative of a tangent extension of u' along u.
Vec second_fundamental_form(const HypersurfaceData& S, const Vec& u, const Vec& u2);

/// Matrix of A_v in the tangent basis: g(A_v u, u') = -g(alpha(u, u'), v).
Mat shape_operator(const HypersurfaceData& S, const MetricField& m, const Vec& v);
/// A_v u as a vector of T_pM (u tangent).
Vec shape_operator_apply(const HypersurfaceData& S, const MetricField& m, const Vec& v, const Vec& u);

/// Basis (columns) of T_pS1 cap T_pS2.
Mat tangent_intersection(const HypersurfaceData& S1, const HypersurfaceData& S2);

/// Spanning set of A_v = { A^{S1}_v w - alpha^{S2}(w, v) : w in T_pS1 cap T_pS2 }.
/// Throws UsageError unless v is a nonzero normal of S1 tangent to S2 and
/// the hypersurfaces meet transversally at p.
std::vector<Vec> subspace_Av(const HypersurfaceData& S1, const HypersurfaceData& S2, const MetricField& m,
                             const Vec& v);

struct FixedCheck {
  Decision decision = Decision::False;
  double normal_component = 0.0;  // largest |g(a, nu2)| over the spanning set
  Vec witness;                    // spanning vector attaining it, when True
};

/// Transversality of N(S1) and TS2 at v: A_v not contained in T_pS2.
FixedCheck check_transversal_fixed(const HypersurfaceData& S1, const HypersurfaceData& S2, const MetricField& m,
                                   const Vec& v);

enum class Branch { None, A, B, Both };
std::string to_string(Branch b);

struct FamilyCheck {
  Decision decision = Decision::False;
  Branch branch = Branch::None;
  FixedCheck a;
  Decision b = Decision::False;
  double alpha_vv = 0.0;  // |alpha^{S2}(v, v)|_g
};

/// Transversality for the normal family of S1: (a) A_v not in T_pS2, or (b) alpha^{S2}(v, v) != 0.
FamilyCheck check_transversal_family(const HypersurfaceData& S1, const HypersurfaceData& S2, const MetricField& m,
                                     const Vec& v);

/// Linear-algebra data: subspaces are given by spanning columns in R^d;
/// A acts on V1 and alpha on V2, both written as d x d matrices.
struct LinalgInstance {
  Eigen::MatrixXd V1, V2, Vt2, A, alpha;
};

struct LinalgCheck {
  Decision criterion = Decision::False;  // A-subspace not inside V2
  Decision brute = Decision::False;      // W1 + W2 = V + V by rank
  int rank = 0;                          // rank of the assembled W1 + W2 spanning set
};

/// Throws UsageError when V1 + V2 != V, codim V2 != 1, Vt2 not in V2 or A(V1) not in V1.
LinalgCheck linalg_lemma_check(const LinalgInstance& inst, double tol = 1e-8);

/// Random instance in dimension d; `degenerate` forces the A-subspace into V2.
LinalgInstance random_linalg_instance(int d, bool degenerate, std::mt19937_64& rng);

/// The lemma data behind the fixed-pair criterion at (p, v).
LinalgInstance assemble_instance(const HypersurfaceData& S1, const HypersurfaceData& S2, const MetricField& m,
                                 const Vec& v);

/// Point of the normal family of S1 meeting S2 tangentially: x on S1 and
/// time t with q = exp_x(t n(x)) on S2 and the velocity at q tangent to S2.
struct FamilyIntersection {
  bool found = false;
  Vec x;
  double t = 0.0;
  Vec q;
  Vec velocity;
  double residual = 0.0;
  double sigma_ratio = 0.0;  // smallest / largest singular value of the residual Jacobian
  Decision transversal = Decision::False;
};

/// Gauss-Newton (minimum-norm steps) from x = p0, t = 0. The intersection
/// is transversal when the Jacobian of (F2(q), dF2(q)[velocity]) in (x, t) is onto.
FamilyIntersection find_family_intersection(const DomainBoundary& S1, const DomainBoundary& S2,
                                            const MetricField& m, const Vec& p0);

struct StabilityProbe {
  int trials = 0;
  int found = 0;     // nearby intersections located
  int flagged = 0;   // of those, transversal
  double max_shift = 0.0;
};

/// Repeats the intersection search under metrics g = I + scale * P(x) with
/// random symmetric affine P; sampled evidence only.
StabilityProbe perturbation_probe(const DomainBoundary& S1, const DomainBoundary& S2, const Vec& p0, int trials,
                                  double scale, std::mt19937_64& rng);

}  // namespace ogc

#endif  // OGC_TRANSVERSALITY_HPP
