#include <gtest/gtest.h>

#include <random>

#include "ogc/transversality.hpp"

using namespace ogc;

namespace {

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST(Decision, IndeterminateBand) {
  EXPECT_EQ(threshold_decision(1e-6, 1.0), Decision::True);
  EXPECT_EQ(threshold_decision(1e-10, 1.0), Decision::False);
  EXPECT_EQ(threshold_decision(2e-8, 1.0), Decision::Indeterminate);
}

TEST(Surfaces, SecondFundamentalFormOfUnitSphere) {
  const MetricField m = MetricField::euclidean(3);
  const auto S = hypersurface_data(sphere_surface(Vec::Zero(3), 1.0), m, v3(1, 0, 0));
  // Oracle: for the unit sphere with outward normal, alpha(u, u) = -|u|^2 n.
  const Vec u = v3(0, 1, 0);
  EXPECT_LT((second_fundamental_form(S, u, u) + S.normal).norm(), 1e-7);
  EXPECT_LT(second_fundamental_form(S, u, v3(0, 0, 1)).norm(), 1e-7);
  EXPECT_THROW(hypersurface_data(sphere_surface(Vec::Zero(3), 1.0), m, v3(0.5, 0, 0)), UsageError);
}

TEST(Surfaces, PlaneIsFlat) {
  const MetricField m = MetricField::euclidean(3);
  const auto P = hypersurface_data(plane_surface(v3(1, 0, 0), v3(0, 1, 0)), m, v3(1, 0, 0));
  EXPECT_LT(second_fundamental_form(P, v3(1, 0, 0), v3(0, 0, 1)).norm(), 1e-7);
  EXPECT_LT(shape_operator(P, m, P.normal).norm(), 1e-7);
}

TEST(Surfaces, ShapeOperatorIdentity) {
  // g(A_v u, u') = -g(alpha(u, u'), v), checked entrywise on the sphere.
  const MetricField m = MetricField::euclidean(3);
  const auto S = hypersurface_data(sphere_surface(Vec::Zero(3), 1.0), m, v3(1, 0, 0));
  const Vec v = S.normal;
  const Mat A = shape_operator(S, m, v);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const Vec ui = S.tangent.col(i), uj = S.tangent.col(j);
      EXPECT_NEAR(shape_operator_apply(S, m, v, ui).dot(uj), -second_fundamental_form(S, ui, uj).dot(v), 1e-7);
      EXPECT_NEAR(A(j, i), shape_operator_apply(S, m, v, ui).dot(uj), 1e-7);
    }
}

TEST(FixedPair, SpherePlaneIsNotTransversal) {
  const MetricField m = MetricField::euclidean(3);
  const Vec p = v3(1, 0, 0);
  const auto S1 = hypersurface_data(sphere_surface(Vec::Zero(3), 1.0), m, p);
  const auto S2 = hypersurface_data(plane_surface(p, v3(0, 1, 0)), m, p);
  const FamilyCheck r = check_transversal_family(S1, S2, m, v3(1, 0, 0));
  EXPECT_EQ(r.decision, Decision::False);
  EXPECT_EQ(r.branch, Branch::None);
  // The assembled lemma instance agrees with the geometric decision.
  const LinalgCheck lc = linalg_lemma_check(assemble_instance(S1, S2, m, v3(1, 0, 0)));
  EXPECT_EQ(lc.criterion, Decision::False);
  EXPECT_EQ(lc.brute, Decision::False);
}

TEST(FixedPair, SphereCylinderIsTransversalViaCurvature) {
  const MetricField m = MetricField::euclidean(3);
  const Vec p = v3(1, 0, 0);
  const auto S1 = hypersurface_data(sphere_surface(Vec::Zero(3), 1.0), m, p);
  const auto S2 = hypersurface_data(cylinder_surface(v3(1, 1, 0), v3(0, 0, 1), 1.0), m, p);
  const FamilyCheck r = check_transversal_family(S1, S2, m, v3(1, 0, 0));
  EXPECT_EQ(r.decision, Decision::True);
  EXPECT_TRUE(r.branch == Branch::B || r.branch == Branch::Both);
  EXPECT_NEAR(r.alpha_vv, 1.0, 1e-6);
}

TEST(FixedPair, RejectsNonTangentV) {
  const MetricField m = MetricField::euclidean(3);
  const Vec p = v3(1, 0, 0);
  const auto S1 = hypersurface_data(sphere_surface(Vec::Zero(3), 1.0), m, p);
  const auto S2 = hypersurface_data(plane_surface(p, v3(1, 1, 0)), m, p);
  EXPECT_THROW(subspace_Av(S1, S2, m, v3(1, 0, 0)), UsageError);
}

TEST(Lemma, RandomInstancesAgree) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 200; ++k) {
    const LinalgInstance inst = random_linalg_instance(2 + k % 4, k % 2 == 1, rng);
    const LinalgCheck c = linalg_lemma_check(inst);
    EXPECT_EQ(c.criterion, c.brute) << "instance " << k;
    EXPECT_NE(c.criterion, Decision::Indeterminate);
    if (k % 2 == 1) {
      EXPECT_EQ(c.criterion, Decision::False);
    }
  }
}

TEST(Lemma, RejectsBadInstances) {
  std::mt19937_64 rng(3);
  LinalgInstance inst = random_linalg_instance(3, false, rng);
  inst.V2 = Eigen::MatrixXd::Identity(3, 3);  // codim 0
  EXPECT_THROW(linalg_lemma_check(inst), UsageError);
}

TEST(Family, SpherePlaneIntersectionFound) {
  // The normal line of the sphere at e1 touches the cylinder at e1 itself.
  const MetricField m = MetricField::euclidean(3);
  const auto S1 = sphere_surface(Vec::Zero(3), 1.0);
  const auto S2 = cylinder_surface(v3(1, 1, 0), v3(0, 0, 1), 1.0);
  const FamilyIntersection fi = find_family_intersection(S1, S2, m, v3(1, 0, 0));
  ASSERT_TRUE(fi.found);
  EXPECT_LT(fi.residual, 1e-9);
  EXPECT_EQ(fi.transversal, Decision::True);
}

TEST(Family, PerturbationProbeIsDeterministic) {
  const auto S1 = sphere_surface(Vec::Zero(3), 1.0);
  const auto S2 = cylinder_surface(v3(1, 1, 0), v3(0, 0, 1), 1.0);
  std::mt19937_64 r1(5), r2(5);
  const StabilityProbe a = perturbation_probe(S1, S2, v3(1, 0, 0), 5, 1e-2, r1);
  const StabilityProbe b = perturbation_probe(S1, S2, v3(1, 0, 0), 5, 1e-2, r2);
  EXPECT_EQ(a.found, b.found);
  EXPECT_EQ(a.flagged, b.flagged);
  EXPECT_EQ(a.max_shift, b.max_shift);
  EXPECT_EQ(a.trials, 5);
  EXPECT_GE(a.found, a.flagged);
}
