#ifndef OGC_METRIC_HPP
#define OGC_METRIC_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "ogc/types.hpp"

namespace ogc {

/// Radial profile f(r) of a conformal metric g = f(|x|)^2 Id.
struct RadialProfile {
  enum class Kind { Polynomial, ExpQuadratic };
  Kind kind = Kind::Polynomial;
  // Polynomial: f(r) = sum_k coeffs[k] r^k.  ExpQuadratic: f(r) = exp(coeffs[0] r^2).
  std::vector<double> coeffs{1.0};

  double value(double r) const;
  double derivative(double r) const;

  static RadialProfile polynomial(std::vector<double> c) { return {Kind::Polynomial, std::move(c)}; }
  static RadialProfile exp_quadratic(double c) { return {Kind::ExpQuadratic, {c}}; }
};

/// Non-radial conformal perturbation psi entering g = f^2 (1 + amplitude psi) Id.
struct Perturbation {
  enum class Kind { Quadrupole, Skew };
  Kind kind = Kind::Skew;
  double amplitude = 0.0;

  // Quadrupole: psi = x1^2 - x2^2.  Skew: psi = x1 x2 + x1^3.
  double psi(const Vec& x) const;
  Vec grad_psi(const Vec& x) const;
};

/// Scalar conformal factor s(x) with its Euclidean gradient.
struct ConformalFactor {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

using MetricDerivatives = std::array<Mat, kMaxDim>;

/// Smooth metric tensor on a chart of R^N.
///
/// Either a conformal factor (g = s Id) or a general matrix-valued closure
/// backs the field. Partial derivatives come from the closures when given
/// and from central differences with step 1e-5 otherwise.
class MetricField {
 public:
  enum class Family { Euclidean, RadialConformal, PerturbedRadial, Jacobi, Custom };

  MetricField() = default;

  static MetricField euclidean(int dim);
  static MetricField radial_conformal(int dim, RadialProfile profile);
  static MetricField perturbed_radial(int dim, RadialProfile profile, Perturbation perturbation);
  static MetricField conformal(int dim, ConformalFactor factor, Family family = Family::Custom);
  static MetricField general(int dim, std::function<Mat(const Vec&)> eval,
                             std::function<MetricDerivatives(const Vec&)> derivatives = {});

  int dim() const { return dim_; }
  Family family() const { return family_; }
  bool is_conformal() const { return static_cast<bool>(factor_.value); }
  const ConformalFactor& factor() const { return factor_; }
  const RadialProfile& profile() const { return profile_; }
  const Perturbation& perturbation() const { return perturbation_; }

  /// g(x), unchecked.
  Mat at(const Vec& x) const;
  /// d g / d x^k for k < dim.
  MetricDerivatives derivatives(const Vec& x) const;

  double inner(const Vec& x, const Vec& u, const Vec& v) const;
  double norm(const Vec& x, const Vec& u) const;
  /// g^{-1}(x) w : converts a covector (Euclidean gradient) into a vector.
  Vec raise(const Vec& x, const Vec& covector) const;

 private:
  int dim_ = 0;
  Family family_ = Family::Custom;
  ConformalFactor factor_;
  std::function<Mat(const Vec&)> eval_;
  std::function<MetricDerivatives(const Vec&)> deriv_;
  RadialProfile profile_;
  Perturbation perturbation_;
};

std::string to_string(MetricField::Family family);

/// g(x) after checking symmetry and positive definiteness.
/// Throws ConfigError on a non-SPD result.
Mat metric_at(const MetricField& m, const Vec& x);

/// Christoffel symbols of the second kind; result[k](i, j) = Gamma^k_{ij}.
std::array<Mat, kMaxDim> christoffel(const MetricField& m, const Vec& x);

/// Gamma^k_{ij} u^i w^j for all k.
Vec christoffel_contract(const MetricField& m, const Vec& x, const Vec& u, const Vec& w);

/// Geodesic acceleration -Gamma(v, v); uses the conformal closed form when available.
Vec geodesic_acceleration(const MetricField& m, const Vec& x, const Vec& v);

}  // namespace ogc

#endif  // OGC_METRIC_HPP
