#include "ogc/metric.hpp"

#include <cmath>
#include <sstream>

namespace ogc {

namespace {

constexpr double kFdStep = 1e-5;

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    std::ostringstream os;
    os << "metric dimension " << dim << " outside [1, " << kMaxDim << "]";
    throw ConfigError(os.str());
  }
}

}  // namespace

double RadialProfile::value(double r) const {
  if (kind == Kind::ExpQuadratic) return std::exp(coeffs.at(0) * r * r);
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * r + *it;
  return acc;
}

double RadialProfile::derivative(double r) const {
  if (kind == Kind::ExpQuadratic) return 2.0 * coeffs.at(0) * r * std::exp(coeffs.at(0) * r * r);
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 1;) acc = acc * r + static_cast<double>(k) * coeffs[k];
  return acc;
}

double Perturbation::psi(const Vec& x) const {
  switch (kind) {
    case Kind::Quadrupole:
      return x(0) * x(0) - x(1) * x(1);
    case Kind::Skew:
      return x(0) * x(1) + x(0) * x(0) * x(0);
  }
  return 0.0;
}

Vec Perturbation::grad_psi(const Vec& x) const {
  Vec g = Vec::Zero(x.size());
  switch (kind) {
    case Kind::Quadrupole:
      g(0) = 2.0 * x(0);
      g(1) = -2.0 * x(1);
      break;
    case Kind::Skew:
      g(0) = x(1) + 3.0 * x(0) * x(0);
      g(1) = x(0);
      break;
  }
  return g;
}

MetricField MetricField::euclidean(int dim) {
  check_dim(dim);
  ConformalFactor f;
  f.value = [](const Vec&) { return 1.0; };
  f.gradient = [](const Vec& x) -> Vec { return Vec::Zero(x.size()); };
  return conformal(dim, std::move(f), Family::Euclidean);
}

MetricField MetricField::radial_conformal(int dim, RadialProfile profile) {
  check_dim(dim);
  ConformalFactor f;
  f.value = [profile](const Vec& x) {
    const double fr = profile.value(x.norm());
    return fr * fr;
  };
  f.gradient = [profile](const Vec& x) -> Vec {
    const double r = x.norm();
    if (r == 0.0) return Vec::Zero(x.size());
    return (2.0 * profile.value(r) * profile.derivative(r) / r) * x;
  };
  MetricField m = conformal(dim, std::move(f), Family::RadialConformal);
  m.profile_ = std::move(profile);
  return m;
}

MetricField MetricField::perturbed_radial(int dim, RadialProfile profile, Perturbation perturbation) {
  check_dim(dim);
  if (dim < 2) throw ConfigError("perturbed radial metric needs dim >= 2");
  ConformalFactor f;
  f.value = [profile, perturbation](const Vec& x) {
    const double fr = profile.value(x.norm());
    return fr * fr * (1.0 + perturbation.amplitude * perturbation.psi(x));
  };
  f.gradient = [profile, perturbation](const Vec& x) -> Vec {
    const double r = x.norm();
    const double fr = profile.value(r);
    const double bump = 1.0 + perturbation.amplitude * perturbation.psi(x);
    Vec g = (fr * fr * perturbation.amplitude) * perturbation.grad_psi(x);
    if (r > 0.0) g += (2.0 * fr * profile.derivative(r) * bump / r) * x;
    return g;
  };
  MetricField m = conformal(dim, std::move(f), Family::PerturbedRadial);
  m.profile_ = std::move(profile);
  m.perturbation_ = perturbation;
  return m;
}

MetricField MetricField::conformal(int dim, ConformalFactor factor, Family family) {
  check_dim(dim);
  if (!factor.value) throw ConfigError("conformal metric without factor");
  MetricField m;
  m.dim_ = dim;
  m.family_ = family;
  if (!factor.gradient) {
    auto value = factor.value;
    factor.gradient = [value](const Vec& x) -> Vec {
      Vec g(x.size());
      Vec xp = x, xm = x;
      for (int k = 0; k < x.size(); ++k) {
        xp(k) = x(k) + kFdStep;
        xm(k) = x(k) - kFdStep;
        g(k) = (value(xp) - value(xm)) / (2.0 * kFdStep);
        xp(k) = xm(k) = x(k);
      }
      return g;
    };
  }
  m.factor_ = std::move(factor);
  return m;
}

MetricField MetricField::general(int dim, std::function<Mat(const Vec&)> eval,
                                 std::function<MetricDerivatives(const Vec&)> derivatives) {
  check_dim(dim);
  if (!eval) throw ConfigError("general metric without evaluator");
  MetricField m;
  m.dim_ = dim;
  m.family_ = Family::Custom;
  m.eval_ = std::move(eval);
  m.deriv_ = std::move(derivatives);
  return m;
}

Mat MetricField::at(const Vec& x) const {
  if (is_conformal()) return factor_.value(x) * Mat::Identity(dim_, dim_);
  return eval_(x);
}

MetricDerivatives MetricField::derivatives(const Vec& x) const {
  MetricDerivatives d;
  if (is_conformal()) {
    const Vec gs = factor_.gradient(x);
    for (int k = 0; k < dim_; ++k) d[k] = gs(k) * Mat::Identity(dim_, dim_);
    return d;
  }
  if (deriv_) return deriv_(x);
  Vec xp = x, xm = x;
  for (int k = 0; k < dim_; ++k) {
    xp(k) = x(k) + kFdStep;
    xm(k) = x(k) - kFdStep;
    d[k] = (eval_(xp) - eval_(xm)) / (2.0 * kFdStep);
    xp(k) = xm(k) = x(k);
  }
  return d;
}

double MetricField::inner(const Vec& x, const Vec& u, const Vec& v) const {
  if (is_conformal()) return factor_.value(x) * u.dot(v);
  return u.dot(eval_(x) * v);
}

double MetricField::norm(const Vec& x, const Vec& u) const { return std::sqrt(inner(x, u, u)); }

Vec MetricField::raise(const Vec& x, const Vec& covector) const {
  if (is_conformal()) return covector / factor_.value(x);
  return eval_(x).ldlt().solve(covector);
}

std::string to_string(MetricField::Family family) {
  switch (family) {
    case MetricField::Family::Euclidean: return "euclidean";
    case MetricField::Family::RadialConformal: return "radial_conformal";
    case MetricField::Family::PerturbedRadial: return "perturbed_radial";
    case MetricField::Family::Jacobi: return "jacobi";
    case MetricField::Family::Custom: return "custom";
  }
  return "custom";
}

Mat metric_at(const MetricField& m, const Vec& x) {
  Mat g = m.at(x);
  if (!g.allFinite()) throw ConfigError("metric is not finite at the requested point");
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ConfigError("metric is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> eig(g, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) throw ConfigError("metric is not positive definite");
  return g;
}

std::array<Mat, kMaxDim> christoffel(const MetricField& m, const Vec& x) {
  const int n = m.dim();
  const MetricDerivatives dg = m.derivatives(x);
  for (int k = 0; k < n; ++k)
    if (!dg[k].allFinite()) throw NumericError("metric derivative is not finite");
  const Mat ginv = m.at(x).inverse();
  std::array<Mat, kMaxDim> gamma;
  // lowered[l](i, j) = 1/2 (d_i g_lj + d_j g_li - d_l g_ij)
  std::array<Mat, kMaxDim> lowered;
  for (int l = 0; l < n; ++l) {
    lowered[l].resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        lowered[l](i, j) = 0.5 * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
  }
  for (int k = 0; k < n; ++k) {
    gamma[k] = Mat::Zero(n, n);
    for (int l = 0; l < n; ++l) gamma[k] += ginv(k, l) * lowered[l];
  }
  return gamma;
}

Vec christoffel_contract(const MetricField& m, const Vec& x, const Vec& u, const Vec& w) {
  const int n = m.dim();
  if (m.is_conformal()) {
    // Gamma^k_ij u^i w^j = (u_k ds.w + w_k ds.u - (u.w) ds_k) / (2 s)
    const double s = m.factor().value(x);
    const Vec ds = m.factor().gradient(x);
    return (ds.dot(w) * u + ds.dot(u) * w - u.dot(w) * ds) / (2.0 * s);
  }
  const auto gamma = christoffel(m, x);
  Vec out(n);
  for (int k = 0; k < n; ++k) out(k) = u.dot(gamma[k] * w);
  return out;
}

Vec geodesic_acceleration(const MetricField& m, const Vec& x, const Vec& v) {
  return -christoffel_contract(m, x, v, v);
}

}  // namespace ogc
