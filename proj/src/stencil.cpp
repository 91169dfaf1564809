#include "ogc/stencil.hpp"

#include <algorithm>

#include "ogc/types.hpp"

namespace ogc {

Eigen::MatrixXd fornberg_weights(double center, const std::vector<double>& x, int max_order) {
  const int n = static_cast<int>(x.size());
  if (n == 0 || max_order < 0) throw UsageError("fornberg_weights: empty stencil");
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(max_order + 1, n);
  double c1 = 1.0;
  double c4 = x[0] - center;
  c(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - center;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c(k, i) = c1 * (k * c(k - 1, i - 1) - c5 * c(k, i - 1)) / c2;
        c(0, i) = -c1 * c5 * c(0, i - 1) / c2;
      }
      for (int k = mn; k >= 1; --k) c(k, j) = (c4 * c(k, j) - k * c(k - 1, j)) / c3;
      c(0, j) = c4 * c(0, j) / c3;
    }
    c1 = c2;
  }
  return c;
}

UniformDifferentiator::UniformDifferentiator(int segments, int width)
    : segments_(segments), width_(std::min(width, segments + 1)) {
  if (segments < 2) throw UsageError("UniformDifferentiator needs at least two segments");
  const int nodes = segments + 1;
  start_.resize(nodes);
  weights_.resize(nodes);
  const int half = width_ / 2;
  for (int i = 0; i < nodes; ++i) {
    const int s = std::clamp(i - half, 0, nodes - width_);
    start_[i] = s;
    std::vector<double> x(width_);
    for (int j = 0; j < width_; ++j) x[j] = static_cast<double>(s + j - i);
    // Offsets in units of h; rescaled in apply().
    weights_[i] = fornberg_weights(0.0, x, 2);
  }
}

Eigen::MatrixXd UniformDifferentiator::apply(const Eigen::MatrixXd& samples, int order) const {
  if (samples.cols() != segments_ + 1) throw UsageError("sample count does not match the stencil");
  const double scale = order == 1 ? segments_ : static_cast<double>(segments_) * segments_;
  Eigen::MatrixXd out(samples.rows(), samples.cols());
  for (int i = 0; i <= segments_; ++i) {
    out.col(i) = samples.middleCols(start_[i], width_) * weights_[i].row(order).transpose();
  }
  return out * scale;
}

Eigen::MatrixXd UniformDifferentiator::first(const Eigen::MatrixXd& samples) const {
  return apply(samples, 1);
}

Eigen::MatrixXd UniformDifferentiator::second(const Eigen::MatrixXd& samples) const {
  return apply(samples, 2);
}

}  // namespace ogc
