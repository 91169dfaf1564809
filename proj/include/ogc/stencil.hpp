#ifndef OGC_STENCIL_HPP
#define OGC_STENCIL_HPP

#include <vector>

#include <Eigen/Dense>

namespace ogc {

/// Fornberg weights for derivatives 0..max_order at `center` from the
/// sample locations `x`. Row d of the result holds the weights for the
/// d-th derivative.
Eigen::MatrixXd fornberg_weights(double center, const std::vector<double>& x, int max_order);

/// First and second derivatives of uniformly sampled data on [0, 1].
///
/// Each node uses a `width`-point stencil (centred where possible, one-sided
/// near the ends), so for smooth samples the error is O(h^(width-2)).
class UniformDifferentiator {
 public:
  explicit UniformDifferentiator(int segments, int width = 7);

  /// samples: dim x (segments + 1).
  Eigen::MatrixXd first(const Eigen::MatrixXd& samples) const;
  Eigen::MatrixXd second(const Eigen::MatrixXd& samples) const;

  int segments() const { return segments_; }

 private:
  Eigen::MatrixXd apply(const Eigen::MatrixXd& samples, int order) const;

  int segments_;
  int width_;
  std::vector<int> start_;                 // first stencil node per output node
  std::vector<Eigen::MatrixXd> weights_;   // 3 x width per output node
};

}  // namespace ogc

#endif  // OGC_STENCIL_HPP
