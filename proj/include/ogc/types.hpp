#ifndef OGC_TYPES_HPP
#define OGC_TYPES_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ogc {

// Points and tangent vectors live in a single global chart of R^N. The
// storage is bounded so small vectors never touch the heap.
inline constexpr int kMaxDim = 6;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

// Bad metric/domain/potential parameters, malformed config values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterations that fail to converge, step underflow, leaving the chart.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vanishing gradient of the level-set function where a normal is needed.
class DegenerateBoundaryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated a precondition (mismatched sizes, point outside band, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A derived constant failed a relation it must satisfy.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ogc

#endif  // OGC_TYPES_HPP
