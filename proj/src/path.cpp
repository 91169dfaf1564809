#include "ogc/path.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace ogc {

DiscretePath::DiscretePath(Eigen::MatrixXd nodes) : nodes_(std::move(nodes)) {
  if (nodes_.cols() < 2) throw UsageError("a path needs at least two nodes");
  if (nodes_.rows() < 1 || nodes_.rows() > kMaxDim) throw UsageError("path dimension out of range");
}

AdmissibilityReport check_admissible(const DomainBoundary& b, const DiscretePath& x, double tol) {
  AdmissibilityReport r;
  r.max_endpoint_phi = std::max(std::abs(b.phi(x.front())), std::abs(b.phi(x.back())));
  r.max_phi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < x.node_count(); ++i) r.max_phi = std::max(r.max_phi, b.phi(x.node(i)));
  r.admissible = r.max_endpoint_phi <= tol && r.max_phi <= tol;
  return r;
}

double partial_energy(const MetricField& m, const DiscretePath& x, int a, int b) {
  if (a < 0 || b > x.segments() || a > b) throw UsageError("partial_energy: bad node range");
  const auto& nodes = x.nodes();
  double sum = 0.0;
  for (int i = a; i < b; ++i) {
    const Vec d = nodes.col(i + 1) - nodes.col(i);
    const Vec mid = 0.5 * (nodes.col(i) + nodes.col(i + 1));
    sum += m.inner(mid, d, d);
  }
  return sum * x.segments();
}

double energy(const MetricField& m, const DiscretePath& x) { return partial_energy(m, x, 0, x.segments()); }

TangentField energy_gradient(const MetricField& m, const DiscretePath& x) {
  const int n = x.segments();
  const auto& nodes = x.nodes();
  TangentField grad = TangentField::Zero(x.dim(), x.node_count());
  for (int i = 0; i < n; ++i) {
    const Vec d = nodes.col(i + 1) - nodes.col(i);
    const Vec mid = 0.5 * (nodes.col(i) + nodes.col(i + 1));
    Vec gd, q;
    if (m.is_conformal()) {
      gd = m.factor().value(mid) * d;
      q = d.squaredNorm() * m.factor().gradient(mid);
    } else {
      gd = m.at(mid) * d;
      const MetricDerivatives dg = m.derivatives(mid);
      q.resize(x.dim());
      for (int k = 0; k < x.dim(); ++k) q(k) = d.dot(dg[k] * d);
    }
    const Vec half_q = 0.5 * q;
    grad.col(i + 1) += n * (2.0 * gd + half_q);
    grad.col(i) += n * (half_q - 2.0 * gd);
  }
  return grad;
}

double directional_derivative(const TangentField& gradient, const TangentField& v) {
  if (gradient.rows() != v.rows() || gradient.cols() != v.cols())
    throw UsageError("tangent field size mismatch");
  return gradient.cwiseProduct(v).sum();
}

namespace {

void check_matched(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw UsageError("paths have mismatched discretisations");
}

}  // namespace

double norm_star(const TangentField& v) {
  const int n = static_cast<int>(v.cols()) - 1;
  if (n < 1) throw UsageError("tangent field needs at least two nodes");
  const double ends = std::max(v.col(0).norm(), v.col(n).norm());
  const double dirichlet = (v.rightCols(n) - v.leftCols(n)).squaredNorm() * n;
  return ends + std::sqrt(dirichlet);
}

double dist_star(const DiscretePath& x1, const DiscretePath& x2) {
  check_matched(x1.nodes(), x2.nodes());
  return norm_star(x2.nodes() - x1.nodes());
}

double dist_inf(const DiscretePath& x1, const DiscretePath& x2) {
  check_matched(x1.nodes(), x2.nodes());
  return (x2.nodes() - x1.nodes()).colwise().norm().maxCoeff();
}

DiscretePath reverse(const DiscretePath& x) { return DiscretePath(x.nodes().rowwise().reverse()); }

DiscretePath chord(const DomainBoundary& b, const Vec& A, const Vec& B, int n) {
  if (n < 1) throw UsageError("chord needs at least one segment");
  Eigen::MatrixXd nodes(A.size(), n + 1);
  if (A == B) {
    nodes.colwise() = Eigen::VectorXd(A);
    return DiscretePath(std::move(nodes));
  }
  auto to_ball = [&](const Vec& p) -> Vec {
    const double r = p.norm();
    return r == 0.0 ? p : Vec(p / b.boundary_radius(p));
  };
  auto from_ball = [&](const Vec& y) -> Vec {
    const double r = y.norm();
    return r == 0.0 ? y : Vec(y * b.boundary_radius(y));
  };
  const Vec pa = to_ball(A), pb = to_ball(B);
  for (int i = 0; i <= n; ++i) {
    const double s = static_cast<double>(i) / n;
    const double t = static_cast<double>(n - i) / n;
    nodes.col(i) = from_ball(t * pa + s * pb);
  }
  nodes.col(0) = A;
  nodes.col(n) = B;
  return DiscretePath(std::move(nodes));
}

std::vector<double> boundary_angles(const Vec& p) {
  if (p.size() == 2) return {std::atan2(p(1), p(0))};
  if (p.size() == 3) return {std::acos(std::clamp(p(2) / p.norm(), -1.0, 1.0)), std::atan2(p(1), p(0))};
  std::vector<double> a;
  for (int i = 0; i < p.size(); ++i) a.push_back(p(i) / p.norm());
  return a;
}

std::vector<BoundarySample> boundary_grid(const DomainBoundary& b, int grid) {
  if (grid < 1) throw UsageError("boundary grid needs a positive resolution");
  std::vector<BoundarySample> out;
  constexpr double pi = std::numbers::pi;
  if (b.dim == 2) {
    for (int j = 0; j < grid; ++j) {
      const double theta = 2.0 * pi * j / grid;
      Vec u(2);
      u << std::cos(theta), std::sin(theta);
      const Vec p = b.boundary_point(u);
      out.push_back({j, 0, boundary_angles(p), p});
    }
    return out;
  }
  if (b.dim != 3) throw UsageError("boundary grids are implemented for dim 2 and 3");
  int index = 0;
  for (int i = 0; i < grid; ++i) {
    const double polar = pi * (i + 0.5) / grid;
    for (int j = 0; j < grid; ++j) {
      const double az = 2.0 * pi * j / grid;
      Vec u(3);
      u << std::sin(polar) * std::cos(az), std::sin(polar) * std::sin(az), std::cos(polar);
      const Vec p = b.boundary_point(u);
      out.push_back({index++, 0, boundary_angles(p), p});
    }
  }
  // Second chart with its poles on the x axis; keep only the caps of the first chart.
  const double cap = std::cos(pi / 4.0);
  for (int i = 0; i < grid; ++i) {
    const double polar = pi * (i + 0.5) / grid;
    for (int j = 0; j < grid; ++j) {
      const double az = 2.0 * pi * j / grid;
      Vec u(3);
      u << std::cos(polar), std::sin(polar) * std::cos(az), std::sin(polar) * std::sin(az);
      if (std::abs(u(2)) <= cap) continue;
      const Vec p = b.boundary_point(u);
      out.push_back({index++, 1, boundary_angles(p), p});
    }
  }
  return out;
}

M0Estimate estimate_M0(const MetricField& m, const DomainBoundary& b, int grid) {
  if (grid < 8) throw UsageError("estimate_M0 needs at least 8 samples per angle coordinate");
  if (!(b.K0 > 0.0)) throw UsageError("estimate_M0 needs K0; run estimate_K0 first");
  const auto samples = boundary_grid(b, grid);
  M0Estimate est;
  const int n = 32;
  for (const auto& a : samples)
    for (const auto& c : samples) {
      if (c.index <= a.index) continue;  // F is reversal invariant and vanishes on the diagonal
      est.raw_sq = std::max(est.raw_sq, energy(m, chord(b, a.point, c.point, n)));
    }
  est.M0 = 1.05 * std::sqrt(est.raw_sq);
  est.ratio_bound = b.delta0 / b.K0;
  est.inequality_holds = est.M0 > est.ratio_bound;
  if (!est.inequality_holds) {
    std::ostringstream os;
    os << "M0 = " << est.M0 << " does not exceed delta0/K0 = " << est.ratio_bound;
    throw ConsistencyError(os.str());
  }
  return est;
}

StripReport strip_bound_check(const DomainBoundary& b, const MetricField& m, const DiscretePath& x,
                              int a_idx, int b_idx) {
  if (a_idx < 0 || b_idx > x.segments() || a_idx > b_idx) throw UsageError("strip check: bad range");
  if (std::abs(b.phi(x.node(a_idx))) > 1e-8) throw UsageError("strip check: x(a) is not on the boundary");
  if (!(b.K0 > 0.0)) throw UsageError("strip check needs K0");
  StripReport r;
  r.min_phi = std::numeric_limits<double>::infinity();
  for (int i = a_idx; i <= b_idx; ++i) {
    const double p = b.phi(x.node(i));
    r.max_abs_phi = std::max(r.max_abs_phi, std::abs(p));
    r.min_phi = std::min(r.min_phi, p);
  }
  const double seg_energy = partial_energy(m, x, a_idx, b_idx);
  const double length = static_cast<double>(b_idx - a_idx) / x.segments();
  r.bound = b.K0 * std::sqrt(length) * std::sqrt(seg_energy);
  r.slack = 1e-10 + 1e-3 * r.bound;
  r.lemma_holds = r.max_abs_phi <= r.bound + r.slack;
  r.corollary_applicable = std::abs(b.phi(x.node(b_idx))) <= 1e-8 &&
                           seg_energy <= b.delta0 * b.delta0 / (b.K0 * b.K0);
  if (r.corollary_applicable) r.corollary_holds = r.min_phi >= -b.delta0 - r.slack;
  return r;
}

DiscretePath random_admissible_path(const DomainBoundary& b, int n, std::mt19937_64& rng, double amplitude) {
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_dir = [&] {
    Vec u(b.dim);
    for (int k = 0; k < b.dim; ++k) u(k) = normal(rng);
    return Vec(u.normalized());
  };
  const Vec A = b.boundary_point(random_dir());
  const Vec B = b.boundary_point(random_dir());
  DiscretePath base = chord(b, A, B, n);
  Eigen::MatrixXd bump = Eigen::MatrixXd::Zero(b.dim, n + 1);
  for (int mode = 1; mode <= 3; ++mode) {
    Vec c(b.dim);
    for (int k = 0; k < b.dim; ++k) c(k) = normal(rng) * amplitude / mode;
    for (int i = 0; i <= n; ++i)
      bump.col(i) += c * std::sin(mode * std::numbers::pi * static_cast<double>(i) / n);
  }
  for (int attempt = 0; attempt < 60; ++attempt) {
    DiscretePath x(base.nodes() + bump);
    bool inside = true;
    for (int i = 1; i < n && inside; ++i) inside = b.phi(x.node(i)) <= 0.0;
    if (inside) return x;
    bump *= 0.5;
  }
  return base;
}

namespace {

DiscretePath short_bumped_chord(const DomainBoundary& b, const MetricField& m, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  Vec u(b.dim), w(b.dim);
  for (int k = 0; k < b.dim; ++k) {
    u(k) = normal(rng);
    w(k) = normal(rng);
  }
  const Vec A = b.boundary_point(u);
  const double target = b.delta0 / b.K0 * unit(rng);
  DiscretePath x = chord(b, A, b.boundary_point(u.normalized() + 0.1 * w), n);
  // Shrink the chord until its energy is below the corollary threshold.
  double spread = 0.1;
  for (int it = 0; it < 60 && energy(m, x) > target * target; ++it) {
    spread *= 0.7;
    x = chord(b, A, b.boundary_point(u.normalized() + spread * w), n);
  }
  Eigen::MatrixXd nodes = x.nodes();
  const double len = (x.back() - x.front()).norm();
  const Vec inward = -A.normalized();
  for (int i = 1; i < n; ++i)
    nodes.col(i) += 0.25 * len * unit(rng) * std::sin(std::numbers::pi * i / n) * inward;
  DiscretePath bumped(std::move(nodes));
  for (int i = 1; i < n; ++i)
    if (b.phi(bumped.node(i)) > 0.0) return x;
  return bumped;
}

}  // namespace

StripSuiteReport strip_suite(const DomainBoundary& b, const MetricField& m, int paths, int n,
                             std::mt19937_64& rng) {
  StripSuiteReport rep;
  for (int p = 0; p < paths; ++p) {
    const DiscretePath x = p % 2 == 0 ? random_admissible_path(b, n, rng) : short_bumped_chord(b, m, n, rng);
    ++rep.paths;
    for (const DiscretePath& y : {x, reverse(x)}) {
      for (int j = 1; j <= n; ++j) {
        const StripReport r = strip_bound_check(b, m, y, 0, j);
        ++rep.lemma_checks;
        rep.lemma_violations += !r.lemma_holds;
        if (r.bound > 0.0) rep.max_ratio = std::max(rep.max_ratio, r.max_abs_phi / r.bound);
        if (r.corollary_applicable) {
          ++rep.corollary_checks;
          rep.corollary_violations += !r.corollary_holds;
        }
      }
    }
  }
  return rep;
}

std::string path_to_csv(const DiscretePath& x) {
  std::ostringstream os;
  for (int k = 0; k < x.dim(); ++k) os << (k ? ",x" : "x") << k;
  os << '\n';
  char buf[40];
  for (int i = 0; i < x.node_count(); ++i) {
    for (int k = 0; k < x.dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", x.nodes()(k, i));
      os << (k ? "," : "") << buf;
    }
    os << '\n';
  }
  return os.str();
}

DiscretePath path_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == 'x') continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) throw UsageError("ragged path CSV");
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw UsageError("path CSV needs at least two nodes");
  Eigen::MatrixXd nodes(rows.front().size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k) nodes(k, i) = rows[i][k];
  return DiscretePath(std::move(nodes));
}

nlohmann::json path_to_json(const DiscretePath& x) {
  nlohmann::json nodes = nlohmann::json::array();
  for (int i = 0; i < x.node_count(); ++i) {
    nlohmann::json p = nlohmann::json::array();
    for (int k = 0; k < x.dim(); ++k) p.push_back(x.nodes()(k, i));
    nodes.push_back(std::move(p));
  }
  return nodes;
}

DiscretePath path_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() < 2) throw UsageError("path JSON must be an array of nodes");
  const std::size_t dim = j.at(0).size();
  Eigen::MatrixXd nodes(dim, j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != dim) throw UsageError("ragged path JSON");
    for (std::size_t k = 0; k < dim; ++k) nodes(k, i) = j[i][k].get<double>();
  }
  return DiscretePath(std::move(nodes));
}

}  // namespace ogc
