#pragma once

// One-dimensional Wasserstein distance and displacement interpolation on line grids.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mtd/error.hpp"
#include "mtd/semigroup.hpp"

namespace mtd {

/// Piecewise-linear CDF through the cumulative trapezoid masses at the grid nodes.
class LineCdf {
 public:
  LineCdf(const LineGrid& grid, const Eigen::VectorXd& f) : grid_(grid) {
    require(f.size() == grid.m, Errc::ShapeMismatch, "density size differs from grid");
    require(f.allFinite() && f.minCoeff() >= 0.0, Errc::NonPositiveDensity, "line density must be non-negative");
    cdf_.resize(static_cast<std::size_t>(grid.m));
    cdf_[0] = 0.0;
    for (Index i = 0; i + 1 < grid.m; ++i) {
      cdf_[static_cast<std::size_t>(i + 1)] = cdf_[static_cast<std::size_t>(i)] + 0.5 * grid.h * (f(i) + f(i + 1));
    }
    const double mass = cdf_.back();
    require(std::abs(mass - 1.0) <= 1e-6, Errc::NotNormalized, "line density has mass " + std::to_string(mass));
    for (double& c : cdf_) c /= mass;
    cdf_.back() = 1.0;
  }

  const std::vector<double>& values() const { return cdf_; }

  double at_node(Index i) const { return cdf_[static_cast<std::size_t>(i)]; }

  /// Cell i with cdf_[i] <= u < cdf_[i+1] and positive mass.
  Index cell(double u) const {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    Index i = static_cast<Index>(it - cdf_.begin()) - 1;
    i = std::clamp<Index>(i, 0, grid_.m - 2);
    while (i > 0 && cdf_[static_cast<std::size_t>(i + 1)] <= cdf_[static_cast<std::size_t>(i)]) --i;
    return i;
  }

  /// Quantile on a given cell, extended linearly.
  double quantile_on(Index i, double u) const {
    const double lo = cdf_[static_cast<std::size_t>(i)];
    const double hi = cdf_[static_cast<std::size_t>(i + 1)];
    const double x0 = grid_.nodes(i);
    if (hi <= lo) return x0;
    return x0 + grid_.h * (u - lo) / (hi - lo);
  }

  double quantile(double u) const { return quantile_on(cell(u), u); }

 private:
  const LineGrid& grid_;
  std::vector<double> cdf_;
};

namespace detail {

inline std::vector<double> merged_breaks(const LineCdf& a, const LineCdf& b) {
  std::vector<double> u;
  u.reserve(a.values().size() + b.values().size());
  u.insert(u.end(), a.values().begin(), a.values().end());
  u.insert(u.end(), b.values().begin(), b.values().end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

}  // namespace detail

/// (int_0^1 |F^{-1}(u) - G^{-1}(u)|^2 du)^{1/2}, integrated exactly between CDF breakpoints.
inline double w2_quantile_1d(const LineGrid& grid, const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  const LineCdf cf(grid, f);
  const LineCdf cg(grid, g);
  const std::vector<double> u = detail::merged_breaks(cf, cg);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < u.size(); ++k) {
    const double u0 = u[k];
    const double u1 = u[k + 1];
    if (u1 <= u0) continue;
    const double mid = 0.5 * (u0 + u1);
    const Index i = cf.cell(mid);
    const Index j = cg.cell(mid);
    const double d0 = cf.quantile_on(i, u0) - cg.quantile_on(j, u0);
    const double d1 = cf.quantile_on(i, u1) - cg.quantile_on(j, u1);
    acc += (u1 - u0) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
  }
  return std::sqrt(std::max(acc, 0.0));
}

struct DisplacementSample {
  Eigen::VectorXd density;
  double entropy = 0.0;
};

/// rho_s = ((1-s) id + s T)_# f with T = G^{-1} o F the monotone map.
///
/// Ent(rho_s) = int f log(f / ((1-s) + s T')) dx with T' by centred differences. Nodes in the
/// extreme tails (F or 1-F below 1e-10) are skipped; their mass is below the grid tolerance.
inline DisplacementSample displacement_interpolation_1d(const LineGrid& grid, const Eigen::VectorXd& f,
                                                        const Eigen::VectorXd& g, double s) {
  require(s >= 0.0 && s <= 1.0, Errc::BadParameters, "interpolation parameter must lie in [0,1]");
  const LineCdf cf(grid, f);
  const LineCdf cg(grid, g);
  const Index m = grid.m;
  Eigen::VectorXd tmap(m);
  for (Index i = 0; i < m; ++i) tmap(i) = cg.quantile(cf.at_node(i));

  std::vector<double> ys;
  std::vector<double> vals;
  DisplacementSample out;
  const double fmax = f.maxCoeff();
  for (Index i = 1; i + 1 < m; ++i) {
    const double u = cf.at_node(i);
    if (u < 1e-10 || u > 1.0 - 1e-10 || f(i) <= 1e-10 * fmax) continue;
    const double dt = (tmap(i + 1) - tmap(i - 1)) / (2.0 * grid.h);
    require(dt > 0.0, Errc::DegenerateMap, "transport map derivative is not positive at x=" +
                                                std::to_string(grid.nodes(i)));
    const double jac = (1.0 - s) + s * dt;
    out.entropy += grid.weights(i) * f(i) * std::log(f(i) / jac);
    ys.push_back((1.0 - s) * grid.nodes(i) + s * tmap(i));
    vals.push_back(f(i) / jac);
  }
  out.density = Eigen::VectorXd::Zero(m);
  if (ys.size() >= 2) {
    for (Index i = 0; i < m; ++i) {
      const double y = grid.nodes(i);
      if (y < ys.front() || y > ys.back()) continue;
      auto it = std::upper_bound(ys.begin(), ys.end(), y);
      std::size_t k = static_cast<std::size_t>(it - ys.begin());
      k = std::clamp<std::size_t>(k, 1, ys.size() - 1);
      const double w = (y - ys[k - 1]) / (ys[k] - ys[k - 1]);
      out.density(i) = (1.0 - w) * vals[k - 1] + w * vals[k];
    }
  }
  return out;
}

}  // namespace mtd
