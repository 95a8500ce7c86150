#pragma once

// Exact evolution on finite triples and the Gaussian heat semigroup on line grids.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <vector>

#include "mtd/error.hpp"
#include "mtd/markov_core.hpp"

namespace mtd {

/// P_t f = e^{tL} f through the cached spectral decomposition.
inline ScalarField evolve(const MarkovTriple& triple, const ScalarField& f, double t) {
  require(t >= 0.0 && std::isfinite(t), Errc::NegativeTime, "evolution time must be >= 0");
  check_shape(triple, f);
  if (t == 0.0) return f;
  return triple.spectral().evolve(f, t);
}

inline DensityVector evolve(const MarkovTriple& triple, const DensityVector& f, double t) {
  ScalarField out = evolve(triple, f.values(), t);
  // Markov kernels preserve positivity; clip rounding below zero
  for (Index i = 0; i < out.size(); ++i) out(i) = std::max(out(i), 0.0);
  return DensityVector(triple, std::move(out));
}

/// Writes rows "t,state,value" for each requested time.
inline void write_trajectory_csv(std::ostream& os, const MarkovTriple& triple, const ScalarField& f,
                                 const std::vector<double>& times) {
  os << "t,state,value\n";
  os.precision(17);
  for (double t : times) {
    const ScalarField v = evolve(triple, f, t);
    for (Index i = 0; i < v.size(); ++i) {
      os << t << ',' << triple.states()[static_cast<std::size_t>(i)] << ',' << v(i) << '\n';
    }
  }
}

/// Uniform grid on [a, b] with trapezoid weights.
struct LineGrid {
  double a = 0.0;
  double b = 1.0;
  Index m = 0;
  double h = 0.0;
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  double integrate(const Eigen::VectorXd& f) const { return weights.dot(f); }
  Eigen::VectorXd sample(const std::function<double(double)>& fn) const {
    Eigen::VectorXd out(m);
    for (Index i = 0; i < m; ++i) out(i) = fn(nodes(i));
    return out;
  }
};

inline LineGrid make_line_grid(double a, double b, Index m) {
  require(b > a, Errc::BadSize, "line grid needs b > a");
  require(m >= 16, Errc::BadSize, "line grid needs m >= 16");
  LineGrid g;
  g.a = a;
  g.b = b;
  g.m = m;
  g.h = (b - a) / static_cast<double>(m - 1);
  g.nodes = Eigen::VectorXd::LinSpaced(m, a, b);
  g.weights = Eigen::VectorXd::Constant(m, g.h);
  g.weights(0) *= 0.5;
  g.weights(m - 1) *= 0.5;
  return g;
}

inline double gaussian_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

inline Eigen::VectorXd sample_gaussian(const LineGrid& grid, double mean, double sd) {
  return grid.sample([=](double x) { return gaussian_pdf(x, mean, sd); });
}

namespace detail {

inline Eigen::VectorXd heat_convolve(const LineGrid& grid, const Eigen::VectorXd& f, double t) {
  const double four_t = 4.0 * t;
  const double norm = 1.0 / std::sqrt(std::numbers::pi * four_t);
  const Eigen::VectorXd wf = grid.weights.cwiseProduct(f);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.m);
  // kernel depends only on |i - j|
  Eigen::VectorXd kern(grid.m);
  for (Index d = 0; d < grid.m; ++d) {
    const double dx = grid.h * static_cast<double>(d);
    kern(d) = norm * std::exp(-dx * dx / four_t);
  }
  // normalize by the full lattice sum; matters only when sqrt(2t) is below the spacing
  double lattice = kern(0);
  for (Index d = 1; d < grid.m; ++d) lattice += 2.0 * kern(d);
  kern /= lattice * grid.h;
  for (Index i = 0; i < grid.m; ++i) {
    double acc = 0.0;
    for (Index j = 0; j < grid.m; ++j) acc += kern(i > j ? i - j : j - i) * wf(j);
    out(i) = acc;
  }
  return out;
}

}  // namespace detail

/// H_t f = Gaussian convolution with kernel e^{-|x-y|^2/4t}/sqrt(4 pi t), by trapezoid quadrature.
///
/// The sampled kernel is rescaled to unit lattice mass, so small t stays mass-preserving.
inline Eigen::VectorXd heat_evolve_line(const LineGrid& grid, const Eigen::VectorXd& f, double t) {
  require(t >= 0.0 && std::isfinite(t), Errc::NegativeTime, "evolution time must be >= 0");
  require(f.size() == grid.m, Errc::ShapeMismatch, "density size differs from grid");
  const double mass = grid.integrate(f);
  require(std::abs(mass - 1.0) <= 1e-6, Errc::NotNormalized, "line density has mass " + std::to_string(mass));
  if (t == 0.0) return f;
  Eigen::VectorXd out = detail::heat_convolve(grid, f, t);
  const double after = grid.integrate(out);
  require(std::abs(after - mass) <= 1e-4, Errc::BoundaryMassLoss,
          "mass changed from " + std::to_string(mass) + " to " + std::to_string(after));
  return out;
}

/// Same kernel applied to a vector field (scalar in one dimension).
inline Eigen::VectorXd heat_evolve_vector_line(const LineGrid& grid, const Eigen::VectorXd& w, double t) {
  require(t >= 0.0 && std::isfinite(t), Errc::NegativeTime, "evolution time must be >= 0");
  require(w.size() == grid.m, Errc::ShapeMismatch, "field size differs from grid");
  if (t == 0.0) return w;
  return detail::heat_convolve(grid, w, t);
}

/// int f log f dx by the trapezoid rule, 0 log 0 = 0.
inline double line_entropy(const LineGrid& grid, const Eigen::VectorXd& f) {
  double acc = 0.0;
  for (Index i = 0; i < grid.m; ++i) acc += grid.weights(i) * xlogx(f(i));
  return acc;
}

/// Centered differences in the interior, one-sided second order at the ends.
inline Eigen::VectorXd line_derivative(const LineGrid& grid, const Eigen::VectorXd& f) {
  const Index m = grid.m;
  Eigen::VectorXd d(m);
  for (Index i = 1; i + 1 < m; ++i) d(i) = (f(i + 1) - f(i - 1)) / (2.0 * grid.h);
  d(0) = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * grid.h);
  d(m - 1) = (3.0 * f(m - 1) - 4.0 * f(m - 2) + f(m - 3)) / (2.0 * grid.h);
  return d;
}

}  // namespace mtd
