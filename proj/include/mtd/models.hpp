#pragma once

// Concrete reversible models: two-point space, rings, circle diffusions, products.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mtd/error.hpp"
#include "mtd/markov_core.hpp"

namespace mtd {

inline constexpr Index kDefaultProductCap = 16384;

/// L f(a) = kappa (f(b) - f(a)), mu uniform on {a, b}.
inline MarkovTriple two_point(double kappa) {
  require(kappa > 0.0 && std::isfinite(kappa), Errc::NonPositiveRate, "two_point needs kappa > 0");
  Eigen::MatrixXd l(2, 2);
  l << -kappa, kappa, kappa, -kappa;
  return build_triple({"a", "b"}, l, Eigen::Vector2d(0.5, 0.5));
}

/// Nearest-neighbour ring on m states with uniform measure.
inline MarkovTriple ring_chain(Index m, double rate) {
  require(m >= 3, Errc::BadSize, "ring needs at least 3 states");
  require(rate > 0.0 && std::isfinite(rate), Errc::NonPositiveRate, "ring rate must be positive");
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    l(i, (i + 1) % m) += rate;
    l(i, (i + m - 1) % m) += rate;
    l(i, i) = -2.0 * rate;
  }
  return build_triple({}, l, Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m)));
}

/// Node positions x_i = i * circumference / m.
inline Eigen::VectorXd circle_nodes(Index m, double circumference = 1.0) {
  Eigen::VectorXd x(m);
  for (Index i = 0; i < m; ++i) x(i) = circumference * static_cast<double>(i) / static_cast<double>(m);
  return x;
}

/// Samples a periodic potential on the circle nodes.
inline Eigen::VectorXd sample_potential(Index m, const std::function<double(double)>& v, double circumference = 1.0) {
  const Eigen::VectorXd x = circle_nodes(m, circumference);
  Eigen::VectorXd out(m);
  for (Index i = 0; i < m; ++i) out(i) = v(x(i));
  return out;
}

/// Finite-volume discretization of L = d^2/dx^2 - V' d/dx on a circle.
///
/// Rates c(i,j) = exp((V_i - V_j)/2) / h^2 between neighbours and mu_i proportional to
/// exp(-V_i) satisfy detailed balance exactly for every m.
inline MarkovTriple circle_diffusion(Index m, const Eigen::VectorXd& potential, double circumference = 1.0) {
  require(m >= 16, Errc::BadSize, "circle diffusion needs m >= 16");
  require(potential.size() == m, Errc::ShapeMismatch, "potential must have m node values");
  require(circumference > 0.0, Errc::BadParameters, "circumference must be positive");
  const double h = circumference / static_cast<double>(m);
  const double inv_h2 = 1.0 / (h * h);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j : {(i + 1) % m, (i + m - 1) % m}) {
      const double c = std::exp(0.5 * (potential(i) - potential(j))) * inv_h2;
      l(i, j) += c;
      l(i, i) -= c;
    }
  }
  const double vmin = potential.minCoeff();
  Eigen::VectorXd mu = (-(potential.array() - vmin)).exp().matrix();
  mu /= mu.sum();
  // mu(i) c(i,j) and mu(j) c(j,i) agree up to rounding of the normalization
  return build_triple({}, l, mu, 1e-12 * inv_h2);
}

inline MarkovTriple circle_diffusion(Index m, double circumference = 1.0) {
  return circle_diffusion(m, Eigen::VectorXd::Zero(m), circumference);
}

/// Product triple on the Cartesian product; state (i, j) has index i * m2 + j.
inline MarkovTriple product(const MarkovTriple& t1, const MarkovTriple& t2, Index cap = kDefaultProductCap) {
  const Index m1 = t1.size();
  const Index m2 = t2.size();
  require(m1 * m2 <= cap, Errc::SizeOverflow,
          "product has " + std::to_string(m1 * m2) + " states, cap is " + std::to_string(cap));
  const Index m = m1 * m2;
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd mu(m);
  std::vector<std::string> states;
  states.reserve(static_cast<std::size_t>(m));
  for (Index i = 0; i < m1; ++i) {
    for (Index j = 0; j < m2; ++j) {
      const Index s = i * m2 + j;
      mu(s) = t1.measure()(i) * t2.measure()(j);
      states.push_back(t1.states()[static_cast<std::size_t>(i)] + "|" + t2.states()[static_cast<std::size_t>(j)]);
      for (Index k = 0; k < m1; ++k) {
        if (k != i) l(s, k * m2 + j) = t1.generator()(i, k);
      }
      for (Index k = 0; k < m2; ++k) {
        if (k != j) l(s, i * m2 + k) = t2.generator()(j, k);
      }
    }
  }
  for (Index s = 0; s < m; ++s) l(s, s) = -(l.row(s).sum());
  mu /= mu.sum();
  const double tol = std::max(t1.detailed_balance_tol(), t2.detailed_balance_tol());
  return build_triple(std::move(states), l, mu, tol);
}

/// Lifts f1 on the first factor to the product space.
inline Eigen::VectorXd lift_first(const Eigen::VectorXd& f1, Index m2) {
  Eigen::VectorXd out(f1.size() * m2);
  for (Index i = 0; i < f1.size(); ++i) out.segment(i * m2, m2).setConstant(f1(i));
  return out;
}

inline Eigen::VectorXd lift_second(const Eigen::VectorXd& f2, Index m1) {
  Eigen::VectorXd out(m1 * f2.size());
  for (Index i = 0; i < m1; ++i) out.segment(i * f2.size(), f2.size()) = f2;
  return out;
}

/// Tensor product f1 (x) f2 in the product indexing.
inline Eigen::VectorXd tensor(const Eigen::VectorXd& f1, const Eigen::VectorXd& f2) {
  return lift_first(f1, f2.size()).cwiseProduct(lift_second(f2, f1.size()));
}

/// Generator multiplied by c > 0 (same measure).
inline MarkovTriple scaled(const MarkovTriple& t, double c) {
  require(c > 0.0, Errc::NonPositiveRate, "scale factor must be positive");
  return build_triple(t.states(), c * t.generator(), t.measure(), c * t.detailed_balance_tol());
}

/// Random strictly positive density with unit mu-mass: exp of i.i.d. N(0, spread^2) values.
inline Eigen::VectorXd random_density(const MarkovTriple& t, std::mt19937_64& rng, double spread = 1.0) {
  std::normal_distribution<double> n(0.0, spread);
  Eigen::VectorXd v(t.size());
  for (Index i = 0; i < v.size(); ++i) v(i) = std::exp(n(rng));
  return v / t.mean(v);
}

/// normalize(exp(sum_{j<=3} a_j cos(2 pi j x) + b_j sin(2 pi j x))) on circle nodes, a_j, b_j ~ N(0, (amp/j)^2).
inline Eigen::VectorXd smooth_circle_density(const MarkovTriple& t, std::mt19937_64& rng, double amp = 0.4) {
  std::normal_distribution<double> n(0.0, amp);
  double a[3];
  double b[3];
  for (int j = 0; j < 3; ++j) {
    a[j] = n(rng) / (j + 1);
    b[j] = n(rng) / (j + 1);
  }
  const Index m = t.size();
  Eigen::VectorXd v(m);
  for (Index i = 0; i < m; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(m);
    double s = 0.0;
    for (int j = 0; j < 3; ++j) {
      s += a[j] * std::cos(2 * std::numbers::pi * (j + 1) * x) + b[j] * std::sin(2 * std::numbers::pi * (j + 1) * x);
    }
    v(i) = std::exp(s);
  }
  return v / t.mean(v);
}

}  // namespace mtd
