#pragma once

// Finite reversible Markov triples and the operator calculus on them.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "mtd/error.hpp"
#include "mtd/spectral_cache.hpp"

namespace mtd {

using Eigen::Index;
using ScalarField = Eigen::VectorXd;

inline constexpr double kRowSumTol = 1e-12;
inline constexpr double kMassTol = 1e-10;
inline constexpr double kDefaultDetailedBalanceTol = 1e-10;

/// A finite state space with a generator L reversible with respect to mu.
///
/// Immutable once built. The spectral decomposition is computed lazily on first use and
/// shared between copies; concurrent first calls are serialized by `std::call_once`.
class MarkovTriple {
 public:
  /// Undirected edge {x, y} (x < y) with both directed rates.
  struct Edge {
    Index x;
    Index y;
    double rate_xy;
    double rate_yx;
  };

  static MarkovTriple build(std::vector<std::string> states, Eigen::MatrixXd generator, Eigen::VectorXd measure,
                            double detailed_balance_tol = kDefaultDetailedBalanceTol);

  Index size() const { return measure_.size(); }
  const std::vector<std::string>& states() const { return states_; }
  const Eigen::MatrixXd& generator() const { return generator_; }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& sparse_generator() const { return sparse_; }
  const Eigen::VectorXd& measure() const { return measure_; }
  const std::vector<Edge>& edges() const { return edges_; }
  double detailed_balance_tol() const { return db_tol_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& f) const { return sparse_ * f; }
  double mean(const Eigen::VectorXd& f) const { return measure_.dot(f); }

  const SpectralCache& spectral() const {
    std::call_once(lazy_->once, [this] { lazy_->cache = std::make_unique<SpectralCache>(generator_, measure_); });
    return *lazy_->cache;
  }

 private:
  struct Lazy {
    std::once_flag once;
    std::unique_ptr<SpectralCache> cache;
  };

  MarkovTriple() = default;

  std::vector<std::string> states_;
  Eigen::MatrixXd generator_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> sparse_;
  Eigen::VectorXd measure_;
  std::vector<Edge> edges_;
  double db_tol_ = kDefaultDetailedBalanceTol;
  std::shared_ptr<Lazy> lazy_;
};

inline MarkovTriple MarkovTriple::build(std::vector<std::string> states, Eigen::MatrixXd generator,
                                        Eigen::VectorXd measure, double detailed_balance_tol) {
  const Index m = measure.size();
  require(m > 0, Errc::ShapeMismatch, "empty state space");
  require(generator.rows() == m && generator.cols() == m, Errc::ShapeMismatch, "generator is not m x m");
  if (states.empty()) {
    for (Index i = 0; i < m; ++i) states.push_back(std::to_string(i));
  }
  require(static_cast<Index>(states.size()) == m, Errc::ShapeMismatch, "state label count differs from m");
  require(generator.allFinite() && measure.allFinite(), Errc::NonMarkovGenerator, "non-finite entries");

  for (Index i = 0; i < m; ++i) {
    require(measure(i) > 0.0, Errc::NonPositiveMeasure, "mu(" + std::to_string(i) + ") <= 0");
  }
  require(std::abs(measure.sum() - 1.0) <= kMassTol, Errc::NonPositiveMeasure, "measure does not sum to 1");

  for (Index i = 0; i < m; ++i) {
    double row = 0.0;
    for (Index j = 0; j < m; ++j) {
      if (i != j) {
        require(generator(i, j) >= 0.0, Errc::NonMarkovGenerator,
                "negative off-diagonal rate at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      row += generator(i, j);
    }
    const double scale = std::max(1.0, std::abs(generator(i, i)));
    require(std::abs(row) <= kRowSumTol * scale, Errc::NonMarkovGenerator,
            "row " + std::to_string(i) + " sums to " + std::to_string(row));
  }

  MarkovTriple t;
  std::vector<Eigen::Triplet<double>> triplets;
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      const double a = generator(i, j);
      const double b = generator(j, i);
      const double flux = measure(i) * a - measure(j) * b;
      require(std::abs(flux) <= detailed_balance_tol, Errc::DetailedBalanceViolation,
              "mu(x)L(x,y) - mu(y)L(y,x) = " + std::to_string(flux) + " at (" + std::to_string(i) + "," +
                  std::to_string(j) + ")");
      if (a != 0.0 || b != 0.0) t.edges_.push_back({i, j, a, b});
    }
  }
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      if (generator(i, j) != 0.0) triplets.emplace_back(i, j, generator(i, j));
    }
  }
  t.sparse_.resize(m, m);
  t.sparse_.setFromTriplets(triplets.begin(), triplets.end());
  t.states_ = std::move(states);
  t.generator_ = std::move(generator);
  t.measure_ = std::move(measure);
  t.db_tol_ = detailed_balance_tol;
  t.lazy_ = std::make_shared<Lazy>();
  return t;
}

inline MarkovTriple build_triple(std::vector<std::string> states, Eigen::MatrixXd generator, Eigen::VectorXd measure,
                                 double detailed_balance_tol = kDefaultDetailedBalanceTol) {
  return MarkovTriple::build(std::move(states), std::move(generator), std::move(measure), detailed_balance_tol);
}

inline void check_shape(const MarkovTriple& triple, const Eigen::VectorXd& f, const char* what = "field") {
  require(f.size() == triple.size(), Errc::ShapeMismatch,
          std::string(what) + " has " + std::to_string(f.size()) + " entries, expected " +
              std::to_string(triple.size()));
}

/// Non-negative density with respect to mu, with unit mass.
class DensityVector {
 public:
  DensityVector(const MarkovTriple& triple, Eigen::VectorXd values, double mass_tol = kMassTol)
      : values_(std::move(values)) {
    check_shape(triple, values_, "density");
    require(values_.allFinite(), Errc::DomainError, "density has non-finite entries");
    require(values_.minCoeff() >= 0.0, Errc::NonPositiveDensity, "density has negative entries");
    const double mass = triple.mean(values_);
    require(std::abs(mass - 1.0) <= mass_tol, Errc::NotNormalized, "density mass is " + std::to_string(mass));
  }

  /// Rescales arbitrary positive weights to unit mass.
  static DensityVector normalized(const MarkovTriple& triple, const Eigen::VectorXd& weights) {
    check_shape(triple, weights, "density");
    const double mass = triple.mean(weights);
    require(mass > 0.0, Errc::NotNormalized, "weights have non-positive mass");
    return DensityVector(triple, weights / mass);
  }

  const Eigen::VectorXd& values() const { return values_; }
  operator const Eigen::VectorXd&() const { return values_; }  // NOLINT(google-explicit-constructor)
  bool strictly_positive() const { return values_.minCoeff() > 0.0; }

 private:
  Eigen::VectorXd values_;
};

// ---------------------------------------------------------------------------
// Carre du champ and friends
// ---------------------------------------------------------------------------

/// Gamma(f,g)(x) = 1/2 sum_y L(x,y) (f(x)-f(y)) (g(x)-g(y)).
inline ScalarField gamma(const MarkovTriple& triple, const ScalarField& f, const ScalarField& g) {
  check_shape(triple, f);
  check_shape(triple, g);
  ScalarField out = ScalarField::Zero(triple.size());
  for (const auto& e : triple.edges()) {
    const double prod = 0.5 * (f(e.x) - f(e.y)) * (g(e.x) - g(e.y));
    out(e.x) += e.rate_xy * prod;
    out(e.y) += e.rate_yx * prod;
  }
  return out;
}

inline ScalarField gamma(const MarkovTriple& triple, const ScalarField& f) { return gamma(triple, f, f); }

/// The same bilinear form through 1/2 (L(fg) - f Lg - g Lf); used as a self-check.
inline ScalarField gamma_operator_form(const MarkovTriple& triple, const ScalarField& f, const ScalarField& g) {
  const ScalarField fg = f.cwiseProduct(g);
  return 0.5 * (triple.apply(fg) - f.cwiseProduct(triple.apply(g)) - g.cwiseProduct(triple.apply(f)));
}

/// Gamma_2(f) = 1/2 (L Gamma(f) - 2 Gamma(f, Lf)).
inline ScalarField gamma2(const MarkovTriple& triple, const ScalarField& f) {
  const ScalarField lf = triple.apply(f);
  return 0.5 * (triple.apply(gamma(triple, f)) - 2.0 * gamma(triple, f, lf));
}

// ---------------------------------------------------------------------------
// Entropies
// ---------------------------------------------------------------------------

inline double xlogx(double x) { return x > 0.0 ? x * std::log(std::max(x, 1e-300)) : 0.0; }

/// Ent(f) = sum mu f log f, with 0 log 0 = 0.
inline double entropy(const MarkovTriple& triple, const Eigen::VectorXd& f) {
  check_shape(triple, f, "density");
  require(f.minCoeff() >= 0.0, Errc::DomainError, "entropy of a negative density");
  // sum mu (f log f - f + 1) has non-negative terms and no cancellation near f = 1
  double acc = 0.0;
  const auto& mu = triple.measure();
  for (Index i = 0; i < f.size(); ++i) {
    const double x = f(i);
    acc += mu(i) * (x > 0.0 ? x * std::log1p(x - 1.0) - (x - 1.0) : 1.0);
  }
  return acc + (triple.mean(f) - 1.0);
}

/// Convex Phi with Phi'' = xi, where xi > 0 and 1/xi is concave.
struct XiFunction {
  std::string name;
  std::function<double(double)> xi;
  std::function<double(double)> dxi;
  std::function<double(double)> d2xi;
  std::function<double(double)> phi;   // Phi
  std::function<double(double)> dphi;  // Phi'
  double exponent = 1.0;               // p for the power family, 1 for x log x

  /// xi(x) = 1/x, Phi(x) = x log x.
  static XiFunction log_entropy() {
    XiFunction x;
    x.name = "log";
    x.xi = [](double v) { return 1.0 / v; };
    x.dxi = [](double v) { return -1.0 / (v * v); };
    x.d2xi = [](double v) { return 2.0 / (v * v * v); };
    x.phi = [](double v) { return xlogx(v); };
    x.dphi = [](double v) { return std::log(v) + 1.0; };
    return x;
  }

  /// xi_p(x) = x^{p-2}, Phi_p(x) = x^p / (p(p-1)), p in (1,2].
  static XiFunction power(double p) {
    require(p > 1.0 && p <= 2.0, Errc::BadExponent, "power exponent must lie in (1,2], got " + std::to_string(p));
    XiFunction x;
    x.name = "power";
    x.exponent = p;
    x.xi = [p](double v) { return std::pow(v, p - 2.0); };
    x.dxi = [p](double v) { return (p - 2.0) * std::pow(v, p - 3.0); };
    x.d2xi = [p](double v) { return (p - 2.0) * (p - 3.0) * std::pow(v, p - 4.0); };
    x.phi = [p](double v) { return v > 0.0 ? std::pow(v, p) / (p * (p - 1.0)) : 0.0; };
    x.dphi = [p](double v) { return std::pow(v, p - 1.0) / (p - 1.0); };
    return x;
  }

  bool is_log() const { return name == "log"; }

  /// (1/xi)'' = (2 xi'^2 - xi xi'') / xi^3.
  double inverse_second_derivative(double v) const {
    const double a = xi(v);
    const double b = dxi(v);
    return (2.0 * b * b - a * d2xi(v)) / (a * a * a);
  }

  /// Checks xi > 0 and concavity of 1/xi on a log-spaced grid of [1e-4, 1e4].
  void validate(int samples = 200) const {
    require(samples >= 100, Errc::XiDomainError, "need at least 100 validation samples");
    for (int i = 0; i < samples; ++i) {
      const double v = std::pow(10.0, -4.0 + 8.0 * i / (samples - 1));
      const double a = xi(v);
      require(std::isfinite(a) && a > 0.0, Errc::XiDomainError, name + ": xi not positive at " + std::to_string(v));
      // relative to the size of 1/xi'' terms so that large-x samples are comparable
      const double curv = inverse_second_derivative(v);
      const double ref = std::max(1.0, std::abs(2.0 * dxi(v) * dxi(v) / (a * a * a)));
      require(curv <= 1e-9 * ref, Errc::XiDomainError, name + ": 1/xi is not concave near " + std::to_string(v));
    }
  }
};

/// Ent^Phi(f) = int Phi(f) dmu - Phi(int f dmu).
inline double phi_entropy(const MarkovTriple& triple, const Eigen::VectorXd& f, const XiFunction& xi) {
  check_shape(triple, f, "density");
  require(f.minCoeff() >= 0.0, Errc::DomainError, "Phi-entropy of a negative map");
  const auto& mu = triple.measure();
  double acc = 0.0;
  for (Index i = 0; i < f.size(); ++i) {
    const double v = xi.phi(f(i));
    require(std::isfinite(v), Errc::DomainError, xi.name + ": Phi undefined at " + std::to_string(f(i)));
    acc += mu(i) * v;
  }
  return acc - xi.phi(triple.mean(f));
}

/// sum mu Gamma(f)/f.
inline double fisher_information(const MarkovTriple& triple, const Eigen::VectorXd& f) {
  check_shape(triple, f, "density");
  require(f.minCoeff() > 0.0, Errc::ZeroDensity, "Fisher information needs a strictly positive density");
  const ScalarField g = gamma(triple, f);
  return triple.measure().dot(g.cwiseQuotient(f));
}

/// sum mu Gamma(f, log f) = -d/dt Ent(P_t f) at t = 0.
///
/// Coincides with `fisher_information` when L has the diffusion property; on a jump
/// process it is strictly smaller for non-constant f (logarithmic vs arithmetic mean).
inline double entropy_dissipation(const MarkovTriple& triple, const Eigen::VectorXd& f) {
  check_shape(triple, f, "density");
  require(f.minCoeff() > 0.0, Errc::ZeroDensity, "entropy dissipation needs a strictly positive density");
  const ScalarField lg = f.array().log().matrix();
  return triple.measure().dot(gamma(triple, f, lg));
}

/// Mean-zero solution of L h = rhs.
inline ScalarField solve_poisson(const MarkovTriple& triple, const ScalarField& rhs) {
  check_shape(triple, rhs, "rhs");
  const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
  require(std::abs(triple.mean(rhs)) <= 1e-10 * scale, Errc::NotMeanZero,
          "rhs has mu-mean " + std::to_string(triple.mean(rhs)));
  const auto& cache = triple.spectral();
  const Eigen::MatrixXd& pinv = cache.pseudo_inverse();
  ScalarField h = pinv * rhs;
  // one refinement sweep
  h += pinv * (rhs - triple.apply(h));
  h.array() -= triple.mean(h);
  return h;
}

}  // namespace mtd
