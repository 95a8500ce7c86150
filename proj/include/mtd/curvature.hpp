#pragma once

// Curvature-dimension margins, empirical best-R, the Lemma 4.3 pointwise form, LSI lower bounds.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "mtd/error.hpp"
#include "mtd/markov_core.hpp"

namespace mtd {

inline constexpr double kInfiniteDimension = std::numeric_limits<double>::infinity();
inline constexpr double kGammaFloor = 1e-12;

inline void check_dimension(double n) {
  require(n >= 1.0 && !std::isnan(n), Errc::BadDimension, "dimension must be >= 1 or infinite");
}

inline double inverse_dimension(double n) { return std::isinf(n) ? 0.0 : 1.0 / n; }

/// Pointwise Gamma_2(f) - R Gamma(f) - (Lf)^2 / n.
inline ScalarField cd_margin_field(const MarkovTriple& triple, const ScalarField& f, double r, double n) {
  check_dimension(n);
  check_shape(triple, f);
  const ScalarField lf = triple.apply(f);
  return gamma2(triple, f) - r * gamma(triple, f) - inverse_dimension(n) * lf.cwiseAbs2();
}

/// min_x [Gamma_2(f) - R Gamma(f) - (Lf)^2/n]; non-negative when CD(R,n) holds for this f.
inline double cd_margin(const MarkovTriple& triple, const ScalarField& f, double r, double n) {
  return cd_margin_field(triple, f, r, n).minCoeff();
}

/// min over states with Gamma(f) > 1e-12 of (Gamma_2 - (Lf)^2/n) / Gamma; +inf when none qualify.
inline double curvature_ratio(const MarkovTriple& triple, const ScalarField& f, double n) {
  const ScalarField g = gamma(triple, f);
  const ScalarField lf = triple.apply(f);
  const ScalarField g2 = gamma2(triple, f);
  const double inv = inverse_dimension(n);
  // the 0/0 guard is relative to the field's own scale
  const double floor = kGammaFloor * std::max(1.0, g.maxCoeff());
  double best = std::numeric_limits<double>::infinity();
  for (Index x = 0; x < f.size(); ++x) {
    if (g(x) > floor) best = std::min(best, (g2(x) - inv * lf(x) * lf(x)) / g(x));
  }
  return best;
}

namespace detail {

inline ScalarField gaussian_field(Index m, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  ScalarField v(m);
  for (Index i = 0; i < m; ++i) v(i) = nd(rng);
  return v;
}

/// Seeded random-perturbation descent; keeps the best point, halves the step after failures.
template <class Objective>
ScalarField hill_climb(ScalarField x, double& best, const Objective& obj, std::mt19937_64& rng, int steps,
                       double step) {
  int fails = 0;
  for (int it = 0; it < steps; ++it) {
    const ScalarField cand = x + step * gaussian_field(x.size(), rng);
    const double v = obj(cand);
    if (v < best) {
      best = v;
      x = cand;
      fails = 0;
    } else if (++fails >= 8) {
      step *= 0.5;
      fails = 0;
    }
  }
  return x;
}

}  // namespace detail

/// Upper bound on the largest R with CD(R, n): the minimum curvature ratio over sampled f.
///
/// Samples: every non-constant eigenvector, `sample_count` Gaussian random fields, and
/// random-perturbation descent from the best few. Deterministic given the seed.
inline double estimate_best_R(const MarkovTriple& triple, double n, int sample_count = 64, std::uint64_t seed = 0) {
  check_dimension(n);
  std::mt19937_64 rng(seed);
  const Index m = triple.size();
  std::vector<std::pair<double, ScalarField>> starts;
  const auto& vecs = triple.spectral().eigenvectors();
  for (Index k = 0; k < m; ++k) {
    const ScalarField v = vecs.col(k);
    const double r = curvature_ratio(triple, v, n);
    if (std::isfinite(r)) starts.emplace_back(r, v);
  }
  for (int s = 0; s < sample_count; ++s) {
    const ScalarField v = detail::gaussian_field(m, rng);
    const double r = curvature_ratio(triple, v, n);
    if (std::isfinite(r)) starts.emplace_back(r, v);
  }
  if (starts.empty()) return std::numeric_limits<double>::infinity();
  std::stable_sort(starts.begin(), starts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double best = starts.front().first;
  const std::size_t polish = std::min<std::size_t>(4, starts.size());
  for (std::size_t i = 0; i < polish; ++i) {
    double local = starts[i].first;
    const ScalarField& x0 = starts[i].second;
    const double scale = std::max(1e-12, x0.cwiseAbs().maxCoeff());
    detail::hill_climb(x0, local, [&](const ScalarField& f) { return curvature_ratio(triple, f, n); }, rng, 400,
                       0.1 * scale);
    best = std::min(best, local);
  }
  return best;
}

/// Pointwise Gamma_2(f) + Gamma(Gamma(f), g) + Gamma(f) Gamma(g) - R Gamma(f) - (Lf + Gamma(f,g))^2 / n.
inline ScalarField lemma43_field(const MarkovTriple& triple, const ScalarField& f, const ScalarField& g, double r,
                                 double n) {
  check_dimension(n);
  check_shape(triple, f);
  check_shape(triple, g);
  const ScalarField gf = gamma(triple, f);
  const ScalarField lhs = gamma2(triple, f) + gamma(triple, gf, g) + gf.cwiseProduct(gamma(triple, g));
  const ScalarField t = triple.apply(f) + gamma(triple, f, g);
  return lhs - r * gf - inverse_dimension(n) * t.cwiseAbs2();
}

inline double lemma43_margin(const MarkovTriple& triple, const ScalarField& f, const ScalarField& g, double r,
                             double n) {
  return lemma43_field(triple, f, g, r, n).minCoeff();
}

/// Ent(f) / fisher_information(f); zero at the constant density.
inline double lsi_ratio(const MarkovTriple& triple, const Eigen::VectorXd& f) {
  const double fi = fisher_information(triple, f);
  if (!(fi > 0.0)) return 0.0;
  return entropy(triple, f) / fi;
}

/// Lower bound on the optimal constant C in Ent(f) <= C int Gamma(f)/f dmu.
///
/// Candidates: 1 +/- eps psi for every eigenvector psi (the spectral-gap limit), exp(c psi),
/// and exp of Gaussian fields; the best few are improved by seeded random ascent in log f.
inline double lsi_lower_bound(const MarkovTriple& triple, int sample_count = 64, std::uint64_t seed = 0) {
  require(triple.spectral().irreducible(), Errc::ReducibleChain, "LSI constant needs an irreducible chain");
  std::mt19937_64 rng(seed);
  const Index m = triple.size();
  auto density_of = [&](const ScalarField& logf) {
    Eigen::VectorXd f = (logf.array() - logf.maxCoeff()).exp().matrix();
    return Eigen::VectorXd(f / triple.mean(f));
  };
  std::vector<std::pair<double, ScalarField>> starts;  // (-ratio, log f)
  auto consider = [&](const ScalarField& logf) {
    const double r = lsi_ratio(triple, density_of(logf));
    if (std::isfinite(r)) starts.emplace_back(-r, logf);
  };
  const auto& vecs = triple.spectral().eigenvectors();
  for (Index k = 1; k < m; ++k) {
    const ScalarField v = vecs.col(k) / vecs.col(k).cwiseAbs().maxCoeff();
    for (double eps : {1e-4, -1e-4}) {
      const Eigen::VectorXd f = Eigen::VectorXd::Ones(m) + eps * v;
      const double r = lsi_ratio(triple, f / triple.mean(f));
      if (std::isfinite(r)) starts.emplace_back(-r, f.array().log().matrix());
    }
    for (double c : {0.5, 1.0, 2.0, -1.0}) consider(c * v);
  }
  for (int s = 0; s < sample_count; ++s) consider(detail::gaussian_field(m, rng));
  if (starts.empty()) return 0.0;
  std::stable_sort(starts.begin(), starts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double best = starts.front().first;
  const std::size_t polish = std::min<std::size_t>(4, starts.size());
  for (std::size_t i = 0; i < polish; ++i) {
    double local = starts[i].first;
    const ScalarField& x0 = starts[i].second;
    const double scale = std::max(1e-3, (x0.array() - x0.mean()).abs().maxCoeff());
    detail::hill_climb(x0, local, [&](const ScalarField& lf) { return -lsi_ratio(triple, density_of(lf)); }, rng, 300,
                       0.1 * scale);
    best = std::min(best, local);
  }
  return -best;
}

}  // namespace mtd
