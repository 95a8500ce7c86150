#pragma once

// Discrete admissible paths, the action functional and its minimization.
//
// A path is piecewise linear in time: densities rho_k at nodes s_k and a constant potential
// h_k on (s_k, s_{k+1}) solving (rho_{k+1} - rho_k)/ds + L h_k = 0. The action of interval k is
//   ds * sum_x mu(x) Gamma(h_k)(x) W(rho_k(x), rho_{k+1}(x)),  W(a,b) = int_0^1 xi((1-u)a + ub) du,
// which is the exact continuum action of that path, so every value is an upper bound on T_xi^2.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "mtd/error.hpp"
#include "mtd/markov_core.hpp"

namespace mtd {

/// W and its first and second partial derivatives in (a, b).
struct SegmentWeight {
  double w = 0.0;
  double wa = 0.0;
  double wb = 0.0;
  double waa = 0.0;
  double wab = 0.0;
  double wbb = 0.0;
};

namespace detail {

// 8-point Gauss-Legendre on [0, 1]
inline constexpr std::array<double, 8> kGlNodes = {
    0.019855071751231856, 0.10166676129318664, 0.2372337950418355, 0.4082826787521751,
    0.5917173212478249,   0.7627662049581645,  0.8983332387068134, 0.9801449282487681};
inline constexpr std::array<double, 8> kGlWeights = {
    0.05061426814518813, 0.11119051722668724, 0.15685332293894364, 0.18134189168918100,
    0.18134189168918100, 0.15685332293894364, 0.11119051722668724, 0.05061426814518813};

}  // namespace detail

inline SegmentWeight segment_weight(const XiFunction& xi, double a, double b) {
  SegmentWeight s;
  const double diff = b - a;
  if (std::abs(diff) <= 0.25 * std::min(a, b)) {
    for (std::size_t i = 0; i < detail::kGlNodes.size(); ++i) {
      const double u = detail::kGlNodes[i];
      const double wq = detail::kGlWeights[i];
      const double x = (1.0 - u) * a + u * b;
      const double d1 = xi.dxi(x);
      const double d2 = xi.d2xi(x);
      s.w += wq * xi.xi(x);
      s.wa += wq * (1.0 - u) * d1;
      s.wb += wq * u * d1;
      s.waa += wq * (1.0 - u) * (1.0 - u) * d2;
      s.wab += wq * u * (1.0 - u) * d2;
      s.wbb += wq * u * u * d2;
    }
    return s;
  }
  // divided differences of Phi'
  const double xa = xi.xi(a);
  const double xb = xi.xi(b);
  s.w = xi.is_log() ? std::log(b / a) / diff : (xi.dphi(b) - xi.dphi(a)) / diff;
  s.wb = (xb - s.w) / diff;
  s.wa = (s.w - xa) / diff;
  s.wbb = (xi.dxi(b) - 2.0 * s.wb) / diff;
  s.waa = (2.0 * s.wa - xi.dxi(a)) / diff;
  s.wab = (s.wb - s.wa) / diff;
  return s;
}

inline double segment_weight_value(const XiFunction& xi, double a, double b) {
  const double diff = b - a;
  if (std::abs(diff) <= 0.25 * std::min(a, b)) {
    double w = 0.0;
    for (std::size_t i = 0; i < detail::kGlNodes.size(); ++i) {
      const double u = detail::kGlNodes[i];
      w += detail::kGlWeights[i] * xi.xi((1.0 - u) * a + u * b);
    }
    return w;
  }
  return xi.is_log() ? std::log(b / a) / diff : (xi.dphi(b) - xi.dphi(a)) / diff;
}

/// Time nodes s_0 = 0 < ... < s_K = 1, densities at nodes, potentials on intervals.
struct DiscretePath {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> rho;
  std::vector<Eigen::VectorXd> h;

  Index intervals() const { return static_cast<Index>(h.size()); }
  double step(Index k) const { return times[static_cast<std::size_t>(k + 1)] - times[static_cast<std::size_t>(k)]; }
  const Eigen::VectorXd& front() const { return rho.front(); }
  const Eigen::VectorXd& back() const { return rho.back(); }
};

inline constexpr double kResidualTol = 1e-10;

inline std::vector<double> uniform_times(Index k) {
  std::vector<double> t(static_cast<std::size_t>(k + 1));
  for (Index i = 0; i <= k; ++i) t[static_cast<std::size_t>(i)] = static_cast<double>(i) / static_cast<double>(k);
  t.back() = 1.0;
  return t;
}

/// max_k ||(rho_{k+1}-rho_k)/ds + L h_k||_inf / max(1, ||(rho_{k+1}-rho_k)/ds||_inf).
inline double continuity_residual(const MarkovTriple& triple, const DiscretePath& path) {
  double worst = 0.0;
  for (Index k = 0; k < path.intervals(); ++k) {
    const Eigen::VectorXd d = (path.rho[static_cast<std::size_t>(k + 1)] - path.rho[static_cast<std::size_t>(k)]) /
                              path.step(k);
    const Eigen::VectorXd r = d + triple.apply(path.h[static_cast<std::size_t>(k)]);
    worst = std::max(worst, r.cwiseAbs().maxCoeff() / std::max(1.0, d.cwiseAbs().maxCoeff()));
  }
  return worst;
}

/// Structural checks, positivity, mass, and the continuity residual.
inline void validate_path(const MarkovTriple& triple, const DiscretePath& path) {
  const std::size_t k = path.h.size();
  require(k >= 1 && path.rho.size() == k + 1 && path.times.size() == k + 1, Errc::InfeasiblePath,
          "path arrays have inconsistent lengths");
  require(path.times.front() == 0.0 && path.times.back() == 1.0, Errc::InfeasiblePath, "path times must span [0,1]");
  for (std::size_t i = 0; i < k; ++i) {
    require(path.times[i + 1] > path.times[i], Errc::InfeasiblePath, "path times must increase");
  }
  for (const auto& r : path.rho) {
    check_shape(triple, r, "path density");
    require(r.allFinite() && r.minCoeff() > 0.0, Errc::NonPositiveDensity, "path density is not strictly positive");
    require(std::abs(triple.mean(r) - 1.0) <= 1e-9, Errc::InfeasiblePath,
            "path density has mass " + std::to_string(triple.mean(r)));
  }
  for (const auto& p : path.h) check_shape(triple, p, "path potential");
  const double res = continuity_residual(triple, path);
  require(res <= kResidualTol, Errc::InfeasiblePath, "continuity residual " + std::to_string(res));
}

/// Per-interval costs phi_k = sum mu Gamma(h_k) W(rho_k, rho_{k+1}).
inline std::vector<double> slice_costs(const MarkovTriple& triple, const DiscretePath& path, const XiFunction& xi) {
  std::vector<double> out;
  out.reserve(path.h.size());
  const auto& mu = triple.measure();
  for (Index k = 0; k < path.intervals(); ++k) {
    const auto& a = path.rho[static_cast<std::size_t>(k)];
    const auto& b = path.rho[static_cast<std::size_t>(k + 1)];
    const Eigen::VectorXd g = gamma(triple, path.h[static_cast<std::size_t>(k)]);
    double acc = 0.0;
    for (Index x = 0; x < g.size(); ++x) acc += mu(x) * g(x) * segment_weight_value(xi, a(x), b(x));
    out.push_back(acc);
  }
  return out;
}

inline double integrate_slices(const DiscretePath& path, const std::vector<double>& phi) {
  double acc = 0.0;
  for (Index k = 0; k < path.intervals(); ++k) acc += path.step(k) * phi[static_cast<std::size_t>(k)];
  return acc;
}

/// max_k |phi_k - Phi| / Phi with Phi the time average; zero for a null path.
inline double phi_deviation(const DiscretePath& path, const std::vector<double>& phi) {
  const double mean = integrate_slices(path, phi);
  if (mean <= 0.0) return 0.0;
  double worst = 0.0;
  for (double p : phi) worst = std::max(worst, std::abs(p - mean) / mean);
  return worst;
}

inline double action_xi(const MarkovTriple& triple, const DiscretePath& path, const XiFunction& xi) {
  validate_path(triple, path);
  return integrate_slices(path, slice_costs(triple, path, xi));
}

inline double action(const MarkovTriple& triple, const DiscretePath& path) {
  return action_xi(triple, path, XiFunction::log_entropy());
}

/// Builds the unique admissible path through the given densities (h from the Poisson solve).
inline DiscretePath path_from_densities(const MarkovTriple& triple, std::vector<double> times,
                                        std::vector<Eigen::VectorXd> rho) {
  require(rho.size() >= 2 && times.size() == rho.size(), Errc::InfeasiblePath, "need matching times and densities");
  DiscretePath p;
  p.times = std::move(times);
  p.rho = std::move(rho);
  const auto& pinv = triple.spectral().pseudo_inverse();
  for (std::size_t k = 0; k + 1 < p.rho.size(); ++k) {
    Eigen::VectorXd d = (p.rho[k + 1] - p.rho[k]) / (p.times[k + 1] - p.times[k]);
    d.array() -= triple.mean(d);
    Eigen::VectorXd hk = -(pinv * d);
    hk -= pinv * (-d - triple.apply(hk));
    hk.array() -= triple.mean(hk);
    p.h.push_back(std::move(hk));
  }
  return p;
}

/// rho_s = (1-s) f + s g with h = solve_poisson(f - g) on every interval.
inline DiscretePath initial_path(const MarkovTriple& triple, const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                                 Index k) {
  require(k >= 2, Errc::BadParameters, "initial path needs K >= 2");
  check_shape(triple, f, "f");
  check_shape(triple, g, "g");
  require(f.minCoeff() > 0.0 && g.minCoeff() > 0.0, Errc::NonPositiveDensity, "endpoints must be strictly positive");
  DiscretePath p;
  p.times = uniform_times(k);
  const Eigen::VectorXd hk = solve_poisson(triple, f - g);
  for (Index i = 0; i <= k; ++i) {
    const double s = p.times[static_cast<std::size_t>(i)];
    p.rho.push_back((1.0 - s) * f + s * g);
  }
  p.rho.front() = f;
  p.rho.back() = g;
  p.h.assign(static_cast<std::size_t>(k), hk);
  return p;
}

/// Piecewise-linear interpolation of the path densities at time s.
inline Eigen::VectorXd density_at(const DiscretePath& path, double s) {
  if (s <= 0.0) return path.rho.front();
  if (s >= 1.0) return path.rho.back();
  const auto it = std::upper_bound(path.times.begin(), path.times.end(), s);
  const std::size_t k = static_cast<std::size_t>(it - path.times.begin()) - 1;
  const double u = (s - path.times[k]) / (path.times[k + 1] - path.times[k]);
  return (1.0 - u) * path.rho[k] + u * path.rho[k + 1];
}

/// Same path (as a curve) sampled on new nodes; h is recomputed.
inline DiscretePath resample(const MarkovTriple& triple, const DiscretePath& path, const std::vector<double>& times) {
  std::vector<Eigen::VectorXd> rho;
  rho.reserve(times.size());
  for (double s : times) rho.push_back(density_at(path, s));
  rho.front() = path.rho.front();
  rho.back() = path.rho.back();
  return path_from_densities(triple, times, std::move(rho));
}

/// Time change making the per-slice cost nearly constant.
///
/// With phi_k the slice costs and Phi their integral, a >= 0 solves
/// sum_k ds_k sqrt(phi_k + a) = sqrt(Phi + eps); node k+1 moves so that
/// dt_k = ds_k sqrt(phi_k + a) / sqrt(Phi + eps). Densities are unchanged and h_k is
/// rescaled by ds_k / dt_k, so the new slice cost is (Phi + eps) phi_k / (phi_k + a).
inline DiscretePath reparametrize_eps_geodesic(const MarkovTriple& triple, const DiscretePath& path, double eps,
                                               const XiFunction& xi = XiFunction::log_entropy()) {
  require(eps > 0.0 && std::isfinite(eps), Errc::BadParameters, "eps must be positive");
  const std::vector<double> phi = slice_costs(triple, path, xi);
  for (double p : phi) require(std::isfinite(p) && p >= 0.0, Errc::RootFindFailure, "corrupt slice cost");
  const double total = integrate_slices(path, phi);
  const double target = std::sqrt(total + eps);
  auto lhs = [&](double a) {
    double acc = 0.0;
    for (Index k = 0; k < path.intervals(); ++k) acc += path.step(k) * std::sqrt(phi[static_cast<std::size_t>(k)] + a);
    return acc;
  };
  double lo = 0.0;
  double hi = total + eps;
  require(lhs(lo) <= target && lhs(hi) >= target, Errc::RootFindFailure, "root of the time change is not bracketed");
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (lhs(mid) < target ? lo : hi) = mid;
  }
  const double a = 0.5 * (lo + hi);

  DiscretePath out = path;
  std::vector<double> dt(path.h.size());
  double sum = 0.0;
  for (Index k = 0; k < path.intervals(); ++k) {
    dt[static_cast<std::size_t>(k)] = path.step(k) * std::sqrt(phi[static_cast<std::size_t>(k)] + a) / target;
    sum += dt[static_cast<std::size_t>(k)];
  }
  double acc = 0.0;
  for (Index k = 0; k < path.intervals(); ++k) {
    auto ks = static_cast<std::size_t>(k);
    dt[ks] /= sum;  // removes the bisection residue so that the times end at exactly 1
    acc += dt[ks];
    out.times[ks + 1] = acc;
  }
  out.times.back() = 1.0;
  for (Index k = 0; k < out.intervals(); ++k) {
    // rescale against the final node spacing so the continuity equation holds exactly
    out.h[static_cast<std::size_t>(k)] = path.h[static_cast<std::size_t>(k)] * (path.step(k) / out.step(k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Minimization
// ---------------------------------------------------------------------------

struct TransportOptions {
  Index K = 64;
  double tol_rel = 1e-8;
  int max_iter = 10000;
  double rho_floor = 1e-9;
  bool seed_reparametrize = true;
  double seed_eps_fraction = 0.01;
  double grad_tol = 1e-7;
};

struct TransportResult {
  double value = 0.0;
  DiscretePath path;
  std::vector<double> phi_profile;
  int iterations = 0;
  double grad_norm = 0.0;
  double phi_deviation = 0.0;
  bool converged = true;
  std::string xi_name = "log";
  std::vector<double> history;  // action after each accepted step, starting with the seed
};

namespace detail {

/// Newton iteration over the interior densities rho_1..rho_{K-1}; h follows from the
/// continuity equation through the mean-zero pseudo-inverse M.
class ActionNewton {
 public:
  ActionNewton(const MarkovTriple& triple, const XiFunction& xi, const std::vector<double>& times)
      : triple_(triple), xi_(xi), times_(times), mu_(triple.measure()), m_(triple.size()),
        pinv_(triple.spectral().pseudo_inverse()) {}

  double value(const std::vector<Eigen::VectorXd>& rho) const {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < rho.size(); ++k) acc += interval_value(rho[k], rho[k + 1], step(k));
    return acc;
  }

  /// Gradient and block-tridiagonal Hessian in the interior densities (no mass projection).
  void assemble(const std::vector<Eigen::VectorXd>& rho, std::vector<Eigen::VectorXd>& grad,
                std::vector<Eigen::MatrixXd>& diag, std::vector<Eigen::MatrixXd>& off) const {
    const std::size_t n = rho.size() - 2;
    diag.assign(n, Eigen::MatrixXd::Zero(m_, m_));
    off.assign(n > 0 ? n - 1 : 0, Eigen::MatrixXd());
    grad.assign(n, Eigen::VectorXd::Zero(m_));
    for (std::size_t k = 0; k + 1 < rho.size(); ++k) {
      Blocks b = interval_blocks(rho[k], rho[k + 1], step(k));
      // interval k couples node k (a) and node k+1 (b); interior index j = node - 1
      if (k >= 1) {
        grad[k - 1] += b.ga;
        diag[k - 1] += b.haa;
      }
      if (k + 1 <= n) {
        grad[k] += b.gb;
        diag[k] += b.hbb;
      }
      if (k >= 1 && k + 1 <= n) off[k - 1] = std::move(b.hab);
    }
  }

  /// Fills the gradient and the Newton direction restricted to mass-preserving moves.
  bool direction(const std::vector<Eigen::VectorXd>& rho, std::vector<Eigen::VectorXd>& grad,
                 std::vector<Eigen::VectorXd>& dir) const {
    const std::size_t n = rho.size() - 2;
    std::vector<Eigen::MatrixXd> diag;
    std::vector<Eigen::MatrixXd> off;
    assemble(rho, grad, diag, off);
    // restrict to mean-preserving directions d = Pi v, Pi = I - 1 mu^T
    std::vector<Eigen::VectorXd> rhs(n);
    for (std::size_t j = 0; j < n; ++j) {
      rhs[j] = -project_t(grad[j]);
      diag[j] = project_both(diag[j]);
      const double s = std::max(1e-300, diag[j].diagonal().cwiseAbs().mean());
      diag[j] += s * mu_ * mu_.transpose();
    }
    for (auto& o : off) o = project_both(o);
    std::vector<Eigen::VectorXd> v;
    if (!solve_block_tridiagonal(diag, off, rhs, v)) return false;
    dir.resize(n);
    for (std::size_t j = 0; j < n; ++j) dir[j] = v[j].array() - mu_.dot(v[j]);
    return true;
  }

  double projected_gradient_norm(const std::vector<Eigen::VectorXd>& grad) const {
    double acc = 0.0;
    for (const auto& g : grad) acc += project_t(g).squaredNorm();
    return std::sqrt(acc);
  }

 private:
  struct Blocks {
    Eigen::VectorXd ga, gb;
    Eigen::MatrixXd haa, hab, hbb;
  };

  double step(std::size_t k) const { return times_[k + 1] - times_[k]; }

  Eigen::VectorXd potential(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double ds) const {
    return -(pinv_ * (b - a)) / ds;
  }

  double interval_value(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double ds) const {
    const Eigen::VectorXd h = potential(a, b, ds);
    const Eigen::VectorXd g = gamma(triple_, h);
    double acc = 0.0;
    for (Index x = 0; x < m_; ++x) acc += mu_(x) * g(x) * segment_weight_value(xi_, a(x), b(x));
    return ds * acc;
  }

  Blocks interval_blocks(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double ds) const {
    const Eigen::VectorXd h = potential(a, b, ds);
    const Eigen::VectorXd gam = gamma(triple_, h);
    Eigen::VectorXd w(m_), wa(m_), wb(m_), waa(m_), wab(m_), wbb(m_);
    for (Index x = 0; x < m_; ++x) {
      const SegmentWeight s = segment_weight(xi_, a(x), b(x));
      w(x) = s.w;
      wa(x) = s.wa;
      wb(x) = s.wb;
      waa(x) = s.waa;
      wab(x) = s.wab;
      wbb(x) = s.wbb;
    }
    // G(omega) with omega = mu W, and Z whose column x is d(G h)/d omega_x
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m_, m_);
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(m_, m_);
    for (const auto& e : triple_.edges()) {
      const double c = 0.5 * (mu_(e.x) * w(e.x) * e.rate_xy + mu_(e.y) * w(e.y) * e.rate_yx);
      g(e.x, e.x) += c;
      g(e.y, e.y) += c;
      g(e.x, e.y) -= c;
      g(e.y, e.x) -= c;
      const double dh = h(e.x) - h(e.y);
      z(e.x, e.x) += 0.5 * e.rate_xy * dh;
      z(e.y, e.x) -= 0.5 * e.rate_xy * dh;
      z(e.y, e.y) -= 0.5 * e.rate_yx * dh;
      z(e.x, e.y) += 0.5 * e.rate_yx * dh;
    }
    const Eigen::VectorXd gh = g * h;
    const Eigen::MatrixXd mgm = pinv_.transpose() * (g * pinv_) * (2.0 / ds);
    const Eigen::MatrixXd y = 2.0 * pinv_.transpose() * z;
    const Eigen::VectorXd mug = mu_.cwiseProduct(gam);
    const Eigen::VectorXd da = mu_.cwiseProduct(wa);
    const Eigen::VectorXd db = mu_.cwiseProduct(wb);

    Blocks out;
    const Eigen::VectorXd mgh = 2.0 * pinv_.transpose() * gh;
    out.ga = mgh + ds * mug.cwiseProduct(wa);
    out.gb = -mgh + ds * mug.cwiseProduct(wb);
    const Eigen::MatrixXd yda = y * da.asDiagonal();
    const Eigen::MatrixXd ydb = y * db.asDiagonal();
    out.haa = mgm + yda + yda.transpose();
    out.haa.diagonal() += ds * mug.cwiseProduct(waa);
    out.hbb = mgm - ydb - ydb.transpose();
    out.hbb.diagonal() += ds * mug.cwiseProduct(wbb);
    out.hab = -mgm + ydb - da.asDiagonal() * y.transpose();
    out.hab.diagonal() += ds * mug.cwiseProduct(wab);
    return out;
  }

  // Pi^T v with Pi = I - 1 mu^T
  Eigen::VectorXd project_t(const Eigen::VectorXd& v) const { return v - mu_ * v.sum(); }

  // Pi^T A Pi
  Eigen::MatrixXd project_both(const Eigen::MatrixXd& a) const {
    const Eigen::VectorXd col_sums = a.colwise().sum().transpose();  // 1^T A
    const Eigen::VectorXd row_sums = a.rowwise().sum();              // A 1
    const double total = col_sums.sum();
    Eigen::MatrixXd out = a - mu_ * col_sums.transpose() - row_sums * mu_.transpose();
    out += total * mu_ * mu_.transpose();
    return out;
  }

  static bool solve_block_tridiagonal(std::vector<Eigen::MatrixXd> diag, const std::vector<Eigen::MatrixXd>& off,
                                      std::vector<Eigen::VectorXd> rhs, std::vector<Eigen::VectorXd>& x) {
    const std::size_t n = diag.size();
    double shift = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
      std::vector<Eigen::MatrixXd> d = diag;
      if (shift > 0.0) {
        for (auto& blk : d) blk.diagonal().array() += shift * std::max(1e-300, blk.diagonal().cwiseAbs().mean());
      }
      std::vector<Eigen::LLT<Eigen::MatrixXd>> fac(n);
      std::vector<Eigen::VectorXd> y = rhs;
      bool ok = true;
      for (std::size_t j = 0; j < n && ok; ++j) {
        if (j > 0) {
          // S_j = D_j - B_{j-1}^T S_{j-1}^{-1} B_{j-1}
          const Eigen::MatrixXd sb = fac[j - 1].solve(off[j - 1]);
          d[j] -= off[j - 1].transpose() * sb;
          y[j] -= off[j - 1].transpose() * fac[j - 1].solve(y[j - 1]);
        }
        d[j] = 0.5 * (d[j] + d[j].transpose()).eval();
        fac[j].compute(d[j]);
        ok = fac[j].info() == Eigen::Success;
      }
      if (ok) {
        x.assign(n, Eigen::VectorXd());
        x[n - 1] = fac[n - 1].solve(y[n - 1]);
        for (std::size_t j = n - 1; j-- > 0;) x[j] = fac[j].solve(y[j] - off[j] * x[j + 1]);
        bool finite = true;
        for (const auto& v : x) finite = finite && v.allFinite();
        if (finite) return true;
      }
      shift = shift == 0.0 ? 1e-12 : shift * 10.0;
    }
    return false;
  }

  const MarkovTriple& triple_;
  const XiFunction& xi_;
  std::vector<double> times_;
  Eigen::VectorXd mu_;
  Index m_;
  const Eigen::MatrixXd& pinv_;
};

inline DiscretePath zero_path(const Eigen::VectorXd& f, Index k) {
  DiscretePath p;
  p.times = uniform_times(k);
  p.rho.assign(static_cast<std::size_t>(k + 1), f);
  p.h.assign(static_cast<std::size_t>(k), Eigen::VectorXd::Zero(f.size()));
  return p;
}

}  // namespace detail

/// Minimizes the xi-action over admissible paths on the uniform K-grid.
///
/// Every iterate is an admissible path and the action never increases; the returned value is
/// the action of the returned path, hence an upper bound on T_xi^2.
inline TransportResult minimize_action_xi(const MarkovTriple& triple, const Eigen::VectorXd& f,
                                          const Eigen::VectorXd& g, const XiFunction& xi,
                                          const TransportOptions& opt = {}) {
  require(opt.K >= 2, Errc::BadParameters, "K must be >= 2");
  check_shape(triple, f, "f");
  check_shape(triple, g, "g");
  require(f.minCoeff() > 0.0 && g.minCoeff() > 0.0, Errc::NonPositiveDensity, "endpoints must be strictly positive");
  require(std::abs(triple.mean(f) - 1.0) <= kMassTol && std::abs(triple.mean(g) - 1.0) <= kMassTol,
          Errc::NotNormalized, "endpoints must have unit mass");
  if (!xi.is_log()) xi.validate(100);

  TransportResult res;
  res.xi_name = xi.is_log() ? "log" : "power:" + std::to_string(xi.exponent);
  if (f == g) {
    res.path = detail::zero_path(f, opt.K);
    res.phi_profile.assign(static_cast<std::size_t>(opt.K), 0.0);
    res.history = {0.0};
    return res;
  }

  DiscretePath seed = initial_path(triple, f, g, opt.K);
  if (opt.seed_reparametrize) {
    const double a0 = integrate_slices(seed, slice_costs(triple, seed, xi));
    const DiscretePath rep = reparametrize_eps_geodesic(triple, seed, std::max(1e-300, opt.seed_eps_fraction * a0), xi);
    seed = resample(triple, rep, uniform_times(opt.K));
  }

  const std::vector<double> times = seed.times;
  detail::ActionNewton newton(triple, xi, times);
  std::vector<Eigen::VectorXd> rho = seed.rho;
  double val = newton.value(rho);
  res.history.push_back(val);

  const std::size_t n = rho.size() - 2;
  std::vector<Eigen::VectorXd> grad;
  std::vector<Eigen::VectorXd> dir;
  bool converged = n == 0;
  int it = 0;
  for (; it < opt.max_iter && !converged; ++it) {
    if (!newton.direction(rho, grad, dir)) break;
    res.grad_norm = newton.projected_gradient_norm(grad);
    double slope = 0.0;
    for (std::size_t j = 0; j < n; ++j) slope += grad[j].dot(dir[j]);
    if (!(slope < 0.0) || -0.5 * slope <= opt.tol_rel * val) {
      converged = true;
      break;
    }
    // stay strictly inside rho > floor; at most halve any density per step
    double alpha = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      for (Index x = 0; x < rho[j + 1].size(); ++x) {
        if (dir[j](x) < 0.0) alpha = std::min(alpha, 0.5 * (rho[j + 1](x) - opt.rho_floor) / -dir[j](x));
      }
    }
    std::vector<Eigen::VectorXd> trial = rho;
    bool accepted = false;
    double next = val;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t j = 0; j < n; ++j) trial[j + 1] = rho[j + 1] + alpha * dir[j];
      next = newton.value(trial);
      if (std::isfinite(next) && next <= val + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      converged = true;  // no further decrease representable
      break;
    }
    const double decrease = val - next;
    rho.swap(trial);
    val = next;
    res.history.push_back(val);
    if (alpha == 1.0 && decrease <= opt.tol_rel * val) converged = true;
  }
  if (!grad.empty() && converged) res.grad_norm = newton.projected_gradient_norm(grad);

  res.iterations = it;
  res.converged = converged;
  res.path = path_from_densities(triple, times, std::move(rho));
  res.phi_profile = slice_costs(triple, res.path, xi);
  res.value = integrate_slices(res.path, res.phi_profile);
  res.phi_deviation = phi_deviation(res.path, res.phi_profile);
  return res;
}

inline TransportResult minimize_action(const MarkovTriple& triple, const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                                       const TransportOptions& opt = {}) {
  return minimize_action_xi(triple, f, g, XiFunction::log_entropy(), opt);
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// 2 (arcsin sqrt t - arcsin sqrt r)^2 / kappa, with r, t the masses of one point.
inline double t2_two_point_exact(double kappa, double r, double t) {
  require(kappa > 0.0, Errc::DomainError, "kappa must be positive");
  require(r > 0.0 && r < 1.0 && t > 0.0 && t < 1.0, Errc::DomainError, "r and t must lie in (0,1)");
  const double d = std::asin(std::sqrt(t)) - std::asin(std::sqrt(r));
  return 2.0 * d * d / kappa;
}

/// Closed form for densities f, g with respect to the uniform two-point measure.
inline double t2_two_point_densities(double kappa, const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  return t2_two_point_exact(kappa, 0.5 * f(1), 0.5 * g(1));
}

/// Geodesic between f and g on the two-point space sampled on K uniform intervals.
inline DiscretePath two_point_geodesic(const MarkovTriple& triple, const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                                       Index k) {
  const double theta = std::asin(std::sqrt(0.5 * f(1)));
  const double omega = std::asin(std::sqrt(0.5 * g(1)));
  std::vector<double> times = uniform_times(k);
  std::vector<Eigen::VectorXd> rho;
  for (double s : times) {
    const double sn = std::sin(s * omega + (1.0 - s) * theta);
    const double mb = sn * sn;
    rho.push_back(Eigen::Vector2d(2.0 * (1.0 - mb), 2.0 * mb));
  }
  rho.front() = f;
  rho.back() = g;
  return path_from_densities(triple, std::move(times), std::move(rho));
}

/// CSV rows "k,s,state,rho,h" (h of the interval starting at node k; empty on the last node).
inline void write_path_csv(std::ostream& os, const MarkovTriple& triple, const DiscretePath& path) {
  os << "k,s,state,rho,h\n";
  os.precision(17);
  for (std::size_t k = 0; k < path.rho.size(); ++k) {
    for (Index x = 0; x < path.rho[k].size(); ++x) {
      os << k << ',' << path.times[k] << ',' << triple.states()[static_cast<std::size_t>(x)] << ','
         << path.rho[k](x) << ',';
      if (k < path.h.size()) os << path.h[k](x);
      os << '\n';
    }
  }
}

}  // namespace mtd
