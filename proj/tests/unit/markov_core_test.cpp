#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <thread>

#include "mtd/markov_core.hpp"
#include "mtd/models.hpp"
#include "mtd/semigroup.hpp"
#include "test_util.hpp"

using namespace mtd;

namespace {

template <class Fn>
Errc error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::ConfigError;
}

}  // namespace

TEST(BuildTriple, TwoPointIsValid) {
  Eigen::MatrixXd l(2, 2);
  l << -1, 1, 1, -1;
  const auto t = build_triple({"a", "b"}, l, Eigen::Vector2d(0.5, 0.5));
  EXPECT_EQ(t.size(), 2);
  EXPECT_EQ(t.edges().size(), 1u);
}

TEST(BuildTriple, ZeroGeneratorIsValid) {
  const auto t = build_triple({}, Eigen::MatrixXd::Zero(2, 2), Eigen::Vector2d(0.5, 0.5));
  EXPECT_TRUE(t.edges().empty());
  EXPECT_FALSE(t.spectral().irreducible());
}

TEST(BuildTriple, RejectsDetailedBalanceViolation) {
  Eigen::MatrixXd l(2, 2);
  l << -1, 1, 2, -2;
  EXPECT_EQ(error_of([&] { build_triple({}, l, Eigen::Vector2d(0.5, 0.5)); }), Errc::DetailedBalanceViolation);
}

TEST(BuildTriple, RejectsBadInputs) {
  Eigen::MatrixXd l(2, 2);
  l << 1, -1, 1, -1;
  EXPECT_EQ(error_of([&] { build_triple({}, l, Eigen::Vector2d(0.5, 0.5)); }), Errc::NonMarkovGenerator);
  l << -1, 1, 1, -0.5;
  EXPECT_EQ(error_of([&] { build_triple({}, l, Eigen::Vector2d(0.5, 0.5)); }), Errc::NonMarkovGenerator);
  l << -1, 1, 1, -1;
  EXPECT_EQ(error_of([&] { build_triple({}, l, Eigen::Vector2d(1.0, 0.0)); }), Errc::NonPositiveMeasure);
  EXPECT_EQ(error_of([&] { build_triple({}, l, Eigen::Vector3d(0.2, 0.3, 0.5)); }), Errc::ShapeMismatch);
}

TEST(BuildTriple, ConfigurableDetailedBalanceTolerance) {
  Eigen::MatrixXd l(2, 2);
  l << -1, 1, 1 + 1e-9, -(1 + 1e-9);
  EXPECT_THROW(build_triple({}, l, Eigen::Vector2d(0.5, 0.5)), Error);
  EXPECT_NO_THROW(build_triple({}, l, Eigen::Vector2d(0.5, 0.5), 1e-8));
}

TEST(Gamma, TwoPoint) {
  const auto t = two_point(1.0);
  const Eigen::VectorXd g = gamma(t, Eigen::Vector2d(0, 1));
  EXPECT_DOUBLE_EQ(g(0), 0.5);
  EXPECT_DOUBLE_EQ(g(1), 0.5);
}

TEST(Gamma, ConstantsVanish) {
  const auto t = ring_chain(5, 1.3);
  EXPECT_EQ(gamma(t, Eigen::VectorXd::Constant(5, 2.0)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gamma, RingBruteForce) {
  const auto t = ring_chain(3, 1.0);
  const Eigen::Vector3d f(0, 1, 0);
  Eigen::Vector3d expect = Eigen::Vector3d::Zero();
  for (int x = 0; x < 3; ++x) {
    for (int y = 0; y < 3; ++y) {
      if (x != y) expect(x) += 0.5 * t.generator()(x, y) * (f(x) - f(y)) * (f(x) - f(y));
    }
  }
  EXPECT_LT((gamma(t, f) - expect).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((gamma(t, f) - Eigen::Vector3d(0.5, 1.0, 0.5)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Gamma, OperatorFormAgrees) {
  std::mt19937_64 rng(7);
  for (const auto& t : {ring_chain(8, 1.0), circle_diffusion(16), two_point(3.0)}) {
    const auto f = fixtures::random_field(t.size(), rng);
    const auto g = fixtures::random_field(t.size(), rng);
    const double scale = std::max(1.0, t.generator().cwiseAbs().maxCoeff());
    EXPECT_LT((gamma(t, f, g) - gamma_operator_form(t, f, g)).cwiseAbs().maxCoeff(), 1e-12 * scale);
  }
}

TEST(Gamma, BilinearSymmetricAndIntegrationByParts) {
  std::mt19937_64 rng(11);
  Eigen::VectorXd v = sample_potential(32, [](double x) { return std::cos(2 * std::numbers::pi * x); });
  const auto t = circle_diffusion(32, v);
  const auto f = fixtures::random_field(32, rng);
  const auto g = fixtures::random_field(32, rng);
  const auto gfg = gamma(t, f, g);
  EXPECT_LT((gfg - gamma(t, g, f)).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::VectorXd af = 2.5 * f + Eigen::VectorXd::Constant(32, 4.0);
  EXPECT_LT((gamma(t, af, g) - 2.5 * gfg).cwiseAbs().maxCoeff(), 1e-9);
  const auto& mu = t.measure();
  const double a = mu.dot(f.cwiseProduct(t.apply(g)));
  const double b = mu.dot(g.cwiseProduct(t.apply(f)));
  const double c = -mu.dot(gfg);
  const double scale = std::max(1.0, std::abs(c));
  EXPECT_NEAR(a, b, 1e-10 * scale);
  EXPECT_NEAR(a, c, 1e-10 * scale);
}

TEST(Gamma2, TwoPoint) {
  const auto t = two_point(1.0);
  const Eigen::VectorXd g2 = gamma2(t, Eigen::Vector2d(0, 1));
  EXPECT_NEAR(g2(0), 1.0, 1e-15);
  EXPECT_NEAR(g2(1), 1.0, 1e-15);
}

TEST(Gamma2, ConstantsAndHomogeneity) {
  std::mt19937_64 rng(3);
  const auto t = ring_chain(6, 1.0);
  EXPECT_EQ(gamma2(t, Eigen::VectorXd::Constant(6, 1.5)).cwiseAbs().maxCoeff(), 0.0);
  const auto f = fixtures::random_field(6, rng);
  EXPECT_LT((gamma2(t, 3.0 * f) - 9.0 * gamma2(t, f)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gamma2, CircleSineMatchesSecondDerivativeSquared) {
  const Index m = 32;
  const auto t = circle_diffusion(m);
  const double w = 2 * std::numbers::pi;
  Eigen::VectorXd f(m), expect(m);
  for (Index i = 0; i < m; ++i) {
    const double x = static_cast<double>(i) / m;
    f(i) = std::sin(w * x);
    expect(i) = std::pow(w * w * std::sin(w * x), 2);
  }
  const double err = (gamma2(t, f) - expect).cwiseAbs().maxCoeff();
  EXPECT_LT(err, 0.05 * expect.maxCoeff());
}

TEST(Entropy, Values) {
  const auto t = two_point(1.0);
  EXPECT_EQ(entropy(t, Eigen::Vector2d(1, 1)), 0.0);
  EXPECT_NEAR(entropy(t, Eigen::Vector2d(0.5, 1.5)), 0.5 * (0.5 * std::log(0.5) + 1.5 * std::log(1.5)), 1e-15);
  EXPECT_NEAR(entropy(t, Eigen::Vector2d(0.5, 1.5)), 0.130812, 1e-6);
  EXPECT_NEAR(entropy(t, Eigen::Vector2d(0.0, 2.0)), std::log(2.0), 1e-15);
  EXPECT_THROW(entropy(t, Eigen::Vector2d(-0.5, 2.5)), Error);
}

TEST(Entropy, ProductAdditivity) {
  const auto t1 = two_point(1.0);
  const auto t2 = ring_chain(3, 2.0);
  const auto p = product(t1, t2);
  const Eigen::Vector2d f1(0.4, 1.6);
  const Eigen::Vector3d f2(0.5, 1.2, 1.3);
  EXPECT_NEAR(entropy(p, tensor(f1, f2)), entropy(t1, f1) + entropy(t2, f2), 1e-14);
}

TEST(Entropy, ZeroOnlyAtOne) {
  std::mt19937_64 rng(5);
  const auto t = ring_chain(8, 1.0);
  for (int i = 0; i < 20; ++i) EXPECT_GT(entropy(t, fixtures::random_density(t, rng, 0.1)), 0.0);
  EXPECT_EQ(entropy(t, Eigen::VectorXd::Ones(8)), 0.0);
}

TEST(PhiEntropy, Values) {
  const auto t = two_point(1.0);
  const auto xl = XiFunction::log_entropy();
  const auto xp = XiFunction::power(1.5);
  EXPECT_NEAR(phi_entropy(t, Eigen::Vector2d(1, 1), xp), 0.0, 1e-15);
  const Eigen::Vector2d f(0.5, 1.5);
  EXPECT_NEAR(phi_entropy(t, f, xl), entropy(t, f), 1e-15);
  const double phi = [](double x) { return std::pow(x, 1.5) / 0.75; }(1.0);
  const double expect = 0.5 * (std::pow(0.5, 1.5) + std::pow(1.5, 1.5)) / 0.75 - phi;
  EXPECT_NEAR(phi_entropy(t, f, xp), expect, 1e-15);
  EXPECT_NEAR(phi_entropy(t, Eigen::Vector2d(0, 2), xp), 0.5 * std::pow(2.0, 1.5) / 0.75 - phi, 1e-14);
  EXPECT_THROW(phi_entropy(t, Eigen::Vector2d(-1, 3), xp), Error);
}

TEST(XiFunction, Validation) {
  EXPECT_NO_THROW(XiFunction::log_entropy().validate());
  EXPECT_NO_THROW(XiFunction::power(1.5).validate());
  EXPECT_NO_THROW(XiFunction::power(2.0).validate());
  EXPECT_THROW(XiFunction::power(2.5), Error);
  XiFunction bad = XiFunction::power(1.5);
  // xi(x) = x^{-3} has 1/xi = x^3, convex
  bad.xi = [](double x) { return std::pow(x, -3.0); };
  bad.dxi = [](double x) { return -3.0 * std::pow(x, -4.0); };
  bad.d2xi = [](double x) { return 12.0 * std::pow(x, -5.0); };
  try {
    bad.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::XiDomainError);
  }
}

TEST(Fisher, Values) {
  const auto t = two_point(1.0);
  EXPECT_EQ(fisher_information(t, Eigen::Vector2d(1, 1)), 0.0);
  EXPECT_NEAR(fisher_information(t, Eigen::Vector2d(0.5, 1.5)), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(error_of([&] { fisher_information(t, Eigen::Vector2d(0, 2)); }), Errc::ZeroDensity);
}

TEST(Fisher, DominatesDissipationOnChains) {
  std::mt19937_64 rng(9);
  const auto t = ring_chain(8, 1.0);
  for (int i = 0; i < 10; ++i) {
    const auto f = fixtures::random_density(t, rng);
    EXPECT_GE(fisher_information(t, f), entropy_dissipation(t, f));
  }
}

TEST(DeBruijn, DissipationIsEntropyDerivative) {
  std::mt19937_64 rng(2);
  for (const auto& t : {two_point(1.0), ring_chain(8, 1.0), circle_diffusion(32)}) {
    const auto f = fixtures::random_density(t, rng, 0.5);
    for (double s : {0.01, 0.1, 0.4}) {
      const double d = 1e-5;
      const double fd = -(entropy(t, evolve(t, f, s + d)) - entropy(t, evolve(t, f, s - d))) / (2 * d);
      EXPECT_NEAR(fd, entropy_dissipation(t, evolve(t, f, s)), 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(DeBruijn, IntegratedIdentity) {
  std::mt19937_64 rng(4);
  const auto t = ring_chain(8, 1.0);
  const auto f = fixtures::random_density(t, rng, 0.5);
  const double T = 0.5;
  const int n = 2000;
  double integral = 0.0;
  for (int i = 0; i < n; ++i) {
    // Simpson on each panel
    const double a = T * i / n;
    const double b = T * (i + 1) / n;
    integral += (b - a) / 6.0 *
                (entropy_dissipation(t, evolve(t, f, a)) + 4 * entropy_dissipation(t, evolve(t, f, 0.5 * (a + b))) +
                 entropy_dissipation(t, evolve(t, f, b)));
  }
  EXPECT_NEAR(entropy(t, f) - entropy(t, evolve(t, f, T)), integral, 1e-6);
}

TEST(DeBruijn, FisherMatchesInDiffusionLimit) {
  // on the circle the gap between Fisher information and dissipation shrinks like h^2
  double prev = 0.0;
  for (Index m : {32, 64, 128}) {
    const auto t = circle_diffusion(m);
    Eigen::VectorXd f(m);
    for (Index i = 0; i < m; ++i) f(i) = 1.0 + 0.5 * std::sin(2 * std::numbers::pi * i / m);
    f /= t.mean(f);
    const double gap = fisher_information(t, f) - entropy_dissipation(t, f);
    EXPECT_GT(gap, 0.0);
    if (prev > 0.0) { EXPECT_LT(gap, 0.3 * prev); }
    prev = gap;
  }
}

TEST(Poisson, Values) {
  const auto t = two_point(1.0);
  EXPECT_EQ(solve_poisson(t, Eigen::Vector2d::Zero()).cwiseAbs().maxCoeff(), 0.0);
  const Eigen::VectorXd h = solve_poisson(t, Eigen::Vector2d(-1, 1));
  EXPECT_NEAR(h(0), 0.5, 1e-15);
  EXPECT_NEAR(h(1), -0.5, 1e-15);
}

TEST(Poisson, ResidualAndMeanZero) {
  std::mt19937_64 rng(1);
  for (const auto& t : {ring_chain(8, 1.0), circle_diffusion(128)}) {
    Eigen::VectorXd r = fixtures::random_field(t.size(), rng);
    r.array() -= t.mean(r);
    const Eigen::VectorXd h = solve_poisson(t, r);
    EXPECT_LT((t.apply(h) - r).cwiseAbs().maxCoeff(), 1e-10 * r.cwiseAbs().maxCoeff());
    EXPECT_LT(std::abs(t.mean(h)), 1e-14 * std::max(1.0, h.cwiseAbs().maxCoeff()));
  }
}

TEST(Poisson, Errors) {
  const auto t = ring_chain(4, 1.0);
  EXPECT_EQ(error_of([&] { solve_poisson(t, Eigen::Vector4d(1, 0, 0, 0)); }), Errc::NotMeanZero);
  const auto z = build_triple({}, Eigen::MatrixXd::Zero(2, 2), Eigen::Vector2d(0.5, 0.5));
  EXPECT_EQ(error_of([&] { solve_poisson(z, Eigen::Vector2d(1, -1)); }), Errc::ReducibleChain);
}

TEST(DensityVector, Validation) {
  const auto t = two_point(1.0);
  EXPECT_NO_THROW(DensityVector(t, Eigen::Vector2d(0.5, 1.5)));
  EXPECT_EQ(error_of([&] { DensityVector(t, Eigen::Vector2d(0.5, 1.0)); }), Errc::NotNormalized);
  EXPECT_EQ(error_of([&] { DensityVector(t, Eigen::Vector2d(-0.5, 2.5)); }), Errc::NonPositiveDensity);
  EXPECT_FALSE(DensityVector(t, Eigen::Vector2d(0.0, 2.0)).strictly_positive());
  EXPECT_NEAR(DensityVector::normalized(t, Eigen::Vector2d(1, 3)).values()(1), 1.5, 1e-15);
}

TEST(SpectralCache, ReconstructionAndConstantMode) {
  Eigen::VectorXd v = sample_potential(64, [](double x) { return std::cos(2 * std::numbers::pi * x); });
  const auto t = circle_diffusion(64, v);
  const auto& c = t.spectral();
  const Eigen::MatrixXd rec = c.eigenvectors() * c.eigenvalues().asDiagonal() *
                              c.eigenvectors().transpose() * t.measure().asDiagonal();
  EXPECT_LT((rec - t.generator()).cwiseAbs().maxCoeff(), 1e-9 * c.generator_scale());
  EXPECT_EQ(c.eigenvalues()(0), 0.0);
  EXPECT_LE(c.eigenvalues().maxCoeff(), 0.0);
  EXPECT_EQ(c.eigenvectors().col(0), Eigen::VectorXd::Ones(64));
  const Eigen::MatrixXd gram = c.eigenvectors().transpose() * t.measure().asDiagonal() * c.eigenvectors();
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(64, 64)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SpectralCache, ConcurrentFirstUse) {
  const auto t = ring_chain(64, 1.0);
  std::vector<std::thread> threads;
  std::vector<double> gaps(8);
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] { gaps[static_cast<std::size_t>(i)] = t.spectral().spectral_gap(); });
  }
  for (auto& th : threads) th.join();
  for (double g : gaps) EXPECT_EQ(g, gaps[0]);
}
