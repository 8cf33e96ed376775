#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <gtest/gtest.h>

#include "subortrim/levy.hpp"

using namespace subortrim;

namespace {

std::vector<TailFunction> all_families() {
  return {TailFunction::stable(0.5), TailFunction::constant(0.3, 2.5), TailFunction::log_power(1.0),
          TailFunction::log_power(2.0), TailFunction::rational(0.5), TailFunction::log_power(1.5, 0.4)};
}

// ∫_{(0,ε]} x Π(dx) straight from the Lévy density, by exp-sinh quadrature
// after substituting x = ε e^{-s}.
double small_jump_mean_from_density(const std::function<double(double)>& density, double eps) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([&](double s) {
    const double x = eps * std::exp(-s);
    if (!(x > 0.0)) return 0.0;
    const double v = x * x * density(x);
    return std::isfinite(v) ? v : 0.0;
  }, 0.0, std::numeric_limits<double>::infinity());
}

} // namespace

TEST(TailEval, Examples) {
  EXPECT_DOUBLE_EQ(tail_eval(TailFunction::stable(0.5), 4.0), 0.5);
  EXPECT_NEAR(tail_eval(TailFunction::log_power(1.0), std::exp(-3.0)), 3.0, 1e-14);
  EXPECT_DOUBLE_EQ(tail_eval(TailFunction::cauchy(), 2.0), 0.5);
}

TEST(TailEval, ZeroAtAndBeyondSupportCap) {
  const auto tail = TailFunction::log_power(1.0);
  EXPECT_EQ(tail(1.0), 0.0);
  EXPECT_EQ(tail(7.0), 0.0);
  EXPECT_GT(tail(0.999), 0.0);
}

TEST(TailEval, RejectsBadLevels) {
  const auto tail = TailFunction::stable(0.5);
  EXPECT_THROW(tail(0.0), std::invalid_argument);
  EXPECT_THROW(tail(-1.0), std::invalid_argument);
  EXPECT_THROW(tail(std::nan("")), std::invalid_argument);
}

TEST(TailEval, NonincreasingOnRandomGrid) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> logx(-40.0, 3.0);
  for (const auto& tail : all_families()) {
    std::vector<double> xs(2000);
    for (auto& x : xs) x = std::exp(logx(gen));
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 1; i < xs.size(); ++i) ASSERT_LE(tail(xs[i]), tail(xs[i - 1])) << tail.name();
  }
}

TEST(TailFunction, ConstructionRejectsInvalidParameters) {
  EXPECT_THROW(TailFunction::stable(0.0), std::invalid_argument);
  EXPECT_THROW(TailFunction::stable(1.0), std::invalid_argument);
  EXPECT_THROW(TailFunction::rational(-0.1), std::invalid_argument);
  EXPECT_THROW(TailFunction::constant(0.5, 0.0), std::invalid_argument);
  EXPECT_THROW(TailFunction::log_power(0.0), std::invalid_argument);
  EXPECT_THROW(TailFunction::log_power(1.0, 1.0), std::invalid_argument);
}

TEST(TailFunction, ParseAndNameRoundTrip) {
  for (const auto& tail : all_families()) {
    const auto back = TailFunction::parse(tail.name());
    EXPECT_EQ(back.family(), tail.family());
    EXPECT_EQ(back.alpha(), tail.alpha());
    EXPECT_EQ(back.param(), tail.param());
  }
  EXPECT_EQ(TailFunction::parse("log").family(), TailFamily::log_power);
  EXPECT_EQ(TailFunction::parse(" stable(0.25) ").alpha(), 0.25);
  EXPECT_EQ(TailFunction::parse("cauchy").family(), TailFamily::cauchy);
  EXPECT_THROW(TailFunction::parse("gauss(1)"), std::invalid_argument);
  EXPECT_THROW(TailFunction::parse("stable(x)"), std::invalid_argument);
  EXPECT_THROW(TailFunction::parse("stable(0.5"), std::invalid_argument);
}

TEST(TailInverse, Examples) {
  EXPECT_DOUBLE_EQ(tail_inverse(TailFunction::stable(0.5), 4.0), 1.0 / 16.0);
  EXPECT_NEAR(tail_inverse(TailFunction::log_power(1.0), 3.0), std::exp(-3.0), 1e-16);
  EXPECT_EQ(log_tail_inverse(TailFunction::log_power(1.0), 3.0), -3.0);
  EXPECT_DOUBLE_EQ(tail_inverse(TailFunction::cauchy(), 4.0), 0.25);
}

TEST(TailInverse, RationalMatchesFixedPointOracle) {
  // x^{-1/2}/(1+x) = 1  <=>  x = (1+x)^{-2}; the iteration contracts near the root.
  double x = 0.5;
  for (int k = 0; k < 400; ++k) x = 1.0 / ((1.0 + x) * (1.0 + x));
  const double got = tail_inverse(TailFunction::rational(0.5), 1.0);
  EXPECT_NEAR(got / x - 1.0, 0.0, 1e-11);
}

TEST(TailInverse, LogDomainReachesUnderflowingLevels) {
  const auto tail = TailFunction::log_power(1.0);
  EXPECT_EQ(log_tail_inverse(tail, 2e8), -2e8);
  EXPECT_EQ(tail_inverse(tail, 2e8), 0.0);
  const auto stable = TailFunction::stable(0.3);
  EXPECT_NEAR(log_tail_inverse(stable, 1e10), -std::log(1e10) / 0.3, 1e-12);
}

TEST(TailInverse, RejectsNonPositive) {
  EXPECT_THROW(tail_inverse(TailFunction::stable(0.5), 0.0), std::invalid_argument);
  EXPECT_THROW(tail_inverse(TailFunction::rational(0.5), -2.0), std::invalid_argument);
  EXPECT_THROW(tail_inverse(TailFunction::rational(0.5), std::nan("")), std::invalid_argument);
}

TEST(TailInverse, SandwichOnLogUniformLevels) {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> logu(std::log(1e-6), std::log(1e12));
  for (const auto& tail : all_families()) {
    int violations = 0;
    for (int k = 0; k < 10000; ++k) {
      const double u = std::exp(logu(gen));
      const double x = tail.inverse(u);
      if (x == 0.0) continue;
      if (!(tail(x) <= u)) ++violations;
      // Just below the inverse the tail must exceed u (subnormals lack the resolution).
      const double below = x * (1.0 - 1e-9);
      if (x >= std::numeric_limits<double>::min() && !(tail(below) > u)) ++violations;
    }
    EXPECT_EQ(violations, 0) << tail.name();
  }
}

TEST(SmallJumpMean, Examples) {
  EXPECT_DOUBLE_EQ(small_jump_mean(TailFunction::stable(0.5), 1.0), 1.0);
  EXPECT_NEAR(small_jump_mean(TailFunction::stable(0.9), 0.01), 0.9 * std::pow(0.01, 0.1) / 0.1, 1e-13);
  // Π(dx) = dx/x on (0,1) for Π̄ = log(1/x): ∫₀¹ x Π(dx) = 1.
  EXPECT_DOUBLE_EQ(small_jump_mean(TailFunction::log_power(1.0), 1.0), 1.0);
  EXPECT_DOUBLE_EQ(small_jump_mean(TailFunction::log_power(1.0), 0.25), 0.25);
}

TEST(SmallJumpMean, AgreesWithDensityQuadrature) {
  {
    const double a = 0.5;
    auto density = [a](double x) { return a * std::pow(x, -a - 1.0) / (1.0 + x) + std::pow(x, -a) / ((1.0 + x) * (1.0 + x)); };
    for (double eps : {0.01, 0.3, 2.0}) {
      const double want = small_jump_mean_from_density(density, eps);
      EXPECT_NEAR(small_jump_mean(TailFunction::rational(a), eps) / want, 1.0, 1e-9) << eps;
    }
  }
  {
    const double p = 2.0;
    auto density = [p](double x) { return p * std::pow(-std::log(x), p - 1.0) / x; };
    for (double eps : {1e-4, 0.1, 0.7}) {
      const double want = small_jump_mean_from_density(density, eps);
      EXPECT_NEAR(small_jump_mean(TailFunction::log_power(p), eps) / want, 1.0, 1e-9) << eps;
    }
  }
  {
    const double p = 1.5, a = 0.4;
    auto density = [p, a](double x) {
      const double v = -std::log(x);
      return std::pow(x, -a - 1.0) * (a * std::pow(v, p) + p * std::pow(v, p - 1.0));
    };
    const double want = small_jump_mean_from_density(density, 0.2);
    EXPECT_NEAR(small_jump_mean(TailFunction::log_power(p, a), 0.2) / want, 1.0, 1e-8);
  }
}

TEST(SmallJumpMean, LogVariantMatchesAndExtendsBelowUnderflow) {
  for (const auto& tail : all_families()) {
    for (double eps : {1e-6, 0.05, 0.5}) {
      EXPECT_NEAR(tail.log_small_jump_mean(std::log(eps)), std::log(tail.small_jump_mean(eps)), 1e-9) << tail.name();
    }
  }
  const auto lp2 = TailFunction::log_power(2.0);
  // ∫ x Π(dx) below e^{-V} is 2 V e^{-V}(1 + 1/V) exactly for p = 2.
  const double v = 1e6;
  EXPECT_NEAR(lp2.log_small_jump_mean(-v), -v + std::log(2.0 * v) + std::log1p(1.0 / v), 1e-9);
  EXPECT_EQ(TailFunction::log_power(1.0).log_small_jump_mean(-1e9), -1e9);
}

TEST(SmallJumpMean, RejectsNonPositive) {
  EXPECT_THROW(small_jump_mean(TailFunction::stable(0.5), 0.0), std::invalid_argument);
  EXPECT_THROW(small_jump_mean(TailFunction::log_power(1.0), -1.0), std::invalid_argument);
}

TEST(RegularVariation, RatioLimitForRationalPerturb) {
  const auto tail = TailFunction::rational(0.5);
  for (double c : {0.5, 1.0, 2.0, 5.0}) {
    const double x = 1e-8;
    EXPECT_NEAR(tail(x) / tail(c * x) / std::pow(c, 0.5) - 1.0, 0.0, 1e-3) << c;
  }
}

TEST(RegularVariation, SlowVariationOfLogTail) {
  // Π̄(2x)/Π̄(x) = 1 − log 2 / log(1/x): the gap closes only logarithmically,
  // reaching 1e-2 once log(1/x) > 100 log 2.
  const auto tail = TailFunction::log_power(1.0);
  EXPECT_NEAR(tail(2e-8) / tail(1e-8), 1.0 - std::log(2.0) / std::log(1e8), 1e-14);
  double prev = 1.0;
  for (double lx = -10.0; lx >= -1000.0; lx *= 2.0) {
    const double gap = std::abs(tail.eval_log(lx + std::log(2.0)) / tail.eval_log(lx) - 1.0);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(std::abs(tail(2e-40) / tail(1e-40) - 1.0), 1e-2);
}

TEST(RegularVariation, PotterBoundsOnSlowlyVaryingParts) {
  struct Case {
    TailFunction tail;
    double cap;
  };
  // (log 1/u / log 1/v)^p stays inside the bounds once log(1/T) > p.
  const std::vector<Case> cases = {{TailFunction::stable(0.5), 10.0},
                                   {TailFunction::constant(0.3, 2.5), 10.0},
                                   {TailFunction::rational(0.5), 10.0},
                                   {TailFunction::log_power(1.0), std::exp(-1.5)},
                                   {TailFunction::log_power(2.0), std::exp(-3.0)}};
  std::mt19937_64 gen(7);
  for (const auto& c : cases) {
    std::uniform_real_distribution<double> logx(std::log(c.cap) - 30.0, std::log(c.cap));
    int violations = 0;
    for (int k = 0; k < 10000; ++k) {
      const double u = std::exp(logx(gen)), v = std::exp(logx(gen));
      if (u == v) continue;
      const double ratio = c.tail.slowly_varying(u) / c.tail.slowly_varying(v);
      if (!(std::min(u / v, v / u) < ratio && ratio < std::max(u / v, v / u))) ++violations;
    }
    EXPECT_EQ(violations, 0) << c.tail.name();
  }
}
