#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "entroflow/functionals.hpp"
#include "entroflow/harness.hpp"
#include "entroflow/profiles.hpp"

using namespace entroflow;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;

GridDensity gauss(int n, double sigma, int cells = 4096) {
  return gaussian({n, sigma}, GridSpec::centered(n, 12.0 * std::sqrt(sigma), cells));
}

// Renyi entropy of the Gaussian with covariance sigma I_n.
double gaussian_renyi(int n, double sigma, double p) {
  return 0.5 * n * std::log(2.0 * std::numbers::pi * sigma) + 0.5 * n * std::log(p) / (p - 1.0);
}

// I_p of the same Gaussian: p^2 / sigma^2 * int |x|^2 g^{2p-1} / int g^p.
double gaussian_fisher_p(int n, double sigma, double p) {
  const double c = std::pow(2.0 * std::numbers::pi * sigma, -0.5 * n);
  const double num = std::pow(c, 2.0 * p - 1.0) * std::pow(2.0 * std::numbers::pi * sigma / (2.0 * p - 1.0), 0.5 * n) *
                     n * sigma / (2.0 * p - 1.0);
  const double den = std::pow(c, p) * std::pow(2.0 * std::numbers::pi * sigma / p, 0.5 * n);
  return p * p / (sigma * sigma) * num / den;
}

}  // namespace

TEST_CASE("Gaussian anchors") {
  for (int n : {1, 2, 3}) {
    for (double sigma : {0.5, 1.0, 2.0}) {
      const auto d = gauss(n, sigma);
      INFO("n=" << n << " sigma=" << sigma);
      CHECK_THAT(shannon_entropy(d), WithinRel(0.5 * n * std::log(kTwoPiE * sigma), 1e-6));
      CHECK_THAT(fisher_information(d), WithinRel(n / sigma, 1e-4));
      CHECK_THAT(normalized_entropy_power(d), WithinRel(sigma, 1e-4));
      CHECK_THAT(entropy_power(d), WithinRel(kTwoPiE * sigma, 1e-4));
      CHECK_THAT(entropy_power(d) * fisher_information(d), WithinRel(kTwoPiE * n, 1e-3));
    }
  }
  // Heat kernel at time t has sigma = 2t.
  const double t = 0.75;
  CHECK_THAT(shannon_entropy(gauss(1, 2.0 * t)), WithinRel(0.5 * std::log(4.0 * std::numbers::pi * std::numbers::e * t), 1e-6));
}

TEST_CASE("Renyi quantities of Gaussians") {
  for (int n : {1, 3}) {
    for (double p : {0.8, 1.5, 2.0, 3.0}) {
      const auto d = gauss(n, 1.3);
      INFO("n=" << n << " p=" << p);
      CHECK_THAT(renyi_entropy(d, p), WithinRel(gaussian_renyi(n, 1.3, p), 1e-6));
      CHECK_THAT(fisher_information_p(d, p), WithinRel(gaussian_fisher_p(n, 1.3, p), 1e-4));
      CHECK_THAT(power_integral(d, p), WithinRel(std::exp((1.0 - p) * renyi_entropy(d, p)), 1e-12));
    }
  }
}

TEST_CASE("uniform density has zero entropies") {
  const auto d = GridDensity::sample(GridSpec::cartesian(0.0, 1.0, 1024), [](double) { return 1.0; });
  CHECK_THAT(shannon_entropy(d), WithinAbs(0.0, 1e-14));
  for (double p : {0.5, 2.0, 3.0}) CHECK_THAT(renyi_entropy(d, p), WithinAbs(0.0, 1e-12));
}

TEST_CASE("p -> 1 continuity and delegation") {
  const auto d = gauss(1, 1.0);
  const double h = shannon_entropy(d);
  CHECK(renyi_entropy(d, 1.0 + 1e-9) == h);
  CHECK(std::abs(renyi_entropy(d, 1.0 + 1e-6) - h) < 1e-4);
  CHECK(std::abs(renyi_entropy(d, 1.0 - 1e-6) - h) < 1e-4);
  CHECK(renyi_entropy_power(d, 1.0) == entropy_power(d));
  CHECK(fisher_information_p(d, 1.0) == fisher_information(d));
  const double lam = lambda_functional(d, 1.0);
  CHECK(std::abs(lambda_functional(d, 1.0 + 1e-6) - lam) < 1e-4);
}

TEST_CASE("input validation") {
  const auto spec = GridSpec::cartesian(-5.0, 5.0, 256);
  const auto heavy = GridDensity::sample(spec, [](double x) { return 2.0 * std::exp(-x * x / 2.0) / std::sqrt(2.0 * std::numbers::pi); });
  CHECK_THROWS_WITH(shannon_entropy(heavy), ContainsSubstring("requires probability density"));
  CHECK_THROWS_WITH(fisher_information(heavy), ContainsSubstring("requires probability density"));
  const auto d3 = gauss(3, 1.0, 1024);
  CHECK_THROWS_WITH(renyi_entropy_power(d3, 0.2), ContainsSubstring("entropy power undefined"));
  CHECK_THROWS_AS(renyi_entropy(d3, -1.0), Error);
}

TEST_CASE("scale relations under dilation") {
  for (int n : {1, 2, 3}) {
    MixtureGenerator gen(11 + n);
    const auto mix = gen.next(n);
    const auto d = mix.sample(GridSpec::centered(n, mixture_half_width(n), 4096));
    for (double a : {0.5, 2.0}) {
      const auto da = dilate(d, a);
      INFO("n=" << n << " a=" << a);
      CHECK_THAT(shannon_entropy(da), WithinAbs(shannon_entropy(d) - n * std::log(a), 1e-10));
      CHECK_THAT(renyi_entropy(da, 2.0), WithinAbs(renyi_entropy(d, 2.0) - n * std::log(a), 1e-10));
      CHECK_THAT(second_moment(da), WithinRel(second_moment(d) / (a * a), 1e-12));
      CHECK_THAT(fisher_information(da), WithinRel(a * a * fisher_information(d), 1e-10));
      CHECK_THAT(entropy_power(da) * fisher_information(da),
                 WithinRel(entropy_power(d) * fisher_information(d), 1e-10));
      for (double p : {0.9, 2.0}) {
        CHECK_THAT(fisher_information_p(da, p),
                   WithinRel(std::pow(a, 2.0 + n * (p - 1.0)) * fisher_information_p(d, p), 1e-10));
        CHECK_THAT(renyi_entropy_power(da, p) * fisher_information_p(da, p),
                   WithinRel(renyi_entropy_power(d, p) * fisher_information_p(d, p), 1e-10));
        CHECK_THAT(lambda_functional(da, p), WithinAbs(lambda_functional(d, p), 1e-10));
      }
    }
  }
}

TEST_CASE("gradient-free Fisher cross-check") {
  for (int n : {1, 3}) {
    MixtureGenerator gen(5);
    for (int k = 0; k < 5; ++k) {
      const auto d = gen.next(n).sample(GridSpec::centered(n, mixture_half_width(n), 4096));
      CHECK_THAT(fisher_information_sqrt_form(d), WithinRel(fisher_information(d), 1e-3));
    }
  }
}

TEST_CASE("moment-Fisher bounds on random mixtures") {
  for (int n : {1, 2, 3}) {
    MixtureGenerator gen(2024 + n);
    for (int k = 0; k < 25; ++k) {
      const auto d = gen.next(n).sample(GridSpec::centered(n, mixture_half_width(n), 4096));
      const double e = second_moment(d);
      CHECK(e * fisher_information(d) >= n * n - 1e-6);
      for (double p : {0.9, 2.0})
        CHECK(e * fisher_information_p(d, p) >= n * n * power_integral(d, p) - 1e-6);
    }
  }
}

TEST_CASE("functional report is self-consistent") {
  const auto d = gauss(2, 0.8);
  const auto r = evaluate_functionals(d, 2.0);
  CHECK(r.n == 2);
  CHECK_THAT(r.N, WithinRel(std::exp(r.H), 1e-14));
  CHECK_THAT(r.N_p, WithinRel(std::exp(2.0 * r.H_p), 1e-14));
  CHECK_THAT(r.Lambda, WithinRel(r.H_p - std::log(r.E), 1e-14));
  CHECK_THAT(r.power_integral, WithinRel(std::exp(-r.H_p), 1e-12));
  CHECK((r.I >= 0.0 && r.I_p >= 0.0 && r.E >= 0.0));
}
