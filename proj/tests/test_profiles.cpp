#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "entroflow/functionals.hpp"
#include "entroflow/profiles.hpp"
#include "oracles.hpp"

using namespace entroflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Case {
  int n;
  double p;
};

const std::vector<Case> kCases{{1, 2.0}, {1, 3.0}, {1, 1.5}, {1, 0.9}, {2, 2.0}, {3, 2.0}, {3, 0.9}};

}  // namespace

TEST_CASE("Barenblatt normalizing constant") {
  CHECK_THAT(solve_barenblatt_C(1, 2.0), WithinRel(std::cbrt(3.0) / 4.0, 1e-10));
  for (auto [n, p] : {Case{1, 2.0}, Case{2, 2.0}, Case{3, 0.9}, Case{1, 0.9}, Case{3, 1.5}, Case{2, 0.6},
                      Case{1, 1.001}, Case{1, 0.999}}) {
    INFO("n=" << n << " p=" << p);
    CHECK_THAT(solve_barenblatt_C(n, p), WithinRel(oracle::barenblatt(n, p).C, 1e-9));
  }
}

TEST_CASE("Barenblatt parameters and admissibility") {
  const auto b = barenblatt_params(3, 2.0);
  CHECK(b.mu == 5.0);
  CHECK_THAT(b.lambda, WithinRel(0.05, 1e-15));
  CHECK(barenblatt_params(1, 0.9).lambda < 0.0);
  CHECK_THROWS_AS(barenblatt_params(3, 0.5), Error);
  CHECK_THROWS_AS(barenblatt_params(1, 1.0 / 3.0), Error);
  // Support shrinks as the order grows in one dimension.
  double previous = std::numeric_limits<double>::infinity();
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const double r = barenblatt_params(1, p).support_radius();
    CHECK(r < previous);
    previous = r;
  }
}

TEST_CASE("sampled Barenblatt profiles have unit mass") {
  for (auto [n, p] : {Case{1, 2.0}, Case{2, 2.0}, Case{3, 0.9}}) {
    const auto b = barenblatt_params(n, p);
    const auto d = barenblatt_profile(b, GridSpec::centered(n, barenblatt_extent(b), 8192));
    INFO("n=" << n << " p=" << p);
    CHECK_THAT(mass(d), WithinRel(1.0, 1e-8));
    CHECK_THAT(second_moment(d), WithinRel(oracle::barenblatt(n, p).E(), 1e-4));
  }
}

TEST_CASE("compact support for p > 1, positive tails for p < 1") {
  const auto b = barenblatt_params(1, 2.0);
  const auto d = barenblatt_profile(b, GridSpec::cartesian(-4.0, 4.0, 1024));
  const auto x = d.grid().coordinates();
  for (std::size_t i = 0; i < d.size(); ++i)
    if (std::abs(x[i]) >= b.support_radius()) CHECK(d[i] == 0.0);

  const auto fast = barenblatt_params(1, 0.9);
  const auto tail = barenblatt_profile(fast, GridSpec::cartesian(-2.0, 2.0, 1024));
  for (double v : tail.values()) CHECK(v > 0.0);
  CHECK(tail.truncated_tail_mass > kTailWarnMass);
  CHECK_FALSE(tail.warnings.empty());
}

TEST_CASE("self-similar solution is a dilation of the profile") {
  const auto b = barenblatt_params(1, 2.0);
  const auto spec = GridSpec::cartesian(-3.0, 3.0, 2048);
  const auto at_one = barenblatt_solution(b, 1.0, spec);
  const auto profile = barenblatt_profile(b, spec);
  for (std::size_t i = 0; i < spec.size(); i += 7) CHECK_THAT(at_one[i], WithinAbs(profile[i], 1e-15));

  const double t = 3.0;
  const double a = std::pow(t, -1.0 / b.mu);
  const auto dilated = dilate(profile, a);
  const auto exact = barenblatt_solution(b, t, dilated.spec());
  for (std::size_t i = 0; i < spec.size(); i += 7) CHECK_THAT(exact[i], WithinAbs(dilated[i], 1e-12));
  CHECK_THAT(second_moment(exact), WithinRel(second_moment(profile) * std::pow(t, 2.0 / b.mu), 1e-10));
}

TEST_CASE("gamma matches the closed form and is grid converged") {
  for (auto [n, p] : kCases) {
    const auto g = gamma_np_refined(n, p);
    INFO("n=" << n << " p=" << p);
    CHECK(g.rel_change < 1e-6);
    CHECK(g.history.size() >= 2);
    CHECK_THAT(g.value, WithinRel(oracle::barenblatt(n, p).gamma(), 1e-5));
  }
  CHECK_THAT(gamma_np(1, 2.0), WithinRel(125.0 / 9.0, 1e-6));
}

TEST_CASE("refinement history shows second-order convergence") {
  RefineOptions opt;
  opt.start_cells = 256;
  opt.rel_tol = 1e-9;
  const auto g = gamma_np_refined(1, 1.5, opt);
  const double exact = oracle::barenblatt(1, 1.5).gamma();
  REQUIRE(g.history.size() >= 3);
  const double e0 = std::abs(g.history[0] - exact), e1 = std::abs(g.history[1] - exact);
  CHECK(e0 / e1 > 3.0);
}

TEST_CASE("gamma approaches 2 pi e n as p -> 1") {
  for (int n : {1, 2, 3}) {
    const double limit = 2.0 * std::numbers::pi * std::numbers::e * n;
    CHECK(gamma_np(n, 1.0) == limit);
    for (double p : {1.001, 0.999}) {
      INFO("n=" << n << " p=" << p);
      CHECK_THAT(gamma_np(n, p), WithinRel(limit, 1e-3));
    }
  }
}

TEST_CASE("gamma is invariant along the self-similar solution") {
  const auto b = barenblatt_params(1, 2.0);
  const double t = 5.0;
  const double r = b.support_radius() * std::pow(t, 1.0 / b.mu);
  const auto d = barenblatt_solution(b, t, GridSpec::cartesian(-r, r, 16384));
  CHECK_THAT(renyi_entropy_power(d, 2.0) * fisher_information_p(d, 2.0), WithinRel(gamma_np(1, 2.0), 1e-5));
}

TEST_CASE("equality at the Barenblatt profile, positive slack at a Gaussian") {
  for (auto [n, p] : kCases) {
    const double gamma = gamma_np(n, p);
    const auto b = barenblatt_params(n, p);
    const auto extremal = barenblatt_profile(b, GridSpec::centered(n, barenblatt_extent(b), 16384));
    const double at_extremal = renyi_entropy_power(extremal, p) * fisher_information_p(extremal, p);
    const double sigma = oracle::barenblatt(n, p).E() / n;
    const auto g = gaussian({n, sigma}, GridSpec::centered(n, 12.0 * std::sqrt(sigma), 4096));
    const double at_gaussian = renyi_entropy_power(g, p) * fisher_information_p(g, p);
    INFO("n=" << n << " p=" << p);
    CHECK(std::abs(at_extremal - gamma) / gamma < 1e-4);
    CHECK((at_gaussian - gamma) / gamma >= 1e-5);
  }
}

TEST_CASE("extremal Lambda and entropy-power ratio match the closed form") {
  for (auto [n, p] : kCases) {
    const auto o = oracle::barenblatt(n, p);
    INFO("n=" << n << " p=" << p);
    CHECK_THAT(extremal_lambda(n, p), WithinAbs(o.lambda_functional(), 1e-6));
    CHECK_THAT(extremal_entropy_power_ratio(n, p), WithinRel(o.ratio(), 1e-5));
  }
  CHECK_THAT(extremal_lambda(2, 1.0), WithinRel(std::log(std::numbers::pi * std::numbers::e), 1e-15));
}

TEST_CASE("GN exponents") {
  CHECK_THAT(theta_gn(3, 2.0, GnBranch::A), WithinRel(0.5, 1e-15));
  CHECK_THAT(theta_gn1(3, 2.0, 4.0), WithinRel(0.75, 1e-15));
  CHECK_THAT(gn_order(gn_q(2.0)), WithinRel(2.0, 1e-15));
  CHECK(gn_branch_for_order(1, 2.0) == GnBranch::B);
  CHECK(gn_branch_for_order(3, 0.9) == GnBranch::A);
  CHECK_FALSE(gn_branch_for_order(3, 0.62).has_value());
  CHECK_THROWS_AS(theta_gn(3, 3.5, GnBranch::A), Error);
  CHECK_THROWS_AS(theta_gn(3, 0.5, GnBranch::A), Error);
  CHECK_THROWS_AS(theta_gn(1, 1.5, GnBranch::B), Error);
  for (int n : {1, 2, 3})
    for (double theta : {theta_gn(n, 0.2, GnBranch::B), theta_gn(n, 0.5, GnBranch::B)}) CHECK((theta > 0 && theta < 1));
}

TEST_CASE("GN ratio is dilation invariant") {
  for (auto [n, p] : {Case{1, 2.0}, Case{1, 0.9}, Case{3, 2.0}}) {
    const auto b = barenblatt_params(n, p);
    const double q = gn_q(p);
    const auto branch = *gn_branch_for_order(n, p);
    const auto u = gn_optimizer(b, GridSpec::centered(n, gn_extent(b), 8192));
    INFO("n=" << n << " p=" << p);
    for (double a : {0.5, 3.0})
      CHECK_THAT(gn_terms(dilate(u, a), q, branch).ratio(), WithinRel(gn_terms(u, q, branch).ratio(), 1e-12));
  }
}

TEST_CASE("K_GN equals the maximum of the GN ratio over the profile family") {
  for (auto [n, p] : {Case{1, 2.0}, Case{1, 3.0}, Case{1, 1.5}, Case{1, 0.9}, Case{3, 2.0}, Case{3, 0.9}}) {
    const double q = gn_q(p);
    const auto branch = *gn_branch_for_order(n, p);
    const double theta = theta_gn(n, q, branch);
    const double target = branch == GnBranch::A ? 2.0 * q : q + 1.0;
    const double other = branch == GnBranch::A ? q + 1.0 : 2.0 * q;
    const double s_star = (p - 0.5) / std::abs(p - 1.0);
    double best = 0.0, arg = 0.0;
    for (int k = -400; k <= 400; ++k) {
      const double s = s_star * (1.0 + 5e-4 * k);
      const double r = oracle::gn_ratio(n, s, p > 1.0, target, other, theta);
      if (r > best) best = r, arg = s;
    }
    INFO("n=" << n << " p=" << p);
    CHECK_THAT(arg, WithinRel(s_star, 1e-3));
    CHECK_THAT(k_gn(n, q, branch), WithinRel(best, 1e-4));
  }
}
