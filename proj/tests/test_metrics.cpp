#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "procure/bounds.hpp"
#include "procure/metrics.hpp"
#include "procure/rng.hpp"
#include "procure/simulation.hpp"
#include "test_support.hpp"

using namespace procure;
using namespace procure::testing;

TEST_CASE("hyperarea examples") {
  const std::vector<Point2> two{{2, 4}, {4, 2}};
  CHECK(hyperarea(two) == 12.0);
  const std::vector<Point2> one{{3, 5}};
  CHECK(hyperarea(one) == 15.0);
  const std::vector<Point2> with_dominated{{2, 4}, {1, 1}, {4, 2}, {2, 4}};
  CHECK(hyperarea(with_dominated) == 12.0);
  CHECK(hyperarea(std::vector<Point2>{}) == 0.0);
  CHECK(hyperarea(two, {1.0, 1.0}) == 5.0);
  const std::vector<Point2> below{{2, 4}, {-1, 3}};
  CHECK_THROWS_AS(hyperarea(below), ContractError);
}

TEST_CASE("hyperarea is permutation invariant and monotone") {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Point2> pts(1 + uniform_index(rng, 10));
    for (auto& p : pts) p = {std::round(uniform_real(rng, 0, 10)), std::round(uniform_real(rng, 0, 10))};
    const double base = hyperarea(pts);
    auto shuffled = pts;
    for (std::size_t s = shuffled.size(); s > 1; --s) std::swap(shuffled[s - 1], shuffled[uniform_index(rng, s)]);
    CHECK(hyperarea(shuffled) == base);

    auto more = pts;
    more.push_back({uniform_real(rng, 0, 10), uniform_real(rng, 0, 10)});
    CHECK(hyperarea(more) >= base);

    const auto top = *std::max_element(pts.begin(), pts.end());
    auto better = pts;
    double max_second = 0;
    for (const auto& p : pts) max_second = std::max(max_second, p.second);
    better.push_back({top.first + 1.0, max_second + 1.0});
    CHECK(hyperarea(better) > base);
  }
}

TEST_CASE("coverage examples") {
  const std::vector<Point2> a{{1, 1}}, b{{2, 2}};
  CHECK(coverage(a, b) == 1.0);
  CHECK(coverage(b, a) == 0.0);
  const std::vector<Point2> x{{1, 3}, {3, 1}};
  CHECK(coverage(x, x) == 0.0);
  CHECK(coverage(x, b) == 0.0);
  const std::vector<Point2> y{{1, 1}, {5, 5}};
  CHECK(coverage(y, b) == 0.5);
  CHECK(coverage(b, std::vector<Point2>{}) == 0.0);
  CHECK_THROWS_AS(coverage(std::vector<Point2>{}, b), ContractError);
  // Equal points do not strictly dominate each other.
  CHECK(coverage(b, b) == 0.0);
}

TEST_CASE("complexity report on TINY matches direct products") {
  const auto inst = tiny();
  const auto xb = x_bounds(inst);
  const auto div = divide(inst);
  const auto yb = y_bounds(inst, div);
  const auto rep = complexity_report(inst, xb, yb);

  double n = 1.0;
  for (std::size_t k = 0; k < xb.x_lower.size(); ++k) {
    if (xb.x_upper[k] > xb.x_lower[k]) n *= static_cast<double>(xb.x_upper[k] - xb.x_lower[k]);
  }
  CHECK(n == 16.0);
  CHECK(rep.log_n == doctest::Approx(std::log10(n)).epsilon(1e-12));

  const double n_prime = static_cast<double>((yb.y_upper[0] - yb.y_lower[0]) * (yb.y_upper[1] - yb.y_lower[1]));
  CHECK(n_prime == 128.0);
  CHECK(rep.log_n_prime == doctest::Approx(std::log10(n_prime)).epsilon(1e-12));

  double of = 0.0, inner = 0.0;
  for (std::size_t p = 0; p < inst.profile_count(); ++p) {
    const auto r = static_cast<double>(inst.expected_profile_cases(p));
    double phi = 0.0, ni = 1.0;
    for (const auto& item : inst.profile(p).items) {
      phi += static_cast<double>(item.alternatives.size());
      if (item.mandatory) continue;
      for (std::size_t k = 0; k < item.alternatives.size(); ++k) ni *= r;
    }
    of += r * phi;
    inner += ni * r * phi;
    CHECK(rep.log_n_i[p] == doctest::Approx(std::log10(ni)).epsilon(1e-12));
    CHECK(rep.log_of_i[p] == doctest::Approx(std::log10(r * phi)).epsilon(1e-12));
  }
  CHECK(rep.log_of == doctest::Approx(std::log10(of)).epsilon(1e-12));
  CHECK(rep.log_transformed_total == doctest::Approx(std::log10(n_prime * inner)).epsilon(1e-12));
  CHECK(rep.ratio_exact == doctest::Approx(std::log10(n * of) / std::log10(n_prime * inner)).epsilon(1e-12));
  CHECK(rep.ratio_exact > 0.0);
  CHECK(rep.ratio_averaged > 0.0);
  CHECK(std::isfinite(rep.ratio_averaged));
}

TEST_CASE("averaged ratio follows the formula") {
  ComplexityAverages a;
  a.supplies = 25000;
  a.diseases = 450;
  a.x_hat = 1100;
  a.y_hat = 95;
  a.z_hat = 66;
  a.phi_hat = 37;
  a.cases = 1000;
  const double shared = std::log10(1000.0 * 37.0);
  const double expected = (25000 * std::log10(1100.0) + shared) /
                          (450 * std::log10(95.0) + 37 * std::log10(66.0) + shared);
  CHECK(averaged_complexity_ratio(a) == doctest::Approx(expected).epsilon(1e-12));
  // The paper quotes about 58 for these averages; the formula gives about 79.
  CHECK(averaged_complexity_ratio(a) > 78.0);
  CHECK(averaged_complexity_ratio(a) < 81.0);

  ComplexityAverages same;
  same.supplies = same.diseases = 50;
  same.x_hat = same.y_hat = 200;
  same.z_hat = 1;
  same.phi_hat = 4;
  same.cases = 10;
  CHECK(averaged_complexity_ratio(same) == doctest::Approx(1.0).epsilon(1e-12));
}
