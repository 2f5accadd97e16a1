#include <algorithm>
#include <filesystem>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "procure/bounds.hpp"
#include "procure/instancegen.hpp"
#include "procure/moea.hpp"
#include "procure/simulation.hpp"
#include "test_support.hpp"

using namespace procure;
using namespace procure::testing;

namespace {

BudgetBounds tiny_bounds(Money remaining) { return BudgetBounds{{2, 4}, {10, 20}, remaining}; }

RunConfig quick(Algorithm a, SearchSpace s, std::int64_t evals, std::uint64_t seed = 1) {
  RunConfig c;
  c.algorithm = a;
  c.space = s;
  c.population = 20;
  c.max_evaluations = evals;
  c.seed = seed;
  return c;
}

bool has_point(const ParetoArchive& a, double e, double t) {
  return std::any_of(a.entries.begin(), a.entries.end(), [&](const ArchiveEntry& x) {
    return x.epidemic_effect == doctest::Approx(e).epsilon(1e-12) &&
           x.treatment_effect == doctest::Approx(t).epsilon(1e-12);
  });
}

ProcurementInstance small_generated(std::uint64_t seed) {
  GenSpec g;
  g.diseases = 4;
  g.supplies = 50;
  g.cases = 80;
  g.avg_items = 3;
  g.avg_alternatives = 3;
  g.seed = seed;
  return generate(g);
}

}  // namespace

TEST_CASE("names round-trip") {
  CHECK(parse_algorithm(to_string(Algorithm::moead)) == Algorithm::moead);
  CHECK(parse_algorithm("nsga2") == Algorithm::nsga2);
  CHECK(parse_space(to_string(SearchSpace::original)) == SearchSpace::original);
  CHECK_THROWS_AS(parse_algorithm("spea2"), ParseError);
  CHECK_THROWS_AS(parse_space("mixed"), ParseError);
}

TEST_CASE("config validation") {
  RunConfig c;
  CHECK_THROWS_AS(validate_config(c), ValidationError);  // no stopping rule
  c.max_evaluations = 10;
  CHECK_NOTHROW(validate_config(c));
  c.population = 1;
  CHECK_THROWS_AS(validate_config(c), ValidationError);
  c.algorithm = Algorithm::moead;
  CHECK_NOTHROW(validate_config(c));
  c.crossover_rate = 1.5;
  CHECK_THROWS_AS(validate_config(c), ValidationError);
  c.crossover_rate = 0.9;
  c.threads = 0;
  CHECK_THROWS_AS(validate_config(c), ValidationError);
}

TEST_CASE("repair scales slack into the remaining budget") {
  const std::vector<double> raw{100.0, 100.0};
  CHECK(repair_allocation(raw, tiny_bounds(28)).y == std::vector<Money>{9, 19});
  CHECK(repair_allocation(raw, tiny_bounds(30)).y == std::vector<Money>{10, 20});
  const std::vector<double> low{-5.0, 3.9};
  CHECK(repair_allocation(low, tiny_bounds(28)).y == std::vector<Money>{2, 4});
  const std::vector<double> frac{5.7, 10.2};
  CHECK(repair_allocation(frac, tiny_bounds(28)).y == std::vector<Money>{5, 10});
  const std::vector<double> nan{std::nan(""), 12.0};
  CHECK(repair_allocation(nan, tiny_bounds(28)).y == std::vector<Money>{2, 12});
  CHECK_THROWS_AS(repair_allocation(raw, tiny_bounds(5)), InfeasibleError);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(repair_allocation(one, tiny_bounds(28)), StructuralError);
}

TEST_CASE("repair properties") {
  Rng rng(41);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 8);
    BudgetBounds b;
    for (std::size_t i = 0; i < n; ++i) {
      const Money lo = uniform_int(rng, 0, 50);
      b.y_lower.push_back(lo);
      b.y_upper.push_back(lo + uniform_int(rng, 0, 200));
    }
    const Money upper_total = std::accumulate(b.y_upper.begin(), b.y_upper.end(), Money{0});
    b.remaining_budget = b.lower_total() + uniform_int(rng, 0, upper_total - b.lower_total() + 20);
    std::vector<double> raw(n);
    for (auto& v : raw) v = uniform_real(rng, -20.0, 300.0);
    const auto y = repair_allocation(raw, b);
    Money total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(y.y[i] >= b.y_lower[i]);
      CHECK(y.y[i] <= b.y_upper[i]);
      total += y.y[i];
    }
    CHECK(total <= b.remaining_budget);
    const std::vector<double> again(y.y.begin(), y.y.end());
    CHECK(repair_allocation(again, b) == y);
  }
}

TEST_CASE("dominance predicates") {
  CHECK(dominates({1.0, 2.0}, {1.0, 1.0}));
  CHECK_FALSE(dominates({1.0, 1.0}, {1.0, 1.0}));
  CHECK_FALSE(dominates({2.0, 0.0}, {1.0, 1.0}));
  CHECK(constrained_dominates({0.0, 0.0}, 0.0, {5.0, 5.0}, 1.0));
  CHECK_FALSE(constrained_dominates({5.0, 5.0}, 1.0, {0.0, 0.0}, 0.0));
  CHECK(constrained_dominates({0.0, 0.0}, 1.0, {5.0, 5.0}, 2.0));
  CHECK(constrained_dominates({1.0, 2.0}, 0.0, {1.0, 1.0}, 0.0));
  CHECK_FALSE(constrained_dominates({1.0, 1.0}, 0.0, {1.0, 1.0}, 0.0));
}

TEST_CASE("transformed NSGA-II reaches the TINY optimum") {
  const auto inst = tiny();
  const auto a = run_moea(inst, quick(Algorithm::nsga2, SearchSpace::transformed, 200));
  CHECK(a.evaluations == 200);
  CHECK(a.unique_evaluations <= a.evaluations);
  REQUIRE_FALSE(a.entries.empty());
  CHECK(has_point(a, 1.0, 4.0));
  for (const auto& e : a.entries) {
    REQUIRE(e.allocation.has_value());
    CHECK(e.solutions.size() == 2);
    REQUIRE(e.plan.has_value());
    CHECK(check_feasibility(inst, *e.plan).feasible());
  }
}

TEST_CASE("original NSGA-II on TINY finds the best feasible plan") {
  const auto inst = tiny();
  const auto a = run_moea(inst, quick(Algorithm::nsga2, SearchSpace::original, 1000));
  REQUIRE_FALSE(a.entries.empty());
  CHECK(has_point(a, 1.0, 4.0));
  for (const auto& e : a.entries) {
    REQUIRE(e.plan.has_value());
    CHECK(check_feasibility(inst, *e.plan).feasible());
  }
}

TEST_CASE("MOEA/D on TINY") {
  const auto inst = tiny();
  for (auto space : {SearchSpace::transformed, SearchSpace::original}) {
    auto c = quick(Algorithm::moead, space, 600);
    const auto a = run_moea(inst, c);
    CHECK(a.evaluations == 600);
    CHECK(has_point(a, 1.0, 4.0));
  }
  auto single = quick(Algorithm::moead, SearchSpace::transformed, 50);
  single.weight_count = 1;
  single.population = 1;
  CHECK_FALSE(run_moea(inst, single).entries.empty());
}

TEST_CASE("archives are mutually nondominated and feasible") {
  const auto inst = small_generated(3);
  for (auto alg : {Algorithm::nsga2, Algorithm::moead}) {
    const auto a = run_moea(inst, quick(alg, SearchSpace::transformed, 300));
    const auto f = a.front();
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t j = 0; j < f.size(); ++j)
        if (i != j) CHECK_FALSE(dominates(f[i], f[j]));
    for (std::size_t i = 1; i < f.size(); ++i) CHECK(f[i - 1].first >= f[i].first);
    const auto div = divide(inst);
    const auto xb = x_bounds(inst);
    for (const auto& e : a.entries) {
      REQUIRE(e.plan.has_value());
      CHECK(check_feasibility(inst, *e.plan).feasible());
      // The stored plan extends the decoded one.
      const auto decoded = decode_plan(inst, div, xb, e.solutions);
      for (std::size_t k = 0; k < decoded.x.size(); ++k) CHECK(e.plan->x[k] >= decoded.x[k]);
    }
  }
}

TEST_CASE("runs are deterministic and thread-count independent") {
  const auto inst = small_generated(5);
  for (auto alg : {Algorithm::nsga2, Algorithm::moead}) {
    for (auto space : {SearchSpace::transformed, SearchSpace::original}) {
      auto c = quick(alg, space, 200, 11);
      const auto one = archive_to_json(run_moea(inst, c));
      CHECK(one == archive_to_json(run_moea(inst, c)));
      c.threads = 4;
      CHECK(one == archive_to_json(run_moea(inst, c)));
    }
  }
}

TEST_CASE("archive JSON round trip") {
  const auto inst = tiny();
  for (auto space : {SearchSpace::transformed, SearchSpace::original}) {
    const auto a = run_moea(inst, quick(Algorithm::nsga2, space, 100));
    const auto text = archive_to_json(a);
    const auto b = archive_from_json(text);
    CHECK(b.config == a.config);
    CHECK(b.evaluations == a.evaluations);
    CHECK(b.unique_evaluations == a.unique_evaluations);
    CHECK(b.entries == a.entries);
    CHECK(archive_to_json(b) == text);
    const auto path = std::filesystem::temp_directory_path() / "procure_archive_test.json";
    save_archive(a, path);
    CHECK(archive_to_json(load_archive(path)) == text);
    std::filesystem::remove(path);
  }
  CHECK_THROWS_AS(archive_from_json("{\"entries\": 3}"), ParseError);
  CHECK_THROWS_AS(archive_from_json("not json"), ParseError);
}

TEST_CASE("infeasible instances are reported") {
  auto inst = tiny();
  inst.budget_cents = 8;
  CHECK_THROWS_AS(run_moea(inst, quick(Algorithm::nsga2, SearchSpace::transformed, 50)), InfeasibleError);
}
