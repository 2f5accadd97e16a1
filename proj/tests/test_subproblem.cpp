#include <algorithm>

#include "doctest.h"
#include "procure/bounds.hpp"
#include "procure/simulation.hpp"
#include "procure/subproblem.hpp"
#include "test_support.hpp"

using namespace procure;
using namespace procure::testing;

namespace {

struct TinySetup {
  ProcurementInstance inst = tiny();
  DivisionOutcome div = divide(inst);
  BudgetBounds yb = y_bounds(inst, div);
  VariableBounds xb = x_bounds(inst);

  SubproblemSpec spec(std::size_t p, Money budget) const { return make_subproblem(inst, div, p, budget); }
};

SubproblemSolution z1(Count a, Count b) { return SubproblemSolution{{{a, b}}}; }

SubproblemSpec two_item_product() {
  SubproblemSpec s;
  s.case_count = 2;
  s.budget = 1000;
  s.items = {{{1, 10, 0.9}, {2, 1, 0.4}}, {{3, 10, 0.8}, {4, 1, 0.3}}};
  s.storage = {{0, 0}, {0, 0}};
  s.effect_fn.groups = {{{0, 1.0}}, {{1, 1.0}}};
  return s;
}

}  // namespace

TEST_CASE("subproblem dimension") {
  const TinySetup t;
  const auto s = t.spec(1, 9);
  CHECK(s.dimension() == 2);
  CHECK(s.free_dimension() == 1);
  CHECK(s.case_count == 4);
}

TEST_CASE("cost") {
  const TinySetup t;
  CHECK(cost(t.spec(1, 9), z1(1, 3)) == 8);
  CHECK(cost(t.spec(0, 10), z1(0, 1)) == 2);
  auto s = t.spec(1, 9);
  s.storage = {{1, 3}};
  CHECK(cost(s, z1(1, 3)) == 0);
  CHECK_THROWS_AS(cost(t.spec(1, 9), z1(1, 2)), StructuralError);
  CHECK_THROWS_AS(cost(t.spec(1, 9), SubproblemSolution{{{1, 3}, {4, 0}}}), StructuralError);
  CHECK_THROWS_AS(cost(t.spec(1, 9), z1(5, -1)), StructuralError);
}

TEST_CASE("effect uses rank-aligned assignment") {
  const TinySetup t;
  CHECK(effect(t.spec(1, 9), z1(1, 3)) == doctest::Approx(2.8).epsilon(1e-12));
  CHECK(effect(t.spec(1, 9), z1(4, 0)) == 4.0);

  const auto s = two_item_product();
  const SubproblemSolution mixed{{{1, 1}, {1, 1}}};
  CHECK(effect(s, mixed) == doctest::Approx(0.9 * 0.8 + 0.4 * 0.3).epsilon(1e-15));
  const SubproblemSolution best{{{2, 0}, {2, 0}}};
  CHECK(effect(s, best) == doctest::Approx(2 * 0.9 * 0.8).epsilon(1e-15));
}

TEST_CASE("effect does not depend on item order") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_spec(rng, 3, 4, 7);
    SubproblemSolution z;
    for (const auto& item : s.items) {
      std::vector<Count> c(item.size(), 0);
      for (Count n = 0; n < s.case_count; ++n) ++c[uniform_index(rng, item.size())];
      z.counts.push_back(c);
    }
    // Reverse the items and remap the effect function accordingly.
    auto r = s;
    std::reverse(r.items.begin(), r.items.end());
    std::reverse(r.storage.begin(), r.storage.end());
    for (auto& g : r.effect_fn.groups)
      for (auto& w : g) w.item = static_cast<int>(s.items.size()) - 1 - w.item;
    auto zr = z;
    std::reverse(zr.counts.begin(), zr.counts.end());
    CHECK(effect(r, zr) == doctest::Approx(effect(s, z)).epsilon(1e-12));
  }
}

TEST_CASE("greedy improvement on TINY") {
  const TinySetup t;
  const auto g = greedy_improve(t.spec(1, 9), z1(0, 4));
  CHECK(g == z1(1, 3));
  CHECK(cost(t.spec(1, 9), g) == 8);
  CHECK(greedy_improve(t.spec(1, 20), z1(0, 4)) == z1(4, 0));
  CHECK(greedy_improve(t.spec(1, 4), z1(0, 4)) == z1(0, 4));
  CHECK_THROWS_AS(greedy_improve(t.spec(1, 3), z1(0, 4)), ContractError);
}

TEST_CASE("greedy never loses effect and respects the budget") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = random_spec(rng, 1 + uniform_index(rng, 4), 4, 1 + uniform_int(rng, 0, 9));
    const auto start = cheapest_solution(s);
    const Money lo = cost(s, start), hi = std::max(lo, cost(s, best_solution(s)));
    s.budget = lo + static_cast<Money>(uniform01(rng) * static_cast<double>(std::max<Money>(0, hi - lo)));
    const auto g = greedy_improve(s, start);
    CHECK(cost(s, g) <= s.budget);
    CHECK(effect(s, g) >= effect(s, start) - 1e-12);
  }
}

TEST_CASE("tabu search on TINY") {
  const TinySetup t;
  TabuConfig cfg;
  cfg.seed = 3;
  const auto r = tabu_search(t.spec(1, 9), z1(0, 4), cfg);
  CHECK(r.best == z1(1, 3));
  CHECK(r.effect == doctest::Approx(2.8).epsilon(1e-12));
  CHECK(r.cost == 8);

  const auto full = tabu_search(t.spec(1, 20), z1(0, 4), cfg);
  CHECK(full.best == z1(4, 0));
}

TEST_CASE("tabu search with a large budget reaches all-best") {
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    auto s = random_spec(rng, 3, 4, 6);
    s.budget = cost(s, best_solution(s)) + 1000;
    TabuConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const auto r = tabu_search(s, cheapest_solution(s), cfg);
    CHECK(r.effect == doctest::Approx(effect(s, best_solution(s))).epsilon(1e-12));
  }
}

TEST_CASE("tabu trace is monotone and never below the start") {
  Rng rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = random_spec(rng, 4, 4, 8);
    const auto start = cheapest_solution(s);
    const Money lo = cost(s, start), hi = std::max(lo, cost(s, best_solution(s)));
    s.budget = lo + (hi - lo) / 2;
    TabuConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(trial);
    cfg.record_trace = true;
    const auto r = tabu_search(s, start, cfg);
    check_solution(s, r.best);
    CHECK(r.cost == cost(s, r.best));
    CHECK(r.cost <= s.budget);
    CHECK(r.effect >= effect(s, start) - 1e-12);
    CHECK(r.effect == effect(s, r.best));
    for (std::size_t i = 1; i < r.best_trace.size(); ++i) CHECK(r.best_trace[i] >= r.best_trace[i - 1]);
    CHECK(r.best_iteration <= r.iterations);
  }
}

TEST_CASE("tabu search is reproducible per seed") {
  Rng rng(31);
  auto s = random_spec(rng, 4, 4, 8);
  const auto start = cheapest_solution(s);
  s.budget = (cost(s, start) + cost(s, best_solution(s))) / 2;
  TabuConfig cfg;
  cfg.seed = 99;
  const auto a = tabu_search(s, start, cfg);
  const auto b = tabu_search(s, start, cfg);
  CHECK(a.best == b.best);
  CHECK(a.best_iteration == b.best_iteration);
}

TEST_CASE("oracle on TINY") {
  const TinySetup t;
  const auto r = oracle_solve(t.spec(1, 9));
  CHECK(r.best == z1(1, 3));
  CHECK(r.effect == doctest::Approx(2.8).epsilon(1e-12));
  CHECK(r.space_size == 5.0);
  CHECK(r.visited >= 1);
  CHECK(r.visited <= 5);

  const auto lowest = oracle_solve(t.spec(1, 4));
  CHECK(lowest.best == z1(0, 4));
}

TEST_CASE("oracle refuses huge spaces") {
  Rng rng(1);
  auto s = random_spec(rng, 6, 5, 60);
  s.budget = 1'000'000;
  CHECK(oracle_space_size(s) > 1e8);
  CHECK_THROWS_AS(oracle_solve(s), OracleTooLargeError);
}

TEST_CASE("oracle dominates tabu and is monotone in the budget") {
  Rng rng(37);
  int equal = 0, runs = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_spec(rng, 3, 4, 5);
    const auto start = cheapest_solution(s);
    const Money lo = cost(s, start), hi = std::max(lo, cost(s, best_solution(s)));
    double prev = -1.0;
    for (int step = 0; step <= 4; ++step) {
      s.budget = lo + (hi - lo) * step / 4;
      const auto o = oracle_solve(s);
      CHECK(o.cost <= s.budget);
      CHECK(o.effect >= prev - 1e-12);
      prev = o.effect;
      TabuConfig cfg;
      cfg.seed = static_cast<std::uint64_t>(trial * 10 + step);
      const auto t = tabu_search(s, start, cfg);
      CHECK(t.effect <= o.effect + 1e-9);
      ++runs;
      if (t.effect >= o.effect - 1e-9) ++equal;
    }
  }
  CHECK(static_cast<double>(equal) / runs >= 0.95);
}

TEST_CASE("allocation evaluation on TINY") {
  const TinySetup t;
  TabuConfig cfg;
  const auto top = evaluate_allocation(t.inst, t.div, t.yb, BudgetAllocation{{10, 20}}, cfg);
  CHECK(top.epidemic_effect == 1.0);
  CHECK(top.treatment_effect == 4.0);
  const auto plan = decode_plan(t.inst, t.div, t.xb, top.solutions);
  CHECK(plan == tiny_plan(1, 1, 0, 4, 4, 0));
  const auto sim = evaluate_original(t.inst, plan);
  CHECK(sim.epidemic_effect == top.epidemic_effect);
  CHECK(sim.treatment_effect == top.treatment_effect);

  const auto low = evaluate_allocation(t.inst, t.div, t.yb, BudgetAllocation{{2, 4}}, cfg);
  CHECK(low.epidemic_effect == 0.5);
  CHECK(low.treatment_effect == doctest::Approx(2.4).epsilon(1e-12));

  const auto mid = evaluate_allocation(t.inst, t.div, t.yb, BudgetAllocation{{2, 9}}, cfg);
  CHECK(mid.epidemic_effect == 0.5);
  CHECK(mid.treatment_effect == doctest::Approx(2.8).epsilon(1e-12));

  // Out-of-range budgets are clamped on entry.
  const auto clamped = evaluate_allocation(t.inst, t.div, t.yb, BudgetAllocation{{0, 100}}, cfg);
  CHECK(clamped.allocation.y == std::vector<Money>{2, 20});
  CHECK_THROWS_AS(evaluate_allocation(t.inst, t.div, t.yb, BudgetAllocation{{2}}, cfg), StructuralError);
}
