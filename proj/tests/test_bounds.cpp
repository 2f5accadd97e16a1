#include "doctest.h"
#include "procure/bounds.hpp"
#include "procure/instancegen.hpp"
#include "test_support.hpp"

using namespace procure;
using procure::testing::tiny;

TEST_CASE("TINY variable bounds") {
  const auto inst = tiny();
  const auto xb = x_bounds(inst);
  CHECK(xb.x_lower == std::vector<Count>{1, 0, 0, 4, 0, 0});
  CHECK(xb.x_upper == std::vector<Count>{1, 1, 1, 4, 4, 4});
  CHECK(mandatory_cost(inst, xb) == 5);
}

TEST_CASE("TINY budget bounds") {
  const auto inst = tiny();
  const auto yb = y_bounds(inst, divide(inst));
  CHECK(yb.y_lower == std::vector<Money>{2, 4});
  CHECK(yb.y_upper == std::vector<Money>{10, 20});
  CHECK(yb.remaining_budget == inst.budget_cents - 5);
  CHECK(yb.lower_total() == 6);
  CHECK(yb.feasible());
}

TEST_CASE("storage of the best alternative zeroes the epidemic range") {
  auto inst = tiny();
  inst.supplies[1].inventory = 1;
  const auto yb = y_bounds(inst, divide(inst));
  CHECK(yb.y_lower[0] == 0);
  CHECK(yb.y_upper[0] == 0);
}

TEST_CASE("no diseases leaves only the epidemic range") {
  auto inst = tiny();
  inst.diseases.clear();
  compute_suspected_cases(inst);
  const auto yb = y_bounds(inst, divide(inst));
  CHECK(yb.y_lower.size() == 1);
  CHECK(yb.y_upper.size() == 1);
}

TEST_CASE("large inventory clamps both bounds to zero") {
  auto inst = tiny();
  inst.supplies[5].inventory = 100;
  inst.supplies[3].inventory = 100;
  const auto xb = x_bounds(inst);
  CHECK(xb.x_lower[5] == 0);
  CHECK(xb.x_upper[5] == 0);
  CHECK(xb.x_lower[3] == 0);
  CHECK(xb.x_upper[3] == 0);
}

TEST_CASE("infeasible budget reports a deficit") {
  auto inst = tiny();
  inst.budget_cents = 8;
  const auto yb = y_bounds(inst, divide(inst));
  CHECK_FALSE(yb.feasible());
  CHECK(yb.deficit() == 3);
}

TEST_CASE("bounds are ordered on generated instances") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GenSpec g;
    g.diseases = 5;
    g.supplies = 50;
    g.cases = 250;
    g.seed = seed;
    const auto inst = generate(g);
    const auto xb = x_bounds(inst);
    for (std::size_t k = 0; k < xb.x_lower.size(); ++k) {
      CHECK(xb.x_lower[k] >= 0);
      CHECK(xb.x_lower[k] <= xb.x_upper[k]);
    }
    const auto yb = y_bounds(inst, divide(inst));
    for (std::size_t p = 0; p < yb.y_lower.size(); ++p) {
      CHECK(yb.y_lower[p] >= 0);
      CHECK(yb.y_lower[p] <= yb.y_upper[p]);
    }
    CHECK(yb.remaining_budget == inst.budget_cents - mandatory_cost(inst, xb));
  }
}
