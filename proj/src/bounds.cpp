#include "procure/bounds.hpp"

#include <algorithm>
#include <numeric>

namespace procure {

Money BudgetBounds::lower_total() const {
  return std::accumulate(y_lower.begin(), y_lower.end(), Money{0});
}

VariableBounds x_bounds(const ProcurementInstance& instance) {
  const std::size_t n = instance.supplies.size();
  std::vector<Count> mandatory(n, 0), any_use(n, 0);
  for (std::size_t p = 0; p < instance.profile_count(); ++p) {
    const Count cases = instance.expected_profile_cases(p);
    for (const auto& item : instance.profile(p).items) {
      for (const auto& alt : item.alternatives) {
        const auto k = static_cast<std::size_t>(alt.supply - 1);
        any_use[k] += cases * alt.qty;
        if (item.mandatory) mandatory[k] += cases * alt.qty;
      }
    }
  }
  VariableBounds b;
  b.x_lower.resize(n);
  b.x_upper.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Count a = instance.supplies[k].inventory;
    b.x_lower[k] = std::max<Count>(0, mandatory[k] - a);
    b.x_upper[k] = std::max({Count{0}, any_use[k] - a, b.x_lower[k]});
  }
  return b;
}

Money mandatory_cost(const ProcurementInstance& instance, const VariableBounds& bounds) {
  Money cost = 0;
  for (std::size_t k = 0; k < bounds.x_lower.size(); ++k) cost += instance.supplies[k].price_cents * bounds.x_lower[k];
  return cost;
}

BudgetBounds y_bounds(const ProcurementInstance& instance, const DivisionOutcome& division) {
  BudgetBounds b;
  b.remaining_budget = instance.budget_cents - mandatory_cost(instance, x_bounds(instance));
  for (std::size_t p = 0; p < instance.profile_count(); ++p) {
    const auto& pd = division.profiles.at(p);
    b.y_lower.push_back(pd.advance_cost);
    Money upper = 0;
    const auto items = instance.profile(p).alternative_items();
    for (std::size_t j = 0; j < items.size(); ++j) {
      const auto& best = items[j].alternatives.front();
      const Count bought = std::max<Count>(0, pd.case_count - pd.storage[j][0]);
      upper += instance.supply(best.supply).price_cents * best.qty * bought;
    }
    b.y_upper.push_back(upper);
  }
  return b;
}

}  // namespace procure
