#ifndef PROCURE_BOUNDS_HPP
#define PROCURE_BOUNDS_HPP

#include <vector>

#include "procure/instance.hpp"
#include "procure/simulation.hpp"

namespace procure {

/// Search box of the original purchase problem, per supply position.
struct VariableBounds {
  std::vector<Count> x_lower;  ///< units needed by mandatory items, net of inventory
  std::vector<Count> x_upper;  ///< units needed if the supply were always chosen

  bool operator==(const VariableBounds&) const = default;
};

/// Budget ranges of the transformed problem; index 0 is epidemic control.
struct BudgetBounds {
  std::vector<Money> y_lower;
  std::vector<Money> y_upper;
  Money remaining_budget = 0;  ///< C' = C - sum_k c_k * x_lower_k

  Money lower_total() const;
  /// Positive when the cheapest allocation does not fit in C'.
  Money deficit() const { return lower_total() - remaining_budget; }
  bool feasible() const { return deficit() <= 0; }

  bool operator==(const BudgetBounds&) const = default;
};

VariableBounds x_bounds(const ProcurementInstance& instance);

/// Cost of the mandatory purchases x_lower.
Money mandatory_cost(const ProcurementInstance& instance, const VariableBounds& bounds);

/// y_lower is the division's advance cost; y_upper prices every case on the
/// best alternative, netted against the same storage split.
BudgetBounds y_bounds(const ProcurementInstance& instance, const DivisionOutcome& division);

}  // namespace procure

#endif  // PROCURE_BOUNDS_HPP
