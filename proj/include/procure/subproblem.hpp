#ifndef PROCURE_SUBPROBLEM_HPP
#define PROCURE_SUBPROBLEM_HPP

#include <cstdint>
#include <vector>

#include "procure/bounds.hpp"
#include "procure/instance.hpp"
#include "procure/simulation.hpp"

namespace procure {

struct SubproblemOption {
  int supply = 0;
  Money case_cost = 0;  ///< price * quantity per case
  double effect = 0.0;
};

/// Per-profile budget-constrained effect maximization over z counts.
struct SubproblemSpec {
  int profile = 0;
  Count case_count = 0;
  Money budget = 0;
  std::vector<std::vector<SubproblemOption>> items;  ///< effect-sorted alternatives per item
  std::vector<std::vector<Count>> storage;           ///< cases per alternative served from storage
  EffectFunction effect_fn;

  /// Raw dimension D: total number of z components.
  std::size_t dimension() const;
  /// D minus one per item, since each item's counts sum to the case count.
  std::size_t free_dimension() const { return dimension() - items.size(); }
};

SubproblemSpec make_subproblem(const ProcurementInstance& instance, const DivisionOutcome& division,
                               std::size_t profile, Money budget);

/// Throws StructuralError unless z has the spec's shape, is nonnegative and
/// every item sums to the case count.
void check_solution(const SubproblemSpec& spec, const SubproblemSolution& z);

/// Purchase cost: sum c*q*max(0, z - storage).
Money cost(const SubproblemSpec& spec, const SubproblemSolution& z);

/// Total effect under rank-aligned assignment: case c takes, in every item,
/// the alternative whose prefix-sum interval contains c.
double effect(const SubproblemSpec& spec, const SubproblemSolution& z);

/// Cheapest upgrades first until no single-case upgrade fits the budget.
SubproblemSolution greedy_improve(const SubproblemSpec& spec, SubproblemSolution z);

struct TabuConfig {
  int neighborhood_size = 0;  ///< 0 selects 2D
  int tabu_length = 12;
  int max_iterations = 0;     ///< 0 selects 50D
  std::uint64_t seed = 1;
  bool record_trace = false;

  bool operator==(const TabuConfig&) const = default;
};

struct TabuResult {
  SubproblemSolution best;
  double effect = 0.0;
  Money cost = 0;
  int best_iteration = 0;  ///< iteration at which the returned solution was found (0 = start)
  int iterations = 0;
  std::vector<double> best_trace;  ///< best effect after each iteration, if recorded
};

TabuResult tabu_search(const SubproblemSpec& spec, const SubproblemSolution& start, const TabuConfig& config);

struct OracleResult {
  SubproblemSolution best;
  double effect = 0.0;
  Money cost = 0;
  double space_size = 0.0;
  Count visited = 0;
};

/// Number of z vectors satisfying the per-item sum constraints.
double oracle_space_size(const SubproblemSpec& spec);

/// Exhaustive enumeration with budget pruning. Refuses specs whose space
/// exceeds max_space with OracleTooLargeError.
OracleResult oracle_solve(const SubproblemSpec& spec, double max_space = 1e8);

struct AllocationEvaluation {
  double epidemic_effect = 0.0;
  double treatment_effect = 0.0;
  std::vector<double> profile_effects;
  std::vector<SubproblemSolution> solutions;
  BudgetAllocation allocation;  ///< after clamping into the bounds
};

/// Solves every profile's subproblem under its budget share and combines them.
AllocationEvaluation evaluate_allocation(const ProcurementInstance& instance, const DivisionOutcome& division,
                                         const BudgetBounds& bounds, const BudgetAllocation& y,
                                         const TabuConfig& config);

/// Purchase plan realizing subproblem solutions: mandatory lower bounds plus
/// every unit not covered by the storage split.
PurchasePlan decode_plan(const ProcurementInstance& instance, const DivisionOutcome& division,
                         const VariableBounds& xb, const std::vector<SubproblemSolution>& solutions);

}  // namespace procure

#endif  // PROCURE_SUBPROBLEM_HPP
