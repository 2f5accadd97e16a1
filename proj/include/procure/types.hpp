#ifndef PROCURE_TYPES_HPP
#define PROCURE_TYPES_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace procure {

/// Monetary amounts are integer cents so budget arithmetic is exact.
using Money = std::int64_t;
using Count = std::int64_t;

/// Profile index 0 is epidemic control; 1..m are the diseases.
inline constexpr int kEpidemicProfile = 0;

/// Purchase quantity per supply, indexed by supply position (id - 1).
struct PurchasePlan {
  std::vector<Count> x;

  bool operator==(const PurchasePlan&) const = default;
};

/// Budget per profile; index 0 is epidemic control.
struct BudgetAllocation {
  std::vector<Money> y;

  bool operator==(const BudgetAllocation&) const = default;
};

/// Per alternative-item case counts over alternatives in effect-sorted order.
/// counts[j][k] is the number of cases using the k-th alternative of item j.
struct SubproblemSolution {
  std::vector<std::vector<Count>> counts;

  bool operator==(const SubproblemSolution&) const = default;
};

// Error hierarchy. Everything derives from Error so callers can catch once.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct StructuralError : Error {
  using Error::Error;
};
struct ContractError : Error {
  using Error::Error;
};
/// Raised when the lower budget bounds exceed the remaining budget.
struct InfeasibleError : Error {
  InfeasibleError(const std::string& what, Money deficit)
      : Error(what), deficit(deficit) {}
  Money deficit;
};
struct OracleTooLargeError : Error {
  OracleTooLargeError(const std::string& what, double space_size)
      : Error(what), space_size(space_size) {}
  double space_size;
};

}  // namespace procure

#endif  // PROCURE_TYPES_HPP
