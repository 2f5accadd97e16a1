#ifndef PROCURE_SIMULATION_HPP
#define PROCURE_SIMULATION_HPP

#include <functional>
#include <span>
#include <vector>

#include "procure/instance.hpp"

namespace procure {

/// One arrival on the deterministic-uniform timeline.
struct ArrivalEvent {
  double time_hours = 0.0;
  int disease = 0;         ///< 1-based disease id
  Count ordinal = 0;       ///< 1-based case ordinal within the disease
  bool disease_case = true;  ///< false only for suspected-only arrivals of a disease with zero cases
  int suspected = 0;       ///< epidemic treatments triggered by this arrival

  // time_hours == time_num / time_den exactly; used for tie-free ordering.
  std::int64_t time_num = 0;
  std::int64_t time_den = 1;

  bool is_suspected() const { return suspected > 0; }
};

struct ArrivalSchedule {
  std::vector<ArrivalEvent> events;

  Count suspected_total() const;
};

/// Suspected-case quota per disease for the given case counts: floor(r * rate)
/// each, topped up by largest remainder to ceil(sum r * rate). With the upper
/// counts this totals r_0.
std::vector<Count> suspected_quota(const ProcurementInstance& instance, std::span<const Count> case_counts);

/// Builds the arrival timeline. Cases of disease i arrive every T*h_w/r hours;
/// suspected flags come from suspected_quota(case_counts) when include_suspected.
ArrivalSchedule build_schedule(const ProcurementInstance& instance, std::span<const Count> case_counts,
                               bool include_suspected);

/// Same timeline with an explicit per-disease suspected quota spread evenly
/// over each disease's arrivals (case c is flagged when floor(c*s/r) steps).
ArrivalSchedule build_schedule(const ProcurementInstance& instance, std::span<const Count> case_counts,
                               std::span<const Count> quota);

/// Per-disease quota used by every simulation: derived from the upper counts so
/// the epidemic stream always carries r_0 suspected cases.
std::vector<Count> pessimistic_quota(const ProcurementInstance& instance);

struct EvaluationResult {
  double epidemic_effect = 0.0;          ///< Upsilon
  double treatment_effect = 0.0;         ///< Upsilon' = sum_i w_i Upsilon_i
  std::vector<double> disease_effects;   ///< Upsilon_i
  bool epidemic_treatable = true;        ///< tr at the end of the cycle
  std::vector<bool> disease_treatable;   ///< tr_i at the end of the cycle
  Count untreated_epidemic_count = 0;
  std::vector<Count> untreated_disease_counts;
  Money cost_spent = 0;                  ///< sum_k c_k x_k
  std::vector<Count> remaining_inventory;

  bool operator==(const EvaluationResult&) const = default;
};

/// One treatment attempt, reported to an optional trace sink.
struct TraceRecord {
  double time_hours = 0.0;
  int disease = 0;
  int profile = 0;  ///< 0 for epidemic control, else disease id
  bool treated = false;
  std::vector<std::pair<int, Count>> consumed;  ///< (supply id, units)
  double effect = 0.0;
  /// For untreated attempts: index into the profile's items of the item that
  /// ran short (or that made the profile untreatable earlier), else -1.
  int failed_item = -1;
};
using TraceSink = std::function<void(const TraceRecord&)>;

/// Runs the case-arrival simulation on the expected counts after adding the
/// plan to inventory and returns both effects.
EvaluationResult evaluate_original(const ProcurementInstance& instance, const PurchasePlan& plan,
                                   const TraceSink& trace = {});

/// Lower-level entry: arbitrary disease counts and suspected quota.
EvaluationResult simulate(const ProcurementInstance& instance, const PurchasePlan& plan,
                          std::span<const Count> case_counts, std::span<const Count> quota,
                          const TraceSink& trace = {});

struct FeasibilityReport {
  Money budget_excess = 0;
  std::vector<Count> untreated_lower_cases;  ///< per disease
  Count untreated_suspected = 0;

  /// Number of failed treatability flags (diseases plus epidemic).
  int violated_flags() const;
  bool feasible() const { return budget_excess == 0 && violated_flags() == 0; }

  bool operator==(const FeasibilityReport&) const = default;
};

FeasibilityReport check_feasibility(const ProcurementInstance& instance, const PurchasePlan& plan);

/// Adds units to `plan` until the feasibility simulation treats every case or
/// the budget runs out. Each round buys the cheapest alternative (c*q) of
/// every item that left cases untreated, for a quarter of those cases.
/// Returns the number of rounds that bought something.
int top_up_plan(const ProcurementInstance& instance, PurchasePlan& plan, int max_rounds = 64);

/// Result of the storage-only pass that splits inventory between profiles.
struct ProfileDivision {
  Count case_count = 0;
  /// storage[j][k]: cases of alternative item j served from storage with alternative k.
  std::vector<std::vector<Count>> storage;
  SubproblemSolution cheapest;  ///< z-dagger
  Money advance_cost = 0;

  bool operator==(const ProfileDivision&) const = default;
};

struct DivisionOutcome {
  std::vector<ProfileDivision> profiles;  ///< index 0 = epidemic

  bool operator==(const DivisionOutcome&) const = default;
};

/// Simulates the expected scenario from storage alone, buying the cheapest
/// alternative in advance whenever storage cannot serve an item.
DivisionOutcome divide(const ProcurementInstance& instance);

/// Units of each supply consumed by mandatory items in the expected scenario
/// (r_0 for epidemic items, r_i for disease items), indexed by supply position.
std::vector<Count> mandatory_demand(const ProcurementInstance& instance);

}  // namespace procure

#endif  // PROCURE_SIMULATION_HPP
