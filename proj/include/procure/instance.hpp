#ifndef PROCURE_INSTANCE_HPP
#define PROCURE_INSTANCE_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "procure/types.hpp"

namespace procure {

struct Supply {
  int id = 0;             ///< 1-based, contiguous
  std::string name;
  Money price_cents = 0;  ///< unit price
  double volume = 0.0;    ///< unit volume; carried as metadata only
  Count inventory = 0;    ///< units currently in storage

  bool operator==(const Supply&) const = default;
};

struct Alternative {
  int supply = 0;      ///< supply id
  Count qty = 1;       ///< units needed per case
  double effect = 1.0; ///< treatment effect in [0, 1]

  bool operator==(const Alternative&) const = default;
};

/// One treatment step. A mandatory item has exactly one alternative with
/// effect 1; the others list interchangeable supplies, best effect first.
struct TreatmentItem {
  bool mandatory = false;
  std::vector<Alternative> alternatives;

  bool operator==(const TreatmentItem&) const = default;
};

struct WeightedItem {
  int item = 0;  ///< ordinal among the profile's alternative items (0-based)
  double weight = 1.0;

  bool operator==(const WeightedItem&) const = default;
};

/// Product over groups of the weighted sum of effects inside each group.
/// A single group is a plain weighted sum.
struct EffectFunction {
  std::vector<std::vector<WeightedItem>> groups;

  /// Number of alternative items the function covers.
  std::size_t arity() const;

  bool operator==(const EffectFunction&) const = default;
};

/// Evaluates fn on one effect value per covered item (indexed by item ordinal).
/// Throws StructuralError when the number of effects does not match fn.arity().
double eval_effect(const EffectFunction& fn, std::span<const double> chosen_effects);

/// Shared shape of the epidemic profile and the disease profiles.
struct TreatmentProfile {
  std::vector<TreatmentItem> items;  ///< mandatory items first
  EffectFunction effect_fn;

  std::size_t mandatory_count() const;
  std::span<const TreatmentItem> mandatory_items() const;
  std::span<const TreatmentItem> alternative_items() const;

  bool operator==(const TreatmentProfile&) const = default;
};

struct EpidemicProfile : TreatmentProfile {
  Count suspected_cases = 0;  ///< r_0, derived from the disease profiles

  bool operator==(const EpidemicProfile&) const = default;
};

struct DiseaseProfile : TreatmentProfile {
  int id = 0;  ///< 1-based
  std::string name;
  double weight = 1.0;
  Count expected_cases = 0;
  Count lower_cases = 0;
  Count upper_cases = 0;
  double suspect_prob = 0.0;
  double companions = 0.0;
  double companion_suspect_prob = 0.0;
  bool emergency = false;

  /// Suspected cases contributed per arrival: p + p' * r'.
  double suspect_rate() const { return suspect_prob + companion_suspect_prob * companions; }
  /// Daily working hours: 24 for emergency diseases, 8 otherwise.
  int working_hours() const { return emergency ? 24 : 8; }

  bool operator==(const DiseaseProfile&) const = default;
};

struct ProcurementInstance {
  std::vector<Supply> supplies;
  EpidemicProfile epidemic;
  std::vector<DiseaseProfile> diseases;
  Money budget_cents = 0;
  int cycle_days = 15;
  double local_incidence = 0.0;

  std::size_t supply_count() const { return supplies.size(); }
  std::size_t disease_count() const { return diseases.size(); }
  /// Number of profiles including epidemic control (m + 1).
  std::size_t profile_count() const { return diseases.size() + 1; }
  const Supply& supply(int id) const { return supplies.at(static_cast<std::size_t>(id - 1)); }
  /// Profile 0 is the epidemic profile, profile i the i-th disease.
  const TreatmentProfile& profile(std::size_t p) const;
  /// Cases of a profile in the expected scenario: r_0 for epidemic, r_i otherwise.
  Count expected_profile_cases(std::size_t p) const;

  bool operator==(const ProcurementInstance&) const = default;
};

/// r_0 = ceil(sum_i (p_i + p'_i r'_i) * upper_i). Does not modify the instance.
Count suspected_cases(const ProcurementInstance& instance);
/// Computes r_0 and stores it in instance.epidemic.suspected_cases.
Count compute_suspected_cases(ProcurementInstance& instance);

/// Sorts the alternatives of every non-mandatory item by (-effect, price, id).
void canonicalize(ProcurementInstance& instance);

/// Throws ValidationError describing the first violated invariant.
void validate(const ProcurementInstance& instance);

/// Counts epidemic-only and disease-side supplies (n, n') by reference sets.
struct SupplySplit {
  std::size_t epidemic = 0;
  std::size_t common = 0;
};
SupplySplit supply_split(const ProcurementInstance& instance);

// JSON instance format. Parsing canonicalizes alternative order, derives r_0
// and validates; unknown keys are rejected.
ProcurementInstance instance_from_json(const std::string& text);
std::string instance_to_json(const ProcurementInstance& instance);
ProcurementInstance load_instance(const std::filesystem::path& path);
void save_instance(const ProcurementInstance& instance, const std::filesystem::path& path);

}  // namespace procure

#endif  // PROCURE_INSTANCE_HPP
