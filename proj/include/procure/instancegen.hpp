#ifndef PROCURE_INSTANCEGEN_HPP
#define PROCURE_INSTANCEGEN_HPP

#include <cstdint>

#include "procure/instance.hpp"

namespace procure {

struct GenSpec {
  int diseases = 20;                 ///< m
  int supplies = 300;                ///< target n + n'
  Count cases = 2000;                ///< total expected cases over all diseases
  double avg_items = 6.0;            ///< mean alternative items per disease
  double avg_alternatives = 5.0;     ///< mean alternatives per item
  Money price_min = 100;             ///< cents
  Money price_max = 100000;
  double effect_min = 0.3;
  double effect_max = 1.0;
  double suspect_min = 0.002;
  double suspect_max = 0.02;
  double inventory_fill = 0.3;       ///< mean share of demand already in storage
  double beta = 1.3;                 ///< budget slack over the cheapest feasible spend
  double overlap = 0.3;              ///< chance a disease slot reuses an existing supply
  double epidemic_fraction = 0.02;   ///< share of supplies reserved for epidemic control
  std::uint64_t seed = 1;
};

/// Throws ValidationError for contradictory settings.
void validate_genspec(const GenSpec& spec);

/// Deterministic per spec; the result always validates and is feasible.
ProcurementInstance generate(const GenSpec& spec);

}  // namespace procure

#endif  // PROCURE_INSTANCEGEN_HPP
