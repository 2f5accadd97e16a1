#ifndef PROCURE_MOEA_HPP
#define PROCURE_MOEA_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "procure/bounds.hpp"
#include "procure/instance.hpp"
#include "procure/subproblem.hpp"

namespace procure {

enum class Algorithm { nsga2, moead };
enum class SearchSpace { original, transformed };

std::string to_string(Algorithm a);
std::string to_string(SearchSpace s);
Algorithm parse_algorithm(const std::string& s);
SearchSpace parse_space(const std::string& s);

struct RunConfig {
  Algorithm algorithm = Algorithm::nsga2;
  SearchSpace space = SearchSpace::transformed;
  int population = 100;
  double crossover_rate = 0.9;
  double mutation_rate = 0.0;  ///< 0 selects 1 / dimension
  double sbx_eta = 20.0;
  int weight_count = 0;        ///< MOEA/D weight vectors; 0 uses the population size
  int neighborhood = 0;        ///< MOEA/D neighborhood; 0 selects max(2, 10% of weights)
  double time_limit_seconds = 0.0;  ///< 0 = unset
  std::int64_t max_evaluations = 0; ///< 0 = unset
  std::uint64_t seed = 1;
  int threads = 1;
  TabuConfig tabu;             ///< subproblem solver settings in transformed mode

  bool operator==(const RunConfig&) const = default;
};

/// Throws ValidationError for sizes or rates out of range, or when neither
/// stopping limit is set.
void validate_config(const RunConfig& config);

/// Floors and clamps y_raw into the budget boxes, then shrinks the slack above
/// y_lower proportionally (largest remainder) until the total fits C'.
/// Throws InfeasibleError when sum y_lower > C'.
BudgetAllocation repair_allocation(std::span<const double> y_raw, const BudgetBounds& bounds);

struct ArchiveEntry {
  double epidemic_effect = 0.0;
  double treatment_effect = 0.0;
  std::vector<double> genome;
  std::optional<BudgetAllocation> allocation;     ///< transformed mode
  std::vector<SubproblemSolution> solutions;      ///< transformed mode
  std::optional<PurchasePlan> plan;               ///< original mode

  bool operator==(const ArchiveEntry&) const = default;
};

struct ParetoArchive {
  RunConfig config;
  std::int64_t evaluations = 0;
  std::int64_t unique_evaluations = 0;
  double wall_seconds = 0.0;  ///< not serialized into the archive file
  std::vector<ArchiveEntry> entries;

  std::vector<std::pair<double, double>> front() const;
};

/// Maximization Pareto dominance on (epidemic, treatment) effects.
bool dominates(std::pair<double, double> a, std::pair<double, double> b);

/// Feasible beats infeasible, smaller violation wins among infeasible, plain
/// dominance among feasible.
bool constrained_dominates(std::pair<double, double> a, double violation_a, std::pair<double, double> b,
                           double violation_b);

ParetoArchive nsga2_run(const ProcurementInstance& instance, const RunConfig& config);
ParetoArchive moead_run(const ProcurementInstance& instance, const RunConfig& config);
/// Dispatches on config.algorithm.
ParetoArchive run_moea(const ProcurementInstance& instance, const RunConfig& config);

std::string archive_to_json(const ParetoArchive& archive);
ParetoArchive archive_from_json(const std::string& text);
void save_archive(const ParetoArchive& archive, const std::filesystem::path& path);
ParetoArchive load_archive(const std::filesystem::path& path);

}  // namespace procure

#endif  // PROCURE_MOEA_HPP
