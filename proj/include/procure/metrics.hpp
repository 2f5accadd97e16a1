#ifndef PROCURE_METRICS_HPP
#define PROCURE_METRICS_HPP

#include <span>
#include <utility>
#include <vector>

#include "procure/bounds.hpp"
#include "procure/instance.hpp"

namespace procure {

using Point2 = std::pair<double, double>;

/// Area dominated by the front relative to the reference point (both
/// objectives maximized). Throws ContractError for a point below the reference.
double hyperarea(std::span<const Point2> front, Point2 reference = {0.0, 0.0});

/// Fraction of x strictly dominated by some member of x_prime.
/// Throws ContractError when x is empty.
double coverage(std::span<const Point2> x, std::span<const Point2> x_prime);

/// Averages feeding the approximate complexity ratio.
struct ComplexityAverages {
  double supplies = 0.0;  ///< n + n'
  double diseases = 0.0;  ///< m
  double x_hat = 0.0;
  double y_hat = 0.0;
  double z_hat = 0.0;
  double phi_hat = 0.0;
  double cases = 0.0;     ///< r, all cases including suspected ones
};

/// Averaged-form ratio; nonpositive log arguments contribute 0.
double averaged_complexity_ratio(const ComplexityAverages& a);

/// All logarithms are base 10.
struct ComplexityReport {
  double log_n = 0.0;        ///< N, original solution count
  double log_of = 0.0;       ///< O(f)
  double log_n_prime = 0.0;  ///< N', transformed solution count
  std::vector<double> log_n_i;   ///< per profile, index 0 = epidemic
  std::vector<double> log_of_i;  ///< O(f_i)
  double log_transformed_total = 0.0;  ///< log of N' * sum_i N_i O(f_i)
  double ratio_exact = 0.0;
  ComplexityAverages averages;
  double ratio_averaged = 0.0;
};

ComplexityReport complexity_report(const ProcurementInstance& instance, const VariableBounds& xb,
                                   const BudgetBounds& yb);

}  // namespace procure

#endif  // PROCURE_METRICS_HPP
