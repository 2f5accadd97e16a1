#include "procure/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace procure {

namespace {

double safe_log10(double v) { return v > 0.0 ? std::log10(v) : 0.0; }

/// log10(sum_i 10^v_i) without overflow.
double log_sum(std::span<const double> logs) {
  if (logs.empty()) return -std::numeric_limits<double>::infinity();
  const double hi = *std::max_element(logs.begin(), logs.end());
  double s = 0.0;
  for (double v : logs) s += std::pow(10.0, v - hi);
  return hi + std::log10(s);
}

}  // namespace

double hyperarea(std::span<const Point2> front, Point2 reference) {
  std::vector<Point2> pts(front.begin(), front.end());
  for (const auto& p : pts) {
    if (p.first < reference.first || p.second < reference.second) {
      std::ostringstream os;
      os << "hyperarea: point (" << p.first << ", " << p.second << ") lies below the reference (" << reference.first
         << ", " << reference.second << ")";
      throw ContractError(os.str());
    }
  }
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.first != b.first ? a.first > b.first : a.second > b.second;
  });
  double area = 0.0;
  double covered = reference.second;
  for (const auto& p : pts) {
    if (p.second <= covered) continue;
    area += (p.first - reference.first) * (p.second - covered);
    covered = p.second;
  }
  return area;
}

double coverage(std::span<const Point2> x, std::span<const Point2> x_prime) {
  if (x.empty()) throw ContractError("coverage: the covered set is empty");
  std::size_t hit = 0;
  for (const auto& a : x) {
    for (const auto& b : x_prime) {
      if (b.first > a.first && b.second > a.second) {
        ++hit;
        break;
      }
    }
  }
  return static_cast<double>(hit) / static_cast<double>(x.size());
}

double averaged_complexity_ratio(const ComplexityAverages& a) {
  const double shared = safe_log10(a.cases * a.phi_hat);
  const double num = a.supplies * safe_log10(a.x_hat) + shared;
  const double den = a.diseases * safe_log10(a.y_hat) + a.phi_hat * safe_log10(a.z_hat) + shared;
  return num / den;
}

ComplexityReport complexity_report(const ProcurementInstance& instance, const VariableBounds& xb,
                                   const BudgetBounds& yb) {
  ComplexityReport rep;
  const std::size_t profiles = instance.profile_count();

  double x_width_sum = 0.0;
  for (std::size_t k = 0; k < xb.x_lower.size(); ++k) {
    const Count w = xb.x_upper[k] - xb.x_lower[k];
    x_width_sum += static_cast<double>(w);
    if (w > 0) rep.log_n += std::log10(static_cast<double>(w));
  }

  double y_width_sum = 0.0;
  for (std::size_t i = 0; i < yb.y_lower.size(); ++i) {
    const Money w = yb.y_upper[i] - yb.y_lower[i];
    y_width_sum += static_cast<double>(w);
    if (w > 0) rep.log_n_prime += std::log10(static_cast<double>(w));
  }

  double of_total = 0.0;
  double phi_sum = 0.0;
  double z_width_sum = 0.0;
  double z_components = 0.0;
  double cases = 0.0;
  std::vector<double> terms;
  for (std::size_t p = 0; p < profiles; ++p) {
    const auto& prof = instance.profile(p);
    const auto r = static_cast<double>(instance.expected_profile_cases(p));
    cases += r;
    double phi = 0.0;
    for (const auto& item : prof.items) phi += static_cast<double>(item.alternatives.size());
    phi_sum += phi;
    const double of_i = r * phi;
    of_total += of_i;

    double log_ni = 0.0;
    for (const auto& item : prof.alternative_items()) {
      for (std::size_t k = 0; k < item.alternatives.size(); ++k) {
        z_width_sum += r;
        z_components += 1.0;
        if (r > 0.0) log_ni += std::log10(r);
      }
    }
    rep.log_n_i.push_back(log_ni);
    rep.log_of_i.push_back(safe_log10(of_i));
    if (of_i > 0.0) terms.push_back(log_ni + std::log10(of_i));
  }
  rep.log_of = safe_log10(of_total);
  const double inner = terms.empty() ? 0.0 : log_sum(terms);
  rep.log_transformed_total = rep.log_n_prime + inner;
  rep.ratio_exact = (rep.log_n + rep.log_of) / rep.log_transformed_total;

  auto& a = rep.averages;
  a.supplies = static_cast<double>(instance.supply_count());
  a.diseases = static_cast<double>(instance.disease_count());
  a.x_hat = a.supplies > 0.0 ? x_width_sum / a.supplies : 0.0;
  a.y_hat = y_width_sum / static_cast<double>(profiles);
  a.z_hat = z_components > 0.0 ? z_width_sum / z_components : 0.0;
  a.phi_hat = phi_sum / static_cast<double>(profiles);
  a.cases = cases;
  rep.ratio_averaged = averaged_complexity_ratio(a);
  return rep;
}

}  // namespace procure
