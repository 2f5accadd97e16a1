#include "procure/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace procure {

namespace {

constexpr double kRoundSlack = 1e-9;

void check_counts(const ProcurementInstance& instance, std::span<const Count> counts, const char* what) {
  if (counts.size() != instance.diseases.size()) {
    throw StructuralError(std::string(what) + ": expected " + std::to_string(instance.diseases.size()) +
                          " per-disease counts, got " + std::to_string(counts.size()));
  }
  for (Count c : counts) {
    if (c < 0) throw StructuralError(std::string(what) + ": negative count");
  }
}

std::vector<Count> expected_counts(const ProcurementInstance& instance) {
  std::vector<Count> counts;
  counts.reserve(instance.diseases.size());
  for (const auto& d : instance.diseases) counts.push_back(d.expected_cases);
  return counts;
}

std::vector<Count> lower_counts(const ProcurementInstance& instance) {
  std::vector<Count> counts;
  counts.reserve(instance.diseases.size());
  for (const auto& d : instance.diseases) counts.push_back(d.lower_cases);
  return counts;
}

}  // namespace

Count ArrivalSchedule::suspected_total() const {
  Count n = 0;
  for (const auto& e : events) n += e.suspected;
  return n;
}

std::vector<Count> suspected_quota(const ProcurementInstance& instance, std::span<const Count> case_counts) {
  check_counts(instance, case_counts, "suspected_quota");
  const std::size_t m = instance.diseases.size();
  std::vector<Count> quota(m, 0);
  std::vector<double> remainder(m, 0.0);
  double total = 0.0;
  Count floors = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = instance.diseases[i].suspect_rate() * static_cast<double>(case_counts[i]);
    total += x;
    quota[i] = static_cast<Count>(std::floor(x + kRoundSlack));
    remainder[i] = x - static_cast<double>(quota[i]);
    floors += quota[i];
  }
  const Count target = total <= 0.0 ? 0 : static_cast<Count>(std::ceil(total - kRoundSlack));

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (floors < target) {
    // Largest remainder first; ties go to the lower disease id.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (Count extra = target - floors, idx = 0; extra > 0; --extra, ++idx) {
      ++quota[order[static_cast<std::size_t>(idx) % m]];
    }
  } else if (floors > target) {
    // Only reachable through the rounding slack; undo the smallest remainders.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] < remainder[b]; });
    for (Count excess = floors - target, idx = 0; excess > 0; ++idx) {
      auto& q = quota[order[static_cast<std::size_t>(idx) % m]];
      if (q > 0) {
        --q;
        --excess;
      }
    }
  }
  return quota;
}

std::vector<Count> pessimistic_quota(const ProcurementInstance& instance) {
  std::vector<Count> upper;
  upper.reserve(instance.diseases.size());
  for (const auto& d : instance.diseases) upper.push_back(d.upper_cases);
  return suspected_quota(instance, upper);
}

ArrivalSchedule build_schedule(const ProcurementInstance& instance, std::span<const Count> case_counts,
                               bool include_suspected) {
  if (!include_suspected) {
    const std::vector<Count> none(instance.diseases.size(), 0);
    return build_schedule(instance, case_counts, none);
  }
  const auto quota = suspected_quota(instance, case_counts);
  return build_schedule(instance, case_counts, quota);
}

ArrivalSchedule build_schedule(const ProcurementInstance& instance, std::span<const Count> case_counts,
                               std::span<const Count> quota) {
  check_counts(instance, case_counts, "build_schedule");
  check_counts(instance, quota, "build_schedule quota");
  ArrivalSchedule schedule;
  for (std::size_t i = 0; i < instance.diseases.size(); ++i) {
    const auto& d = instance.diseases[i];
    const std::int64_t span = static_cast<std::int64_t>(instance.cycle_days) * d.working_hours();
    const Count r = case_counts[i];
    const Count s = quota[i];
    if (r > 0) {
      for (Count c = 1; c <= r; ++c) {
        ArrivalEvent e;
        e.disease = d.id;
        e.ordinal = c;
        e.time_num = span * c;
        e.time_den = r;
        e.time_hours = static_cast<double>(e.time_num) / static_cast<double>(e.time_den);
        // Even spread of s flags over r arrivals; more than one per arrival when s > r.
        e.suspected = static_cast<int>((c * s) / r - ((c - 1) * s) / r);
        schedule.events.push_back(e);
      }
    } else {
      for (Count c = 1; c <= s; ++c) {
        ArrivalEvent e;
        e.disease = d.id;
        e.ordinal = c;
        e.disease_case = false;
        e.suspected = 1;
        e.time_num = span * c;
        e.time_den = s;
        e.time_hours = static_cast<double>(e.time_num) / static_cast<double>(e.time_den);
        schedule.events.push_back(e);
      }
    }
  }
  std::sort(schedule.events.begin(), schedule.events.end(), [](const ArrivalEvent& a, const ArrivalEvent& b) {
    const auto lhs = static_cast<__int128>(a.time_num) * b.time_den;
    const auto rhs = static_cast<__int128>(b.time_num) * a.time_den;
    if (lhs != rhs) return lhs < rhs;
    if (a.disease != b.disease) return a.disease < b.disease;
    return a.ordinal < b.ordinal;
  });
  return schedule;
}

// ---------------------------------------------------------------------------
// Treatment simulation

namespace {

class TreatmentRun {
 public:
  TreatmentRun(const ProcurementInstance& instance, std::vector<Count> stock, const TraceSink& trace)
      : instance_(instance), stock_(std::move(stock)), trace_(trace) {
    const std::size_t profiles = instance.profile_count();
    first_.resize(profiles);
    for (std::size_t p = 0; p < profiles; ++p) first_[p].assign(instance.profile(p).alternative_items().size(), 0);
    treatable_.assign(profiles, true);
    untreated_.assign(profiles, 0);
    effect_.assign(profiles, 0.0);
    cause_.assign(profiles, -1);
  }

  void arrive(const ArrivalEvent& ev) {
    const auto d = static_cast<std::size_t>(ev.disease);
    if (ev.disease_case) attempt(d, ev);
    for (int s = 0; s < ev.suspected; ++s) attempt(kEpidemicProfile, ev);
  }

  EvaluationResult finish(Money cost) {
    EvaluationResult r;
    r.epidemic_effect = effect_[0];
    r.epidemic_treatable = treatable_[0];
    r.untreated_epidemic_count = untreated_[0];
    for (std::size_t i = 1; i < effect_.size(); ++i) {
      r.disease_effects.push_back(effect_[i]);
      r.disease_treatable.push_back(treatable_[i]);
      r.untreated_disease_counts.push_back(untreated_[i]);
      r.treatment_effect += instance_.diseases[i - 1].weight * effect_[i];
    }
    r.cost_spent = cost;
    r.remaining_inventory = std::move(stock_);
    return r;
  }

 private:
  void attempt(std::size_t p, const ArrivalEvent& ev) {
    if (!treatable_[p]) {
      ++untreated_[p];
      if (trace_) trace_({ev.time_hours, ev.disease, static_cast<int>(p), false, {}, 0.0, cause_[p]});
      return;
    }
    const TreatmentProfile& profile = instance_.profile(p);
    consumed_.clear();
    int look_ahead_short = -1;

    const auto mandatory = profile.mandatory_items();
    for (std::size_t m = 0; m < mandatory.size(); ++m) {
      const auto& alt = mandatory[m].alternatives.front();
      Count& a = stock_[static_cast<std::size_t>(alt.supply - 1)];
      if (a < alt.qty) {
        fail(p, ev, static_cast<int>(m));
        return;
      }
      take(alt.supply, alt.qty);
      // The shortage test guards the next case, not this one.
      if (a < alt.qty && look_ahead_short < 0) look_ahead_short = static_cast<int>(m);
    }

    const auto items = profile.alternative_items();
    chosen_.resize(items.size());
    for (std::size_t j = 0; j < items.size(); ++j) {
      const auto& alts = items[j].alternatives;
      std::size_t& first = first_[p][j];
      while (first < alts.size() && stock_[static_cast<std::size_t>(alts[first].supply - 1)] < alts[first].qty) {
        ++first;  // permanently drop the exhausted alternative
      }
      if (first == alts.size()) {
        fail(p, ev, static_cast<int>(mandatory.size() + j));
        return;
      }
      take(alts[first].supply, alts[first].qty);
      chosen_[j] = alts[first].effect;
    }

    const double e = eval_effect(profile.effect_fn, chosen_);
    effect_[p] += e;
    if (look_ahead_short >= 0) {
      treatable_[p] = false;
      cause_[p] = look_ahead_short;
    }
    if (trace_) trace_({ev.time_hours, ev.disease, static_cast<int>(p), true, consumed_, e});
  }

  void take(int supply, Count qty) {
    Count& a = stock_[static_cast<std::size_t>(supply - 1)];
    a -= qty;
    if (a < 0) throw std::logic_error("inventory went negative for supply " + std::to_string(supply));
    consumed_.emplace_back(supply, qty);
  }

  void fail(std::size_t p, const ArrivalEvent& ev, int item) {
    for (const auto& [supply, qty] : consumed_) stock_[static_cast<std::size_t>(supply - 1)] += qty;
    consumed_.clear();
    treatable_[p] = false;
    cause_[p] = item;
    ++untreated_[p];
    if (trace_) trace_({ev.time_hours, ev.disease, static_cast<int>(p), false, {}, 0.0, item});
  }

  const ProcurementInstance& instance_;
  std::vector<Count> stock_;
  const TraceSink& trace_;
  std::vector<std::vector<std::size_t>> first_;
  std::vector<bool> treatable_;
  std::vector<Count> untreated_;
  std::vector<double> effect_;
  std::vector<int> cause_;
  std::vector<std::pair<int, Count>> consumed_;
  std::vector<double> chosen_;
};

Money plan_cost(const ProcurementInstance& instance, const PurchasePlan& plan) {
  Money cost = 0;
  for (std::size_t k = 0; k < plan.x.size(); ++k) cost += instance.supplies[k].price_cents * plan.x[k];
  return cost;
}

}  // namespace

EvaluationResult simulate(const ProcurementInstance& instance, const PurchasePlan& plan,
                          std::span<const Count> case_counts, std::span<const Count> quota,
                          const TraceSink& trace) {
  if (plan.x.size() != instance.supplies.size()) {
    throw StructuralError("plan has " + std::to_string(plan.x.size()) + " quantities for " +
                          std::to_string(instance.supplies.size()) + " supplies");
  }
  std::vector<Count> stock(instance.supplies.size());
  for (std::size_t k = 0; k < stock.size(); ++k) {
    if (plan.x[k] < 0) throw StructuralError("plan quantity for supply " + std::to_string(k + 1) + " is negative");
    stock[k] = instance.supplies[k].inventory + plan.x[k];
  }
  const auto schedule = build_schedule(instance, case_counts, quota);
  TreatmentRun run(instance, std::move(stock), trace);
  for (const auto& ev : schedule.events) run.arrive(ev);
  return run.finish(plan_cost(instance, plan));
}

EvaluationResult evaluate_original(const ProcurementInstance& instance, const PurchasePlan& plan,
                                   const TraceSink& trace) {
  const auto counts = expected_counts(instance);
  const auto quota = pessimistic_quota(instance);
  return simulate(instance, plan, counts, quota, trace);
}

int FeasibilityReport::violated_flags() const {
  int n = untreated_suspected > 0 ? 1 : 0;
  for (Count c : untreated_lower_cases) n += c > 0 ? 1 : 0;
  return n;
}

FeasibilityReport check_feasibility(const ProcurementInstance& instance, const PurchasePlan& plan) {
  const auto counts = lower_counts(instance);
  const auto quota = pessimistic_quota(instance);
  const auto result = simulate(instance, plan, counts, quota);
  FeasibilityReport report;
  report.budget_excess = std::max<Money>(0, result.cost_spent - instance.budget_cents);
  report.untreated_lower_cases = result.untreated_disease_counts;
  report.untreated_suspected = result.untreated_epidemic_count;
  return report;
}

int top_up_plan(const ProcurementInstance& instance, PurchasePlan& plan, int max_rounds) {
  const auto counts = lower_counts(instance);
  const auto quota = pessimistic_quota(instance);
  Money spent = plan_cost(instance, plan);
  std::map<std::pair<int, int>, Count> short_cases;
  for (int round = 0; round < max_rounds; ++round) {
    short_cases.clear();
    simulate(instance, plan, counts, quota, [&](const TraceRecord& r) {
      if (!r.treated && r.failed_item >= 0) ++short_cases[{r.profile, r.failed_item}];
    });
    bool bought = false;
    for (const auto& [key, n] : short_cases) {
      const auto& alts = instance.profile(static_cast<std::size_t>(key.first)).items[static_cast<std::size_t>(key.second)].alternatives;
      std::size_t best = 0;
      for (std::size_t k = 1; k < alts.size(); ++k) {
        const Money ck = instance.supply(alts[k].supply).price_cents * alts[k].qty;
        const Money cb = instance.supply(alts[best].supply).price_cents * alts[best].qty;
        if (ck < cb || (ck == cb && alts[k].supply < alts[best].supply)) best = k;
      }
      const Money per_case = instance.supply(alts[best].supply).price_cents * alts[best].qty;
      Count cases = std::max<Count>(1, (n + 3) / 4);
      if (per_case > 0) cases = std::min(cases, std::max<Money>(0, instance.budget_cents - spent) / per_case);
      if (cases <= 0) continue;
      plan.x[static_cast<std::size_t>(alts[best].supply - 1)] += cases * alts[best].qty;
      spent += cases * per_case;
      bought = true;
    }
    if (!bought) return round;
  }
  return max_rounds;
}

// ---------------------------------------------------------------------------
// Division

std::vector<Count> mandatory_demand(const ProcurementInstance& instance) {
  std::vector<Count> demand(instance.supplies.size(), 0);
  for (std::size_t p = 0; p < instance.profile_count(); ++p) {
    const Count cases = instance.expected_profile_cases(p);
    for (const auto& item : instance.profile(p).mandatory_items()) {
      const auto& alt = item.alternatives.front();
      demand[static_cast<std::size_t>(alt.supply - 1)] += cases * alt.qty;
    }
  }
  return demand;
}

DivisionOutcome divide(const ProcurementInstance& instance) {
  // Storage left for alternative items once mandatory needs are reserved;
  // this matches the netting in the original-space lower bounds.
  const auto reserved = mandatory_demand(instance);
  std::vector<Count> storage(instance.supplies.size());
  for (std::size_t k = 0; k < storage.size(); ++k) {
    storage[k] = std::max<Count>(0, instance.supplies[k].inventory - reserved[k]);
  }

  DivisionOutcome out;
  out.profiles.resize(instance.profile_count());
  std::vector<std::vector<std::size_t>> first(instance.profile_count());
  std::vector<std::vector<std::size_t>> cheapest(instance.profile_count());
  for (std::size_t p = 0; p < instance.profile_count(); ++p) {
    const auto items = instance.profile(p).alternative_items();
    auto& pd = out.profiles[p];
    pd.storage.resize(items.size());
    pd.cheapest.counts.resize(items.size());
    first[p].assign(items.size(), 0);
    for (std::size_t j = 0; j < items.size(); ++j) {
      const auto& alts = items[j].alternatives;
      pd.storage[j].assign(alts.size(), 0);
      pd.cheapest.counts[j].assign(alts.size(), 0);
      // Cheapest per-case cost c*q; ties by supply id.
      std::size_t best = 0;
      for (std::size_t k = 1; k < alts.size(); ++k) {
        const Money ck = instance.supply(alts[k].supply).price_cents * alts[k].qty;
        const Money cb = instance.supply(alts[best].supply).price_cents * alts[best].qty;
        if (ck < cb || (ck == cb && alts[k].supply < alts[best].supply)) best = k;
      }
      cheapest[p].push_back(best);
    }
  }

  auto serve = [&](std::size_t p) {
    const auto items = instance.profile(p).alternative_items();
    auto& pd = out.profiles[p];
    ++pd.case_count;
    for (std::size_t j = 0; j < items.size(); ++j) {
      const auto& alts = items[j].alternatives;
      std::size_t& f = first[p][j];
      while (f < alts.size() && storage[static_cast<std::size_t>(alts[f].supply - 1)] < alts[f].qty) ++f;
      if (f < alts.size()) {
        storage[static_cast<std::size_t>(alts[f].supply - 1)] -= alts[f].qty;
        ++pd.storage[j][f];
        ++pd.cheapest.counts[j][f];
      } else {
        const std::size_t c = cheapest[p][j];
        ++pd.cheapest.counts[j][c];
        pd.advance_cost += instance.supply(alts[c].supply).price_cents * alts[c].qty;
      }
    }
  };

  const auto counts = expected_counts(instance);
  const auto quota = pessimistic_quota(instance);
  const auto schedule = build_schedule(instance, counts, quota);
  for (const auto& ev : schedule.events) {
    if (ev.disease_case) serve(static_cast<std::size_t>(ev.disease));
    for (int s = 0; s < ev.suspected; ++s) serve(kEpidemicProfile);
  }
  return out;
}

}  // namespace procure
