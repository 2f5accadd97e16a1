#include "procure/subproblem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

#include "procure/rng.hpp"

namespace procure {

namespace {

constexpr double kImproveTol = 1e-12;

bool improves(double candidate, double incumbent) {
  return candidate > incumbent + kImproveTol * std::max(1.0, std::abs(incumbent));
}

struct Change {
  int item = 0;
  int alt = 0;
  int delta = 0;
};

/// Index of the alternative serving case c (0-based) given inclusive prefix sums.
inline std::size_t alt_at(const std::vector<Count>& prefix, Count c) {
  std::size_t k = 0;
  while (prefix[k] <= c) ++k;
  return k;
}

/// Keeps z together with its prefix sums and cost so that moves touching a
/// few components can be priced and evaluated without a full pass.
class AlignedState {
 public:
  AlignedState(const SubproblemSpec& spec, SubproblemSolution z)
      : spec_(spec), z_(std::move(z)), prefix_(spec.items.size()), scratch_prefix_(spec.items.size()) {
    for (std::size_t j = 0; j < z_.counts.size(); ++j) rebuild_prefix(j);
    cost_ = procure::cost(spec_, z_);
    chosen_.resize(spec_.items.size());
  }

  const SubproblemSolution& solution() const { return z_; }
  Money cost() const { return cost_; }
  Count count(int j, int k) const { return z_.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]; }

  bool valid_after(std::span<const Change> changes) const {
    for (std::size_t a = 0; a < changes.size(); ++a) {
      Count v = count(changes[a].item, changes[a].alt);
      for (std::size_t b = 0; b < changes.size(); ++b) {
        if (changes[b].item == changes[a].item && changes[b].alt == changes[a].alt) v += changes[b].delta;
      }
      if (v < 0) return false;
    }
    return true;
  }

  Money cost_delta(std::span<const Change> changes) const {
    // Components may repeat, so price them through a small accumulated view.
    std::array<Change, 8> merged{};
    std::size_t n = 0;
    for (const auto& c : changes) {
      std::size_t i = 0;
      while (i < n && !(merged[i].item == c.item && merged[i].alt == c.alt)) ++i;
      if (i == n) merged[n++] = {c.item, c.alt, 0};
      merged[i].delta += c.delta;
    }
    Money d = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(merged[i].item);
      const auto k = static_cast<std::size_t>(merged[i].alt);
      const Count s = spec_.storage[j][k];
      const Count before = z_.counts[j][k];
      const Count after = before + merged[i].delta;
      d += spec_.items[j][k].case_cost * (std::max<Count>(0, after - s) - std::max<Count>(0, before - s));
    }
    return d;
  }

  /// Change in total effect if the changes were applied.
  double effect_delta(std::span<const Change> changes) {
    touched_.clear();
    for (const auto& c : changes) {
      if (std::find(touched_.begin(), touched_.end(), c.item) == touched_.end()) touched_.push_back(c.item);
    }
    cases_.clear();
    for (int j : touched_) {
      const auto ju = static_cast<std::size_t>(j);
      auto& np = scratch_prefix_[ju];
      np = prefix_[ju];
      for (const auto& c : changes) {
        if (c.item != j) continue;
        for (std::size_t t = static_cast<std::size_t>(c.alt); t < np.size(); ++t) np[t] += c.delta;
      }
      for (std::size_t t = 0; t < np.size(); ++t) {
        const Count lo = std::min(np[t], prefix_[ju][t]);
        const Count hi = std::max(np[t], prefix_[ju][t]);
        for (Count c = lo; c < hi; ++c) cases_.push_back(c);
      }
    }
    std::sort(cases_.begin(), cases_.end());
    cases_.erase(std::unique(cases_.begin(), cases_.end()), cases_.end());

    double delta = 0.0;
    for (Count c : cases_) {
      for (std::size_t j = 0; j < spec_.items.size(); ++j) chosen_[j] = spec_.items[j][alt_at(prefix_[j], c)].effect;
      const double before = eval_effect(spec_.effect_fn, chosen_);
      for (int j : touched_) {
        const auto ju = static_cast<std::size_t>(j);
        chosen_[ju] = spec_.items[ju][alt_at(scratch_prefix_[ju], c)].effect;
      }
      delta += eval_effect(spec_.effect_fn, chosen_) - before;
    }
    return delta;
  }

  void apply(std::span<const Change> changes) {
    cost_ += cost_delta(changes);
    for (const auto& c : changes) {
      z_.counts[static_cast<std::size_t>(c.item)][static_cast<std::size_t>(c.alt)] += c.delta;
    }
    for (const auto& c : changes) rebuild_prefix(static_cast<std::size_t>(c.item));
  }

 private:
  void rebuild_prefix(std::size_t j) {
    auto& p = prefix_[j];
    p.resize(z_.counts[j].size());
    Count acc = 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      acc += z_.counts[j][k];
      p[k] = acc;
    }
  }

  const SubproblemSpec& spec_;
  SubproblemSolution z_;
  std::vector<std::vector<Count>> prefix_;
  std::vector<std::vector<Count>> scratch_prefix_;
  Money cost_ = 0;
  std::vector<int> touched_;
  std::vector<Count> cases_;
  std::vector<double> chosen_;
};

}  // namespace

std::size_t SubproblemSpec::dimension() const {
  std::size_t d = 0;
  for (const auto& item : items) d += item.size();
  return d;
}

SubproblemSpec make_subproblem(const ProcurementInstance& instance, const DivisionOutcome& division,
                               std::size_t profile, Money budget) {
  const auto& pd = division.profiles.at(profile);
  const auto& prof = instance.profile(profile);
  SubproblemSpec spec;
  spec.profile = static_cast<int>(profile);
  spec.case_count = pd.case_count;
  spec.budget = budget;
  spec.storage = pd.storage;
  spec.effect_fn = prof.effect_fn;
  for (const auto& item : prof.alternative_items()) {
    std::vector<SubproblemOption> opts;
    for (const auto& alt : item.alternatives) {
      opts.push_back({alt.supply, instance.supply(alt.supply).price_cents * alt.qty, alt.effect});
    }
    spec.items.push_back(std::move(opts));
  }
  return spec;
}

void check_solution(const SubproblemSpec& spec, const SubproblemSolution& z) {
  if (z.counts.size() != spec.items.size()) {
    throw StructuralError("solution has " + std::to_string(z.counts.size()) + " items, expected " +
                          std::to_string(spec.items.size()));
  }
  for (std::size_t j = 0; j < z.counts.size(); ++j) {
    if (z.counts[j].size() != spec.items[j].size()) {
      throw StructuralError("item " + std::to_string(j) + " has " + std::to_string(z.counts[j].size()) +
                            " counts, expected " + std::to_string(spec.items[j].size()));
    }
    Count sum = 0;
    for (Count c : z.counts[j]) {
      if (c < 0) throw StructuralError("negative count in item " + std::to_string(j));
      sum += c;
    }
    if (sum != spec.case_count) {
      throw StructuralError("item " + std::to_string(j) + " counts sum to " + std::to_string(sum) +
                            ", expected " + std::to_string(spec.case_count));
    }
  }
}

Money cost(const SubproblemSpec& spec, const SubproblemSolution& z) {
  check_solution(spec, z);
  Money total = 0;
  for (std::size_t j = 0; j < spec.items.size(); ++j) {
    for (std::size_t k = 0; k < spec.items[j].size(); ++k) {
      total += spec.items[j][k].case_cost * std::max<Count>(0, z.counts[j][k] - spec.storage[j][k]);
    }
  }
  return total;
}

double effect(const SubproblemSpec& spec, const SubproblemSolution& z) {
  check_solution(spec, z);
  const std::size_t n_items = spec.items.size();
  std::vector<std::size_t> alt(n_items, 0);
  std::vector<Count> end(n_items, 0);  // exclusive end of the current alternative's case range
  for (std::size_t j = 0; j < n_items; ++j) end[j] = z.counts[j][0];
  std::vector<double> chosen(n_items);

  // Walk maximal runs of cases sharing one combination; per-case accumulation
  // keeps the sum identical to a case-by-case simulation.
  double total = 0.0;
  Count c = 0;
  while (c < spec.case_count) {
    Count run_end = spec.case_count;
    for (std::size_t j = 0; j < n_items; ++j) {
      while (end[j] <= c) end[j] += z.counts[j][++alt[j]];
      chosen[j] = spec.items[j][alt[j]].effect;
      run_end = std::min(run_end, end[j]);
    }
    const double e = eval_effect(spec.effect_fn, chosen);
    for (; c < run_end; ++c) total += e;
  }
  return total;
}

SubproblemSolution greedy_improve(const SubproblemSpec& spec, SubproblemSolution z) {
  check_solution(spec, z);
  AlignedState state(spec, std::move(z));
  if (state.cost() > spec.budget) {
    throw ContractError("greedy_improve: start costs " + std::to_string(state.cost()) + " which exceeds budget " +
                        std::to_string(spec.budget));
  }
  for (;;) {
    bool found = false;
    bool best_free = false;
    double best_score = 0.0;
    std::array<Change, 2> best_move{};
    const Money slack = spec.budget - state.cost();
    for (std::size_t j = 0; j < spec.items.size(); ++j) {
      const int n = static_cast<int>(spec.items[j].size());
      for (int k = 0; k < n; ++k) {
        for (int from = k + 1; from < n; ++from) {
          if (state.count(static_cast<int>(j), from) == 0) continue;
          const std::array<Change, 2> move{{{static_cast<int>(j), from, -1}, {static_cast<int>(j), k, +1}}};
          const Money dc = state.cost_delta(move);
          if (dc > slack) continue;
          const double de = state.effect_delta(move);
          if (!(de > kImproveTol)) continue;
          // Upgrades that cost nothing rank above any priced upgrade.
          const bool is_free = dc <= 0;
          const double score = is_free ? de : de / static_cast<double>(dc);
          const bool better = !found || (is_free && !best_free) || (is_free == best_free && score > best_score);
          if (better) {
            found = true;
            best_free = is_free;
            best_score = score;
            best_move = move;
          }
        }
      }
    }
    if (!found) break;
    state.apply(best_move);
  }
  return state.solution();
}

// ---------------------------------------------------------------------------
// Tabu search

namespace {

struct TabuMove {
  int down_item = -1, down_alt = -1;  // one case from down_alt to down_alt + 1
  int up_item = -1, up_alt = -1;      // one case from up_alt + 1 to up_alt

  std::size_t changes(std::array<Change, 4>& out) const {
    std::size_t n = 0;
    if (down_item >= 0) {
      out[n++] = {down_item, down_alt, -1};
      out[n++] = {down_item, down_alt + 1, +1};
    }
    if (up_item >= 0) {
      out[n++] = {up_item, up_alt + 1, -1};
      out[n++] = {up_item, up_alt, +1};
    }
    return n;
  }
  std::array<int, 4> key() const { return {down_item, down_alt, up_item, up_alt}; }
  std::array<int, 4> inverse_key() const { return {up_item, up_alt, down_item, down_alt}; }
};

}  // namespace

TabuResult tabu_search(const SubproblemSpec& spec, const SubproblemSolution& start, const TabuConfig& config) {
  check_solution(spec, start);
  const int dim = static_cast<int>(spec.dimension());
  const int k_n = config.neighborhood_size > 0 ? config.neighborhood_size : 2 * dim;
  const int max_iter = config.max_iterations > 0 ? config.max_iterations : 50 * dim;
  if (config.tabu_length < 1) throw ContractError("tabu_search: tabu length must be positive");

  AlignedState state(spec, start);
  if (state.cost() > spec.budget) {
    throw ContractError("tabu_search: start costs " + std::to_string(state.cost()) + " which exceeds budget " +
                        std::to_string(spec.budget));
  }

  TabuResult result;
  result.best = start;
  result.cost = state.cost();
  result.effect = effect(spec, start);
  double current = result.effect;

  Rng rng(config.seed);
  std::deque<std::pair<std::array<int, 4>, int>> tabu;  // (move key, expiry iteration)
  std::vector<TabuMove> moves;
  std::vector<std::pair<int, int>> downs, ups;
  std::vector<Money> down_cost, up_cost;
  std::array<Change, 4> buf{};

  for (int it = 1; it <= max_iter; ++it) {
    while (!tabu.empty() && tabu.front().second < it) tabu.pop_front();

    downs.clear();
    ups.clear();
    for (std::size_t j = 0; j < spec.items.size(); ++j) {
      const int n = static_cast<int>(spec.items[j].size());
      for (int k = 0; k + 1 < n; ++k) {
        if (state.count(static_cast<int>(j), k) > 0) downs.emplace_back(static_cast<int>(j), k);
        if (state.count(static_cast<int>(j), k + 1) > 0) ups.emplace_back(static_cast<int>(j), k);
      }
    }
    const Money slack = spec.budget - state.cost();
    moves.clear();
    // Costs of the half-moves are additive unless both touch the same item
    // at overlapping alternatives; those pairs are priced exactly.
    down_cost.clear();
    up_cost.clear();
    for (const auto& [j, k] : downs) {
      const std::array<Change, 2> ch{{{j, k, -1}, {j, k + 1, +1}}};
      down_cost.push_back(state.cost_delta(ch));
    }
    for (const auto& [j, k] : ups) {
      const std::array<Change, 2> ch{{{j, k + 1, -1}, {j, k, +1}}};
      up_cost.push_back(state.cost_delta(ch));
    }
    for (std::size_t d = 0; d < downs.size(); ++d) {
      const auto [dj, dk] = downs[d];
      for (std::size_t u = 0; u < ups.size(); ++u) {
        const auto [uj, uk] = ups[u];
        if (dj == uj && std::abs(dk - uk) <= 1) {
          if (dk == uk) continue;  // identity
          const TabuMove m{dj, dk, uj, uk};
          const std::size_t n = m.changes(buf);
          const std::span<const Change> ch(buf.data(), n);
          if (state.valid_after(ch) && state.cost_delta(ch) <= slack) moves.push_back(m);
        } else if (down_cost[d] + up_cost[u] <= slack) {
          moves.push_back({dj, dk, uj, uk});
        }
      }
    }
    // Pure upgrades let the walk spend budget freed by earlier swaps; pure
    // downgrades are their inverses.
    for (std::size_t u = 0; u < ups.size(); ++u) {
      if (up_cost[u] <= slack) moves.push_back({-1, -1, ups[u].first, ups[u].second});
    }
    for (std::size_t d = 0; d < downs.size(); ++d) {
      if (down_cost[d] <= slack) moves.push_back({downs[d].first, downs[d].second, -1, -1});
    }
    if (moves.empty()) {
      if (config.record_trace) result.best_trace.push_back(result.effect);
      result.iterations = it;
      break;
    }

    // Uniform sample of k_N moves without replacement (partial Fisher-Yates).
    const std::size_t keep = std::min(moves.size(), static_cast<std::size_t>(k_n));
    for (std::size_t t = 0; t < keep; ++t) {
      const std::size_t pick = t + uniform_index(rng, moves.size() - t);
      std::swap(moves[t], moves[pick]);
    }
    moves.resize(keep);
    const std::size_t sample = moves.size();

    int chosen = -1;
    double chosen_delta = 0.0;
    for (std::size_t s = 0; s < sample; ++s) {
      const std::size_t n = moves[s].changes(buf);
      const double d = state.effect_delta(std::span<const Change>(buf.data(), n));
      const auto key = moves[s].key(), inv = moves[s].inverse_key();
      const bool is_tabu = std::any_of(tabu.begin(), tabu.end(),
                                       [&](const auto& t) { return t.first == key || t.first == inv; });
      if (is_tabu && !improves(current + d, result.effect)) continue;
      if (chosen < 0 || d > chosen_delta) {
        chosen = static_cast<int>(s);
        chosen_delta = d;
      }
    }

    if (chosen >= 0) {
      const auto& m = moves[static_cast<std::size_t>(chosen)];
      const std::size_t n = m.changes(buf);
      state.apply(std::span<const Change>(buf.data(), n));
      tabu.emplace_back(m.key(), it + config.tabu_length - 1);
      current = effect(spec, state.solution());
      if (improves(current, result.effect) && state.cost() <= spec.budget) {
        result.best = state.solution();
        result.effect = current;
        result.cost = state.cost();
        result.best_iteration = it;
      }
    }
    if (config.record_trace) result.best_trace.push_back(result.effect);
    result.iterations = it;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

double oracle_space_size(const SubproblemSpec& spec) {
  double size = 1.0;
  for (const auto& item : spec.items) {
    // C(r + n - 1, n - 1)
    const double r = static_cast<double>(spec.case_count);
    const std::size_t n = item.size();
    double c = 1.0;
    for (std::size_t t = 1; t < n; ++t) c = c * (r + static_cast<double>(t)) / static_cast<double>(t);
    size *= std::round(c);
  }
  return size;
}

namespace {

struct Composition {
  std::vector<Count> counts;
  Money cost = 0;
};

void enumerate_compositions(Count remaining, std::size_t k, std::vector<Count>& cur, const SubproblemSpec& spec,
                            std::size_t item, std::vector<Composition>& out) {
  if (k + 1 == cur.size()) {
    cur[k] = remaining;
    Money c = 0;
    for (std::size_t t = 0; t < cur.size(); ++t) {
      c += spec.items[item][t].case_cost * std::max<Count>(0, cur[t] - spec.storage[item][t]);
    }
    out.push_back({cur, c});
    return;
  }
  for (Count v = remaining; v >= 0; --v) {
    cur[k] = v;
    enumerate_compositions(remaining - v, k + 1, cur, spec, item, out);
  }
}

}  // namespace

OracleResult oracle_solve(const SubproblemSpec& spec, double max_space) {
  OracleResult result;
  result.space_size = oracle_space_size(spec);
  if (result.space_size > max_space) {
    throw OracleTooLargeError("oracle: search space has about " + std::to_string(result.space_size) +
                                  " points, limit is " + std::to_string(max_space),
                              result.space_size);
  }
  const std::size_t n_items = spec.items.size();
  std::vector<std::vector<Composition>> per_item(n_items);
  std::vector<Money> min_cost(n_items + 1, 0);
  for (std::size_t j = 0; j < n_items; ++j) {
    std::vector<Count> cur(spec.items[j].size(), 0);
    enumerate_compositions(spec.case_count, 0, cur, spec, j, per_item[j]);
    std::stable_sort(per_item[j].begin(), per_item[j].end(),
                     [](const Composition& a, const Composition& b) { return a.cost < b.cost; });
  }
  for (std::size_t j = n_items; j-- > 0;) min_cost[j] = min_cost[j + 1] + per_item[j].front().cost;

  SubproblemSolution z;
  z.counts.resize(n_items);
  bool have = false;

  auto better = [&](double e, Money c) {
    if (!have) return true;
    if (e != result.effect) return e > result.effect;
    if (c != result.cost) return c < result.cost;
    return z.counts < result.best.counts;
  };

  auto recurse = [&](auto&& self, std::size_t j, Money spent) -> void {
    if (j == n_items) {
      ++result.visited;
      const double e = effect(spec, z);
      if (better(e, spent)) {
        have = true;
        result.best = z;
        result.effect = e;
        result.cost = spent;
      }
      return;
    }
    for (const auto& comp : per_item[j]) {
      if (spent + comp.cost + min_cost[j + 1] > spec.budget) break;  // sorted by cost
      z.counts[j] = comp.counts;
      self(self, j + 1, spent + comp.cost);
    }
  };
  recurse(recurse, 0, 0);
  if (!have) throw ContractError("oracle: no solution fits the budget");
  return result;
}

// ---------------------------------------------------------------------------

AllocationEvaluation evaluate_allocation(const ProcurementInstance& instance, const DivisionOutcome& division,
                                         const BudgetBounds& bounds, const BudgetAllocation& y,
                                         const TabuConfig& config) {
  const std::size_t profiles = instance.profile_count();
  if (y.y.size() != profiles) {
    throw StructuralError("allocation has " + std::to_string(y.y.size()) + " budgets for " +
                          std::to_string(profiles) + " profiles");
  }
  AllocationEvaluation out;
  out.allocation.y.resize(profiles);
  out.profile_effects.resize(profiles);
  out.solutions.resize(profiles);
  for (std::size_t p = 0; p < profiles; ++p) {
    const Money budget = std::clamp(y.y[p], bounds.y_lower[p], bounds.y_upper[p]);
    out.allocation.y[p] = budget;
    const auto spec = make_subproblem(instance, division, p, budget);
    auto start = greedy_improve(spec, division.profiles[p].cheapest);
    TabuConfig cfg = config;
    cfg.seed = derive_seed(config.seed, p);
    auto tabu = tabu_search(spec, start, cfg);
    out.profile_effects[p] = tabu.effect;
    out.solutions[p] = std::move(tabu.best);
  }
  out.epidemic_effect = out.profile_effects[0];
  for (std::size_t i = 1; i < profiles; ++i) {
    out.treatment_effect += instance.diseases[i - 1].weight * out.profile_effects[i];
  }
  return out;
}

PurchasePlan decode_plan(const ProcurementInstance& instance, const DivisionOutcome& division,
                         const VariableBounds& xb, const std::vector<SubproblemSolution>& solutions) {
  PurchasePlan plan{xb.x_lower};
  for (std::size_t p = 0; p < solutions.size(); ++p) {
    const auto items = instance.profile(p).alternative_items();
    const auto& storage = division.profiles.at(p).storage;
    for (std::size_t j = 0; j < items.size(); ++j) {
      for (std::size_t k = 0; k < items[j].alternatives.size(); ++k) {
        const auto& alt = items[j].alternatives[k];
        const Count bought = std::max<Count>(0, solutions[p].counts[j][k] - storage[j][k]);
        plan.x[static_cast<std::size_t>(alt.supply - 1)] += bought * alt.qty;
      }
    }
  }
  return plan;
}

}  // namespace procure
