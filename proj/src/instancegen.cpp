#include "procure/instancegen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "procure/bounds.hpp"
#include "procure/rng.hpp"
#include "procure/simulation.hpp"

namespace procure {

void validate_genspec(const GenSpec& s) {
  auto fail = [](const std::string& msg) { throw ValidationError("generator: " + msg); };
  if (s.diseases < 1) fail("diseases must be positive");
  if (s.supplies < 1) fail("supplies must be positive");
  if (s.cases < 1) fail("cases must be positive");
  if (!(s.avg_items >= 1.0)) fail("average items per disease must be at least 1");
  if (!(s.avg_alternatives >= 1.0)) fail("average alternatives per item must be at least 1");
  if (s.price_min < 1 || s.price_max < s.price_min) fail("price range must satisfy 1 <= min <= max");
  if (!(s.effect_min >= 0.0 && s.effect_min <= s.effect_max && s.effect_max <= 1.0)) {
    fail("effect range must satisfy 0 <= min <= max <= 1");
  }
  if (!(s.suspect_min >= 0.0 && s.suspect_min <= s.suspect_max && s.suspect_max <= 1.0)) {
    fail("suspect probability range must satisfy 0 <= min <= max <= 1");
  }
  if (!(s.inventory_fill >= 0.0)) fail("inventory fill must be nonnegative");
  if (!(s.beta >= 1.0)) fail("beta must be at least 1, got " + std::to_string(s.beta));
  if (!(s.overlap >= 0.0 && s.overlap <= 1.0)) fail("overlap must be in [0,1]");
  if (!(s.epidemic_fraction >= 0.0 && s.epidemic_fraction <= 1.0)) fail("epidemic fraction must be in [0,1]");
}

namespace {

// Alternative counts of the six epidemic items and the grouping of the
// epidemic effect function.
constexpr int kEpidemicShape[6] = {3, 3, 2, 3, 4, 3};
constexpr int kEpidemicMandatory = 2;

class Builder {
 public:
  explicit Builder(const GenSpec& spec) : spec_(spec), rng_(spec.seed) {}

  ProcurementInstance build() {
    const int epidemic_min = kEpidemicMandatory + std::accumulate(std::begin(kEpidemicShape), std::end(kEpidemicShape), 0);
    const int epidemic_supplies =
        std::max(epidemic_min, static_cast<int>(std::lround(spec_.epidemic_fraction * spec_.supplies)));
    common_target_ = std::max(1, spec_.supplies - epidemic_supplies);

    for (int k = 0; k < epidemic_supplies; ++k) new_supply();
    build_epidemic(epidemic_supplies);
    first_common_ = static_cast<int>(inst_.supplies.size()) + 1;

    const auto counts = partition_cases();
    for (int i = 0; i < spec_.diseases; ++i) build_disease(i + 1, counts[static_cast<std::size_t>(i)]);
    // Pad with catalog supplies nobody uses when the slots fell short of the target.
    while (static_cast<int>(inst_.supplies.size()) < spec_.supplies) new_supply();

    inst_.cycle_days = 15;
    inst_.local_incidence = 0.001;
    compute_suspected_cases(inst_);
    fill_inventory();
    canonicalize(inst_);
    set_budget();
    validate(inst_);
    return inst_;
  }

 private:
  int new_supply() {
    Supply s;
    s.id = static_cast<int>(inst_.supplies.size()) + 1;
    s.name = "S" + std::to_string(s.id);
    const double lo = std::log(static_cast<double>(spec_.price_min));
    const double hi = std::log(static_cast<double>(spec_.price_max));
    s.price_cents = std::clamp(static_cast<Money>(std::llround(std::exp(uniform_real(rng_, lo, hi)))), spec_.price_min,
                               spec_.price_max);
    s.volume = std::round(uniform_real(rng_, 0.1, 5.0) * 100.0) / 100.0;
    inst_.supplies.push_back(std::move(s));
    return inst_.supplies.back().id;
  }

  Count qty() { return 1 + poisson(rng_, 0.5); }

  /// Effects descending over supplies sorted by price descending, then a
  /// few adjacent swaps so that price does not always follow effect.
  TreatmentItem alternative_item(std::vector<int> supplies, bool first_is_best) {
    std::stable_sort(supplies.begin(), supplies.end(),
                     [&](int a, int b) { return inst_.supply(a).price_cents > inst_.supply(b).price_cents; });
    std::vector<double> effects(supplies.size());
    for (auto& e : effects) e = std::round(uniform_real(rng_, spec_.effect_min, spec_.effect_max) * 1000.0) / 1000.0;
    std::sort(effects.begin(), effects.end(), std::greater<>());
    if (first_is_best && !effects.empty()) effects[0] = 1.0;
    for (std::size_t t = 0; t + 1 < effects.size(); ++t) {
      if (uniform01(rng_) < 0.2) std::swap(effects[t], effects[t + 1]);
    }
    TreatmentItem item;
    for (std::size_t t = 0; t < supplies.size(); ++t) item.alternatives.push_back({supplies[t], qty(), effects[t]});
    return item;
  }

  TreatmentItem mandatory_item(int supply) {
    TreatmentItem item;
    item.mandatory = true;
    item.alternatives.push_back({supply, qty(), 1.0});
    return item;
  }

  void build_epidemic(int supplies) {
    auto& ep = inst_.epidemic;
    int next = 1;
    for (int t = 0; t < kEpidemicMandatory; ++t) ep.items.push_back(mandatory_item(next++));
    std::vector<std::vector<int>> slots(6);
    for (int j = 0; j < 6; ++j) {
      for (int t = 0; t < kEpidemicShape[j]; ++t) slots[static_cast<std::size_t>(j)].push_back(next++);
    }
    for (int j = 0; next <= supplies; j = (j + 1) % 6) slots[static_cast<std::size_t>(j)].push_back(next++);
    for (auto& s : slots) ep.items.push_back(alternative_item(s, true));
    ep.effect_fn.groups = {{{0, 0.4}, {1, 0.6}}, {{2, 1.0}}, {{3, 0.2}, {4, 0.8}}, {{5, 1.0}}};
  }

  std::vector<Count> partition_cases() {
    const auto m = static_cast<std::size_t>(spec_.diseases);
    std::vector<double> share(m);
    for (auto& s : share) s = uniform_real(rng_, 0.2, 1.0);
    const double total = std::accumulate(share.begin(), share.end(), 0.0);
    std::vector<Count> out(m);
    std::vector<double> frac(m);
    Count assigned = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double exact = static_cast<double>(spec_.cases) * share[i] / total;
      out[i] = static_cast<Count>(std::floor(exact));
      frac[i] = exact - static_cast<double>(out[i]);
      assigned += out[i];
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t t = 0; assigned < spec_.cases; t = (t + 1) % m) {
      ++out[order[t]];
      ++assigned;
    }
    return out;
  }

  /// A disease-side alternative supply: reused with probability overlap (or
  /// once the target is reached), otherwise fresh. Never repeats within
  /// `taken` and never reuses a mandatory supply.
  int common_supply(const std::vector<int>& taken) {
    const int existing = static_cast<int>(inst_.supplies.size()) - first_common_ + 1;
    const bool room = existing < common_target_;
    if (room && !(uniform01(rng_) < spec_.overlap)) return new_supply();
    std::vector<int> options;
    for (int id = first_common_; id < first_common_ + existing; ++id) {
      if (std::find(taken.begin(), taken.end(), id) == taken.end() &&
          std::find(mandatory_pool_.begin(), mandatory_pool_.end(), id) == mandatory_pool_.end()) {
        options.push_back(id);
      }
    }
    if (options.empty()) return new_supply();
    return options[uniform_index(rng_, options.size())];
  }

  /// Mandatory supplies come from their own pool so that no disease's
  /// alternative draws down another disease's required stock.
  int mandatory_supply(const std::vector<int>& taken) {
    std::vector<int> options;
    for (int id : mandatory_pool_) {
      if (std::find(taken.begin(), taken.end(), id) == taken.end()) options.push_back(id);
    }
    if (!options.empty() && uniform01(rng_) < spec_.overlap) {
      return options[uniform_index(rng_, options.size())];
    }
    const int id = new_supply();
    mandatory_pool_.push_back(id);
    return id;
  }

  void build_disease(int id, Count cases) {
    DiseaseProfile d;
    d.id = id;
    d.name = "D" + std::to_string(id);
    d.weight = std::round(uniform_real(rng_, 0.5, 1.5) * 100.0) / 100.0;
    d.expected_cases = cases;
    d.lower_cases = cases * 7 / 10;
    d.upper_cases = (cases * 12 + 9) / 10;
    d.suspect_prob = std::round(uniform_real(rng_, spec_.suspect_min, spec_.suspect_max) * 1e5) / 1e5;
    d.companions = std::round(uniform_real(rng_, 0.0, 1.5) * 100.0) / 100.0;
    d.companion_suspect_prob = std::round(uniform_real(rng_, 0.0, spec_.suspect_max / 2.0) * 1e5) / 1e5;
    d.emergency = uniform01(rng_) < 0.2;

    const int mandatory = 1 + poisson(rng_, 0.5);
    const int items = 1 + poisson(rng_, spec_.avg_items - 1.0);
    std::vector<int> used;
    for (int t = 0; t < mandatory; ++t) {
      const int s = mandatory_supply(used);
      used.push_back(s);
      d.items.push_back(mandatory_item(s));
    }
    for (int j = 0; j < items; ++j) {
      const int alts = 1 + poisson(rng_, spec_.avg_alternatives - 1.0);
      std::vector<int> chosen;
      for (int t = 0; t < alts; ++t) {
        std::vector<int> taken = used;
        taken.insert(taken.end(), chosen.begin(), chosen.end());
        chosen.push_back(common_supply(taken));
      }
      used.insert(used.end(), chosen.begin(), chosen.end());
      d.items.push_back(alternative_item(chosen, false));
    }

    // Items join the previous group or open a new one; weights normalized per group.
    std::vector<std::vector<WeightedItem>> groups;
    for (int j = 0; j < items; ++j) {
      if (groups.empty() || uniform01(rng_) < 0.4) groups.emplace_back();
      groups.back().push_back({j, uniform_real(rng_, 0.1, 1.0)});
    }
    for (auto& g : groups) {
      double sum = 0.0;
      for (const auto& w : g) sum += w.weight;
      double acc = 0.0;
      for (std::size_t t = 0; t + 1 < g.size(); ++t) {
        g[t].weight /= sum;
        acc += g[t].weight;
      }
      g.back().weight = 1.0 - acc;
    }
    d.effect_fn.groups = std::move(groups);
    inst_.diseases.push_back(std::move(d));
  }

  void fill_inventory() {
    std::vector<Count> demand(inst_.supplies.size(), 0);
    for (std::size_t p = 0; p < inst_.profile_count(); ++p) {
      const Count r = inst_.expected_profile_cases(p);
      for (const auto& item : inst_.profile(p).items) {
        for (const auto& a : item.alternatives) demand[static_cast<std::size_t>(a.supply - 1)] += r * a.qty;
      }
    }
    for (std::size_t k = 0; k < demand.size(); ++k) {
      const double target = spec_.inventory_fill * static_cast<double>(demand[k]) * uniform_real(rng_, 0.0, 2.0);
      inst_.supplies[k].inventory = static_cast<Count>(std::floor(target));
    }
  }

  void set_budget() {
    inst_.budget_cents = 0;
    const auto xb = x_bounds(inst_);
    const auto division = divide(inst_);
    const auto yb = y_bounds(inst_, division);
    const Money floor_cost = mandatory_cost(inst_, xb) + yb.lower_total();
    inst_.budget_cents = static_cast<Money>(std::floor(spec_.beta * static_cast<double>(floor_cost)));
    if (inst_.budget_cents < floor_cost) inst_.budget_cents = floor_cost;
  }

  const GenSpec& spec_;
  Rng rng_;
  ProcurementInstance inst_;
  int first_common_ = 1;
  int common_target_ = 1;
  std::vector<int> mandatory_pool_;
};

}  // namespace

ProcurementInstance generate(const GenSpec& spec) {
  validate_genspec(spec);
  return Builder(spec).build();
}

}  // namespace procure
