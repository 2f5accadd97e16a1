#include "procure/moea.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "procure/rng.hpp"
#include "procure/simulation.hpp"

namespace procure {

using json = nlohmann::json;

std::string to_string(Algorithm a) { return a == Algorithm::nsga2 ? "nsga2" : "moead"; }
std::string to_string(SearchSpace s) { return s == SearchSpace::original ? "original" : "transformed"; }

Algorithm parse_algorithm(const std::string& s) {
  if (s == "nsga2") return Algorithm::nsga2;
  if (s == "moead") return Algorithm::moead;
  throw ParseError("unknown algorithm '" + s + "' (expected nsga2 or moead)");
}

SearchSpace parse_space(const std::string& s) {
  if (s == "original") return SearchSpace::original;
  if (s == "transformed") return SearchSpace::transformed;
  throw ParseError("unknown space '" + s + "' (expected original or transformed)");
}

void validate_config(const RunConfig& c) {
  if (c.algorithm == Algorithm::nsga2 && c.population < 2) {
    throw ValidationError("population must be at least 2 for nsga2, got " + std::to_string(c.population));
  }
  if (c.population < 1) throw ValidationError("population must be positive");
  if (c.weight_count < 0) throw ValidationError("weight count must be nonnegative");
  if (c.neighborhood < 0) throw ValidationError("neighborhood must be nonnegative");
  if (!(c.crossover_rate >= 0.0 && c.crossover_rate <= 1.0)) throw ValidationError("crossover rate must be in [0,1]");
  if (!(c.mutation_rate >= 0.0 && c.mutation_rate <= 1.0)) throw ValidationError("mutation rate must be in [0,1]");
  if (!(c.sbx_eta >= 0.0)) throw ValidationError("sbx eta must be nonnegative");
  if (!(c.time_limit_seconds >= 0.0)) throw ValidationError("time limit must be nonnegative");
  if (c.max_evaluations < 0) throw ValidationError("max evaluations must be nonnegative");
  if (c.time_limit_seconds == 0.0 && c.max_evaluations == 0) {
    throw ValidationError("set a time limit or an evaluation limit");
  }
  if (c.threads < 1) throw ValidationError("threads must be positive");
  if (c.tabu.tabu_length < 1 || c.tabu.neighborhood_size < 0 || c.tabu.max_iterations < 0) {
    throw ValidationError("invalid tabu settings");
  }
}

BudgetAllocation repair_allocation(std::span<const double> y_raw, const BudgetBounds& bounds) {
  const std::size_t n = bounds.y_lower.size();
  if (y_raw.size() != n) {
    throw StructuralError("allocation has " + std::to_string(y_raw.size()) + " entries, expected " +
                          std::to_string(n));
  }
  if (!bounds.feasible()) {
    throw InfeasibleError("lower budget bounds exceed the remaining budget by " + std::to_string(bounds.deficit()) +
                              " cents",
                          bounds.deficit());
  }
  BudgetAllocation out;
  out.y.resize(n);
  Money total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = y_raw[i];
    Money y;
    if (!(v >= static_cast<double>(bounds.y_lower[i]))) {
      y = bounds.y_lower[i];  // also catches NaN
    } else if (v >= static_cast<double>(bounds.y_upper[i])) {
      y = bounds.y_upper[i];
    } else {
      y = std::clamp(static_cast<Money>(std::floor(v)), bounds.y_lower[i], bounds.y_upper[i]);
    }
    out.y[i] = y;
    total += y;
  }
  if (total <= bounds.remaining_budget) return out;

  const Money available = bounds.remaining_budget - bounds.lower_total();
  const Money slack_total = total - bounds.lower_total();
  std::vector<Money> slack(n), rem(n);
  Money assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const __int128 s = static_cast<__int128>(out.y[i] - bounds.y_lower[i]) * available;
    slack[i] = static_cast<Money>(s / slack_total);
    rem[i] = static_cast<Money>(s % slack_total);
    assigned += slack[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t t = 0; assigned < available && t < n; ++t) {
    ++slack[order[t]];
    ++assigned;
  }
  for (std::size_t i = 0; i < n; ++i) out.y[i] = bounds.y_lower[i] + slack[i];
  return out;
}

std::vector<std::pair<double, double>> ParetoArchive::front() const {
  std::vector<std::pair<double, double>> f;
  f.reserve(entries.size());
  for (const auto& e : entries) f.emplace_back(e.epidemic_effect, e.treatment_effect);
  return f;
}

bool dominates(std::pair<double, double> a, std::pair<double, double> b) {
  return a.first >= b.first && a.second >= b.second && (a.first > b.first || a.second > b.second);
}

bool constrained_dominates(std::pair<double, double> a, double va, std::pair<double, double> b, double vb) {
  const bool fa = va <= 0.0, fb = vb <= 0.0;
  if (fa && !fb) return true;
  if (!fa && fb) return false;
  if (!fa && !fb) return va < vb;
  return dominates(a, b);
}

namespace {

using Objectives = std::pair<double, double>;
using Key = std::vector<std::int64_t>;
using Clock = std::chrono::steady_clock;

struct EvalRecord {
  Objectives obj;
  double violation = 0.0;
  std::vector<double> genome;  ///< canonical genome reproducing this record
  std::optional<BudgetAllocation> allocation;
  std::vector<SubproblemSolution> solutions;
  std::optional<PurchasePlan> plan;

  bool feasible() const { return violation <= 0.0; }
};
using RecordPtr = std::shared_ptr<const EvalRecord>;

/// Budget excess plus C per failed treatability flag.
double plan_violation(const ProcurementInstance& instance, const FeasibilityReport& fr) {
  double v = static_cast<double>(fr.budget_excess) +
             static_cast<double>(instance.budget_cents) * static_cast<double>(fr.violated_flags());
  // A zero budget would make missing flags free; keep them visible.
  if (v == 0.0 && fr.violated_flags() > 0) v = static_cast<double>(fr.violated_flags());
  return v;
}

class Problem {
 public:
  virtual ~Problem() = default;
  virtual std::size_t dimension() const = 0;
  virtual double lower(std::size_t i) const = 0;
  virtual double upper(std::size_t i) const = 0;
  virtual bool integer() const = 0;
  /// Decoded decision vector; equal keys evaluate identically.
  virtual Key key(const std::vector<double>& genome) const = 0;
  /// Thread-safe.
  virtual EvalRecord evaluate(const Key& key) const = 0;
};

class TransformedProblem final : public Problem {
 public:
  TransformedProblem(const ProcurementInstance& instance, const RunConfig& config)
      : instance_(instance),
        division_(divide(instance)),
        bounds_(y_bounds(instance, division_)),
        xb_(x_bounds(instance)) {
    if (!bounds_.feasible()) {
      throw InfeasibleError("instance is infeasible: lower budget bounds exceed the remaining budget by " +
                                std::to_string(bounds_.deficit()) + " cents",
                            bounds_.deficit());
    }
    tabu_ = config.tabu;
    tabu_.seed = derive_seed(config.seed, 0x7ab0);
    tabu_.record_trace = false;
  }
  std::size_t dimension() const override { return bounds_.y_lower.size(); }
  double lower(std::size_t) const override { return 0.0; }
  double upper(std::size_t) const override { return 1.0; }
  bool integer() const override { return false; }

  Key key(const std::vector<double>& g) const override {
    std::vector<double> raw(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double lo = static_cast<double>(bounds_.y_lower[i]);
      const double hi = static_cast<double>(bounds_.y_upper[i]);
      raw[i] = lo + g[i] * (hi - lo + 1.0);  // equal-width cell per integer, hi included
    }
    return repair_allocation(raw, bounds_).y;
  }

  EvalRecord evaluate(const Key& y) const override {
    auto ev = evaluate_allocation(instance_, division_, bounds_, BudgetAllocation{y}, tabu_);
    EvalRecord r;
    r.obj = {ev.epidemic_effect, ev.treatment_effect};
    // Profiles share supplies in the simulation, so the decoded plan may
    // still leave cases untreated; top it up and score what remains.
    PurchasePlan plan = decode_plan(instance_, division_, xb_, ev.solutions);
    top_up_plan(instance_, plan);
    r.violation = plan_violation(instance_, check_feasibility(instance_, plan));
    r.plan = std::move(plan);
    r.genome.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const Money width = bounds_.y_upper[i] - bounds_.y_lower[i];
      r.genome[i] = (static_cast<double>(y[i] - bounds_.y_lower[i]) + 0.5) / static_cast<double>(width + 1);
    }
    r.allocation = ev.allocation;
    r.solutions = std::move(ev.solutions);
    return r;
  }

 private:
  const ProcurementInstance& instance_;
  DivisionOutcome division_;
  BudgetBounds bounds_;
  VariableBounds xb_;
  TabuConfig tabu_;
};

class OriginalProblem final : public Problem {
 public:
  explicit OriginalProblem(const ProcurementInstance& instance) : instance_(instance), xb_(x_bounds(instance)) {}
  std::size_t dimension() const override { return xb_.x_lower.size(); }
  double lower(std::size_t i) const override { return static_cast<double>(xb_.x_lower[i]); }
  double upper(std::size_t i) const override { return static_cast<double>(xb_.x_upper[i]); }
  bool integer() const override { return true; }

  Key key(const std::vector<double>& g) const override {
    Key x(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      x[i] = std::clamp(static_cast<Count>(std::llround(g[i])), xb_.x_lower[i], xb_.x_upper[i]);
    }
    return x;
  }

  EvalRecord evaluate(const Key& x) const override {
    const PurchasePlan plan{x};
    const auto ev = evaluate_original(instance_, plan);
    EvalRecord r;
    r.obj = {ev.epidemic_effect, ev.treatment_effect};
    r.violation = plan_violation(instance_, check_feasibility(instance_, plan));
    r.genome.assign(x.begin(), x.end());
    r.plan = plan;
    return r;
  }

 private:
  const ProcurementInstance& instance_;
  VariableBounds xb_;
};

/// Batched evaluation with a decoded-key cache, stopping limits and an
/// optional worker pool. Results never depend on the thread count.
class Evaluator {
 public:
  Evaluator(const Problem& problem, const RunConfig& config)
      : problem_(problem), config_(config), start_(Clock::now()) {}

  bool exhausted() const {
    if (config_.max_evaluations > 0 && evaluations_ >= config_.max_evaluations) return true;
    return timed_out();
  }

  /// Evaluates a prefix of the batch; shorter than the input only when a
  /// limit is hit.
  std::vector<RecordPtr> evaluate(const std::vector<std::vector<double>>& genomes) {
    std::size_t n = genomes.size();
    if (config_.max_evaluations > 0) {
      n = static_cast<std::size_t>(
          std::min<std::int64_t>(static_cast<std::int64_t>(n), std::max<std::int64_t>(0, config_.max_evaluations - evaluations_)));
    }
    std::vector<RecordPtr> out;
    out.reserve(n);
    const std::size_t chunk =
        config_.time_limit_seconds > 0.0 ? static_cast<std::size_t>(config_.threads) : std::max<std::size_t>(n, 1);
    for (std::size_t begin = 0; begin < n; begin += chunk) {
      if (timed_out()) break;
      const std::size_t end = std::min(n, begin + chunk);
      std::vector<Key> keys;
      for (std::size_t i = begin; i < end; ++i) keys.push_back(problem_.key(genomes[i]));
      std::vector<Key> missing;
      std::map<Key, std::size_t> pending;
      for (const auto& k : keys) {
        if (cache_.count(k) || pending.count(k)) continue;
        pending.emplace(k, missing.size());
        missing.push_back(k);
      }
      auto computed = compute(missing);
      if (cache_.size() + computed.size() > kCacheCap) cache_.clear();
      std::vector<RecordPtr> fresh(computed.size());
      for (std::size_t i = 0; i < computed.size(); ++i) {
        fresh[i] = std::make_shared<const EvalRecord>(std::move(computed[i]));
      }
      for (const auto& k : keys) {
        auto pit = pending.find(k);
        out.push_back(pit != pending.end() ? fresh[pit->second] : cache_.at(k));
      }
      for (std::size_t i = 0; i < missing.size(); ++i) cache_.emplace(missing[i], fresh[i]);
      evaluations_ += static_cast<std::int64_t>(end - begin);
      unique_ += static_cast<std::int64_t>(missing.size());
    }
    return out;
  }

  std::int64_t evaluations() const { return evaluations_; }
  std::int64_t unique_evaluations() const { return unique_; }
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  static constexpr std::size_t kCacheCap = 100000;

  bool timed_out() const { return config_.time_limit_seconds > 0.0 && elapsed() >= config_.time_limit_seconds; }

  std::vector<EvalRecord> compute(const std::vector<Key>& keys) const {
    std::vector<EvalRecord> out(keys.size());
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config_.threads), keys.size());
    if (workers <= 1) {
      for (std::size_t i = 0; i < keys.size(); ++i) out[i] = problem_.evaluate(keys[i]);
      return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = next++; i < keys.size(); i = next++) out[i] = problem_.evaluate(keys[i]);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    return out;
  }

  const Problem& problem_;
  const RunConfig& config_;
  Clock::time_point start_;
  std::map<Key, RecordPtr> cache_;
  std::int64_t evaluations_ = 0;
  std::int64_t unique_ = 0;
};

std::unique_ptr<Problem> make_problem(const ProcurementInstance& instance, const RunConfig& config) {
  if (config.space == SearchSpace::transformed) return std::make_unique<TransformedProblem>(instance, config);
  return std::make_unique<OriginalProblem>(instance);
}

// ---------------------------------------------------------------------------
// Variation operators

class Variation {
 public:
  Variation(const Problem& problem, const RunConfig& config, Rng& rng)
      : p_(problem), rng_(rng), pc_(config.crossover_rate), eta_(config.sbx_eta) {
    const auto d = static_cast<double>(std::max<std::size_t>(1, problem.dimension()));
    pm_ = config.mutation_rate > 0.0 ? config.mutation_rate : 1.0 / d;
  }

  std::vector<double> random_genome() {
    std::vector<double> g(p_.dimension());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = sample_gene(i);
    return g;
  }

  /// Bounded simulated binary crossover.
  std::pair<std::vector<double>, std::vector<double>> crossover(const std::vector<double>& a,
                                                                const std::vector<double>& b) {
    std::vector<double> c1 = a, c2 = b;
    if (uniform01(rng_) < pc_) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (uniform01(rng_) >= 0.5) continue;
        const double lo = p_.lower(i), hi = p_.upper(i);
        double y1 = std::min(a[i], b[i]), y2 = std::max(a[i], b[i]);
        if (y2 - y1 <= 1e-14 || hi - lo <= 0.0) continue;
        const double u = uniform01(rng_);
        auto spread = [&](double beta) {
          const double alpha = 2.0 - std::pow(beta, -(eta_ + 1.0));
          return u <= 1.0 / alpha ? std::pow(u * alpha, 1.0 / (eta_ + 1.0))
                                  : std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta_ + 1.0));
        };
        const double bq1 = spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
        const double bq2 = spread(1.0 + 2.0 * (hi - y2) / (y2 - y1));
        double v1 = std::clamp(0.5 * ((y1 + y2) - bq1 * (y2 - y1)), lo, hi);
        double v2 = std::clamp(0.5 * ((y1 + y2) + bq2 * (y2 - y1)), lo, hi);
        if (uniform01(rng_) < 0.5) std::swap(v1, v2);
        c1[i] = finish(v1, i);
        c2[i] = finish(v2, i);
      }
    }
    return {std::move(c1), std::move(c2)};
  }

  void mutate(std::vector<double>& g) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (uniform01(rng_) < pm_) g[i] = sample_gene(i);
    }
  }

 private:
  double sample_gene(std::size_t i) {
    if (p_.integer()) {
      return static_cast<double>(
          uniform_int(rng_, static_cast<std::int64_t>(p_.lower(i)), static_cast<std::int64_t>(p_.upper(i))));
    }
    return uniform_real(rng_, p_.lower(i), p_.upper(i));
  }

  double finish(double v, std::size_t i) const {
    if (!p_.integer()) return v;
    return std::clamp(std::round(v), p_.lower(i), p_.upper(i));
  }

  const Problem& p_;
  Rng& rng_;
  double pc_;
  double pm_ = 0.0;
  double eta_;
};

// ---------------------------------------------------------------------------

struct Member {
  std::vector<double> genome;
  RecordPtr rec;
  int rank = 0;
  double crowding = 0.0;
};

bool member_dominates(const Member& a, const Member& b) {
  return constrained_dominates(a.rec->obj, a.rec->violation, b.rec->obj, b.rec->violation);
}

std::vector<std::vector<std::size_t>> nondominated_sort(std::vector<Member>& pop) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<int> count(n, 0);
  std::vector<std::vector<std::size_t>> fronts(1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (member_dominates(pop[i], pop[j])) {
        dominated[i].push_back(j);
        ++count[j];
      } else if (member_dominates(pop[j], pop[i])) {
        dominated[j].push_back(i);
        ++count[i];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (count[i] == 0) fronts[0].push_back(i);
  }
  for (std::size_t f = 0; f < fronts.size() && !fronts[f].empty(); ++f) {
    std::vector<std::size_t> next;
    for (std::size_t i : fronts[f]) {
      pop[i].rank = static_cast<int>(f);
      for (std::size_t j : dominated[i]) {
        if (--count[j] == 0) next.push_back(j);
      }
    }
    std::sort(next.begin(), next.end());
    if (!next.empty()) fronts.push_back(std::move(next));
  }
  return fronts;
}

void assign_crowding(std::vector<Member>& pop, const std::vector<std::size_t>& front) {
  for (std::size_t i : front) pop[i].crowding = 0.0;
  if (front.size() <= 2) {
    for (std::size_t i : front) pop[i].crowding = std::numeric_limits<double>::infinity();
    return;
  }
  for (int m = 0; m < 2; ++m) {
    auto val = [&](std::size_t i) { return m == 0 ? pop[i].rec->obj.first : pop[i].rec->obj.second; };
    std::vector<std::size_t> order = front;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val(a) < val(b); });
    const double range = val(order.back()) - val(order.front());
    pop[order.front()].crowding = std::numeric_limits<double>::infinity();
    pop[order.back()].crowding = std::numeric_limits<double>::infinity();
    if (range <= 0.0) continue;
    for (std::size_t t = 1; t + 1 < order.size(); ++t) {
      pop[order[t]].crowding += (val(order[t + 1]) - val(order[t - 1])) / range;
    }
  }
}

/// Feasible, mutually nondominated records with unique objective pairs.
class ExternalArchive {
 public:
  void insert(const RecordPtr& r) {
    if (!r->feasible()) return;
    for (const auto& e : items_) {
      if (e->obj == r->obj || dominates(e->obj, r->obj)) return;
    }
    std::erase_if(items_, [&](const RecordPtr& e) { return dominates(r->obj, e->obj); });
    items_.push_back(r);
  }

  std::vector<ArchiveEntry> entries() const {
    std::vector<RecordPtr> sorted = items_;
    std::stable_sort(sorted.begin(), sorted.end(), [](const RecordPtr& a, const RecordPtr& b) {
      return a->obj.first != b->obj.first ? a->obj.first > b->obj.first : a->obj.second < b->obj.second;
    });
    std::vector<ArchiveEntry> out;
    for (const auto& r : sorted) {
      ArchiveEntry e;
      e.epidemic_effect = r->obj.first;
      e.treatment_effect = r->obj.second;
      e.genome = r->genome;
      e.allocation = r->allocation;
      e.solutions = r->solutions;
      e.plan = r->plan;
      out.push_back(std::move(e));
    }
    return out;
  }

 private:
  std::vector<RecordPtr> items_;
};

ParetoArchive finish_archive(const RunConfig& config, const Evaluator& ev, const ExternalArchive& ext) {
  ParetoArchive a;
  a.config = config;
  a.evaluations = ev.evaluations();
  a.unique_evaluations = ev.unique_evaluations();
  a.wall_seconds = ev.elapsed();
  a.entries = ext.entries();
  return a;
}

}  // namespace

ParetoArchive nsga2_run(const ProcurementInstance& instance, const RunConfig& config) {
  validate_config(config);
  const auto problem = make_problem(instance, config);
  Rng rng(config.seed);
  Variation var(*problem, config, rng);
  Evaluator ev(*problem, config);
  const auto n = static_cast<std::size_t>(config.population);

  std::vector<std::vector<double>> genomes;
  for (std::size_t i = 0; i < n; ++i) genomes.push_back(var.random_genome());
  std::vector<Member> pop;
  {
    auto recs = ev.evaluate(genomes);
    for (std::size_t i = 0; i < recs.size(); ++i) pop.push_back({recs[i]->genome, recs[i]});
  }
  auto fronts = nondominated_sort(pop);
  for (const auto& f : fronts) assign_crowding(pop, f);

  auto tournament = [&]() -> const Member& {
    const Member& a = pop[uniform_index(rng, pop.size())];
    const Member& b = pop[uniform_index(rng, pop.size())];
    if (a.rank != b.rank) return a.rank < b.rank ? a : b;
    return b.crowding > a.crowding ? b : a;
  };

  while (!pop.empty() && !ev.exhausted()) {
    std::vector<std::vector<double>> kids;
    while (kids.size() < n) {
      const Member& p1 = tournament();
      const Member& p2 = tournament();
      auto [c1, c2] = var.crossover(p1.genome, p2.genome);
      var.mutate(c1);
      var.mutate(c2);
      kids.push_back(std::move(c1));
      if (kids.size() < n) kids.push_back(std::move(c2));
    }
    const auto recs = ev.evaluate(kids);
    if (recs.empty()) break;
    std::vector<Member> merged = pop;
    for (const auto& r : recs) merged.push_back({r->genome, r});
    fronts = nondominated_sort(merged);
    std::vector<Member> next;
    for (const auto& f : fronts) {
      assign_crowding(merged, f);
      if (next.size() + f.size() <= n) {
        for (std::size_t i : f) next.push_back(merged[i]);
        continue;
      }
      std::vector<std::size_t> order = f;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return merged[a].crowding > merged[b].crowding; });
      for (std::size_t t = 0; next.size() < n; ++t) next.push_back(merged[order[t]]);
      break;
    }
    pop = std::move(next);
    fronts = nondominated_sort(pop);
    for (const auto& f : fronts) assign_crowding(pop, f);
  }

  ExternalArchive ext;
  for (const auto& m : pop) {
    if (m.rank == 0) ext.insert(m.rec);
  }
  return finish_archive(config, ev, ext);
}

ParetoArchive moead_run(const ProcurementInstance& instance, const RunConfig& config) {
  validate_config(config);
  const auto problem = make_problem(instance, config);
  Rng rng(config.seed);
  Variation var(*problem, config, rng);
  Evaluator ev(*problem, config);

  const auto h = static_cast<std::size_t>(config.weight_count > 0 ? config.weight_count : config.population);
  std::size_t t_size = config.neighborhood > 0
                           ? static_cast<std::size_t>(config.neighborhood)
                           : std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(h))));
  t_size = std::min(t_size, h);

  std::vector<std::array<double, 2>> weights(h);
  for (std::size_t k = 0; k < h; ++k) {
    const double a = h == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(h - 1);
    weights[k] = {a, 1.0 - a};
  }
  std::vector<std::vector<std::size_t>> neigh(h);
  for (std::size_t k = 0; k < h; ++k) {
    std::vector<std::size_t> idx(h);
    std::iota(idx.begin(), idx.end(), 0);
    auto dist = [&](std::size_t l) {
      const double d0 = weights[k][0] - weights[l][0], d1 = weights[k][1] - weights[l][1];
      return d0 * d0 + d1 * d1;
    };
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return dist(a) < dist(b); });
    idx.resize(t_size);
    neigh[k] = std::move(idx);
  }

  std::vector<std::vector<double>> genomes;
  for (std::size_t k = 0; k < h; ++k) genomes.push_back(var.random_genome());
  std::vector<Member> pop;
  ExternalArchive ext;

  std::optional<Objectives> ideal_feasible;
  std::optional<Objectives> ideal_all;
  auto update_ideal = [&](const EvalRecord& r) {
    auto bump = [&](std::optional<Objectives>& z) {
      if (!z) {
        z = r.obj;
      } else {
        z->first = std::max(z->first, r.obj.first);
        z->second = std::max(z->second, r.obj.second);
      }
    };
    bump(ideal_all);
    if (r.feasible()) bump(ideal_feasible);
  };
  auto scalar = [&](const EvalRecord& r, std::size_t k) {
    const Objectives z = ideal_feasible ? *ideal_feasible : *ideal_all;
    const double w0 = std::max(weights[k][0], 1e-6), w1 = std::max(weights[k][1], 1e-6);
    const double g0 = w0 * (z.first - r.obj.first) / std::max(std::abs(z.first), 1e-12);
    const double g1 = w1 * (z.second - r.obj.second) / std::max(std::abs(z.second), 1e-12);
    return std::max(g0, g1) + r.violation;
  };

  {
    const auto recs = ev.evaluate(genomes);
    for (const auto& r : recs) {
      pop.push_back({r->genome, r});
      update_ideal(*r);
      ext.insert(r);
    }
  }
  // A limit hit during initialization leaves subproblems without members;
  // fill them from what was evaluated so every index stays valid.
  if (!pop.empty()) {
    for (std::size_t k = pop.size(); k < h; ++k) pop.push_back(pop[k % pop.size()]);
  }

  while (!pop.empty() && !ev.exhausted()) {
    std::vector<std::vector<double>> kids(h);
    for (std::size_t k = 0; k < h; ++k) {
      const auto& nb = neigh[k];
      const std::size_t a = nb[uniform_index(rng, nb.size())];
      std::size_t b = a;
      if (nb.size() > 1) {
        while (b == a) b = nb[uniform_index(rng, nb.size())];
      }
      auto [c1, c2] = var.crossover(pop[a].genome, pop[b].genome);
      var.mutate(c1);
      kids[k] = std::move(c1);
    }
    const auto recs = ev.evaluate(kids);
    if (recs.empty()) break;
    for (std::size_t k = 0; k < recs.size(); ++k) {
      const auto& child = recs[k];
      update_ideal(*child);
      ext.insert(child);
      std::vector<std::size_t> order = neigh[k];
      for (std::size_t s = order.size(); s > 1; --s) std::swap(order[s - 1], order[uniform_index(rng, s)]);
      int replaced = 0;
      for (std::size_t l : order) {
        if (scalar(*child, l) < scalar(*pop[l].rec, l)) {
          pop[l] = {child->genome, child};
          if (++replaced >= 2) break;
        }
      }
    }
  }
  return finish_archive(config, ev, ext);
}

ParetoArchive run_moea(const ProcurementInstance& instance, const RunConfig& config) {
  return config.algorithm == Algorithm::nsga2 ? nsga2_run(instance, config) : moead_run(instance, config);
}

// ---------------------------------------------------------------------------
// Archive files

namespace {

json config_to_json(const RunConfig& c) {
  return json{{"algorithm", to_string(c.algorithm)},
              {"space", to_string(c.space)},
              {"population", c.population},
              {"crossover_rate", c.crossover_rate},
              {"mutation_rate", c.mutation_rate},
              {"sbx_eta", c.sbx_eta},
              {"weight_count", c.weight_count},
              {"neighborhood", c.neighborhood},
              {"time_limit_seconds", c.time_limit_seconds},
              {"max_evaluations", c.max_evaluations},
              {"seed", c.seed},
              {"tabu",
               {{"neighborhood_size", c.tabu.neighborhood_size},
                {"tabu_length", c.tabu.tabu_length},
                {"max_iterations", c.tabu.max_iterations}}}};
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
  c.space = parse_space(j.at("space").get<std::string>());
  c.population = j.at("population").get<int>();
  c.crossover_rate = j.at("crossover_rate").get<double>();
  c.mutation_rate = j.at("mutation_rate").get<double>();
  c.sbx_eta = j.at("sbx_eta").get<double>();
  c.weight_count = j.at("weight_count").get<int>();
  c.neighborhood = j.at("neighborhood").get<int>();
  c.time_limit_seconds = j.at("time_limit_seconds").get<double>();
  c.max_evaluations = j.at("max_evaluations").get<std::int64_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto& t = j.at("tabu");
  c.tabu.neighborhood_size = t.at("neighborhood_size").get<int>();
  c.tabu.tabu_length = t.at("tabu_length").get<int>();
  c.tabu.max_iterations = t.at("max_iterations").get<int>();
  return c;
}

}  // namespace

std::string archive_to_json(const ParetoArchive& a) {
  json entries = json::array();
  for (const auto& e : a.entries) {
    json je{{"objectives", {e.epidemic_effect, e.treatment_effect}}, {"genome", e.genome}};
    if (e.allocation) {
      je["allocation"] = e.allocation->y;
      json sols = json::array();
      for (const auto& s : e.solutions) sols.push_back(s.counts);
      je["solutions"] = std::move(sols);
    }
    if (e.plan) je["plan"] = e.plan->x;
    entries.push_back(std::move(je));
  }
  json j{{"config", config_to_json(a.config)},
         {"evaluations", a.evaluations},
         {"unique_evaluations", a.unique_evaluations},
         {"entries", std::move(entries)}};
  return j.dump(1) + "\n";
}

ParetoArchive archive_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("archive: ") + e.what());
  }
  try {
    ParetoArchive a;
    a.config = config_from_json(j.at("config"));
    a.evaluations = j.at("evaluations").get<std::int64_t>();
    a.unique_evaluations = j.at("unique_evaluations").get<std::int64_t>();
    for (const auto& je : j.at("entries")) {
      ArchiveEntry e;
      const auto& obj = je.at("objectives");
      if (!obj.is_array() || obj.size() != 2) throw ParseError("archive: objectives must be a pair");
      e.epidemic_effect = obj[0].get<double>();
      e.treatment_effect = obj[1].get<double>();
      e.genome = je.at("genome").get<std::vector<double>>();
      if (je.contains("allocation")) {
        e.allocation = BudgetAllocation{je.at("allocation").get<std::vector<Money>>()};
        for (const auto& s : je.at("solutions")) {
          e.solutions.push_back(SubproblemSolution{s.get<std::vector<std::vector<Count>>>()});
        }
      }
      if (je.contains("plan")) e.plan = PurchasePlan{je.at("plan").get<std::vector<Count>>()};
      a.entries.push_back(std::move(e));
    }
    return a;
  } catch (const json::exception& e) {
    throw ParseError(std::string("archive: ") + e.what());
  }
}

void save_archive(const ParetoArchive& archive, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << archive_to_json(archive);
  if (!out) throw Error("failed writing " + path.string());
}

ParetoArchive load_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return archive_from_json(ss.str());
}

}  // namespace procure
