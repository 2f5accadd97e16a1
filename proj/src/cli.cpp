#include "procure/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "procure/bounds.hpp"
#include "procure/instance.hpp"
#include "procure/instancegen.hpp"
#include "procure/metrics.hpp"
#include "procure/moea.hpp"
#include "procure/rng.hpp"
#include "procure/simulation.hpp"
#include "procure/subproblem.hpp"

namespace procure {

namespace {

using json = nlohmann::json;

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("failed writing " + path);
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

/// Accepts either a bare array or an object holding the array under `key`.
template <typename T>
std::vector<T> vector_file(const std::string& path, const char* key) {
  const json j = parse_json_file(path);
  try {
    if (j.is_array()) return j.get<std::vector<T>>();
    return j.at(key).get<std::vector<T>>();
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

double front_hyperarea(const ParetoArchive& a) {
  const auto f = a.front();
  return hyperarea(f);
}

json config_summary(const RunConfig& c) {
  return json{{"algorithm", to_string(c.algorithm)}, {"space", to_string(c.space)},
              {"population", c.population},          {"time_limit_seconds", c.time_limit_seconds},
              {"max_evaluations", c.max_evaluations}, {"seed", c.seed},
              {"threads", c.threads},                 {"tabu_max_iterations", c.tabu.max_iterations}};
}

struct SolveOptions {
  std::string instance;
  std::string output;
  std::string algorithm = "nsga2";
  std::string space = "transformed";
  double time_limit = 0.0;
  std::int64_t max_evals = 0;
  std::uint64_t seed = 1;
  int population = 100;
  int weights = 0;
  int threads = 1;
  int tabu_iterations = 0;
};

RunConfig make_config(const SolveOptions& o) {
  RunConfig c;
  c.algorithm = parse_algorithm(o.algorithm);
  c.space = parse_space(o.space);
  c.population = o.population;
  c.weight_count = o.weights;
  c.time_limit_seconds = o.time_limit;
  c.max_evaluations = o.max_evals;
  c.seed = o.seed;
  c.threads = o.threads;
  c.tabu.max_iterations = o.tabu_iterations;
  return c;
}

void add_solve_flags(CLI::App* cmd, SolveOptions& o) {
  cmd->add_option("--algorithm", o.algorithm, "nsga2 or moead")
      ->check(CLI::IsMember({"nsga2", "moead"}))
      ->capture_default_str();
  cmd->add_option("--space", o.space, "original or transformed")
      ->check(CLI::IsMember({"original", "transformed"}))
      ->capture_default_str();
  cmd->add_option("--time-limit", o.time_limit, "wall-clock limit per run in seconds")->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-evals", o.max_evals, "evaluation limit per run")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
  cmd->add_option("--pop", o.population, "population size")->capture_default_str();
  cmd->add_option("--weights", o.weights, "MOEA/D weight vectors (default: population)");
  cmd->add_option("--threads", o.threads, "evaluation threads")
      ->envname("PROCURE_THREADS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--tabu-iters", o.tabu_iterations, "tabu iterations per subproblem (default 50D)")
      ->check(CLI::NonNegativeNumber);
}

json manifest_json(const std::string& instance_path, const std::string& archive_path, const RunConfig& config,
                   const ParetoArchive& archive, const std::string& started, const std::string& finished) {
  return json{{"instance", instance_path},
              {"archive", archive_path},
              {"config", config_summary(config)},
              {"seed", config.seed},
              {"threads", config.threads},
              {"started_at", started},
              {"finished_at", finished},
              {"wall_seconds", archive.wall_seconds},
              {"evaluations", archive.evaluations},
              {"unique_evaluations", archive.unique_evaluations},
              {"entries", archive.entries.size()},
              {"tool", "procure 0.1.0"}};
}

int cmd_generate(const GenSpec& spec, const std::string& output, std::ostream& out) {
  const auto inst = generate(spec);
  save_instance(inst, output);
  const auto split = supply_split(inst);
  out << json{{"path", output},
              {"diseases", inst.disease_count()},
              {"supplies", inst.supply_count()},
              {"epidemic_supplies", split.epidemic},
              {"common_supplies", split.common},
              {"suspected_cases", inst.epidemic.suspected_cases},
              {"budget_cents", inst.budget_cents}}
             .dump()
      << "\n";
  return kExitOk;
}

int cmd_solve(const SolveOptions& o, std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(o.instance);
  const RunConfig config = make_config(o);
  validate_config(config);
  const std::string started = utc_now();
  err << "solving " << o.instance << " with " << o.algorithm << " (" << o.space << ")\n";
  const auto archive = run_moea(inst, config);
  save_archive(archive, o.output);
  write_file(o.output + ".manifest.json",
             manifest_json(o.instance, o.output, config, archive, started, utc_now()).dump(1) + "\n");
  out << json{{"archive", o.output},
              {"hyperarea", front_hyperarea(archive)},
              {"entries", archive.entries.size()},
              {"evaluations", archive.evaluations}}
             .dump()
      << "\n";
  return kExitOk;
}

int cmd_evaluate(const std::string& instance_path, const std::string& plan_path, const std::string& alloc_path,
                 const std::string& trace_path, std::uint64_t seed, std::ostream& out) {
  const auto inst = load_instance(instance_path);
  PurchasePlan plan;
  json summary;
  if (!alloc_path.empty()) {
    const auto division = divide(inst);
    const auto yb = y_bounds(inst, division);
    const auto xb = x_bounds(inst);
    TabuConfig tabu;
    tabu.seed = seed;
    const auto ev =
        evaluate_allocation(inst, division, yb, BudgetAllocation{vector_file<Money>(alloc_path, "allocation")}, tabu);
    plan = decode_plan(inst, division, xb, ev.solutions);
    summary["decoded_plan"] = plan.x;
    summary["top_up_rounds"] = top_up_plan(inst, plan);
    json sols = json::array();
    for (const auto& s : ev.solutions) sols.push_back(s.counts);
    summary["allocation"] = ev.allocation.y;
    summary["subproblem_effects"] = {ev.epidemic_effect, ev.treatment_effect};
    summary["solutions"] = std::move(sols);
  } else {
    plan.x = vector_file<Count>(plan_path, "plan");
  }

  std::ofstream trace_out;
  TraceSink sink;
  if (!trace_path.empty()) {
    trace_out.open(trace_path);
    if (!trace_out) throw Error("cannot write " + trace_path);
    trace_out << "time_hours\tdisease\tprofile\ttreated\tconsumed\teffect\n";
    sink = [&](const TraceRecord& r) {
      std::string consumed;
      for (const auto& [supply, units] : r.consumed) {
        if (!consumed.empty()) consumed += ',';
        consumed += "S" + std::to_string(supply) + ":" + std::to_string(units);
      }
      trace_out << r.time_hours << '\t' << r.disease << '\t' << r.profile << '\t' << (r.treated ? 1 : 0) << '\t'
                << (consumed.empty() ? "-" : consumed) << '\t' << r.effect << '\n';
    };
  }
  const auto ev = evaluate_original(inst, plan, sink);
  const auto fr = check_feasibility(inst, plan);
  summary["plan"] = plan.x;
  summary["epidemic_effect"] = ev.epidemic_effect;
  summary["treatment_effect"] = ev.treatment_effect;
  summary["disease_effects"] = ev.disease_effects;
  summary["epidemic_treatable"] = ev.epidemic_treatable;
  summary["disease_treatable"] = ev.disease_treatable;
  summary["cost_cents"] = ev.cost_spent;
  summary["feasible"] = fr.feasible();
  summary["budget_excess"] = fr.budget_excess;
  summary["untreated_lower_cases"] = fr.untreated_lower_cases;
  summary["untreated_suspected"] = fr.untreated_suspected;
  out << summary.dump() << "\n";
  return kExitOk;
}

Point2 parse_ref(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ParseError("--ref expects X,Y");
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw ParseError("--ref expects two numbers, got '" + text + "'");
  }
}

int cmd_compare(const std::string& a_path, const std::string& b_path, const std::string& ref_text, std::ostream& out) {
  const auto a = load_archive(a_path);
  const auto b = load_archive(b_path);
  if (a.entries.empty()) throw Error(a_path + ": archive is empty");
  if (b.entries.empty()) throw Error(b_path + ": archive is empty");
  const Point2 ref = parse_ref(ref_text);
  const auto fa = a.front(), fb = b.front();
  out << json{{"hyperarea_a", hyperarea(fa, ref)},
              {"hyperarea_b", hyperarea(fb, ref)},
              {"cov_ab", coverage(fb, fa)},
              {"cov_ba", coverage(fa, fb)}}
             .dump()
      << "\n";
  return kExitOk;
}

struct OracleOptions {
  std::string instance;
  int profile = 0;
  Money budget = -1;
  int runs = 50;
  std::uint64_t seed = 1;
  double max_space = 1e8;
  std::string start = "cheapest";
  int iterations = 0;
};

int cmd_oracle(const OracleOptions& o, std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(o.instance);
  if (o.profile < 0 || static_cast<std::size_t>(o.profile) >= inst.profile_count()) {
    throw Error("profile " + std::to_string(o.profile) + " does not exist");
  }
  const auto p = static_cast<std::size_t>(o.profile);
  const auto division = divide(inst);
  const auto yb = y_bounds(inst, division);
  const Money budget = o.budget >= 0 ? o.budget : yb.y_upper[p];
  if (budget < yb.y_lower[p]) {
    throw Error("budget " + std::to_string(budget) + " is below the profile's lower bound " +
                std::to_string(yb.y_lower[p]));
  }
  const auto spec = make_subproblem(inst, division, p, budget);
  const auto oracle = oracle_solve(spec, o.max_space);
  err << "oracle visited " << oracle.visited << " of " << oracle.space_size << " points\n";
  const SubproblemSolution start =
      o.start == "greedy" ? greedy_improve(spec, division.profiles[p].cheapest) : division.profiles[p].cheapest;

  const double tol = 1e-9 * std::max(1.0, std::abs(oracle.effect));
  json runs = json::array();
  int hits = 0;
  std::vector<int> hit_iters;
  for (int r = 0; r < o.runs; ++r) {
    TabuConfig cfg;
    cfg.seed = derive_seed(o.seed, static_cast<std::uint64_t>(r));
    cfg.max_iterations = o.iterations;
    const auto res = tabu_search(spec, start, cfg);
    const bool ok = res.effect >= oracle.effect - tol;
    if (ok) {
      ++hits;
      hit_iters.push_back(res.best_iteration);
    }
    runs.push_back({{"run", r}, {"effect", res.effect}, {"best_iteration", res.best_iteration}, {"optimal", ok}});
  }
  double median = 0.0;
  if (!hit_iters.empty()) {
    std::sort(hit_iters.begin(), hit_iters.end());
    const std::size_t n = hit_iters.size();
    median = n % 2 ? hit_iters[n / 2] : 0.5 * (hit_iters[n / 2 - 1] + hit_iters[n / 2]);
  }
  out << json{{"profile", o.profile},
              {"budget_cents", budget},
              {"dimension", spec.dimension()},
              {"space_size", oracle.space_size},
              {"optimum_effect", oracle.effect},
              {"optimum_cost", oracle.cost},
              {"success_rate", static_cast<double>(hits) / std::max(1, o.runs)},
              {"median_iterations", median},
              {"runs", std::move(runs)}}
             .dump()
      << "\n";
  return kExitOk;
}

int cmd_report(const std::string& instance_path, std::ostream& out) {
  const auto inst = load_instance(instance_path);
  const auto xb = x_bounds(inst);
  const auto division = divide(inst);
  const auto yb = y_bounds(inst, division);
  const auto rep = complexity_report(inst, xb, yb);
  const auto split = supply_split(inst);
  out << json{{"diseases", inst.disease_count()},
              {"supplies", inst.supply_count()},
              {"epidemic_supplies", split.epidemic},
              {"common_supplies", split.common},
              {"suspected_cases", inst.epidemic.suspected_cases},
              {"budget_cents", inst.budget_cents},
              {"mandatory_cost", mandatory_cost(inst, xb)},
              {"remaining_budget", yb.remaining_budget},
              {"y_lower", yb.y_lower},
              {"y_upper", yb.y_upper},
              {"feasible", yb.feasible()},
              {"deficit", std::max<Money>(0, yb.deficit())},
              {"complexity",
               {{"log_n", rep.log_n},
                {"log_of", rep.log_of},
                {"log_n_prime", rep.log_n_prime},
                {"log_n_i", rep.log_n_i},
                {"log_of_i", rep.log_of_i},
                {"log_transformed_total", rep.log_transformed_total},
                {"ratio_exact", rep.ratio_exact},
                {"x_hat", rep.averages.x_hat},
                {"y_hat", rep.averages.y_hat},
                {"z_hat", rep.averages.z_hat},
                {"phi_hat", rep.averages.phi_hat},
                {"cases", rep.averages.cases},
                {"ratio_averaged", rep.ratio_averaged}}}}
             .dump()
      << "\n";
  return kExitOk;
}

int cmd_bench(const std::vector<std::string>& instances, int seeds, const SolveOptions& base,
              const std::string& output, const std::string& archive_dir, std::ostream& out, std::ostream& err) {
  std::ostringstream csv;
  csv << "instance,algorithm,space,seed,hyperarea,entries,evaluations,wall_seconds\n";
  int runs = 0;
  for (const auto& path : instances) {
    const auto inst = load_instance(path);
    for (const char* algorithm : {"nsga2", "moead"}) {
      for (const char* space : {"original", "transformed"}) {
        for (int s = 0; s < seeds; ++s) {
          SolveOptions o = base;
          o.algorithm = algorithm;
          o.space = space;
          o.seed = base.seed + static_cast<std::uint64_t>(s);
          const RunConfig config = make_config(o);
          validate_config(config);
          err << "bench " << path << " " << algorithm << " " << space << " seed " << o.seed << "\n";
          const auto archive = run_moea(inst, config);
          if (!archive_dir.empty()) {
            const std::string stem = std::filesystem::path(path).stem().string();
            save_archive(archive, (std::filesystem::path(archive_dir) /
                                   (stem + "_" + algorithm + "_" + space + "_" + std::to_string(o.seed) + ".json"))
                                      .string());
          }
          csv << path << ',' << algorithm << ',' << space << ',' << o.seed << ',' << std::setprecision(17)
              << front_hyperarea(archive) << ',' << archive.entries.size() << ',' << archive.evaluations << ','
              << archive.wall_seconds << '\n';
          ++runs;
        }
      }
    }
  }
  write_file(output, csv.str());
  out << json{{"csv", output}, {"runs", runs}}.dump() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Medical supplies procurement: transform-and-divide multiobjective toolkit", "procure"};
  app.require_subcommand(1);

  GenSpec gen;
  std::string gen_out;
  auto* g = app.add_subcommand("generate", "write a synthetic instance");
  g->add_option("--m", gen.diseases, "number of diseases")->capture_default_str();
  g->add_option("--supplies", gen.supplies, "target number of supplies")->capture_default_str();
  g->add_option("--cases", gen.cases, "total expected cases")->capture_default_str();
  g->add_option("--avg-items", gen.avg_items, "mean treatment items per disease")->capture_default_str();
  g->add_option("--avg-alts", gen.avg_alternatives, "mean alternatives per item")->capture_default_str();
  g->add_option("--beta", gen.beta, "budget slack factor (>= 1)")->capture_default_str();
  g->add_option("--overlap", gen.overlap, "supply reuse probability")->capture_default_str();
  g->add_option("--fill", gen.inventory_fill, "inventory fill fraction")->capture_default_str();
  g->add_option("--seed", gen.seed, "random seed")->capture_default_str();
  g->add_option("-o,--output", gen_out, "instance path")->required();

  SolveOptions solve;
  auto* s = app.add_subcommand("solve", "run an evolutionary engine and write an archive");
  s->add_option("-i,--instance", solve.instance, "instance path")->required()->check(CLI::ExistingFile);
  s->add_option("-o,--output", solve.output, "archive path")->required();
  add_solve_flags(s, solve);

  std::string ev_instance, ev_plan, ev_alloc, ev_trace;
  std::uint64_t ev_seed = 1;
  auto* e = app.add_subcommand("evaluate", "simulate a purchase plan or a budget allocation");
  e->add_option("-i,--instance", ev_instance, "instance path")->required()->check(CLI::ExistingFile);
  auto* plan_opt = e->add_option("--plan", ev_plan, "JSON array of purchase quantities")->check(CLI::ExistingFile);
  auto* alloc_opt =
      e->add_option("--allocation", ev_alloc, "JSON array of budgets per profile")->check(CLI::ExistingFile);
  plan_opt->excludes(alloc_opt);
  e->add_option("--trace", ev_trace, "write one TSV line per treatment attempt");
  e->add_option("--seed", ev_seed, "tabu seed for --allocation")->capture_default_str();

  std::string cmp_a, cmp_b, cmp_ref = "0,0";
  auto* c = app.add_subcommand("compare", "hyperarea and coverage of two archives");
  c->add_option("a", cmp_a, "first archive")->required()->check(CLI::ExistingFile);
  c->add_option("b", cmp_b, "second archive")->required()->check(CLI::ExistingFile);
  c->add_option("--ref", cmp_ref, "reference point X,Y")->capture_default_str();

  OracleOptions orc;
  auto* o = app.add_subcommand("oracle", "compare tabu search with exhaustive enumeration");
  o->add_option("-i,--instance", orc.instance, "instance path")->required()->check(CLI::ExistingFile);
  o->add_option("--profile", orc.profile, "0 for epidemic control, i for disease i")->capture_default_str();
  o->add_option("--budget", orc.budget, "subproblem budget in cents (default: upper bound)");
  o->add_option("--runs", orc.runs, "tabu runs")->check(CLI::PositiveNumber)->capture_default_str();
  o->add_option("--seed", orc.seed, "random seed")->capture_default_str();
  o->add_option("--max-space", orc.max_space, "largest search space to enumerate")->capture_default_str();
  o->add_option("--start", orc.start, "cheapest or greedy")
      ->check(CLI::IsMember({"cheapest", "greedy"}))
      ->capture_default_str();
  o->add_option("--iterations", orc.iterations, "tabu iterations (default 50D)")->check(CLI::NonNegativeNumber);

  std::string rep_instance;
  auto* r = app.add_subcommand("report", "bounds and complexity figures of an instance");
  r->add_option("-i,--instance", rep_instance, "instance path")->required()->check(CLI::ExistingFile);

  std::vector<std::string> bench_instances;
  int bench_seeds = 3;
  std::string bench_out, bench_archives;
  SolveOptions bench;
  auto* b = app.add_subcommand("bench", "both algorithms in both spaces over several seeds");
  b->add_option("-i,--instance", bench_instances, "instance paths")->required()->check(CLI::ExistingFile);
  b->add_option("--seeds", bench_seeds, "seeds per configuration")->check(CLI::PositiveNumber)->capture_default_str();
  b->add_option("-o,--output", bench_out, "CSV path")->required();
  b->add_option("--archive-dir", bench_archives, "also save every archive here")->check(CLI::ExistingDirectory);
  add_solve_flags(b, bench);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*g) return cmd_generate(gen, gen_out, out);
    if (*s) {
      if (solve.time_limit == 0.0 && solve.max_evals == 0) {
        err << "error: solve needs --time-limit or --max-evals\n";
        return kExitUsage;
      }
      return cmd_solve(solve, out, err);
    }
    if (*e) {
      if (ev_plan.empty() && ev_alloc.empty()) {
        err << "error: evaluate needs --plan or --allocation\n";
        return kExitUsage;
      }
      return cmd_evaluate(ev_instance, ev_plan, ev_alloc, ev_trace, ev_seed, out);
    }
    if (*c) return cmd_compare(cmp_a, cmp_b, cmp_ref, out);
    if (*o) return cmd_oracle(orc, out, err);
    if (*r) return cmd_report(rep_instance, out);
    if (*b) {
      if (bench.time_limit == 0.0 && bench.max_evals == 0) {
        err << "error: bench needs --time-limit or --max-evals\n";
        return kExitUsage;
      }
      return cmd_bench(bench_instances, bench_seeds, bench, bench_out, bench_archives, out, err);
    }
  } catch (const InfeasibleError& ex) {
    err << "infeasible: " << ex.what() << " (deficit " << ex.deficit << " cents)\n";
    return kExitDomain;
  } catch (const OracleTooLargeError& ex) {
    err << "refused: " << ex.what() << "\n";
    return kExitDomain;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace procure
