#include "idbpd/app/commands.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <thread>

#include "idbpd/baselines.hpp"
#include "idbpd/metrics.hpp"
#include "idbpd/projection.hpp"

namespace idbpd::app {

using nlohmann::json;

namespace {

template <typename Config>
void cap_budget(Config& c, std::optional<std::uint64_t> budget) {
  if (!budget) return;
  c.max_oracle_calls = c.max_oracle_calls ? std::min(*c.max_oracle_calls, *budget) : *budget;
}

}  // namespace

RunOutcome execute_run(const RunConfig& config, const BuiltProblem& built,
                       std::optional<std::uint64_t> budget) {
  RunOutcome out;
  json extra = json::object();
  std::optional<std::string> abort_reason;
  std::optional<long> abort_iteration;
  try {
    if (const auto* spec = std::get_if<IdbpdSpec>(&config.method)) {
      SolverConfig c = spec->solver;
      c.x0 = built.x0;
      cap_budget(c, budget);
      out.trace = solve(*built.problem, c);
    } else if (const auto* gdma = std::get_if<GdmaConfig>(&config.method)) {
      GdmaConfig c = *gdma;
      cap_budget(c, budget);
      out.trace = gdma_solve(*built.problem, c, built.x0);
      extra["rho"] = c.rho;
    } else {
      DiscretizationConfig c = std::get<DiscretizationConfig>(config.method);
      cap_budget(c, budget);
      DiscretizationResult res = adaptive_discretization_solve(*built.problem, c, built.x0);
      out.trace = std::move(res.trace);
      extra["rounds"] = res.rounds;
      extra["converged"] = res.converged;
      extra["active_set_sizes"] = res.active_set_sizes;
    }
  } catch (const SolveAborted& e) {
    spdlog::warn("{}: numeric abort at iteration {}: {}", config.name, e.iteration(), e.what());
    out.trace = e.partial();
    out.aborted = true;
    abort_reason = e.what();
    abort_iteration = e.iteration();
  }

  out.reports = evaluate_trace(out.trace, *built.problem, config.eval_steps);
  if (!out.trace.entries.empty()) {
    out.summary = summarize(out.trace, out.reports);
  } else {
    out.summary.method = out.trace.method;
    out.summary.calls = out.trace.calls;
  }
  out.summary.name = config.name;
  out.summary.config_hash = config_hash(config.document);
  out.summary.threshold_r = built.r;
  if (built.kkt) extra["reference_kkt"] = {{"lambda", built.kkt->lambda},
                                           {"x", std::vector<double>(built.kkt->x.begin(), built.kkt->x.end())}};
  if (budget) extra["oracle_budget"] = *budget;
  out.summary.extra = std::move(extra);
  if (out.aborted) {
    out.summary.status = "aborted";
    out.summary.abort_reason = abort_reason;
    out.summary.abort_iteration = abort_iteration;
  }
  return out;
}

void write_run_outputs(const std::filesystem::path& dir, const RunOutcome& outcome) {
  std::filesystem::create_directories(dir);
  std::ostringstream csv;
  write_trace_csv(csv, trace_rows(outcome.trace, outcome.reports));
  write_text_file(dir / "trace.csv", csv.str());
  write_text_file(dir / "summary.json", to_json(outcome.summary).dump(2) + "\n");
}

int cmd_run(const std::filesystem::path& config_path, const Overrides& overrides) {
  RunConfig config;
  BuiltProblem built;
  try {
    config = load_run_config(config_path, overrides);
    built = build_problem(config);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const NumericError& e) {
    spdlog::error("problem construction failed: {}", e.what());
    return kExitNumeric;
  }

  spdlog::info("run '{}' ({}) -> {}", config.name, config.method_name(), config.output.string());
  RunOutcome outcome;
  try {
    outcome = execute_run(config, built);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const NumericError& e) {
    spdlog::error("evaluation failed: {}", e.what());
    return kExitNumeric;
  }
  write_run_outputs(config.output, outcome);
  const KktReport& best = outcome.summary.best;
  spdlog::info("best k={} stationarity={:.3e} infeasibility={:.3e} slackness={:.3e}",
               outcome.summary.best_k, best.stationarity, best.infeasibility, best.slackness);
  return outcome.aborted ? kExitNumeric : kExitOk;
}

namespace {

struct CompareSlot {
  const RunConfig* config = nullptr;
  std::shared_ptr<const BuiltProblem> built;
  std::optional<RunOutcome> outcome;
  std::string error;
};

void run_slot(CompareSlot& slot, std::optional<std::uint64_t> budget) {
  try {
    slot.outcome = execute_run(*slot.config, *slot.built, budget);
    write_run_outputs(slot.config->output, *slot.outcome);
  } catch (const std::exception& e) {
    slot.error = e.what();
  }
}

std::vector<Series> panel(const std::vector<CompareSlot>& slots, double (*pick)(const KktReport&)) {
  std::vector<Series> out;
  for (const CompareSlot& s : slots) {
    if (!s.outcome || s.outcome->aborted || s.outcome->trace.entries.empty()) continue;
    Series series;
    series.name = s.config->name;
    for (std::size_t i = 0; i < s.outcome->reports.size(); ++i) {
      series.x.push_back(static_cast<double>(s.outcome->trace.entries[i].k));
      series.y.push_back(pick(s.outcome->reports[i]));
    }
    out.push_back(std::move(series));
  }
  return out;
}

}  // namespace

int cmd_compare(const std::filesystem::path& config_path, const Overrides& overrides) {
  CompareConfig config;
  try {
    config = load_compare_config(config_path, overrides);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  }

  std::vector<CompareSlot> slots(config.runs.size());
  std::map<std::string, std::shared_ptr<const BuiltProblem>> cache;
  for (std::size_t i = 0; i < config.runs.size(); ++i) {
    const RunConfig& rc = config.runs[i];
    slots[i].config = &rc;
    json key = {{"problem", rc.document.value("problem", json())},
                {"seed", rc.seed},
                {"x0", rc.document.value("x0", json())}};
    auto& cached = cache[key.dump()];
    if (!cached) {
      try {
        cached = std::make_shared<const BuiltProblem>(build_problem(rc));
      } catch (const std::exception& e) {
        slots[i].error = e.what();
        spdlog::error("{}: {}", rc.name, e.what());
        continue;
      }
    }
    slots[i].built = cached;
  }

  std::optional<std::uint64_t> budget;
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].built) continue;
    if (config.match_budget_to && slots[i].config->name == *config.match_budget_to) {
      run_slot(slots[i], std::nullopt);
      if (slots[i].outcome) budget = slots[i].outcome->summary.calls.total();
      spdlog::info("budget matched to '{}': {} oracle calls", slots[i].config->name,
                   budget.value_or(0));
    } else {
      pending.push_back(i);
    }
  }

  if (config.parallel) {
    std::vector<std::thread> workers;
    for (std::size_t i : pending) workers.emplace_back(run_slot, std::ref(slots[i]), budget);
    for (auto& t : workers) t.join();
  } else {
    for (std::size_t i : pending) run_slot(slots[i], budget);
  }

  json runs = json::array();
  std::size_t survivors = 0;
  for (const CompareSlot& s : slots) {
    json entry = {{"name", s.config->name}, {"method", s.config->method_name()}};
    if (s.outcome) {
      entry["status"] = s.outcome->summary.status;
      entry["summary"] = to_json(s.outcome->summary);
      if (!s.outcome->aborted) ++survivors;
    } else {
      entry["status"] = "failed";
      entry["error"] = s.error;
      spdlog::error("{}: {}", s.config->name, s.error);
    }
    runs.push_back(std::move(entry));
  }

  const std::string hash = config_hash(config.document);
  std::filesystem::create_directories(config.output);
  json comparison = {{"config_hash", hash}, {"runs", runs}, {"survivors", survivors}};
  if (budget) comparison["oracle_budget"] = *budget;
  write_text_file(config.output / "comparison.json", comparison.dump(2) + "\n");

  const std::vector<std::pair<std::string, double (*)(const KktReport&)>> panels = {
      {"stationarity", [](const KktReport& r) { return r.stationarity; }},
      {"infeasibility", [](const KktReport& r) { return r.infeasibility; }},
      {"slackness", [](const KktReport& r) { return r.slackness; }},
      {"objective", [](const KktReport& r) { return r.f_value; }},
  };
  for (const auto& [name, pick] : panels) {
    const std::vector<Series> series = panel(slots, pick);
    std::ostringstream svg, csv;
    write_panel_svg(svg, name, "iteration k", series, hash);
    write_panel_csv(csv, series);
    write_text_file(config.output / (name + ".svg"), svg.str());
    write_text_file(config.output / (name + ".csv"), csv.str());
  }

  if (survivors == 0) {
    spdlog::error("no run completed");
    return kExitNumeric;
  }
  if (survivors == 1) spdlog::warn("only one run completed; panels hold a single finished series");
  return kExitOk;
}

namespace {

Vector random_in(const FeasibleSet& set, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  if (set.kind() == FeasibleSet::Kind::kSimplex) {
    std::exponential_distribution<double> expo(1.0);
    Vector v(set.dim());
    for (Index i = 0; i < v.size(); ++i) v[i] = expo(rng);
    return v / v.sum();
  }
  Vector v(set.dim());
  for (Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  return project(set.center_point() + v, set);
}

}  // namespace

GradcheckReport gradcheck_problem(const Problem& problem, const Vector& x0, std::uint64_t seed,
                                  int points, int eval_steps) {
  constexpr double kStep = 1e-5;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  GradcheckReport report;
  auto record = [&](const std::string& name, double err) {
    for (auto& e : report.entries)
      if (e.oracle == name) {
        e.error = std::max(e.error, err);
        report.max_error = std::max(report.max_error, err);
        return;
      }
    report.entries.push_back({name, err});
    report.max_error = std::max(report.max_error, err);
  };

  for (int p = 0; p < points; ++p) {
    Vector x = x0;
    for (Index i = 0; i < x.size(); ++i) x[i] += 0.3 * normal(rng);
    const Vector y = random_in(problem.set_y(), rng);
    const Vector w = random_in(problem.set_w(), rng);

    record("grad_x phi", check_gradient([&](const Vector& v) { return problem.phi(v, y); },
                                        [&](const Vector& v) { return problem.grad_x_phi(v, y); }, x, kStep));
    record("grad_y phi", check_gradient([&](const Vector& v) { return problem.phi(x, v); },
                                        [&](const Vector& v) { return problem.grad_y_phi(x, v); }, y, kStep));
    record("grad_x psi", check_gradient([&](const Vector& v) { return problem.psi(v, w); },
                                        [&](const Vector& v) { return problem.grad_x_psi(v, w); }, x, kStep));
    record("grad_w psi", check_gradient([&](const Vector& v) { return problem.psi(x, v); },
                                        [&](const Vector& v) { return problem.grad_w_psi(x, v); }, w, kStep));
    for (auto [name, which] : {std::pair{"grad f (implicit)", ImplicitFunction::kObjective},
                               std::pair{"grad g (implicit)", ImplicitFunction::kConstraint}}) {
      const auto fn = which;
      record(name, check_gradient(
                       [&](const Vector& v) { return implicit_value_and_grad(problem, v, fn, eval_steps).value; },
                       [&](const Vector& v) { return implicit_value_and_grad(problem, v, fn, eval_steps).grad; },
                       x, kStep));
    }
  }
  return report;
}

int gradcheck_exit_code(const GradcheckReport& report) {
  return report.max_error <= kGradcheckTolerance ? kExitOk : kExitGradcheck;
}

int cmd_gradcheck(const std::filesystem::path& config_path, std::ostream& out,
                  const Overrides& overrides) {
  RunConfig config;
  BuiltProblem built;
  try {
    config = load_problem_config(config_path, overrides);
    built = build_problem(config);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const NumericError& e) {
    spdlog::error("problem construction failed: {}", e.what());
    return kExitNumeric;
  }
  GradcheckReport report;
  try {
    report = gradcheck_problem(*built.problem, built.x0, config.seed, 3, config.eval_steps);
  } catch (const NumericError& e) {
    spdlog::error("{}", e.what());
    return kExitGradcheck;
  }
  for (const GradcheckEntry& e : report.entries) out << e.oracle << ": " << format_double(e.error) << '\n';
  const int code = gradcheck_exit_code(report);
  out << "max error " << format_double(report.max_error) << (code == kExitOk ? " PASS" : " FAIL")
      << " (tolerance " << format_double(kGradcheckTolerance) << ")\n";
  return code;
}

}  // namespace idbpd::app
