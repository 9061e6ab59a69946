#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "idbpd/app/config.hpp"
#include "idbpd/app/report.hpp"

namespace idbpd::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitNumeric = 2,
  kExitGradcheck = 3,
};

/// Everything a single run produced. `trace` is partial when aborted.
struct RunOutcome {
  IterateTrace trace;
  std::vector<KktReport> reports;
  RunSummary summary;
  bool aborted = false;
};

/// Runs the configured method on an already built problem. A numeric abort is
/// caught and reported through RunOutcome::aborted.
RunOutcome execute_run(const RunConfig& config, const BuiltProblem& built,
                       std::optional<std::uint64_t> budget = std::nullopt);

/// Writes trace.csv and summary.json into dir (created if needed).
void write_run_outputs(const std::filesystem::path& dir, const RunOutcome& outcome);

int cmd_run(const std::filesystem::path& config_path, const Overrides& overrides = {});
int cmd_compare(const std::filesystem::path& config_path, const Overrides& overrides = {});
int cmd_gradcheck(const std::filesystem::path& config_path, std::ostream& out,
                  const Overrides& overrides = {});

struct GradcheckEntry {
  std::string oracle;
  double error = 0.0;
};

struct GradcheckReport {
  std::vector<GradcheckEntry> entries;
  double max_error = 0.0;
};

inline constexpr double kGradcheckTolerance = 1e-4;

/// Central-difference check of grad_x/grad_y phi, grad_x/grad_w psi and the
/// implicit (Danskin) gradients of f and g at `points` seeded points around x0.
GradcheckReport gradcheck_problem(const Problem& problem, const Vector& x0, std::uint64_t seed,
                                  int points = 3, int eval_steps = kDefaultEvalSteps);

int gradcheck_exit_code(const GradcheckReport& report);

}  // namespace idbpd::app
