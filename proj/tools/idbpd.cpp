#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "idbpd/app/commands.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("idbpd");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  if (const char* level = std::getenv("IDBPD_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  } else {
    spdlog::set_level(spdlog::level::info);
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Primal-dual solver and benchmarks for min-max problems with infinitely many constraints"};
  app.require_subcommand(1);

  std::string config;
  idbpd::app::Overrides overrides;
  std::string out_dir;
  std::uint64_t seed = 0;
  int stride = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides the config)");
    sub->add_option("--seed", seed, "Seed (overrides the config)");
    sub->add_option("--stride", stride, "Record every stride-th iterate")->check(CLI::PositiveNumber);
  };
  CLI::App* run = app.add_subcommand("run", "Run one method; writes trace.csv and summary.json");
  CLI::App* compare = app.add_subcommand("compare", "Run several methods; writes comparison.json and panels");
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every oracle gradient");
  for (CLI::App* sub : {run, compare, gradcheck}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : idbpd::app::kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--out")) overrides.output = out_dir;
  if (chosen->count("--seed")) overrides.seed = seed;
  if (chosen->count("--stride")) overrides.stride = stride;

  try {
    if (chosen == run) return idbpd::app::cmd_run(config, overrides);
    if (chosen == compare) return idbpd::app::cmd_compare(config, overrides);
    return idbpd::app::cmd_gradcheck(config, std::cout, overrides);
  } catch (const std::exception& e) {
    spdlog::critical("{}", e.what());
    return idbpd::app::kExitNumeric;
  }
}
