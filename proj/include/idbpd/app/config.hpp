#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "idbpd/baselines.hpp"
#include "idbpd/metrics.hpp"
#include "idbpd/problems/dataset.hpp"
#include "idbpd/problems/dro_mtl.hpp"
#include "idbpd/problems/testbed.hpp"
#include "idbpd/solver.hpp"

namespace idbpd::app {

inline constexpr int kSchemaVersion = 1;

struct TestbedSpec {
  TestbedParams params;
};

struct CalibrationSpec {
  int iterations = 1000;
  CalibrationOptions options;
};

struct DroMtlSpec {
  enum class Source { kBlobs, kPairedBlobs, kCsv };
  Source source = Source::kBlobs;
  BlobParams blobs;
  std::filesystem::path csv_path;
  LabelSpec labels;
  Normalization normalization = Normalization::kZScore;
  int hidden = 16;
  double lambda_reg = kDefaultDroRegularization;
  /// Fixed threshold, or calibrated when absent.
  std::optional<double> r;
  CalibrationSpec calibration;
};

struct IdbpdSpec {
  SolverConfig solver;
};

using ProblemSpec = std::variant<TestbedSpec, DroMtlSpec>;
using MethodSpec = std::variant<IdbpdSpec, GdmaConfig, DiscretizationConfig>;

struct RunConfig {
  std::string name = "run";
  ProblemSpec problem;
  MethodSpec method;
  std::uint64_t seed = 42;
  int eval_steps = kDefaultEvalSteps;
  int record_stride = 1;
  std::filesystem::path output = "out";
  std::optional<std::vector<double>> x0;
  /// The parsed document with CLI overrides applied; hashed for provenance.
  nlohmann::json document;

  std::string method_name() const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> stride;
  std::optional<std::filesystem::path> output;
};

/// Throws ConfigError on schema violations, unknown keys, or missing files.
/// Relative dataset paths resolve against base_dir.
RunConfig parse_run_config(const nlohmann::json& doc, const Overrides& overrides = {},
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides = {});

/// Same schema, but the method block may be absent (gradient checks only need
/// the problem).
RunConfig load_problem_config(const std::filesystem::path& path, const Overrides& overrides = {});

struct CompareConfig {
  std::vector<RunConfig> runs;
  std::filesystem::path output = "out";
  bool parallel = false;
  /// Name of the run whose total oracle-call count caps all other runs.
  std::optional<std::string> match_budget_to;
  nlohmann::json document;
};

/// Run blocks inherit top-level "problem", "seed", "eval_steps" and
/// "record_stride" unless they set their own.
CompareConfig parse_compare_config(const nlohmann::json& doc, const Overrides& overrides = {},
                                   const std::filesystem::path& base_dir = {});
CompareConfig load_compare_config(const std::filesystem::path& path,
                                  const Overrides& overrides = {});

nlohmann::json read_json_file(const std::filesystem::path& path);

/// SHA-256 (hex) of the compact, key-sorted serialization of the document,
/// ignoring the "output" key.
std::string config_hash(const nlohmann::json& doc);

struct BuiltProblem {
  std::shared_ptr<const Problem> problem;
  Vector x0;
  /// Present for testbed problems.
  std::optional<KktPoint> kkt;
  /// Threshold actually used for DRO-MTL problems.
  std::optional<double> r;
};

BuiltProblem build_problem(const RunConfig& config);

}  // namespace idbpd::app
