#include "idbpd/app/config.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <set>

#include "idbpd/problems/dro_mtl.hpp"
#include "idbpd/problems/mlp.hpp"

namespace idbpd::app {

using nlohmann::json;

namespace {

/// Typed access to one JSON object. Every key must be consumed before
/// finish(), so misspelled keys are reported instead of silently ignored.
class Reader {
 public:
  Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) fail(key, "a number");
    return v.get<double>();
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(key, "an integer");
    return v.get<int>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_unsigned()) fail(key, "a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(key, "true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, std::string fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) fail(key, "a string");
    return v.get<std::string>();
  }

  Reader object(const std::string& key) { return Reader(raw(key), where_ + "." + key); }

  void finish() const {
    for (const auto& item : obj_.items())
      if (!seen_.count(item.key())) throw ConfigError(where_ + ": unknown key '" + item.key() + "'");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& expected) const {
    throw ConfigError(where_ + "." + key + ": expected " + expected);
  }

  const std::string& where() const { return where_; }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

TestbedSpec parse_testbed(Reader& r, std::uint64_t seed) {
  TestbedSpec spec;
  TestbedParams& p = spec.params;
  p.seed = seed;
  p.n = r.integer("n", p.n);
  p.m = r.integer("m", p.m);
  p.l = r.integer("l", p.l);
  p.eta = r.number("eta", p.eta);
  p.reg = r.number("reg", p.reg);
  p.r = r.number("r", p.r);
  if (p.n < 1 || p.m < 1 || p.l < 1) throw ConfigError(r.where() + ": n, m, l must be >= 1");
  if (!(p.eta > 0.0) || !(p.reg > 0.0)) throw ConfigError(r.where() + ": eta and reg must be > 0");
  return spec;
}

Normalization parse_normalization(const std::string& s, const std::string& where) {
  if (s == "zscore") return Normalization::kZScore;
  if (s == "none") return Normalization::kNone;
  throw ConfigError(where + ".normalization: expected \"zscore\" or \"none\"");
}

DroMtlSpec parse_dro(Reader& r, std::uint64_t seed, const std::filesystem::path& base_dir) {
  DroMtlSpec spec;
  const std::string source = r.string("source", "blobs");
  if (source == "blobs") {
    spec.source = DroMtlSpec::Source::kBlobs;
  } else if (source == "paired_blobs") {
    spec.source = DroMtlSpec::Source::kPairedBlobs;
  } else if (source == "csv") {
    spec.source = DroMtlSpec::Source::kCsv;
  } else {
    throw ConfigError(r.where() + ".source: expected \"blobs\", \"paired_blobs\" or \"csv\"");
  }

  spec.blobs.seed = seed;
  if (r.has("blobs")) {
    if (spec.source == DroMtlSpec::Source::kCsv)
      throw ConfigError(r.where() + ": \"blobs\" block given for a csv source");
    Reader b = r.object("blobs");
    BlobParams& p = spec.blobs;
    p.seed = b.unsigned_integer("seed", p.seed);
    p.samples = b.integer("samples", p.samples);
    p.features = b.integer("features", p.features);
    p.labels = b.integer("labels", p.labels);
    p.separation = b.number("separation", p.separation);
    p.noise = b.number("noise", p.noise);
    b.finish();
  }

  if (spec.source == DroMtlSpec::Source::kCsv) {
    if (!r.has("path")) throw ConfigError(r.where() + ": csv source needs \"path\"");
    spec.csv_path = r.string("path", "");
    if (spec.csv_path.is_relative() && !base_dir.empty()) spec.csv_path = base_dir / spec.csv_path;
    if (!std::filesystem::exists(spec.csv_path))
      throw ConfigError(r.where() + ".path: no such file " + spec.csv_path.string());
    if (r.has("labels")) {
      Reader l = r.object("labels");
      if (l.has("column") && l.has("indicator_block"))
        throw ConfigError(l.where() + ": give either \"column\" or \"indicator_block\"");
      if (l.has("indicator_block")) {
        spec.labels.kind = LabelSpec::Kind::kIndicatorBlock;
        spec.labels.block_size = l.integer("indicator_block", 0);
      } else {
        spec.labels.column = l.string("column", "");
      }
      l.finish();
    }
  } else if (r.has("path") || r.has("labels")) {
    throw ConfigError(r.where() + ": \"path\"/\"labels\" only apply to a csv source");
  }

  spec.normalization = parse_normalization(r.string("normalization", "zscore"), r.where());
  spec.hidden = r.integer("hidden", spec.hidden);
  if (spec.hidden < 1) throw ConfigError(r.where() + ".hidden: must be >= 1");
  spec.lambda_reg = r.number("lambda_reg", spec.lambda_reg);
  if (!(spec.lambda_reg > 0.0)) throw ConfigError(r.where() + ".lambda_reg: must be > 0");
  if (r.has("r")) {
    const json& v = r.raw("r");
    if (!v.is_number()) r.fail("r", "a number (omit it to calibrate)");
    spec.r = v.get<double>();
  }
  if (r.has("calibration")) {
    if (spec.r) throw ConfigError(r.where() + ": \"calibration\" conflicts with a fixed \"r\"");
    Reader c = r.object("calibration");
    spec.calibration.iterations = c.integer("iterations", spec.calibration.iterations);
    spec.calibration.options.gamma = c.number("gamma", spec.calibration.options.gamma);
    spec.calibration.options.init_seed = c.unsigned_integer("init_seed", spec.calibration.options.init_seed);
    spec.calibration.options.inner_base = c.number("inner_base", spec.calibration.options.inner_base);
    c.finish();
  }
  if (spec.calibration.iterations < 1)
    throw ConfigError(r.where() + ".calibration.iterations: must be >= 1");
  return spec;
}

ProblemSpec parse_problem(Reader& r, std::uint64_t seed, const std::filesystem::path& base_dir) {
  const std::string type = r.string("type", "");
  if (type == "testbed") return parse_testbed(r, seed);
  if (type == "dro_mtl") return parse_dro(r, seed, base_dir);
  throw ConfigError(r.where() + ".type: expected \"testbed\" or \"dro_mtl\"");
}

std::optional<std::uint64_t> optional_calls(Reader& r) {
  if (!r.has("max_oracle_calls")) return std::nullopt;
  return r.unsigned_integer("max_oracle_calls", 0);
}

IdbpdSpec parse_idbpd(Reader& r) {
  IdbpdSpec spec;
  Schedule& s = spec.solver.schedule;
  s.horizon = r.integer("horizon", 1000);
  const std::string mode = r.string("mode", "practical");
  if (mode == "practical") {
    s.mode = ScheduleMode::kPractical;
  } else if (mode == "theory") {
    s.mode = ScheduleMode::kTheory;
  } else {
    throw ConfigError(r.where() + ".mode: expected \"practical\" or \"theory\"");
  }
  s.omega = r.number("omega", s.omega);
  s.alpha_scale = r.number("alpha_scale", s.alpha_scale);
  s.gamma = r.number("gamma", s.gamma);
  s.gamma_c = r.number("gamma_c", s.gamma_c);
  s.theta = r.number("theta", s.theta);
  s.delta_y = r.number("delta_y", s.delta_y);
  s.delta_w = r.number("delta_w", s.delta_w);
  s.inner_base_y = r.number("inner_base_y", s.inner_base_y);
  s.inner_base_w = r.number("inner_base_w", s.inner_base_w);
  spec.solver.momentum = r.boolean("momentum", false);
  spec.solver.exact_inner = r.boolean("exact_inner", false);
  if (r.has("stop_tolerance")) spec.solver.stop_tolerance = r.number("stop_tolerance", 0.0);
  spec.solver.max_oracle_calls = optional_calls(r);
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(r.where() + ": " + e.what());
  }
  return spec;
}

GdmaConfig parse_gdma(Reader& r) {
  GdmaConfig c;
  c.rho = r.number("rho", c.rho);
  c.gamma = r.number("gamma", c.gamma);
  c.ascent_steps = r.integer("ascent_steps", c.ascent_steps);
  c.horizon = r.integer("horizon", 1000);
  c.momentum = r.boolean("momentum", c.momentum);
  c.max_oracle_calls = optional_calls(r);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(r.where() + ": " + e.what());
  }
  return c;
}

DiscretizationConfig parse_discretization(Reader& r) {
  DiscretizationConfig c;
  c.outer_rounds = r.integer("outer_rounds", c.outer_rounds);
  c.inner_pd_iterations = r.integer("inner_pd_iterations", c.inner_pd_iterations);
  c.violation_tolerance = r.number("violation_tolerance", c.violation_tolerance);
  c.multiplier_step = r.number("multiplier_step", c.multiplier_step);
  c.max_active_constraints = r.integer("max_active_constraints", c.max_active_constraints);
  c.gamma = r.number("gamma", c.gamma);
  c.ascent_steps_y = r.integer("ascent_steps_y", c.ascent_steps_y);
  c.max_oracle_calls = optional_calls(r);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(r.where() + ": " + e.what());
  }
  return c;
}

void apply_overrides(json& doc, const Overrides& o) {
  if (o.seed) doc["seed"] = *o.seed;
  if (o.stride) doc["record_stride"] = *o.stride;
  if (o.output) doc["output"] = o.output->string();
}

void check_schema(Reader& r) {
  if (!r.has("schema_version")) throw ConfigError(r.where() + ": missing \"schema_version\"");
  const int version = r.integer("schema_version", 0);
  if (version != kSchemaVersion)
    throw ConfigError(r.where() + ": unsupported schema_version " + std::to_string(version) +
                      " (expected " + std::to_string(kSchemaVersion) + ")");
}

RunConfig parse_run_body(Reader& r, const std::filesystem::path& base_dir,
                         bool require_method = true) {
  RunConfig out;
  out.name = r.string("name", out.name);
  out.seed = r.unsigned_integer("seed", out.seed);
  out.eval_steps = r.integer("eval_steps", out.eval_steps);
  if (out.eval_steps < 1) throw ConfigError(r.where() + ".eval_steps: must be >= 1");
  out.record_stride = r.integer("record_stride", out.record_stride);
  if (out.record_stride < 1) throw ConfigError(r.where() + ".record_stride: must be >= 1");
  out.output = r.string("output", out.output.string());

  if (r.has("x0")) {
    const json& v = r.raw("x0");
    if (!v.is_array()) r.fail("x0", "an array of numbers");
    std::vector<double> x0;
    for (const json& e : v) {
      if (!e.is_number()) r.fail("x0", "an array of numbers");
      x0.push_back(e.get<double>());
    }
    out.x0 = std::move(x0);
  }

  if (!r.has("problem")) throw ConfigError(r.where() + ": missing \"problem\" block");
  Reader p = r.object("problem");
  out.problem = parse_problem(p, out.seed, base_dir);
  p.finish();

  int methods = 0;
  for (const char* key : {"idbpd", "gdma", "discretization"}) methods += r.has(key) ? 1 : 0;
  if (methods == 0 && !require_method) return out;
  if (methods != 1)
    throw ConfigError(r.where() +
                      ": exactly one method block (\"idbpd\", \"gdma\" or \"discretization\") required");
  if (r.has("idbpd")) {
    Reader m = r.object("idbpd");
    IdbpdSpec spec = parse_idbpd(m);
    m.finish();
    spec.solver.record_stride = out.record_stride;
    spec.solver.seed = out.seed;
    out.method = std::move(spec);
  } else if (r.has("gdma")) {
    Reader m = r.object("gdma");
    GdmaConfig c = parse_gdma(m);
    m.finish();
    c.record_stride = out.record_stride;
    out.method = c;
  } else {
    Reader m = r.object("discretization");
    DiscretizationConfig c = parse_discretization(m);
    m.finish();
    c.record_stride = out.record_stride;
    c.eval_steps = out.eval_steps;
    out.method = c;
  }
  return out;
}

}  // namespace

std::string RunConfig::method_name() const {
  switch (method.index()) {
    case 0: return "idbpd";
    case 1: return "gdma";
    default: return "discretization";
  }
}

namespace {

RunConfig parse_single(const json& doc, const Overrides& overrides,
                       const std::filesystem::path& base_dir, bool require_method) {
  json patched = doc;
  if (!patched.is_object()) throw ConfigError("config: expected a JSON object");
  apply_overrides(patched, overrides);
  Reader r(patched, "config");
  check_schema(r);
  RunConfig out = parse_run_body(r, base_dir, require_method);
  r.finish();
  out.document = std::move(patched);
  return out;
}

}  // namespace

RunConfig parse_run_config(const json& doc, const Overrides& overrides,
                           const std::filesystem::path& base_dir) {
  return parse_single(doc, overrides, base_dir, true);
}

RunConfig load_problem_config(const std::filesystem::path& path, const Overrides& overrides) {
  return parse_single(read_json_file(path), overrides, path.parent_path(), false);
}

RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides) {
  return parse_run_config(read_json_file(path), overrides, path.parent_path());
}

CompareConfig parse_compare_config(const json& doc, const Overrides& overrides,
                                   const std::filesystem::path& base_dir) {
  json patched = doc;
  if (!patched.is_object()) throw ConfigError("config: expected a JSON object");
  apply_overrides(patched, overrides);
  Reader r(patched, "config");
  check_schema(r);

  CompareConfig out;
  out.output = r.string("output", out.output.string());
  out.parallel = r.boolean("parallel", false);
  if (r.has("match_budget_to")) out.match_budget_to = r.string("match_budget_to", "");

  static const char* kInherited[] = {"problem", "seed", "eval_steps", "record_stride", "x0"};
  for (const char* key : kInherited)
    if (r.has(key)) r.raw(key);

  if (!r.has("runs") || !r.raw("runs").is_array())
    throw ConfigError("config.runs: expected an array of run blocks");
  const json& runs = r.raw("runs");
  if (runs.size() < 2) throw ConfigError("config.runs: need at least two run blocks");
  std::set<std::string> names;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    json run = runs[i];
    const std::string where = "config.runs[" + std::to_string(i) + "]";
    if (!run.is_object()) throw ConfigError(where + ": expected an object");
    for (const char* key : kInherited)
      if (!run.contains(key) && patched.contains(key)) run[key] = patched[key];
    if (overrides.seed) run["seed"] = *overrides.seed;
    if (overrides.stride) run["record_stride"] = *overrides.stride;
    if (run.contains("output")) throw ConfigError(where + ": runs may not set \"output\"");
    if (!run.contains("name")) throw ConfigError(where + ": missing \"name\"");
    Reader rr(run, where);
    RunConfig rc = parse_run_body(rr, base_dir);
    rr.finish();
    if (!names.insert(rc.name).second) throw ConfigError(where + ": duplicate run name '" + rc.name + "'");
    rc.output = out.output / rc.name;
    run["schema_version"] = kSchemaVersion;
    rc.document = std::move(run);
    out.runs.push_back(std::move(rc));
  }
  if (out.match_budget_to && !names.count(*out.match_budget_to))
    throw ConfigError("config.match_budget_to: no run named '" + *out.match_budget_to + "'");
  r.finish();
  out.document = std::move(patched);
  return out;
}

CompareConfig load_compare_config(const std::filesystem::path& path, const Overrides& overrides) {
  return parse_compare_config(read_json_file(path), overrides, path.parent_path());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string config_hash(const json& doc) {
  json canonical = doc;
  if (canonical.is_object()) canonical.erase("output");
  // nlohmann::json objects are std::map-backed, so dump() is key-sorted.
  const std::string text = canonical.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

namespace {

DatasetSplit load_split(const DroMtlSpec& spec) {
  switch (spec.source) {
    case DroMtlSpec::Source::kBlobs: return make_blobs(spec.blobs, spec.normalization);
    case DroMtlSpec::Source::kPairedBlobs: return make_paired_blobs(spec.blobs, spec.normalization);
    case DroMtlSpec::Source::kCsv: break;
  }
  return load_csv_dataset(spec.csv_path, spec.labels, spec.normalization);
}

}  // namespace

BuiltProblem build_problem(const RunConfig& config) {
  BuiltProblem out;
  if (const auto* t = std::get_if<TestbedSpec>(&config.problem)) {
    Testbed tb = make_testbed(t->params);
    out.x0 = Vector::Zero(tb.problem->dim_x());
    out.kkt = tb.kkt;
    out.problem = std::move(tb.problem);
  } else {
    const auto& d = std::get<DroMtlSpec>(config.problem);
    DatasetSplit split = load_split(d);
    const double r = d.r ? *d.r
                         : calibrate_threshold(split, d.hidden, d.lambda_reg, d.calibration.iterations,
                                               d.calibration.options);
    auto problem = make_dro_mtl(std::move(split), d.hidden, d.lambda_reg, r);
    out.x0 = mlp_initial_weights(problem->layout(), config.seed);
    out.r = r;
    out.problem = std::move(problem);
  }
  if (config.x0) {
    if (static_cast<Index>(config.x0->size()) != out.problem->dim_x())
      throw ConfigError("x0 has " + std::to_string(config.x0->size()) + " entries, problem needs " +
                        std::to_string(out.problem->dim_x()));
    out.x0 = Eigen::Map<const Vector>(config.x0->data(), static_cast<Index>(config.x0->size()));
  }
  return out;
}

}  // namespace idbpd::app
