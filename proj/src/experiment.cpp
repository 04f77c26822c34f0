#include "paradigms/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <fmt/format.h>
#include "json.hpp"
#include <yaml-cpp/yaml.h>

#include "paradigms/picard.hpp"
#include "paradigms/worker_pool.hpp"

namespace paradigms {

ConfigError::ConfigError(std::size_t line, std::string field, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}: {}", line, field, message)
                                  : fmt::format("{}: {}", field, message)),
      line_(line),
      field_(std::move(field)) {}

NoiseSchedule ScheduleSpec::build() const {
  const auto convention = zero_final_sigma ? SigmaConvention::kZeroFinal : SigmaConvention::kAdjacentLevel;
  if (beta_min && beta_max) return build_linear_schedule(num_steps, *beta_min, *beta_max, convention);
  return default_linear_schedule(num_steps, convention);
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::size_t line_of(const YAML::Node& node) {
  const auto mark = node.Mark();
  return mark.line >= 0 ? static_cast<std::size_t>(mark.line) + 1 : 0;
}

void check_keys(const YAML::Node& map, const std::string& section, std::initializer_list<std::string_view> allowed) {
  if (!map.IsMap()) throw ConfigError(line_of(map), section, "expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(line_of(kv.first), section.empty() ? key : section + "." + key, "unknown key");
    }
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ConfigError(line_of(node), field, "expected a scalar");
  try {
    if constexpr (std::is_same_v<T, double>) {
      const auto text = node.Scalar();
      if (text == "inf" || text == "+inf" || text == "infinity") return std::numeric_limits<double>::infinity();
    }
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!node.Scalar().empty() && node.Scalar().front() == '-') {
        throw ConfigError(line_of(node), field, "must be non-negative");
      }
    }
    return node.as<T>();
  } catch (const YAML::BadConversion&) {
    throw ConfigError(line_of(node), field, "cannot parse '" + node.Scalar() + "'");
  }
}

template <typename T>
std::vector<T> scalar_or_list(const YAML::Node& node, const std::string& field) {
  std::vector<T> out;
  if (node.IsSequence()) {
    for (const auto& item : node) out.push_back(scalar<T>(item, field));
    if (out.empty()) throw ConfigError(line_of(node), field, "list must not be empty");
  } else {
    out.push_back(scalar<T>(node, field));
  }
  return out;
}

Vector number_list(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) throw ConfigError(line_of(node), field, "expected a list of numbers");
  Vector out;
  for (const auto& item : node) out.push_back(scalar<double>(item, field));
  return out;
}

void parse_schedule(const YAML::Node& node, ExperimentConfig& cfg) {
  check_keys(node, "schedule", {"T", "beta_min", "beta_max", "zero_final_sigma"});
  if (!node["T"]) throw ConfigError(line_of(node), "schedule.T", "required");
  cfg.schedule.num_steps = scalar<std::size_t>(node["T"], "schedule.T");
  if (cfg.schedule.num_steps == 0) throw ConfigError(line_of(node["T"]), "schedule.T", "must be at least 1");
  if (node["beta_min"].IsDefined() != node["beta_max"].IsDefined()) {
    throw ConfigError(line_of(node), "schedule", "beta_min and beta_max must be given together");
  }
  if (node["beta_min"]) {
    cfg.schedule.beta_min = scalar<double>(node["beta_min"], "schedule.beta_min");
    cfg.schedule.beta_max = scalar<double>(node["beta_max"], "schedule.beta_max");
  }
  if (node["zero_final_sigma"]) cfg.schedule.zero_final_sigma = scalar<bool>(node["zero_final_sigma"], "schedule.zero_final_sigma");
  try {
    (void)cfg.schedule.build();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(line_of(node), "schedule", e.what());
  }
}

void parse_mixture(const YAML::Node& node, ExperimentConfig& cfg) {
  check_keys(node, "mixture", {"components", "preset", "dim"});
  if (node["preset"]) {
    if (node["components"]) throw ConfigError(line_of(node), "mixture", "give either preset or components");
    const auto preset = scalar<std::string>(node["preset"], "mixture.preset");
    if (preset != "standard") throw ConfigError(line_of(node["preset"]), "mixture.preset", "only 'standard' is known");
    const std::size_t dim = node["dim"] ? scalar<std::size_t>(node["dim"], "mixture.dim") : 2;
    if (dim == 0) throw ConfigError(line_of(node["dim"]), "mixture.dim", "must be at least 1");
    const auto m = standard_test_mixture(dim);
    cfg.mixture.assign(m.components().begin(), m.components().end());
    return;
  }
  if (node["dim"]) throw ConfigError(line_of(node["dim"]), "mixture.dim", "only valid with a preset");
  const auto comps = node["components"];
  if (!comps || !comps.IsSequence() || comps.size() == 0) {
    throw ConfigError(line_of(node), "mixture.components", "expected a non-empty list");
  }
  cfg.mixture.clear();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto c = comps[i];
    const std::string field = fmt::format("mixture.components[{}]", i);
    check_keys(c, field, {"weight", "mean", "variance"});
    for (const char* key : {"weight", "mean", "variance"}) {
      if (!c[key]) throw ConfigError(line_of(c), field + "." + key, "required");
    }
    cfg.mixture.push_back({scalar<double>(c["weight"], field + ".weight"), number_list(c["mean"], field + ".mean"),
                           number_list(c["variance"], field + ".variance")});
  }
  try {
    (void)GaussianMixture(cfg.mixture);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(line_of(comps), "mixture.components", e.what());
  }
}

void parse_seeds(const YAML::Node& node, ExperimentConfig& cfg) {
  cfg.seeds.clear();
  if (node.IsMap()) {
    check_keys(node, "run.seeds", {"first", "count"});
    if (!node["first"] || !node["count"]) throw ConfigError(line_of(node), "run.seeds", "needs first and count");
    const auto first = scalar<std::uint64_t>(node["first"], "run.seeds.first");
    const auto count = scalar<std::uint64_t>(node["count"], "run.seeds.count");
    if (count == 0) throw ConfigError(line_of(node["count"]), "run.seeds.count", "must be at least 1");
    for (std::uint64_t i = 0; i < count; ++i) cfg.seeds.push_back(first + i);
    return;
  }
  cfg.seeds = scalar_or_list<std::uint64_t>(node, "run.seeds");
}

void parse_run(const YAML::Node& node, ExperimentConfig& cfg) {
  check_keys(node, "run",
             {"sampler", "parallel", "tolerance", "window", "num_steps", "workers", "seeds", "max_iterations", "output",
              "format", "record_timing", "timing_repeats", "eval_cost_us", "seed_workers"});
  if (node["sampler"]) {
    cfg.samplers.clear();
    for (const auto& name : scalar_or_list<std::string>(node["sampler"], "run.sampler")) {
      try {
        cfg.samplers.push_back(parse_sampler_kind(name));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(line_of(node["sampler"]), "run.sampler", e.what());
      }
    }
  }
  if (node["parallel"]) cfg.parallel_modes = scalar_or_list<bool>(node["parallel"], "run.parallel");
  if (node["tolerance"]) {
    cfg.tolerances = scalar_or_list<double>(node["tolerance"], "run.tolerance");
    for (double t : cfg.tolerances) {
      if (!(t >= 0.0)) throw ConfigError(line_of(node["tolerance"]), "run.tolerance", "must be >= 0");
    }
  }
  if (node["window"]) {
    cfg.windows = scalar_or_list<std::size_t>(node["window"], "run.window");
    for (auto p : cfg.windows) {
      if (p == 0) throw ConfigError(line_of(node["window"]), "run.window", "must be at least 1");
      if (p > cfg.schedule.num_steps) throw ConfigError(line_of(node["window"]), "run.window", "must not exceed schedule.T");
    }
  }
  if (node["num_steps"]) {
    const auto n = scalar<std::size_t>(node["num_steps"], "run.num_steps");
    if (n == 0 || n > cfg.schedule.num_steps) {
      throw ConfigError(line_of(node["num_steps"]), "run.num_steps", "must be in [1, schedule.T]");
    }
    cfg.num_steps = n;
  }
  if (node["workers"]) {
    cfg.workers = scalar<std::size_t>(node["workers"], "run.workers");
    if (cfg.workers == 0) throw ConfigError(line_of(node["workers"]), "run.workers", "must be at least 1");
  }
  if (node["seeds"]) parse_seeds(node["seeds"], cfg);
  if (node["max_iterations"]) {
    const auto m = scalar<std::size_t>(node["max_iterations"], "run.max_iterations");
    if (m < cfg.schedule.num_steps) {
      throw ConfigError(line_of(node["max_iterations"]), "run.max_iterations", "must be at least schedule.T");
    }
    cfg.max_iterations = m;
  }
  if (node["output"]) cfg.output = scalar<std::string>(node["output"], "run.output");
  if (node["format"]) {
    const auto f = scalar<std::string>(node["format"], "run.format");
    if (f == "csv") cfg.format = OutputFormat::kCsv;
    else if (f == "json") cfg.format = OutputFormat::kJson;
    else throw ConfigError(line_of(node["format"]), "run.format", "expected csv or json");
  }
  if (node["record_timing"]) cfg.record_timing = scalar<bool>(node["record_timing"], "run.record_timing");
  if (node["timing_repeats"]) {
    cfg.timing_repeats = scalar<std::size_t>(node["timing_repeats"], "run.timing_repeats");
    if (cfg.timing_repeats == 0) throw ConfigError(line_of(node["timing_repeats"]), "run.timing_repeats", "must be at least 1");
  }
  if (node["eval_cost_us"]) cfg.eval_cost_us = scalar<std::uint64_t>(node["eval_cost_us"], "run.eval_cost_us");
  if (node["seed_workers"]) {
    cfg.seed_workers = scalar<std::size_t>(node["seed_workers"], "run.seed_workers");
    if (cfg.seed_workers == 0) throw ConfigError(line_of(node["seed_workers"]), "run.seed_workers", "must be at least 1");
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::size_t default_workers) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.mark.line >= 0 ? static_cast<std::size_t>(e.mark.line) + 1 : 0, "config", e.msg);
  }
  if (!root.IsMap()) throw ConfigError(0, "config", "expected sections schedule, mixture and run");
  check_keys(root, "", {"schedule", "mixture", "run"});
  if (!root["schedule"]) throw ConfigError(0, "schedule", "required section");

  ExperimentConfig cfg;
  cfg.workers = default_workers;
  parse_schedule(root["schedule"], cfg);
  if (root["mixture"]) {
    parse_mixture(root["mixture"], cfg);
  } else {
    const auto m = standard_test_mixture(2);
    cfg.mixture.assign(m.components().begin(), m.components().end());
  }
  if (root["run"]) parse_run(root["run"], cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, path.string(), "cannot open config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::size_t workers = 1;
  if (const char* env = std::getenv(kWorkersEnv); env != nullptr && *env != '\0') {
    std::size_t parsed = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::char_traits<char>::length(env), parsed);
    if (ec != std::errc() || *ptr != '\0' || parsed == 0) {
      throw ConfigError(0, kWorkersEnv, "must be a positive integer");
    }
    workers = parsed;
  }
  return parse_config(buffer.str(), workers);
}

// ---------------------------------------------------------------------------
// Running

namespace {

struct Job {
  SamplerKind sampler;
  bool parallel;
  double tolerance;
  std::size_t window;
  std::uint64_t seed;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ReportRow run_job(const ExperimentConfig& cfg, const NoiseSchedule& schedule, const GaussianMixture& mixture,
                  const Job& job) {
  const std::size_t dim = mixture.dim();
  const std::size_t coarse = cfg.num_steps.value_or(schedule.num_steps());
  MixtureOracle oracle(mixture, schedule, std::chrono::microseconds(cfg.eval_cost_us));
  const auto rule = make_step_rule(job.sampler, oracle, schedule, coarse);
  const std::size_t n = rule->num_steps();

  const Vector x0 = draw_prior(job.seed, dim);
  NoiseArray noises = NoiseArray::zeros(n, dim);
  if (rule->stochastic()) noises = NoiseArray::draw(job.seed, schedule.sigmas(), dim);

  ReportRow row;
  row.seed = job.seed;
  row.sampler = std::string(to_string(job.sampler));
  row.parallel = job.parallel;
  row.num_steps = n;
  row.workers = cfg.workers;
  const std::size_t repeats = cfg.record_timing ? cfg.timing_repeats : 1;
  std::vector<double> times;

  if (!job.parallel) {
    Trajectory traj;
    for (std::size_t r = 0; r < repeats; ++r) {
      oracle.reset_evaluations();
      const auto start = std::chrono::steady_clock::now();
      traj = run_sequential(*rule, x0, noises);
      times.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
    }
    row.window = 1;
    row.tolerance = 0.0;
    row.model_evals = oracle.evaluations();
    row.parallel_iters = n;
    row.stride_trace.assign(n, 1);
    row.parity_endpoint = 0.0;
  } else {
    PicardConfig pc;
    pc.tolerance = job.tolerance;
    pc.window_size = job.window;
    pc.workers = cfg.workers;
    pc.max_iterations = cfg.max_iterations.value_or(0);
    if (pc.max_iterations != 0 && pc.max_iterations < n) pc.max_iterations = n;
    pc.mode = rule->stochastic() ? PicardMode::kStochastic : PicardMode::kDeterministic;
    RunReport report;
    for (std::size_t r = 0; r < repeats; ++r) {
      oracle.reset_evaluations();
      report = paradigms_sample(*rule, pc, x0, noises);
      times.push_back(report.wall_time * 1e3);
    }
    row.window = job.window;
    row.tolerance = job.tolerance;
    row.model_evals = oracle.evaluations();
    row.parallel_iters = report.parallel_iterations;
    row.stride_trace = report.stride_trace;

    const MixtureOracle reference_oracle(mixture, schedule);
    const auto reference_rule = make_step_rule(job.sampler, reference_oracle, schedule, coarse);
    const auto reference = run_sequential(*reference_rule, x0, noises);
    row.parity_endpoint = parity_error(report.final_state, reference.final_state());
  }
  row.wall_ms = cfg.record_timing ? median(times) : 0.0;
  return row;
}

}  // namespace

std::vector<ReportRow> run_experiment(const ExperimentConfig& cfg) {
  const NoiseSchedule schedule = cfg.schedule.build();
  const GaussianMixture mixture(cfg.mixture);

  std::vector<Job> jobs;
  for (auto sampler : cfg.samplers) {
    for (bool parallel : cfg.parallel_modes) {
      const std::vector<double> taus = parallel ? cfg.tolerances : std::vector<double>{0.0};
      const std::vector<std::size_t> windows = parallel ? cfg.windows : std::vector<std::size_t>{1};
      for (double tau : taus) {
        for (std::size_t p : windows) {
          for (auto seed : cfg.seeds) jobs.push_back({sampler, parallel, tau, p, seed});
        }
      }
    }
  }

  std::vector<ReportRow> rows(jobs.size());
  WorkerPool pool(cfg.seed_workers);
  pool.parallel_for(jobs.size(), [&](std::size_t i) { rows[i] = run_job(cfg, schedule, mixture, jobs[i]); });
  return rows;
}

// ---------------------------------------------------------------------------
// Report IO

namespace {

constexpr std::string_view kCsvHeader =
    "seed,sampler,parallel,T,p,tau,workers,model_evals,parallel_iters,wall_ms,parity_endpoint,stride_trace";

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string join_trace(const std::vector<std::size_t>& trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i > 0) out += ';';
    out += std::to_string(trace[i]);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view text, const char* field, std::size_t line) {
  T value{};
  if constexpr (std::is_floating_point_v<T>) {
    if (text == "inf") return std::numeric_limits<T>::infinity();
    if (text == "-inf") return -std::numeric_limits<T>::infinity();
  }
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw SchemaError(fmt::format("line {}: column {}: cannot parse '{}'", line, field, text));
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::string rows_to_csv(const std::vector<ReportRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.seed, r.sampler, r.parallel ? "true" : "false",
                       r.num_steps, r.window, format_double(r.tolerance), r.workers, r.model_evals, r.parallel_iters,
                       format_double(r.wall_ms), format_double(r.parity_endpoint), join_trace(r.stride_trace));
  }
  return out;
}

std::vector<ReportRow> rows_from_csv(std::string_view text) {
  auto lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  if (lines.empty() || lines.front() != kCsvHeader) {
    throw SchemaError(fmt::format("unexpected CSV header (expected '{}')", kCsvHeader));
  }
  std::vector<ReportRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    const auto f = split(lines[i], ',');
    if (f.size() != 12) throw SchemaError(fmt::format("line {}: expected 12 columns, found {}", line, f.size()));
    ReportRow r;
    r.seed = parse_number<std::uint64_t>(f[0], "seed", line);
    r.sampler = std::string(f[1]);
    if (f[2] != "true" && f[2] != "false") throw SchemaError(fmt::format("line {}: column parallel must be true/false", line));
    r.parallel = f[2] == "true";
    r.num_steps = parse_number<std::size_t>(f[3], "T", line);
    r.window = parse_number<std::size_t>(f[4], "p", line);
    r.tolerance = parse_number<double>(f[5], "tau", line);
    r.workers = parse_number<std::size_t>(f[6], "workers", line);
    r.model_evals = parse_number<std::uint64_t>(f[7], "model_evals", line);
    r.parallel_iters = parse_number<std::size_t>(f[8], "parallel_iters", line);
    r.wall_ms = parse_number<double>(f[9], "wall_ms", line);
    r.parity_endpoint = parse_number<double>(f[10], "parity_endpoint", line);
    if (!f[11].empty()) {
      for (auto s : split(f[11], ';')) r.stride_trace.push_back(parse_number<std::size_t>(s, "stride_trace", line));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string rows_to_json(const std::vector<ReportRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["sampler"] = r.sampler;
    j["parallel"] = r.parallel;
    j["T"] = r.num_steps;
    j["p"] = r.window;
    if (std::isfinite(r.tolerance)) j["tau"] = r.tolerance;
    else j["tau"] = format_double(r.tolerance);
    j["workers"] = r.workers;
    j["model_evals"] = r.model_evals;
    j["parallel_iters"] = r.parallel_iters;
    j["wall_ms"] = r.wall_ms;
    j["parity_endpoint"] = r.parity_endpoint;
    j["stride_trace"] = r.stride_trace;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::vector<ReportRow> rows_from_json(std::string_view text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!arr.is_array()) throw SchemaError("JSON report must be an array of rows");
  static const std::set<std::string> keys = {"seed", "sampler", "parallel", "T", "p", "tau", "workers",
                                             "model_evals", "parallel_iters", "wall_ms", "parity_endpoint",
                                             "stride_trace"};
  std::vector<ReportRow> rows;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& j = arr[i];
    if (!j.is_object() || j.size() != keys.size()) throw SchemaError(fmt::format("row {}: wrong field set", i));
    for (const auto& [k, v] : j.items()) {
      if (!keys.contains(k)) throw SchemaError(fmt::format("row {}: unknown field '{}'", i, k));
    }
    try {
      ReportRow r;
      r.seed = j.at("seed").get<std::uint64_t>();
      r.sampler = j.at("sampler").get<std::string>();
      r.parallel = j.at("parallel").get<bool>();
      r.num_steps = j.at("T").get<std::size_t>();
      r.window = j.at("p").get<std::size_t>();
      const auto& tau = j.at("tau");
      r.tolerance = tau.is_string() ? parse_number<double>(tau.get<std::string>(), "tau", i) : tau.get<double>();
      r.workers = j.at("workers").get<std::size_t>();
      r.model_evals = j.at("model_evals").get<std::uint64_t>();
      r.parallel_iters = j.at("parallel_iters").get<std::size_t>();
      r.wall_ms = j.at("wall_ms").get<double>();
      r.parity_endpoint = j.at("parity_endpoint").get<double>();
      r.stride_trace = j.at("stride_trace").get<std::vector<std::size_t>>();
      rows.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(fmt::format("row {}: {}", i, e.what()));
    }
  }
  return rows;
}

std::vector<ReportRow> parse_rows(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '[') return rows_from_json(text);
  return rows_from_csv(text);
}

// ---------------------------------------------------------------------------
// Comparison

namespace {

RunReport as_report(const ReportRow& r) {
  RunReport out;
  out.model_evals = r.model_evals;
  out.parallel_iterations = r.parallel_iters;
  out.stride_trace = r.stride_trace;
  out.num_steps = r.num_steps;
  out.wall_time = r.wall_ms / 1e3;
  return out;
}

auto key_of(const ReportRow& r) { return std::make_tuple(r.seed, r.sampler, r.num_steps); }

}  // namespace

std::vector<ComparisonRow> compare_rows(const std::vector<ReportRow>& sequential,
                                        const std::vector<ReportRow>& parallel) {
  const bool positional =
      sequential.size() == parallel.size() &&
      std::equal(sequential.begin(), sequential.end(), parallel.begin(),
                 [](const ReportRow& a, const ReportRow& b) { return key_of(a) == key_of(b); });

  std::map<std::tuple<std::uint64_t, std::string, std::size_t>, const ReportRow*> index;
  for (const auto& r : sequential) index.emplace(key_of(r), &r);

  std::vector<ComparisonRow> out;
  for (std::size_t i = 0; i < parallel.size(); ++i) {
    const auto& par = parallel[i];
    const ReportRow* seq = nullptr;
    if (positional) {
      seq = &sequential[i];
    } else {
      const auto it = index.find(key_of(par));
      if (it == index.end()) {
        // Same (seed, sampler) with a different step count is a T mismatch.
        for (const auto& r : sequential) {
          if (r.seed == par.seed && r.sampler == par.sampler) {
            throw std::invalid_argument(fmt::format("seed {} sampler {}: T differs ({} vs {})", par.seed, par.sampler,
                                                    r.num_steps, par.num_steps));
          }
        }
        throw SchemaError(fmt::format("no sequential row for seed {} sampler {} T {}", par.seed, par.sampler,
                                      par.num_steps));
      }
      seq = it->second;
    }
    ComparisonRow c;
    c.seed = par.seed;
    c.sampler = par.sampler;
    c.num_steps = par.num_steps;
    c.window = par.window;
    c.tolerance = par.tolerance;
    c.efficiency = efficiency(as_report(*seq), as_report(par));
    out.push_back(std::move(c));
  }
  return out;
}

std::string comparison_to_csv(const std::vector<ComparisonRow>& rows) {
  std::string out =
      "seed,sampler,T,p,tau,seq_evals,par_evals,algorithm_inefficiency,parallel_iters,iteration_ratio,wall_ms_seq,"
      "wall_ms_par,speedup\n";
  for (const auto& r : rows) {
    const auto& e = r.efficiency;
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.seed, r.sampler, r.num_steps, r.window,
                       format_double(r.tolerance), e.sequential_evals, e.parallel_evals,
                       format_double(e.algorithm_inefficiency), e.parallel_iterations,
                       format_double(e.iteration_ratio), format_double(e.wall_time_sequential * 1e3),
                       format_double(e.wall_time_parallel * 1e3), format_double(e.speedup));
  }
  return out;
}

}  // namespace paradigms
