#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "paradigms/metrics.hpp"
#include "paradigms/oracle.hpp"
#include "paradigms/samplers.hpp"
#include "paradigms/schedule.hpp"

namespace paradigms {

/// Invalid experiment configuration; `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, std::string field, const std::string& message);

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// A report file that does not match the row schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScheduleSpec {
  std::size_t num_steps = 100;
  std::optional<double> beta_min;
  std::optional<double> beta_max;
  bool zero_final_sigma = false;

  NoiseSchedule build() const;
};

enum class OutputFormat { kCsv, kJson };

struct ExperimentConfig {
  ScheduleSpec schedule;
  std::vector<MixtureComponent> mixture;
  std::vector<SamplerKind> samplers{SamplerKind::kDdpm};
  std::vector<bool> parallel_modes{false};
  std::vector<double> tolerances{0.1};
  std::vector<std::size_t> windows{20};
  /// Steps for ddim/heun; defaults to T. Ignored by ddpm.
  std::optional<std::size_t> num_steps;
  std::size_t workers = 1;
  std::vector<std::uint64_t> seeds{0};
  std::optional<std::size_t> max_iterations;
  std::optional<std::filesystem::path> output;
  OutputFormat format = OutputFormat::kCsv;
  bool record_timing = true;
  std::size_t timing_repeats = 5;
  std::uint64_t eval_cost_us = 0;
  std::size_t seed_workers = 1;
};

/// Environment variable holding the default worker count.
inline constexpr const char* kWorkersEnv = "PARADIGMS_WORKERS";

/// Parses YAML text with sections `schedule`, `mixture` and `run`. Unknown keys
/// are rejected. `default_workers` applies when run.workers is absent.
ExperimentConfig parse_config(std::string_view text, std::size_t default_workers = 1);
/// Reads a config file, taking the default worker count from PARADIGMS_WORKERS.
ExperimentConfig load_config(const std::filesystem::path& path);

struct ReportRow {
  std::uint64_t seed = 0;
  std::string sampler;
  bool parallel = false;
  /// Number of sampler steps.
  std::size_t num_steps = 0;
  std::size_t window = 1;
  double tolerance = 0.0;
  std::size_t workers = 1;
  std::uint64_t model_evals = 0;
  std::size_t parallel_iters = 0;
  double wall_ms = 0.0;
  double parity_endpoint = 0.0;
  std::vector<std::size_t> stride_trace;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Runs every (sampler, mode, tolerance, window, seed) combination and returns
/// rows in that nesting order, seeds innermost.
std::vector<ReportRow> run_experiment(const ExperimentConfig& config);

std::string rows_to_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> rows_from_csv(std::string_view text);
std::string rows_to_json(const std::vector<ReportRow>& rows);
std::vector<ReportRow> rows_from_json(std::string_view text);
/// Dispatches on content: JSON arrays start with '['.
std::vector<ReportRow> parse_rows(std::string_view text);

struct ComparisonRow {
  std::uint64_t seed = 0;
  std::string sampler;
  std::size_t num_steps = 0;
  std::size_t window = 1;
  double tolerance = 0.0;
  EfficiencyReport efficiency;
};

/// Pairs rows positionally when both files list the same (seed, sampler, T)
/// sequence, otherwise each PAR row with the first SEQ row sharing (seed, sampler, T).
std::vector<ComparisonRow> compare_rows(const std::vector<ReportRow>& sequential,
                                        const std::vector<ReportRow>& parallel);
std::string comparison_to_csv(const std::vector<ComparisonRow>& rows);

/// Exit codes of the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidInput = 2;
inline constexpr int kExitDivergence = 3;

}  // namespace paradigms
