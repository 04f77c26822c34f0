// paradigms: run sampler experiments from a YAML config and compare reports.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "CLI11.hpp"
#include "paradigms/experiment.hpp"
#include "paradigms/picard.hpp"

namespace {

using namespace paradigms;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_output(const std::optional<std::filesystem::path>& path, const std::string& text) {
  if (!path) {
    std::cout << text;
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path->string());
  out << text;
}

int cmd_run(const std::string& config_path, const std::string& out_path, const std::string& format) {
  ExperimentConfig config = load_config(config_path);
  if (!out_path.empty()) config.output = out_path;
  if (format == "csv") config.format = OutputFormat::kCsv;
  else if (format == "json") config.format = OutputFormat::kJson;
  const auto rows = run_experiment(config);
  write_output(config.output, config.format == OutputFormat::kJson ? rows_to_json(rows) : rows_to_csv(rows));
  return kExitOk;
}

int cmd_compare(const std::string& seq_path, const std::string& par_path, const std::string& out_path) {
  const auto seq = parse_rows(read_file(seq_path));
  const auto par = parse_rows(read_file(par_path));
  const auto table = comparison_to_csv(compare_rows(seq, par));
  std::cout << table;
  if (!out_path.empty()) write_output(std::filesystem::path(out_path), table);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sliding-window Picard sampling of diffusion models on analytic oracles"};
  app.require_subcommand(1);

  std::string config_path, run_out, format;
  auto* run = app.add_subcommand("run", "Run the experiments described by a config file");
  run->add_option("--config", config_path, "YAML config")->required();
  run->add_option("--out", run_out, "Output path (default: config run.output, else stdout)");
  run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  std::string seq_path, par_path, compare_out;
  auto* compare = app.add_subcommand("compare", "Efficiency table from a sequential and a parallel report");
  compare->add_option("SEQ", seq_path, "Sequential report")->required();
  compare->add_option("PAR", par_path, "Parallel report")->required();
  compare->add_option("--out", compare_out, "Also write the table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  try {
    if (*run) return cmd_run(config_path, run_out, format);
    return cmd_compare(seq_path, par_path, compare_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitInvalidInput;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kExitInvalidInput;
  } catch (const NumericalDivergence& e) {
    std::cerr << fmt::format("numerical divergence: iteration={} index={}: {}\n", e.iteration(), e.index(), e.what());
    return kExitDivergence;
  } catch (const IterationLimitExceeded& e) {
    std::cerr << fmt::format("iteration limit {} exceeded: {} (strides so far: {})\n", e.limit(), e.what(), fmt::join(e.stride_trace(), ";"));
    return kExitDivergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
