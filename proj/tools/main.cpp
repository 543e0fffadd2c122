#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

int main(int argc, char** argv) {
  using namespace crossdiff::cli;
  CLI::App app{"Finite-volume solver and continuation harness for two-species cross-diffusion systems"};
  app.require_subcommand(1);

  std::string config;
  CommandOptions options;
  std::string out;
  int threads = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides outputs.directory)");
    sub->add_option("--threads", threads, "worker threads for sweep rungs")->check(CLI::PositiveNumber);
    sub->add_option("--format", options.formats, "output formats (repeatable): csv, json, svg")
        ->check(CLI::IsMember({"csv", "json", "svg"}));
  };
  CLI::App* run = app.add_subcommand("run", "integrate one configuration and write snapshots and diagnostics");
  CLI::App* sweep = app.add_subcommand("sweep", "run the epsilon ladder and write the sweep report");
  CLI::App* diagnose = app.add_subcommand("diagnose", "run with entropy and balance-law monitors");
  CLI::App* oracle = app.add_subcommand("oracle-check", "compare a single-species run against its closed form");
  CLI::App* schema = app.add_subcommand("schema", "print the configuration JSON schema");
  for (CLI::App* sub : {run, sweep, diagnose, oracle}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  if (schema->parsed()) {
    std::cout << config_schema().dump(2) << "\n";
    return kOk;
  }
  if (!out.empty()) options.out = out;
  if (threads > 0) options.threads = threads;

  if (run->parsed()) return cmd_run(config, options, std::cerr);
  if (sweep->parsed()) return cmd_sweep(config, options, std::cerr);
  if (diagnose->parsed()) return cmd_diagnose(config, options, std::cerr);
  return cmd_oracle_check(config, options, std::cerr);
}
