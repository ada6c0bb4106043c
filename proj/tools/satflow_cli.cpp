#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "satflow/satflow.h"

namespace {

int execute(const std::string& command, const std::string& target, const std::vector<std::string>& sets,
            const std::string& out_dir, bool print_json) {
  std::vector<const char*> overrides;
  for (const auto& s : sets) overrides.push_back(s.c_str());
  sf_result* result = nullptr;
  const sf_status st = sf_app_run(command.c_str(), target.c_str(), overrides.data(), overrides.size(),
                                  out_dir.empty() ? nullptr : out_dir.c_str(), &result);
  if (st != SF_OK) {
    std::fprintf(stderr, "satflow: %s: %s\n", sf_status_string(st), sf_last_error_message());
    return 3;
  }
  const int code = sf_result_exit_code(result);
  std::fputs(sf_result_summary(result), code == 0 ? stdout : stderr);
  if (print_json) std::fputs(sf_result_json(result), stdout);
  sf_result_destroy(result);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Implicit upwind finite-volume solver for saturated-mobility gradient flows"};
  cli.require_subcommand(1);
  cli.set_version_flag("--version", sf_version());

  std::string target, out_dir;
  std::vector<std::string> sets;
  bool print_json = false;

  auto common = [&](CLI::App* sub, const char* what, const char* help) {
    sub->add_option(what, target, help)->required();
    sub->add_option("--set", sets, "Override a config entry, section.key=value (repeatable)");
    sub->add_option("--out", out_dir, "Output directory (overrides outputs.directory)");
    sub->add_flag("--json", print_json, "Print the machine-readable report to stdout");
  };
  auto* run = cli.add_subcommand("run", "Evolve the configured problem");
  common(run, "config", "Config file");
  auto* scenario = cli.add_subcommand("scenario", "Run a built-in scenario with its embedded assertions");
  common(scenario, "name", "Scenario name (see `list`)");
  auto* steady = cli.add_subcommand("steady", "Solve for the steady profile of the initial mass");
  common(steady, "config", "Config file");
  auto* audit = cli.add_subcommand("audit", "Contraction, comparison and energy audits");
  common(audit, "config", "Config file");

  auto* list = cli.add_subcommand("list", "List scenarios and config keys");
  bool keys = false;
  std::string show;
  list->add_flag("--keys", keys, "List config keys instead of scenarios");
  list->add_option("--show", show, "Print the default config of a scenario");

  CLI11_PARSE(cli, argc, argv);

  if (list->parsed()) {
    if (!show.empty()) {
      const char* text = sf_scenario_config(show.c_str());
      if (!text) {
        std::fprintf(stderr, "satflow: unknown scenario '%s'\n", show.c_str());
        return 4;
      }
      std::fputs(text, stdout);
      return 0;
    }
    if (keys) {
      for (size_t i = 0; i < sf_config_key_count(); ++i) std::printf("%s\n", sf_config_key(i));
    } else {
      for (size_t i = 0; i < sf_scenario_count(); ++i) std::printf("%s\n", sf_scenario_name(i));
    }
    return 0;
  }
  for (auto* sub : {run, scenario, steady, audit})
    if (sub->parsed()) return execute(sub->get_name(), target, sets, out_dir, print_json);
  return 4;
}
