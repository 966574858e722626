#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "twofold/log.hpp"
#include "twofold/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"config-driven experiments around a visible-invisible two-fold"};
  app.require_subcommand(1);

  std::string run_cfg, out_override;
  int jobs = 1;
  CLI::App* run = app.add_subcommand("run", "execute a scenario and write its artifacts");
  run->add_option("config", run_cfg, "JSON config file")->required();
  run->add_option("--jobs", jobs, "worker threads, 0 means all hardware threads");
  run->add_option("--out", out_override, "override the config's output_dir");

  std::string val_cfg;
  CLI::App* val = app.add_subcommand("validate", "check a config and print findings");
  val->add_option("config", val_cfg, "JSON config file")->required();

  CLI11_PARSE(app, argc, argv);

  using namespace twofold;

  if (val->parsed()) {
    Json report;
    try {
      ScenarioConfig cfg = load_config(val_cfg);
      report = findings_json(validate_config(cfg));
    } catch (const error& e) {
      std::vector<Finding> fs{{errc_name(e.code()), e.what(), Severity::Error}};
      report = findings_json(fs);
    }
    std::string text = report.dump() + "\n";
    std::fwrite(text.data(), 1, text.size(), stdout);
    return 0;
  }

  ScenarioConfig cfg;
  try {
    cfg = load_config(run_cfg);
  } catch (const error& e) {
    log_error(e.what());
    return 2;
  }
  if (!out_override.empty()) cfg.output_dir = out_override;

  bool fatal = false;
  for (const Finding& f : validate_config(cfg)) {
    if (f.severity == Severity::Error) {
      fatal = true;
      log_error(f.code + ": " + f.message);
    } else {
      log_info(f.code + ": " + f.message);
    }
  }
  if (fatal) return 2;

  if (jobs == 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  log_info(std::string("running ") + scenario_name(cfg.scenario) + " into " + cfg.output_dir);
  try {
    return run_scenario(cfg, jobs);
  } catch (const std::exception& e) {
    log_error(e.what());
    return 3;
  }
}
