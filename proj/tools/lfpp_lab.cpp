// lfpp-lab: run, resume and report LFPP experiments.

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lfpp/field_sampler.hpp"
#include "lfpp/harness.hpp"

namespace {

int fail(int code, const char* type, const std::string& message) {
  nlohmann::ordered_json j = {{"error", {{"code", code}, {"type", type}, {"message", message}}}};
  std::cerr << j.dump() << "\n";
  return code;
}

void print_outcome(const lfpp::RunOutcome& o) {
  nlohmann::ordered_json j = {{"dir", o.dir.string()},
                              {"complete", o.complete},
                              {"units_done", o.units_done},
                              {"units_total", o.units_total}};
  std::cout << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LFPP simulation lab"};
  app.require_subcommand(1);

  std::string config_path, dir;
  std::vector<std::string> sets;
  int jobs = 0;
  std::size_t stop_after = 0;

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--jobs", jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  run->add_option("--set", sets, "override a config entry, key=value (repeatable)");
  run->add_option("--stop-after", stop_after)->group("");

  auto* resume = app.add_subcommand("resume", "finish an interrupted run");
  resume->add_option("dir", dir, "results directory")->required();
  resume->add_option("--jobs", jobs, "worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  resume->add_option("--stop-after", stop_after)->group("");

  auto* report = app.add_subcommand("report", "print tables from a finished run");
  report->add_option("dir", dir, "results directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, "usage", e.what());
  }

  try {
    if (const char* cache = std::getenv("LFPP_LAB_CACHE"); cache && *cache)
      lfpp::set_field_cache(cache);

    lfpp::RunOptions opt;
    opt.jobs = jobs;
    if (stop_after > 0) opt.stop_after = stop_after;

    if (run->parsed()) {
      auto cfg = lfpp::load_config(config_path);
      for (const auto& s : sets) lfpp::apply_override(cfg, s);
      opt.config_source = config_path;
      opt.overrides = sets;
      print_outcome(lfpp::run_experiment(cfg, opt));
    } else if (resume->parsed()) {
      print_outcome(lfpp::resume_experiment(dir, opt));
    } else {
      std::cout << lfpp::report_experiment(dir);
    }
  } catch (const lfpp::MismatchError& e) {
    return fail(2, "mismatch", e.what());
  } catch (const lfpp::PreconditionError& e) {
    return fail(2, "validation", e.what());
  } catch (const lfpp::ResourceError& e) {
    return fail(3, "resource", e.what());
  } catch (const std::exception& e) {
    return fail(1, "runtime", e.what());
  }
  return 0;
}
