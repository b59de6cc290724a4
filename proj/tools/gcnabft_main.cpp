// Command-line front end: fault-free checking, fault-injection campaigns,
// operation accounting, and phase-share reports over GCN inference with
// interchangeable ABFT checkers.
//
// Exit codes: 0 success, 1 a checksum check flagged, 2 usage/config/data
// error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gcnabft/report.hpp"

namespace fs = std::filesystem;
using namespace gcnabft;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> formats;  // empty: all three
  std::string checker;  // empty: keep the config's selection
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> jobs;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "run configuration file")
      ->required();
  cmd->add_option("--out", opts.out_dir, "output directory for report files");
  cmd->add_option("--format", opts.formats,
                  "report formats to write (default: all)")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  cmd->add_option("--checker", opts.checker,
                  "checker selection (overrides the config)")
      ->check(CLI::IsMember({"split", "fused", "both"}));
  cmd->add_option("--seed", opts.seed, "override the campaign master seed");
  cmd->add_option("--jobs", opts.jobs,
                  "worker threads for campaigns (0: hardware concurrency)");
}

struct LoadedRun {
  RunConfig config;
  DatasetBundle bundle;
  PreparedRun run;
};

LoadedRun load_run(const CommonOpts& opts) {
  RunConfig config = load_config(opts.config_path);
  if (opts.seed) config.campaign.master_seed = *opts.seed;
  if (opts.jobs) config.campaign.jobs = *opts.jobs;
  if (opts.checker == "split")
    config.campaign.checkers = {CheckerKind::Split};
  else if (opts.checker == "fused")
    config.campaign.checkers = {CheckerKind::Fused};
  else if (opts.checker == "both")
    config.campaign.checkers = {CheckerKind::Split, CheckerKind::Fused};

  DatasetBundle bundle = load_bundle(config);
  PreparedRun run = prepare_run(bundle, config.feature_rep);
  return LoadedRun{std::move(config), std::move(bundle), std::move(run)};
}

void write_report(const ReportDocument& report, const CommonOpts& opts) {
  std::vector<std::string> formats = opts.formats;
  if (formats.empty()) formats = {"json", "csv", "text"};
  fs::create_directories(opts.out_dir);
  for (const std::string& f : formats) {
    const char* ext = f == "json" ? ".json" : f == "csv" ? ".csv" : ".txt";
    const fs::path path = fs::path(opts.out_dir) / (report.command() + ext);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    if (f == "json")
      out << report.to_json();
    else if (f == "csv")
      out << report.to_csv();
    else
      out << report.to_text();
  }
}

int cmd_check(const CommonOpts& opts) {
  LoadedRun loaded = load_run(opts);
  CheckOutcome outcome =
      build_check_report(loaded.run, loaded.bundle.name,
                         loaded.config.campaign.checkers, loaded.config.tau);
  write_report(outcome.report, opts);
  std::cout << outcome.report.to_text();
  if (outcome.any_flag) {
    std::cout << "check: FLAGGED (tau=" << loaded.config.tau << ")\n";
    return 1;
  }
  std::cout << "check: clean (tau=" << loaded.config.tau << ")\n";
  return 0;
}

int cmd_campaign(const CommonOpts& opts) {
  LoadedRun loaded = load_run(opts);
  CampaignReport rep = run_campaign(loaded.run.model, loaded.run.features(),
                                    loaded.config.campaign);
  ReportDocument report =
      build_campaign_report(loaded.run, loaded.bundle.name, rep);
  write_report(report, opts);
  std::cout << report.to_text();
  return 0;
}

int cmd_opcount(const CommonOpts& opts) {
  LoadedRun loaded = load_run(opts);
  ReportDocument report = build_opcount_report(loaded.run, loaded.bundle.name);
  write_report(report, opts);
  std::cout << report.to_text();
  return 0;
}

int cmd_phases(const CommonOpts& opts) {
  LoadedRun loaded = load_run(opts);
  ReportDocument report = build_phases_report(loaded.run, loaded.bundle.name);
  write_report(report, opts);
  std::cout << report.to_text();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GCN inference with interchangeable ABFT checkers"};
  app.require_subcommand(1);

  CommonOpts check_opts, campaign_opts, opcount_opts, phases_opts;
  CLI::App* check = app.add_subcommand(
      "check", "fault-free inference; verify all checksum verdicts are clean");
  add_common(check, check_opts);
  CLI::App* campaign =
      app.add_subcommand("campaign", "run a bit-flip fault-injection campaign");
  add_common(campaign, campaign_opts);
  CLI::App* opcount = app.add_subcommand(
      "opcount", "instrumented and closed-form operation counts");
  add_common(opcount, opcount_opts);
  CLI::App* phases = app.add_subcommand(
      "phases", "per-layer op share of the two multiplication phases");
  add_common(phases, phases_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (check->parsed()) return cmd_check(check_opts);
    if (campaign->parsed()) return cmd_campaign(campaign_opts);
    if (opcount->parsed()) return cmd_opcount(opcount_opts);
    if (phases->parsed()) return cmd_phases(phases_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
