// Command-line front end. Everything goes through the C API.

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "irtcat/irtcat.h"

namespace {

struct Leaf {
  std::string command;
  std::string subcommand;
  CLI::App* app = nullptr;
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::map<std::string, std::string> inputs;
};

const std::map<std::string, std::string> kInputFlags{
    {"bank", "--bank"},         {"responses", "--responses"}, {"events", "--events"},
    {"labels", "--labels"},     {"item_levels", "--item-levels"}, {"truth", "--truth"}};

Leaf& add_leaf(std::vector<std::unique_ptr<Leaf>>& leaves, CLI::App* parent, const std::string& command,
               const std::string& sub, const std::string& help, const std::vector<std::string>& roles) {
  auto leaf = std::make_unique<Leaf>();
  leaf->command = command;
  leaf->subcommand = sub;
  leaf->app = sub.empty() ? parent : parent->add_subcommand(sub, help);
  auto* app = leaf->app;
  app->add_option("--config", leaf->config, "JSON settings file");
  app->add_option("--out", leaf->out, "output file or directory")->required();
  app->add_option("--seed", leaf->seed, "random seed (drawn and recorded when omitted)");
  app->add_option("--workers", leaf->workers, "worker threads")->check(CLI::PositiveNumber);
  for (const auto& role : roles) {
    app->add_option(kInputFlags.at(role), leaf->inputs[role], role + " file");
  }
  leaves.push_back(std::move(leaf));
  return *leaves.back();
}

int report(irtcat_status status) {
  if (status == IRTCAT_OK) {
    std::printf("%s\n", irtcat_last_summary());
    return 0;
  }
  if (*irtcat_last_summary()) std::printf("%s\n", irtcat_last_summary());
  std::fprintf(stderr, "irtcat: %s: %s\n", irtcat_status_name(status), irtcat_last_error());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive testing with the three-parameter logistic model", "irtcat"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(irtcat_version()));
  std::vector<std::unique_ptr<Leaf>> leaves;

  auto* synth = app.add_subcommand("synth", "generate synthetic datasets");
  synth->require_subcommand(1);
  add_leaf(leaves, synth, "synth", "bank", "synthetic item bank and item CEFR levels", {});
  add_leaf(leaves, synth, "synth", "responses", "synthetic learner responses to a bank", {"bank"});
  add_leaf(leaves, synth, "synth", "exercises", "synthetic exercise events and CEFR labels", {});

  auto* calibrate = app.add_subcommand("calibrate", "fit item parameters and abilities from responses");
  add_leaf(leaves, calibrate, "calibrate", "", "", {"responses"});

  auto* simulate = app.add_subcommand("simulate", "run simulated or replayed adaptive sessions");
  simulate->require_subcommand(1);
  add_leaf(leaves, simulate, "simulate", "grid", "session traces on a grid of true abilities", {"bank"});
  add_leaf(leaves, simulate, "simulate", "batch", "sessions with uniformly drawn true abilities", {"bank"});
  add_leaf(leaves, simulate, "simulate", "slip-sweep", "slip and exploration comparison", {"bank"});
  add_leaf(leaves, simulate, "simulate", "term-sweep", "termination criterion sweep", {"bank"});
  add_leaf(leaves, simulate, "simulate", "replay", "replay recorded learner responses",
           {"bank", "responses", "item_levels", "truth"});

  auto* exercise = app.add_subcommand("exercise", "construct-level analytics from exercise logs");
  exercise->require_subcommand(1);
  add_leaf(leaves, exercise, "exercise", "ingest", "per-construct credit and penalty counts", {"events"});
  add_leaf(leaves, exercise, "exercise", "fit", "calibrate constructs and student abilities", {"events"});
  add_leaf(leaves, exercise, "exercise", "grid", "filter grid against CEFR labels", {"events", "labels"});

  std::string manifest, rerun_out;
  unsigned rerun_workers = 1;
  auto* rerun = app.add_subcommand("rerun", "repeat a run from its manifest");
  rerun->add_option("--manifest", manifest, "manifest.json of a previous run")->required();
  rerun->add_option("--out", rerun_out, "output file or directory")->required();
  rerun->add_option("--workers", rerun_workers, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : IRTCAT_INVALID_ARGUMENT;
  }

  if (rerun->parsed()) return report(irtcat_rerun(manifest.c_str(), rerun_out.c_str(), rerun_workers));

  for (const auto& leaf : leaves) {
    if (!leaf->app->parsed()) continue;
    std::vector<irtcat_input> inputs;
    for (const auto& [role, path] : leaf->inputs) {
      if (!path.empty()) inputs.push_back({role.c_str(), path.c_str()});
    }
    irtcat_run_options options{};
    options.config_path = leaf->config.empty() ? nullptr : leaf->config.c_str();
    options.inputs = inputs.data();
    options.n_inputs = inputs.size();
    options.out = leaf->out.c_str();
    options.has_seed = leaf->app->count("--seed") > 0;
    options.seed = leaf->seed;
    options.workers = leaf->workers;
    return report(irtcat_run(leaf->command.c_str(), leaf->subcommand.c_str(), &options));
  }
  return IRTCAT_INVALID_ARGUMENT;
}
