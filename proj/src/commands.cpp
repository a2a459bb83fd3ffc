#include "irtcat/commands.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "irtcat/error.hpp"
#include "irtcat/exercise.hpp"
#include "irtcat/io.hpp"
#include "irtcat/simulator.hpp"
#include "irtcat/synth.hpp"

namespace irtcat::commands {

namespace fs = std::filesystem;
using config::Json;
using config::Reader;

std::string sha256_file(const fs::path& path) {
  const std::string data = io::read_text_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::Internal, "SHA-256 digest failed for '" + path.string() + "'");
  }
  std::string hex;
  char buf[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

namespace {

/// State of one command invocation: resolved settings, inputs and outputs.
class Run {
 public:
  Run(const Request& req, std::set<std::string> allowed_inputs, bool directory_output)
      : req_(req), directory_output_(directory_output) {
    for (const auto& [role, _] : req.inputs) {
      if (!allowed_inputs.count(role)) {
        fail(ErrorCode::InvalidArgument,
             label() + " does not take a '" + role + "' input");
      }
    }
    if (req.out.empty()) fail(ErrorCode::InvalidArgument, label() + " needs an output path");
    if (req.resolved_config) {
      raw_config_ = *req.resolved_config;
    } else if (req.config_path) {
      raw_config_ = config::parse_json(io::read_text_file(*req.config_path), req.config_path->string());
    } else {
      raw_config_ = Json::object();
    }
    if (directory_output_) fs::create_directories(req.out);
  }

  std::string label() const {
    return req_.subcommand.empty() ? req_.command : req_.command + " " + req_.subcommand;
  }

  Reader reader() const { return Reader(raw_config_, "config"); }

  std::optional<fs::path> input(const std::string& role) {
    auto it = req_.inputs.find(role);
    if (it == req_.inputs.end()) return std::nullopt;
    const fs::path path = fs::absolute(it->second).lexically_normal();
    inputs_[role] = Json{{"path", path.string()}, {"sha256", sha256_file(path)}};
    return path;
  }

  fs::path require_input(const std::string& role) {
    auto path = input(role);
    if (!path) fail(ErrorCode::InvalidArgument, label() + " needs a '" + role + "' input");
    return *path;
  }

  std::uint64_t seed() {
    if (!seed_) {
      seed_ = req_.seed ? *req_.seed : (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^
                                           std::random_device{}();
    }
    return *seed_;
  }

  /// Path of an output; `name` is relative to the output directory, or a
  /// suffix appended to the output file name.
  fs::path output_path(const std::string& name) const {
    if (directory_output_) return req_.out / name;
    return fs::path(req_.out.string() + name);
  }

  void emit(const std::string& name, const std::string& content) {
    io::write_text_file(output_path(name), content);
    outputs_.push_back(directory_output_ ? name : output_path(name).filename().string());
  }

  template <class Writer>
  void emit_with(const std::string& name, Writer&& writer) {
    std::ostringstream os;
    writer(os);
    emit(name, os.str());
  }

  Result finish(Json resolved, std::string summary) {
    Json manifest;
    manifest["tool"] = "irtcat";
    manifest["tool_version"] = kToolVersion;
    manifest["command"] = req_.command;
    manifest["subcommand"] = req_.subcommand;
    manifest["config"] = std::move(resolved);
    manifest["seed"] = seed_ ? Json(*seed_) : Json(nullptr);
    manifest["inputs"] = inputs_;
    manifest["outputs"] = outputs_;
    Result result;
    result.manifest = output_path(directory_output_ ? "manifest.json" : ".manifest.json");
    io::write_text_file(result.manifest, manifest.dump(2) + "\n");
    result.outputs = outputs_;
    result.summary = std::move(summary);
    return result;
  }

  const Request& request() const { return req_; }

 private:
  const Request& req_;
  bool directory_output_;
  Json raw_config_;
  Json inputs_ = Json::object();
  std::optional<std::uint64_t> seed_;
  std::vector<std::string> outputs_;
};

std::string describe_seed(std::uint64_t seed) { return "seed " + std::to_string(seed); }

// ---------------------------------------------------------------- synth

Result synth_command(const Request& req) {
  const std::string& kind = req.subcommand;
  if (kind == "bank") {
    Run run(req, {}, false);
    auto r = run.reader();
    const auto spec = config::read_bank_spec(r, {});
    const auto seed = run.seed();
    const auto out = synth::make_bank(spec, seed);
    const io::Comments header{"generator synth bank", describe_seed(seed),
                              "params " + config::to_json(spec).dump()};
    run.emit_with("", [&](std::ostream& os) { io::write_bank(os, out.bank, header); });
    run.emit_with(".levels", [&](std::ostream& os) { io::write_levels(os, out.item_levels, header); });
    return run.finish(config::to_json(spec),
                      "wrote " + std::to_string(out.bank.size()) + " items (" + describe_seed(seed) + ")");
  }
  if (kind == "responses") {
    Run run(req, {"bank"}, false);
    const auto bank = io::read_file(run.require_input("bank"), io::read_bank);
    auto r = run.reader();
    const auto spec = config::read_responses_spec(r, {});
    const auto seed = run.seed();
    const auto out = synth::make_responses(bank, spec, seed);
    const io::Comments header{"generator synth responses", describe_seed(seed),
                              "params " + config::to_json(spec).dump()};
    run.emit_with("", [&](std::ostream& os) { io::write_responses(os, out.records, header); });
    run.emit_with(".truth", [&](std::ostream& os) { io::write_truth(os, out.truth, header); });
    return run.finish(config::to_json(spec), "wrote " + std::to_string(out.records.size()) +
                                                 " responses for " + std::to_string(out.truth.size()) +
                                                 " learners (" + describe_seed(seed) + ")");
  }
  if (kind == "exercises") {
    Run run(req, {}, false);
    auto r = run.reader();
    const auto spec = config::read_exercises_spec(r, {});
    const auto seed = run.seed();
    const auto out = synth::make_exercises(spec, seed);
    const io::Comments header{"generator synth exercises", describe_seed(seed),
                              "params " + config::to_json(spec).dump()};
    run.emit_with("", [&](std::ostream& os) { io::write_events(os, out.events, header); });
    run.emit_with(".labels", [&](std::ostream& os) { io::write_levels(os, out.labels, header); });
    run.emit_with(".truth", [&](std::ostream& os) { io::write_truth(os, out.truth, header); });
    return run.finish(config::to_json(spec), "wrote " + std::to_string(out.events.size()) +
                                                 " exercise events for " +
                                                 std::to_string(out.truth.size()) + " students (" +
                                                 describe_seed(seed) + ")");
  }
  fail(ErrorCode::InvalidArgument, "unknown synth kind '" + kind + "' (bank|responses|exercises)");
}

// ------------------------------------------------------------ calibrate

Result calibrate_command(const Request& req) {
  Run run(req, {"responses"}, false);
  const auto records = io::read_file(run.require_input("responses"), io::read_responses);
  auto r = run.reader();
  auto cfg = config::read_calibration(r, {});
  cfg.workers = std::max(1u, req.workers);
  const auto fit = calibrate_bank(records, cfg);

  std::ostringstream summary;
  summary << "calibrated " << fit.bank.size() << " items from " << records.size() << " responses of "
          << fit.learner_ids.size() << " learners; " << (fit.converged ? "converged" : "NOT converged")
          << " after " << fit.iterations << " iterations (mean change "
          << io::format_double(fit.last_change) << ")";
  if (!fit.degenerate_items.empty()) {
    summary << "; degenerate items:";
    for (const auto& id : fit.degenerate_items) summary << ' ' << id;
  }
  const io::Comments header{"calibrated bank", std::string("converged ") + (fit.converged ? "yes" : "no"),
                            "iterations " + std::to_string(fit.iterations)};
  run.emit_with("", [&](std::ostream& os) { io::write_bank(os, fit.bank, header); });
  run.emit_with(".abilities", [&](std::ostream& os) {
    io::write_abilities(os, fit.learner_ids, fit.abilities);
  });
  auto result = run.finish(config::to_json(cfg), summary.str());
  if (!fit.converged) fail(ErrorCode::Convergence, result.summary);
  return result;
}

// ------------------------------------------------------------- simulate

struct SimulationSetup {
  SimulationTemplate settings;
  synth::BankSpec bank_spec;
  ItemBank bank;
  bool synthetic_bank = false;
};

SimulationTemplate simulation_defaults(const std::string& sub) {
  SimulationTemplate t;
  t.session.criterion.rule = EarlyStop{10, 0.05};
  if (sub == "grid") {
    t.slip = SlipSchedule::none();
    t.session.exploration.enabled = false;
  } else if (sub == "replay") {
    t.slip = SlipSchedule::none();
    t.session.exploration.enabled = false;
  } else if (sub == "term-sweep") {
    t.slip = SlipSchedule::none();
  } else {
    t.slip = SlipSchedule{0.05, 0.05, 0};
  }
  return t;
}

/// Reads "session", "slip" (unless replay) and "synthetic_bank", and loads
/// or generates the bank.
SimulationSetup read_simulation_setup(Run& run, Reader& r, const std::string& sub) {
  SimulationSetup setup;
  setup.settings = simulation_defaults(sub);
  if (auto s = r.child("session")) setup.settings.session = config::read_session(*s, setup.settings.session);
  if (sub != "replay") {
    if (auto s = r.child("slip")) setup.settings.slip = config::read_slip(*s, setup.settings.slip);
  }
  if (auto b = r.child("synthetic_bank")) setup.bank_spec = config::read_bank_spec(*b, setup.bank_spec);
  if (auto path = run.input("bank")) {
    setup.bank = io::read_file(*path, io::read_bank);
  } else {
    if (sub == "replay") fail(ErrorCode::InvalidArgument, "simulate replay needs a 'bank' input");
    setup.synthetic_bank = true;
    setup.bank = synth::make_bank(setup.bank_spec, Rng::derive(run.seed(), {0xBA}).next_u64()).bank;
  }
  if (setup.bank.empty()) fail(ErrorCode::Validation, "simulation bank is empty");
  return setup;
}

Json setup_json(const SimulationSetup& setup, const std::string& sub) {
  Json j;
  j["session"] = config::to_json(setup.settings.session);
  if (sub != "replay") j["slip"] = config::to_json(setup.settings.slip);
  if (setup.synthetic_bank) j["synthetic_bank"] = config::to_json(setup.bank_spec);
  return j;
}

BatchSpec read_batch_spec(Reader& r) {
  BatchSpec spec;
  spec.n_sessions = r.count("n_simulations", spec.n_sessions);
  if (const Json* range = r.raw("theta_range")) {
    if (!range->is_array() || range->size() != 2 || !(*range)[0].is_number() || !(*range)[1].is_number()) {
      fail(ErrorCode::Validation, "config.theta_range: expected [lo, hi]");
    }
    spec.theta_lo = (*range)[0].get<double>();
    spec.theta_hi = (*range)[1].get<double>();
  }
  if (!(spec.theta_hi >= spec.theta_lo)) fail(ErrorCode::Validation, "config.theta_range: lo must be <= hi");
  return spec;
}

void put_batch_spec(Json& j, const BatchSpec& spec) {
  j["n_simulations"] = spec.n_sessions;
  j["theta_range"] = Json::array({spec.theta_lo, spec.theta_hi});
}

std::string metrics_summary(const std::vector<BatchMetrics>& rows) {
  std::ostringstream os;
  for (const auto& m : rows) {
    os << m.label << ": mean length " << io::format_double(m.mean_iterations) << ", MAE "
       << io::format_double(m.mae) << ", forced " << m.forced_stops << "/" << m.n_sessions << '\n';
  }
  return os.str();
}

Result simulate_command(const Request& req) {
  const std::string& sub = req.subcommand;
  static const std::set<std::string> known{"grid", "batch", "slip-sweep", "term-sweep", "replay"};
  if (!known.count(sub)) {
    fail(ErrorCode::InvalidArgument,
         "unknown simulate subcommand '" + sub + "' (grid|batch|slip-sweep|term-sweep|replay)");
  }
  std::set<std::string> inputs{"bank"};
  if (sub == "replay") inputs = {"bank", "responses", "item_levels", "truth"};
  Run run(req, inputs, true);
  auto r = run.reader();
  const unsigned workers = std::max(1u, req.workers);
  auto setup = read_simulation_setup(run, r, sub);
  Json resolved = setup_json(setup, sub);

  if (sub == "grid") {
    std::vector<double> levels{-2.0, -1.0, 0.0, 1.0, 2.0};
    if (const Json* l = r.raw("levels")) {
      if (!l->is_array()) fail(ErrorCode::Validation, "config.levels: expected an array of numbers");
      levels.clear();
      for (const auto& v : *l) {
        if (!v.is_number()) fail(ErrorCode::Validation, "config.levels: expected an array of numbers");
        levels.push_back(v.get<double>());
      }
    }
    const std::size_t per_level = r.count("per_level", 3);
    const std::size_t extra = r.count("extra_steps", 10);
    r.finish();
    resolved["levels"] = levels;
    resolved["per_level"] = per_level;
    resolved["extra_steps"] = extra;
    const auto seed = run.seed();
    const auto traces = run_artificial_grid(setup.bank, levels, per_level, setup.settings, seed, workers, extra);
    std::size_t converged = 0;
    run.emit_with("grid_summary.tsv", [&](std::ostream& os) {
      os << "level\treplicate\ttheta_true\tstop_step\ttheta_at_stop\tfinal_theta\treason\ttrace\n";
      for (std::size_t k = 0; k < traces.size(); ++k) {
        const auto& t = traces[k];
        os << k / std::max<std::size_t>(per_level, 1) << '\t' << t.replicate << '\t'
           << io::format_double(t.theta_true) << '\t' << t.result.length << '\t'
           << io::format_double(t.result.ability.theta) << '\t'
           << io::format_double(t.result.theta_trajectory.back()) << '\t'
           << to_string(t.result.reason) << "\ttraces/trace_" << k << ".tsv\n";
        if (t.result.reason == StopReason::Converged) ++converged;
      }
    });
    for (std::size_t k = 0; k < traces.size(); ++k) {
      run.emit_with("traces/trace_" + std::to_string(k) + ".tsv", [&](std::ostream& os) {
        io::write_trace(os, setup.bank, traces[k].result,
                        {"theta_true " + io::format_double(traces[k].theta_true),
                         "session_seed " + std::to_string(traces[k].seed)});
      });
    }
    return run.finish(resolved, std::to_string(traces.size()) + " traces, " + std::to_string(converged) +
                                    " converged (" + describe_seed(seed) + ")");
  }

  if (sub == "batch") {
    const auto spec = read_batch_spec(r);
    const std::string label = r.text("label", "batch");
    r.finish();
    put_batch_spec(resolved, spec);
    resolved["label"] = label;
    const auto seed = run.seed();
    const auto outcomes = run_batch_sessions(setup.bank, setup.settings, spec, seed, workers);
    std::vector<BatchMetrics> rows;
    if (!outcomes.empty()) rows.push_back(summarize(label, outcomes));
    run.emit_with("metrics.tsv", [&](std::ostream& os) { io::write_metrics(os, rows); });
    run.emit_with("sessions.tsv", [&](std::ostream& os) {
      os << "session\ttheta_true\ttheta_hat\tlength\treason\n";
      for (std::size_t i = 0; i < outcomes.size(); ++i) {
        os << i << '\t' << io::format_double(outcomes[i].theta_true) << '\t'
           << io::format_double(outcomes[i].theta_hat) << '\t' << outcomes[i].length << '\t'
           << to_string(outcomes[i].reason) << '\n';
      }
    });
    return run.finish(resolved, metrics_summary(rows) + describe_seed(seed));
  }

  if (sub == "slip-sweep") {
    const auto spec = read_batch_spec(r);
    const double slip_rate = r.number("slip_rate", 0.05);
    std::vector<ExplorationSetting> grid{{0.25, 30}, {0.25, 60}, {0.5, 30},
                                         {0.5, 60},  {1.0, 30},  {1.0, 60}};
    if (const Json* g = r.raw("exploration_grid")) {
      if (!g->is_array()) fail(ErrorCode::Validation, "config.exploration_grid: expected an array");
      grid.clear();
      for (std::size_t k = 0; k < g->size(); ++k) {
        Reader cell((*g)[k], "config.exploration_grid[" + std::to_string(k) + "]");
        ExplorationSetting s;
        s.alpha = cell.number("alpha", s.alpha);
        s.n_exp = cell.count("n_exp", s.n_exp);
        cell.finish();
        grid.push_back(s);
      }
    }
    r.finish();
    put_batch_spec(resolved, spec);
    resolved["slip_rate"] = slip_rate;
    Json g = Json::array();
    for (const auto& s : grid) g.push_back(Json{{"alpha", s.alpha}, {"n_exp", s.n_exp}});
    resolved["exploration_grid"] = g;
    const auto seed = run.seed();
    const auto rows = run_slip_exploration_sweep(setup.bank, setup.settings, spec, grid, slip_rate, seed, workers);
    run.emit_with("metrics.tsv", [&](std::ostream& os) { io::write_metrics(os, rows); });
    return run.finish(resolved, metrics_summary(rows) + describe_seed(seed));
  }

  if (sub == "term-sweep") {
    const auto spec = read_batch_spec(r);
    const auto kind = parse_sweep_kind(r.text("kind", "overall"));
    r.finish();
    put_batch_spec(resolved, spec);
    resolved["kind"] = to_string(kind);
    const auto seed = run.seed();
    const auto rows = spec.n_sessions == 0
                          ? std::vector<BatchMetrics>{}
                          : run_termination_sweep(setup.bank, setup.settings, spec, kind, seed, workers);
    run.emit_with("metrics.tsv", [&](std::ostream& os) { io::write_metrics(os, rows); });
    return run.finish(resolved, metrics_summary(rows) + describe_seed(seed));
  }

  // replay
  const auto mode = parse_replay_mode(r.text("mode", "adaptive-replay"));
  r.finish();
  resolved["mode"] = to_string(mode);
  const auto records = io::read_file(run.require_input("responses"), io::read_responses);
  std::unordered_map<std::string, int> levels;
  if (auto path = run.input("item_levels")) {
    for (const auto& [id, level] : io::read_file(*path, io::read_levels)) levels[id] = level;
  }
  std::map<std::string, double> truth;
  if (auto path = run.input("truth")) truth = io::read_file(*path, io::read_truth);
  const auto seed = run.seed();
  const auto logs = group_learner_logs(records, setup.bank);
  const auto results = run_real_replay(setup.bank, logs, mode, setup.settings.session, seed, workers,
                                       mode == ReplayMode::ManualDifficulty ? &levels : nullptr);
  run.emit_with("replay.tsv", [&](std::ostream& os) { io::write_replay(os, results); });
  std::string summary = std::to_string(results.size()) + " learners replayed (" + to_string(mode) + ")";
  if (!truth.empty()) {
    std::vector<SessionOutcome> outcomes;
    for (const auto& res : results) {
      auto it = truth.find(res.learner_id);
      if (it == truth.end()) continue;
      outcomes.push_back(SessionOutcome{it->second, res.ability.theta, res.length, res.reason});
    }
    std::vector<BatchMetrics> rows;
    if (!outcomes.empty()) rows.push_back(summarize(to_string(mode), outcomes));
    run.emit_with("replay_metrics.tsv", [&](std::ostream& os) { io::write_metrics(os, rows); });
    summary += "\n" + metrics_summary(rows);
  }
  return run.finish(resolved, summary);
}

// ------------------------------------------------------------- exercise

std::vector<FilterConfig> read_filter_grid(Reader& r) {
  const Json* g = r.raw("grid");
  if (!g) return default_filter_grid();
  if (!g->is_array()) fail(ErrorCode::Validation, "config.grid: expected an array");
  std::vector<FilterConfig> grid;
  for (std::size_t k = 0; k < g->size(); ++k) {
    Reader cell((*g)[k], "config.grid[" + std::to_string(k) + "]");
    FilterConfig f;
    f.min_exer = cell.count("min_exer", f.min_exer);
    f.min_constr = cell.count("min_constr", f.min_constr);
    cell.finish();
    f.validate();
    grid.push_back(f);
  }
  return grid;
}

Json to_json(const FilterConfig& f) { return Json{{"min_exer", f.min_exer}, {"min_constr", f.min_constr}}; }

Result exercise_command(const Request& req) {
  const std::string& sub = req.subcommand;
  if (sub == "ingest") {
    Run run(req, {"events"}, true);
    const auto events = io::read_file(run.require_input("events"), io::read_events);
    run.reader().finish();
    if (events.empty()) fail(ErrorCode::InsufficientData, "insufficient data: no exercise events");
    const auto table = accumulate_performance(events);
    run.emit_with("performance.tsv", [&](std::ostream& os) { io::write_performance(os, table); });
    return run.finish(Json::object(), std::to_string(events.size()) + " events -> " +
                                          std::to_string(table.size()) + " (student, construct) cells");
  }
  if (sub == "fit") {
    Run run(req, {"events"}, true);
    const auto events = io::read_file(run.require_input("events"), io::read_events);
    auto r = run.reader();
    FilterConfig filter;
    if (auto f = r.child("filter")) {
      filter.min_exer = f->count("min_exer", filter.min_exer);
      filter.min_constr = f->count("min_constr", filter.min_constr);
      f->finish();
    }
    filter.validate();
    auto cal = construct_calibration_defaults();
    if (auto c = r.child("calibration")) cal = config::read_calibration(*c, cal);
    r.finish();
    cal.workers = std::max(1u, req.workers);
    if (events.empty()) fail(ErrorCode::InsufficientData, "insufficient data: no exercise events");
    const auto table = accumulate_performance(events);
    const auto responses = build_construct_responses(table, events, filter);
    const auto fit = calibrate_constructs(responses, cal);
    run.emit_with("performance.tsv", [&](std::ostream& os) { io::write_performance(os, table); });
    run.emit_with("constructs.tsv", [&](std::ostream& os) { io::write_bank(os, fit.constructs); });
    run.emit_with("abilities.tsv", [&](std::ostream& os) {
      io::write_abilities(os, fit.students, fit.abilities);
    });
    Json resolved{{"filter", to_json(filter)}, {"calibration", config::to_json(cal)}};
    return run.finish(resolved, std::to_string(fit.constructs.size()) + " constructs, " +
                                    std::to_string(fit.students.size()) + " students; " +
                                    (fit.converged ? "converged" : "not converged") + " after " +
                                    std::to_string(fit.iterations) + " iterations");
  }
  if (sub == "grid") {
    Run run(req, {"events", "labels"}, true);
    const auto events = io::read_file(run.require_input("events"), io::read_events);
    const auto labels = io::read_file(run.require_input("labels"), io::read_levels);
    auto r = run.reader();
    const auto grid = read_filter_grid(r);
    auto cal = construct_calibration_defaults();
    if (auto c = r.child("calibration")) cal = config::read_calibration(*c, cal);
    r.finish();
    cal.workers = std::max(1u, req.workers);
    if (events.empty()) fail(ErrorCode::InsufficientData, "insufficient data: no exercise events");
    const auto rows = run_filter_grid(events, CefrLabelTable(labels.begin(), labels.end()), grid, cal);
    run.emit_with("report.tsv", [&](std::ostream& os) { io::write_filter_report(os, rows); });
    Json g = Json::array();
    for (const auto& f : grid) g.push_back(to_json(f));
    std::ostringstream summary;
    for (const auto& row : rows) {
      summary << row.label() << ": train " << row.n_students_train << ", eval " << row.n_students_eval
              << ", rho " << io::format_double(row.report.rho) << " (" << row.status << ")\n";
    }
    return run.finish(Json{{"grid", g}, {"calibration", config::to_json(cal)}}, summary.str());
  }
  fail(ErrorCode::InvalidArgument, "unknown exercise subcommand '" + sub + "' (ingest|fit|grid)");
}

}  // namespace

Result run(const Request& request) {
  if (request.command == "synth") return synth_command(request);
  if (request.command == "calibrate") return calibrate_command(request);
  if (request.command == "simulate") return simulate_command(request);
  if (request.command == "exercise") return exercise_command(request);
  fail(ErrorCode::InvalidArgument, "unknown command '" + request.command + "'");
}

Result rerun(const fs::path& manifest_path, const fs::path& out, unsigned workers) {
  const auto manifest = config::parse_json(io::read_text_file(manifest_path), manifest_path.string());
  Request req;
  try {
    req.command = manifest.at("command").get<std::string>();
    req.subcommand = manifest.at("subcommand").get<std::string>();
    req.resolved_config = manifest.at("config");
    if (!manifest.at("seed").is_null()) req.seed = manifest.at("seed").get<std::uint64_t>();
    for (const auto& [role, entry] : manifest.at("inputs").items()) {
      const fs::path path = entry.at("path").get<std::string>();
      if (sha256_file(path) != entry.at("sha256").get<std::string>()) {
        fail(ErrorCode::Validation, "input '" + path.string() + "' changed since the recorded run");
      }
      req.inputs[role] = path;
    }
  } catch (const Json::exception& e) {
    fail(ErrorCode::Parse, manifest_path.string() + ": malformed manifest: " + e.what());
  }
  req.out = out;
  req.workers = workers;
  return run(req);
}

}  // namespace irtcat::commands
