// One line per acceptance criterion. Exit status is non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <unistd.h>

#include "irtcat/calibration.hpp"
#include "irtcat/commands.hpp"
#include "irtcat/exercise.hpp"
#include "irtcat/io.hpp"
#include "irtcat/irt.hpp"
#include "irtcat/rng.hpp"
#include "irtcat/simulator.hpp"
#include "irtcat/stats.hpp"
#include "irtcat/synth.hpp"

using namespace irtcat;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
  double budget_seconds = 0.0;

  void check(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
    pass = pass && ok;
  }
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

constexpr std::uint64_t kSeed = 20240601;

ItemParams item(double a, double b, double c) {
  ItemParams p;
  p.item_id = "x";
  p.a = a;
  p.b = b;
  p.c = c;
  return p;
}

// ------------------------------------------------------------------- 1

Verdict closed_forms() {
  Verdict v;
  v.budget_seconds = 1.0;
  double worst = 0.0;
  auto near = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };

  near(prob_correct(0.0, item(1, 0, 0)), 0.5);
  for (double a : {0.3, 1.0, 2.7}) {
    near(prob_correct(0.7, item(a, 0.7, 0.25)), 0.625);
    near(item_information(-1.2, item(a, -1.2, 0.0)), a * a / 4);
  }
  const double s2 = 1.0 / (1.0 + std::exp(-2.0));
  near(prob_correct(1.0, item(2, 0, 0.2)), 0.2 + 0.8 * s2);
  near(item_information(0.4, item(1, 0.4, 0.25)), 0.15);
  near(item_information(-40.0, item(1, 0, 0.25)), 0.0);
  // closed form a^2 (1-P)/P ((P-c)/(1-c))^2 at off-center points
  for (double theta : {-2.5, -0.3, 1.9}) {
    const auto it = item(1.7, 0.2, 0.2);
    const double p = 0.2 + 0.8 / (1.0 + std::exp(-1.7 * (theta - 0.2)));
    near(item_information(theta, it), 1.7 * 1.7 * (1 - p) / p * std::pow((p - 0.2) / 0.8, 2));
  }
  const std::vector<ItemParams> two{item(1.3, 0.5, 0), item(1.3, 0.5, 0)};
  near(test_information(0.5, two), 1.3 * 1.3 / 2);
  near(test_information(0.5, std::vector<ItemParams>{}), 0.0);
  // four c = 0 items with a = 2 at theta = b: information 4, SEM 0.5
  const std::vector<ItemParams> four(4, item(2, 0, 0));
  near(*sem(0.0, four), 0.5);
  // 25 items with a = 2: information 25, SEM 0.2
  const std::vector<ItemParams> many(25, item(2, 0, 0));
  near(*sem(0.0, many), 0.2);
  v.check(worst <= 1e-12, "max |error| " + fmt(worst, 3) + " <= 1e-12");
  v.check(std::abs(prob_correct(1.0, item(2, 0, 0.2)) - 0.904638) <= 1e-6, "P(1; 2, 0, 0.2) = 0.904638");
  v.check(!sem(0.0, std::vector<ItemParams>{}).has_value(), "empty SEM undefined");
  return v;
}

// ------------------------------------------------------------------- 2

double dense_posterior_mean(std::span<const ScoredResponse> responses) {
  const int n = 10001;
  std::vector<double> logpost(n);
  double top = -INFINITY;
  for (int k = 0; k < n; ++k) {
    const double theta = -4.0 + 8.0 * k / (n - 1);
    double lp = -0.5 * theta * theta;
    for (const auto& r : responses) lp += log_prob(theta, *r.item, r.correct);
    logpost[k] = lp;
    top = std::max(top, lp);
  }
  double num = 0.0, den = 0.0;
  for (int k = 0; k < n; ++k) {
    const double theta = -4.0 + 8.0 * k / (n - 1);
    const double w = std::exp(logpost[k] - top) * ((k == 0 || k == n - 1) ? 0.5 : 1.0);
    num += w * theta;
    den += w;
  }
  return num / den;
}

Verdict eap_oracle() {
  Verdict v;
  v.budget_seconds = 10.0;
  Rng rng(kSeed);
  double worst = 0.0;
  for (int set = 0; set < 100; ++set) {
    const double theta_true = rng.uniform(-3.0, 3.0);
    const std::size_t n = rng.index(61);
    std::vector<ItemParams> items(n);
    std::vector<ScoredResponse> responses;
    for (auto& it : items) {
      it = item(std::exp(rng.normal(0, 0.3)), rng.normal(0, 1.5), rng.bernoulli(0.5) ? 0.25 : 0.0);
    }
    for (const auto& it : items) responses.push_back({&it, rng.bernoulli(prob_correct(theta_true, it))});
    const double eap = estimate_ability_eap(responses, default_grid()).theta;
    worst = std::max(worst, std::abs(eap - dense_posterior_mean(responses)));
  }
  v.check(worst <= 1e-3, "max |EAP - dense| " + fmt(worst, 3) + " <= 1e-3 over 100 sets");
  return v;
}

// ------------------------------------------------------------------- 3

Verdict recovery() {
  Verdict v;
  v.budget_seconds = 300.0;
  synth::BankSpec bspec;
  bspec.n_items = 200;
  const auto truth = synth::make_bank(bspec, kSeed).bank;
  synth::ResponsesSpec rspec;
  rspec.n_learners = 1000;
  rspec.responses_per_learner = 150;
  const auto data = synth::make_responses(truth, rspec, kSeed + 1);
  CalibrationConfig cfg;
  cfg.workers = 1;
  const auto fit = calibrate_bank(data.records, cfg);
  std::vector<double> ta, tb, ea, eb;
  for (const auto& it : truth.items()) {
    const auto k = fit.bank.find(it.item_id);
    if (!k) continue;
    ta.push_back(it.a);
    tb.push_back(it.b);
    ea.push_back(fit.bank[*k].a);
    eb.push_back(fit.bank[*k].b);
  }
  const double rb = stats::pearson(tb, eb), ra = stats::pearson(ta, ea);
  v.check(fit.converged, "converged in " + std::to_string(fit.iterations) + " iterations");
  v.check(rb >= 0.9, "corr(b) " + fmt(rb) + " >= 0.9");
  v.check(ra >= 0.7, "corr(a) " + fmt(ra) + " >= 0.7");
  return v;
}

// ------------------------------------------------------------------- 4

ItemBank acceptance_bank() { return synth::make_bank(synth::BankSpec{}, kSeed).bank; }

SimulationTemplate earlystop_template(bool slip, bool exploration) {
  SimulationTemplate t;
  t.slip = slip ? SlipSchedule{0.05, 0.05, 0} : SlipSchedule::none();
  t.session.exploration.enabled = exploration;
  t.session.criterion.rule = EarlyStop{10, 0.05};
  return t;
}

Verdict artificial_grid(const ItemBank& bank) {
  Verdict v;
  v.budget_seconds = 30.0;
  const std::vector<double> levels{-2, -1, 0, 1, 2};
  const auto traces = run_artificial_grid(bank, levels, 3, earlystop_template(false, false), kSeed, 1, 10);
  std::size_t converged = 0, before60 = 0, within = 0, within_final = 0;
  std::size_t longest = 0;
  double worst = 0.0;
  for (const auto& t : traces) {
    if (t.result.reason == StopReason::Converged) ++converged;
    if (t.result.length < 60) ++before60;
    longest = std::max(longest, t.result.length);
    const double err = std::abs(t.result.ability.theta - t.theta_true);
    worst = std::max(worst, err);
    if (err <= 0.3) ++within;
    if (std::abs(t.result.theta_trajectory.back() - t.theta_true) <= 0.3) ++within_final;
  }
  v.check(converged == 15, std::to_string(converged) + "/15 converged");
  v.check(within == 15, std::to_string(within) + "/15 with |error| <= 0.3 at convergence (max " + fmt(worst, 3) +
                            ", " + std::to_string(within_final) + "/15 after the 10 extra steps)");
  v.check(before60 >= 12, std::to_string(before60) + "/15 before 60 steps");
  v.check(longest < 80, "longest " + std::to_string(longest) + " < 80 steps");
  return v;
}

// ------------------------------------------------------------------- 5

const BatchMetrics& row(const std::vector<BatchMetrics>& rows, const std::string& label) {
  for (const auto& r : rows) {
    if (r.label == label) return r;
  }
  throw std::runtime_error("missing row " + label);
}

Verdict termination_sweeps(const ItemBank& bank) {
  Verdict v;
  v.budget_seconds = 4 * 300.0;
  const auto settings = earlystop_template(false, true);
  const BatchSpec spec;
  const unsigned workers = 8;

  const auto fixed = run_termination_sweep(bank, settings, spec, SweepKind::Fixed, kSeed, workers);
  double worst_long = 0.0;
  for (const auto& r : fixed) {
    if (std::stoi(r.label.substr(6)) >= 50) worst_long = std::max(worst_long, r.mae);
  }
  v.check(worst_long <= 0.25, "fixed >= 50 max MAE " + fmt(worst_long) + " <= 0.25");
  const double m25 = row(fixed, "fixed:25").mae, m100 = row(fixed, "fixed:100").mae;
  v.check(m25 > m100, "fixed:25 MAE " + fmt(m25) + " > fixed:100 MAE " + fmt(m100));

  const auto overall = run_termination_sweep(bank, settings, spec, SweepKind::Overall, kSeed, workers);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& r : overall) {
    lo = std::min(lo, r.mae);
    hi = std::max(hi, r.mae);
  }
  v.check(overall.size() == 12 && lo >= 0.1 && hi <= 0.35,
          "overall " + std::to_string(overall.size()) + " rows, MAE in [" + fmt(lo) + ", " + fmt(hi) + "]");

  const auto sem_rows = run_termination_sweep(bank, settings, spec, SweepKind::Sem, kSeed, workers);
  const double s12 = row(sem_rows, "sem:0.12").mae, s30 = row(sem_rows, "sem:0.3").mae;
  v.check(s12 <= s30, "sem:0.12 MAE " + fmt(s12) + " <= sem:0.30 MAE " + fmt(s30));

  const auto es = run_termination_sweep(bank, settings, spec, SweepKind::EarlyStop, kSeed, workers);
  bool monotone = true;
  for (int n = 6; n <= 12; n += 2) {
    double previous = INFINITY;
    for (const char* d : {"0.05", "0.15", "0.25", "0.35"}) {
      const double len = row(es, "earlystop:N" + std::to_string(n) + ":d" + d).mean_iterations;
      monotone = monotone && len <= previous;
      previous = len;
    }
  }
  v.check(monotone, "EarlyStop mean length non-increasing in delta for every N");
  return v;
}

// ------------------------------------------------------------------- 6

Verdict slip_exploration(const ItemBank& bank) {
  Verdict v;
  v.budget_seconds = 120.0;
  const std::vector<ExplorationSetting> grid{{0.25, 30}, {0.25, 60}, {0.5, 30}, {0.5, 60}, {1.0, 30}, {1.0, 60}};
  const auto rows = run_slip_exploration_sweep(bank, earlystop_template(true, true), BatchSpec{}, grid, 0.05,
                                               kSeed, 8);
  const auto& base = row(rows, "baseline");
  const auto& slip = row(rows, "slip");
  const auto& best = row(rows, "alpha:0.5:N:60");
  v.check(slip.mean_iterations > base.mean_iterations,
          "slip length " + fmt(slip.mean_iterations) + " > baseline " + fmt(base.mean_iterations));
  v.check(best.mean_iterations <= slip.mean_iterations,
          "alpha 0.5, N 60 length " + fmt(best.mean_iterations) + " <= slip " + fmt(slip.mean_iterations));
  return v;
}

// ------------------------------------------------------------------- 7

Verdict warm_up(const ItemBank& bank) {
  Verdict v;
  v.budget_seconds = 120.0;
  auto settings = earlystop_template(false, false);
  settings.slip = SlipSchedule::early_aberrant();
  auto warm = settings;
  warm.session.warmup_length = 10;
  const std::size_t count = 200;
  auto signed_error = [&](const SimulationTemplate& t, double theta) {
    const auto out = run_fixed_theta_sessions(bank, t, theta, count, kSeed, 8);
    return summarize("", out);
  };
  const auto cold_hi = signed_error(settings, 2.0);
  const auto warm_hi = signed_error(warm, 2.0);
  const auto cold_lo = signed_error(settings, -2.0);
  v.check(cold_hi.mean_signed_error <= -0.3,
          "no warm-up signed error at +2 " + fmt(cold_hi.mean_signed_error) + " <= -0.3");
  v.check(std::abs(warm_hi.mean_signed_error) <= 0.5 * std::abs(cold_hi.mean_signed_error),
          "warm-up signed error " + fmt(warm_hi.mean_signed_error) + " at most half in magnitude");
  v.check(std::abs(cold_hi.mean_signed_error) > std::abs(cold_lo.mean_signed_error),
          "asymmetry: |error at +2| > |error at -2| " + fmt(cold_lo.mean_signed_error));
  double total = 0.0;
  std::size_t n = 0;
  for (double theta : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    const auto out = run_fixed_theta_sessions(bank, warm, theta, 40, kSeed, 8);
    for (const auto& o : out) total += static_cast<double>(o.length);
    n += out.size();
  }
  const double mean_len = total / static_cast<double>(n);
  v.check(mean_len >= 40 && mean_len <= 80, "warm-up mean length " + fmt(mean_len) + " in [40, 80]");
  return v;
}

// ------------------------------------------------------------------- 8

Verdict manual_difficulty() {
  Verdict v;
  v.budget_seconds = 180.0;
  synth::BankSpec bspec;
  bspec.n_items = 300;
  const auto truth = synth::make_bank(bspec, kSeed + 8);
  synth::ResponsesSpec rspec;
  rspec.n_learners = 500;
  rspec.responses_per_learner = 0;
  rspec.slip_rate = 0.05;
  const auto cohort = synth::make_responses(truth.bank, rspec, kSeed + 9);
  CalibrationConfig cfg;
  const auto fit = calibrate_bank(cohort.records, cfg);
  const auto logs = group_learner_logs(cohort.records, fit.bank);
  std::unordered_map<std::string, int> levels(truth.item_levels.begin(), truth.item_levels.end());
  std::map<std::string, double> theta_true(cohort.truth.begin(), cohort.truth.end());
  SessionConfig session;
  session.criterion.rule = EarlyStop{10, 0.05};
  session.exploration.enabled = false;
  auto evaluate = [&](ReplayMode mode) {
    const auto res = run_real_replay(fit.bank, logs, mode, session, kSeed, 8, &levels);
    std::vector<SessionOutcome> out;
    for (const auto& r : res) out.push_back({theta_true.at(r.learner_id), r.ability.theta, r.length, r.reason});
    return summarize(to_string(mode), out);
  };
  const auto learned = evaluate(ReplayMode::AdaptiveReplay);
  const auto manual = evaluate(ReplayMode::ManualDifficulty);
  const double fl = static_cast<double>(learned.forced_stops) / learned.n_sessions;
  const double fm = static_cast<double>(manual.forced_stops) / manual.n_sessions;
  v.check(manual.mae > learned.mae, "manual MAE " + fmt(manual.mae) + " > learned MAE " + fmt(learned.mae));
  v.check(fm > fl, "manual forced-stop fraction " + fmt(fm) + " > learned " + fmt(fl));
  return v;
}

// ------------------------------------------------------------------- 9

bool binomial_equivalence() {
  Rng rng(kSeed + 99);
  for (int instance = 0; instance < 10; ++instance) {
    const std::size_t n_students = 4 + rng.index(5), n_constructs = 2 + rng.index(3);
    std::vector<ItemParams> start;
    for (std::size_t j = 0; j < n_constructs; ++j) {
      auto it = item(1.0, 0.0, rng.bernoulli(0.5) ? 0.25 : 0.0);
      it.item_id = "C" + std::to_string(j);
      start.push_back(it);
    }
    std::vector<Observation> binomial, bernoulli;
    for (std::size_t s = 0; s < n_students; ++s) {
      for (std::size_t j = 0; j < n_constructs; ++j) {
        const auto trials = static_cast<std::uint32_t>(1 + rng.index(6));
        const auto successes = static_cast<std::uint32_t>(rng.index(trials + 1));
        binomial.push_back({s, j, successes, trials});
        for (std::uint32_t t = 0; t < trials; ++t) bernoulli.push_back({s, j, t < successes ? 1u : 0u, 1});
      }
    }
    CalibrationConfig cfg;
    cfg.fixed_c = 0.0;
    const auto x = calibrate_observations(start, n_students, binomial, cfg);
    const auto y = calibrate_observations(start, n_students, bernoulli, cfg);
    for (std::size_t j = 0; j < n_constructs; ++j) {
      if (std::abs(x.items[j].a - y.items[j].a) > 1e-6 || std::abs(x.items[j].b - y.items[j].b) > 1e-6) {
        return false;
      }
    }
    for (std::size_t s = 0; s < n_students; ++s) {
      if (std::abs(x.abilities[s].theta - y.abilities[s].theta) > 1e-6) return false;
    }
  }
  return true;
}

Verdict exercise_pipeline() {
  Verdict v;
  v.budget_seconds = 180.0;
  const auto data = synth::make_exercises(synth::ExercisesSpec{}, kSeed + 10);
  const std::vector<FilterConfig> grid{{50, 1}, {100, 7}};
  const auto rows = run_filter_grid(data.events, data.labels, grid, construct_calibration_defaults());
  const double loose = rows[0].report.rho, tight = rows[1].report.rho;
  v.check(rows[0].status == "ok" && rows[1].status == "ok", "both cells fitted");
  v.check(tight >= loose, "rho(100,7) " + fmt(tight) + " >= rho(50,1) " + fmt(loose));
  v.check(tight >= 0.6, "rho(100,7) >= 0.6 (n_eval " + std::to_string(rows[1].n_students_eval) + ")");
  v.check(binomial_equivalence(), "binomial vs Bernoulli equivalence within 1e-6 on 10 small instances");
  return v;
}

// ------------------------------------------------------------------ 10

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  if (fs::is_regular_file(root)) {
    files[root.filename().string()] = io::read_text_file(root);
    return files;
  }
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.json") {
      files[fs::relative(e.path(), root).string()] = io::read_text_file(e.path());
    }
  }
  return files;
}

Verdict determinism() {
  Verdict v;
  v.budget_seconds = 120.0;
  const fs::path dir = fs::temp_directory_path() / ("irtcat_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  using config::Json;
  struct Step {
    std::string command, sub;
    Json config;
    std::map<std::string, fs::path> inputs;
    std::string out;
  };
  const fs::path bank = dir / "bank.tsv", resp = dir / "resp.csv", ex = dir / "ex.tsv";
  const std::vector<Step> steps{
      {"synth", "bank", Json{{"n_items", 150}}, {}, "bank.tsv"},
      {"synth", "responses", Json{{"n_learners", 120}, {"responses_per_learner", 0}}, {{"bank", bank}}, "resp.csv"},
      {"synth", "exercises", Json{{"n_students", 60}, {"min_exercises", 20}, {"max_exercises", 120}}, {}, "ex.tsv"},
      {"calibrate", "", Json{{"max_outer_iterations", 400}}, {{"responses", resp}}, "cal.tsv"},
      {"simulate", "grid", Json::object(), {{"bank", bank}}, "grid"},
      {"simulate", "batch", Json{{"n_simulations", 40}}, {{"bank", bank}}, "batch"},
      {"simulate", "slip-sweep", Json{{"n_simulations", 20}}, {{"bank", bank}}, "slip"},
      {"simulate", "term-sweep", Json{{"n_simulations", 20}, {"kind", "earlystop"}}, {{"bank", bank}}, "term"},
      {"simulate", "replay", Json{{"mode", "manual-difficulty"}},
       {{"bank", bank}, {"responses", resp}, {"item_levels", dir / "bank.tsv.levels"}, {"truth", dir / "resp.csv.truth"}},
       "replay"},
      {"exercise", "ingest", Json::object(), {{"events", ex}}, "ingest"},
      {"exercise", "fit", Json{{"filter", {{"min_exer", 5}, {"min_constr", 1}}}}, {{"events", ex}}, "fit"},
      {"exercise", "grid", Json{{"grid", Json::array({Json{{"min_exer", 10}, {"min_constr", 1}}})}},
       {{"events", ex}, {"labels", dir / "ex.tsv.labels"}}, "egrid"},
  };
  std::size_t identical = 0;
  std::string mismatches;
  for (const auto& s : steps) {
    commands::Request req;
    req.command = s.command;
    req.subcommand = s.sub;
    req.resolved_config = s.config;
    req.inputs = s.inputs;
    req.out = dir / s.out;
    req.seed = kSeed;
    req.workers = 1;
    const auto first = commands::run(req);
    const fs::path again = dir / ("again_" + s.out);
    commands::rerun(first.manifest, again, 3);
    auto a = snapshot(req.out), b = snapshot(again);
    if (fs::is_regular_file(req.out)) {
      a.clear();
      b.clear();
      for (const auto& name : first.outputs) {
        const std::string suffix = name.substr(s.out.size());
        a[suffix] = io::read_text_file(req.out.string() + suffix);
        b[suffix] = io::read_text_file(again.string() + suffix);
      }
    }
    if (a == b && !a.empty()) {
      ++identical;
    } else {
      mismatches += " " + s.command + (s.sub.empty() ? "" : "/" + s.sub);
    }
  }
  fs::remove_all(dir);
  v.check(identical == steps.size(), std::to_string(identical) + "/" + std::to_string(steps.size()) +
                                         " commands byte-identical on rerun with 3 workers" + mismatches);
  return v;
}

}  // namespace

int main() {
  const auto bank = acceptance_bank();
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"closed forms", closed_forms},
      {"EAP dense-grid oracle", eap_oracle},
      {"parameter recovery", recovery},
      {"artificial-learner grid", [&] { return artificial_grid(bank); }},
      {"termination sweeps", [&] { return termination_sweeps(bank); }},
      {"slip and exploration", [&] { return slip_exploration(bank); }},
      {"warm-up", [&] { return warm_up(bank); }},
      {"manual-difficulty ablation", manual_difficulty},
      {"exercise pipeline", exercise_pipeline},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (v.budget_seconds > 0) v.check(secs <= v.budget_seconds, "time " + fmt(secs, 3) + " s");
    std::printf("criterion %zu %-28s %s  %s\n", k + 1, criteria[k].first.c_str(), v.pass ? "PASS" : "FAIL",
                v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
