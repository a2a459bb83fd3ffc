#include "irtcat/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "irtcat/error.hpp"
#include "irtcat/parallel.hpp"

namespace irtcat {

void SlipSchedule::validate() const {
  auto ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!ok(base_rate) || !ok(early_rate)) fail(ErrorCode::Validation, "slip rates must lie in [0, 1]");
}

bool simulate_answer(double theta_true, const ItemParams& item, std::size_t step,
                     const SlipSchedule& slip, Rng& rng) {
  const bool correct = rng.uniform() < prob_correct(theta_true, item);
  if (!correct) return false;
  const double rate = slip.rate_at(step);
  if (rate <= 0.0) return true;
  return !(rng.uniform() < rate);
}

AnswerSource simulated_examinee(double theta_true, SlipSchedule slip, std::uint64_t session_seed) {
  auto rng = std::make_shared<Rng>(Rng::derive(session_seed, {4}));
  return [theta_true, slip, rng](const ItemParams& item, std::size_t step) {
    return simulate_answer(theta_true, item, step, slip, *rng);
  };
}

SessionResult simulate_session(const ItemBank& bank, const SimulationConfig& config,
                               const QuadratureGrid& grid, std::size_t extra_steps) {
  config.settings.validate();
  const auto answer = simulated_examinee(config.theta_true, config.settings.slip, config.seed);
  return run_session(answer, bank, config.settings.session, config.seed, grid, nullptr, extra_steps);
}

BatchMetrics summarize(std::string label, std::span<const SessionOutcome> outcomes) {
  BatchMetrics m;
  m.label = std::move(label);
  m.n_sessions = outcomes.size();
  if (outcomes.empty()) return m;
  const double n = static_cast<double>(outcomes.size());
  double len_sum = 0.0, abs_sum = 0.0, err_sum = 0.0;
  for (const auto& o : outcomes) {
    len_sum += static_cast<double>(o.length);
    abs_sum += std::abs(o.theta_hat - o.theta_true);
    err_sum += o.theta_hat - o.theta_true;
    if (o.reason == StopReason::ForcedStop) ++m.forced_stops;
  }
  m.mean_iterations = len_sum / n;
  m.mae = abs_sum / n;
  m.mean_signed_error = err_sum / n;
  if (outcomes.size() > 1) {
    double len_ss = 0.0, err_ss = 0.0;
    for (const auto& o : outcomes) {
      const double dl = static_cast<double>(o.length) - m.mean_iterations;
      const double de = (o.theta_hat - o.theta_true) - m.mean_signed_error;
      len_ss += dl * dl;
      err_ss += de * de;
    }
    m.sd_iterations = std::sqrt(len_ss / (n - 1.0));
    m.sd_error = std::sqrt(err_ss / (n - 1.0));
  }
  return m;
}

std::uint64_t batch_session_seed(std::uint64_t master_seed, std::size_t index) {
  return Rng::derive(master_seed, {index, 0}).next_u64();
}

double batch_theta_true(std::uint64_t master_seed, std::size_t index, const BatchSpec& spec) {
  return Rng::derive(master_seed, {index, 1}).uniform(spec.theta_lo, spec.theta_hi);
}

std::vector<SessionOutcome> run_batch_sessions(const ItemBank& bank,
                                               const SimulationTemplate& settings,
                                               const BatchSpec& spec, std::uint64_t master_seed,
                                               unsigned workers) {
  settings.validate();
  if (!(spec.theta_hi >= spec.theta_lo)) fail(ErrorCode::Validation, "batch theta range is inverted");
  std::vector<SessionOutcome> outcomes(spec.n_sessions);
  const auto& grid = default_grid();
  parallel_for(spec.n_sessions, workers, [&](std::size_t i) {
    SimulationConfig cfg{batch_theta_true(master_seed, i, spec), settings,
                         batch_session_seed(master_seed, i)};
    const auto result = simulate_session(bank, cfg, grid);
    outcomes[i] = SessionOutcome{cfg.theta_true, result.ability.theta, result.length, result.reason};
  });
  return outcomes;
}

BatchMetrics run_batch(const ItemBank& bank, const SimulationTemplate& settings,
                       const BatchSpec& spec, std::uint64_t master_seed, unsigned workers,
                       std::string label) {
  const auto outcomes = run_batch_sessions(bank, settings, spec, master_seed, workers);
  return summarize(std::move(label), outcomes);
}

std::vector<SessionOutcome> run_fixed_theta_sessions(const ItemBank& bank,
                                                     const SimulationTemplate& settings,
                                                     double theta_true, std::size_t count,
                                                     std::uint64_t master_seed, unsigned workers) {
  settings.validate();
  std::vector<SessionOutcome> outcomes(count);
  const auto& grid = default_grid();
  parallel_for(count, workers, [&](std::size_t i) {
    SimulationConfig cfg{theta_true, settings, batch_session_seed(master_seed, i)};
    const auto result = simulate_session(bank, cfg, grid);
    outcomes[i] = SessionOutcome{theta_true, result.ability.theta, result.length, result.reason};
  });
  return outcomes;
}

std::vector<GridTrace> run_artificial_grid(const ItemBank& bank, std::span<const double> levels,
                                           std::size_t per_level,
                                           const SimulationTemplate& settings,
                                           std::uint64_t master_seed, unsigned workers,
                                           std::size_t extra_steps) {
  settings.validate();
  std::vector<GridTrace> traces(levels.size() * per_level);
  const auto& grid = default_grid();
  parallel_for(traces.size(), workers, [&](std::size_t k) {
    const std::size_t level = k / per_level, rep = k % per_level;
    auto& trace = traces[k];
    trace.theta_true = levels[level];
    trace.replicate = rep;
    trace.seed = Rng::derive(master_seed, {level, rep}).next_u64();
    SimulationConfig cfg{trace.theta_true, settings, trace.seed};
    trace.result = simulate_session(bank, cfg, grid, extra_steps);
  });
  return traces;
}

namespace {

std::string format_number(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

std::vector<BatchMetrics> run_slip_exploration_sweep(const ItemBank& bank,
                                                     const SimulationTemplate& settings,
                                                     const BatchSpec& spec,
                                                     std::span<const ExplorationSetting> grid,
                                                     double slip_rate, std::uint64_t master_seed,
                                                     unsigned workers) {
  std::vector<BatchMetrics> rows;
  SimulationTemplate base = settings;
  base.session.exploration.enabled = false;
  base.slip = SlipSchedule::none();
  rows.push_back(run_batch(bank, base, spec, master_seed, workers, "baseline"));

  SimulationTemplate slipped = base;
  slipped.slip = SlipSchedule{slip_rate, slip_rate, 0};
  rows.push_back(run_batch(bank, slipped, spec, master_seed, workers, "slip"));

  for (const auto& setting : grid) {
    SimulationTemplate explored = slipped;
    explored.session.exploration = settings.session.exploration;
    explored.session.exploration.enabled = true;
    explored.session.exploration.alpha = setting.alpha;
    explored.session.exploration.stop_step = setting.n_exp;
    rows.push_back(run_batch(bank, explored, spec, master_seed, workers,
                             "alpha:" + format_number(setting.alpha) + ":N:" +
                                 std::to_string(setting.n_exp)));
  }
  return rows;
}

SweepKind parse_sweep_kind(const std::string& name) {
  if (name == "fixed") return SweepKind::Fixed;
  if (name == "sem") return SweepKind::Sem;
  if (name == "earlystop") return SweepKind::EarlyStop;
  if (name == "overall") return SweepKind::Overall;
  fail(ErrorCode::Validation, "unknown sweep kind '" + name + "' (fixed|sem|earlystop|overall)");
}

const char* to_string(SweepKind kind) noexcept {
  switch (kind) {
    case SweepKind::Fixed: return "fixed";
    case SweepKind::Sem: return "sem";
    case SweepKind::EarlyStop: return "earlystop";
    case SweepKind::Overall: return "overall";
  }
  return "?";
}

std::vector<TerminationCriterion> sweep_criteria(SweepKind kind, std::size_t min_steps,
                                                 std::size_t max_steps) {
  std::vector<TerminationCriterion> out;
  auto add = [&](auto rule) {
    TerminationCriterion c;
    c.rule = rule;
    c.min_steps = min_steps;
    c.max_steps = max_steps;
    if constexpr (std::is_same_v<decltype(rule), FixedLength>) {
      c.max_steps = std::max(max_steps, rule.length);
      c.min_steps = std::min(min_steps, rule.length);
    }
    out.push_back(c);
  };
  switch (kind) {
    case SweepKind::Fixed:
      for (std::size_t len = 25; len <= 150; len += 25) add(FixedLength{len});
      break;
    case SweepKind::Sem:
      for (int k = 0; k <= 10; ++k) add(SemThreshold{0.10 + 0.02 * k});
      break;
    case SweepKind::EarlyStop:
      for (std::size_t n = 6; n <= 12; n += 2) {
        for (int k = 0; k < 4; ++k) add(EarlyStop{n, 0.05 + 0.1 * k});
      }
      break;
    case SweepKind::Overall:
      for (std::size_t len : {25, 50, 75, 100}) add(FixedLength{len});
      for (double s : {0.12, 0.14, 0.16, 0.18}) add(SemThreshold{s});
      for (std::size_t n : {10, 12}) {
        for (double d : {0.05, 0.15}) add(EarlyStop{n, d});
      }
      break;
  }
  return out;
}

std::vector<BatchMetrics> run_criteria(const ItemBank& bank, const SimulationTemplate& settings,
                                       const BatchSpec& spec,
                                       std::span<const TerminationCriterion> criteria,
                                       std::uint64_t master_seed, unsigned workers) {
  std::vector<BatchMetrics> rows;
  rows.reserve(criteria.size());
  for (const auto& criterion : criteria) {
    SimulationTemplate s = settings;
    s.session.criterion = criterion;
    rows.push_back(run_batch(bank, s, spec, master_seed, workers, criterion.label()));
  }
  return rows;
}

std::vector<BatchMetrics> run_termination_sweep(const ItemBank& bank,
                                                const SimulationTemplate& settings,
                                                const BatchSpec& spec, SweepKind kind,
                                                std::uint64_t master_seed, unsigned workers) {
  const auto criteria = sweep_criteria(kind, settings.session.criterion.min_steps,
                                       settings.session.criterion.max_steps);
  auto rows = run_criteria(bank, settings, spec, criteria, master_seed, workers);
  if (kind == SweepKind::Overall) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const BatchMetrics& x, const BatchMetrics& y) { return x.mae < y.mae; });
  }
  return rows;
}

std::vector<LearnerLog> group_learner_logs(std::span<const ResponseRecord> records,
                                           const ItemBank& bank) {
  std::vector<LearnerLog> logs;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& rec : records) {
    const auto item = bank.find(rec.item_id);
    if (!item) {
      fail(ErrorCode::Validation,
           "session of learner '" + rec.learner_id + "' references unknown item '" + rec.item_id + "'");
    }
    auto [it, fresh] = index.emplace(rec.learner_id, logs.size());
    if (fresh) logs.push_back(LearnerLog{rec.learner_id, {}});
    logs[it->second].answers.emplace_back(*item, rec.correct);
  }
  return logs;
}

ReplayMode parse_replay_mode(const std::string& name) {
  if (name == "adaptive-replay") return ReplayMode::AdaptiveReplay;
  if (name == "full-session") return ReplayMode::FullSession;
  if (name == "manual-difficulty") return ReplayMode::ManualDifficulty;
  fail(ErrorCode::Validation,
       "unknown replay mode '" + name + "' (adaptive-replay|full-session|manual-difficulty)");
}

const char* to_string(ReplayMode mode) noexcept {
  switch (mode) {
    case ReplayMode::AdaptiveReplay: return "adaptive-replay";
    case ReplayMode::FullSession: return "full-session";
    case ReplayMode::ManualDifficulty: return "manual-difficulty";
  }
  return "?";
}

ItemBank manual_difficulty_bank(const ItemBank& learned,
                                const std::unordered_map<std::string, int>& item_levels) {
  const auto bins = CefrBins::from_bank(learned);
  std::vector<ItemParams> items = learned.items();
  for (auto& item : items) {
    auto it = item_levels.find(item.item_id);
    if (it == item_levels.end()) {
      fail(ErrorCode::Validation, "no CEFR level for item '" + item.item_id + "'");
    }
    item.a = 1.0;
    item.b = bins.center(it->second);
  }
  return ItemBank(std::move(items));
}

std::vector<ReplayResult> run_real_replay(const ItemBank& bank, std::span<const LearnerLog> logs,
                                          ReplayMode mode, const SessionConfig& session,
                                          std::uint64_t master_seed, unsigned workers,
                                          const std::unordered_map<std::string, int>* item_levels) {
  session.validate();
  ItemBank manual;
  const ItemBank* active = &bank;
  if (mode == ReplayMode::ManualDifficulty) {
    if (item_levels == nullptr) {
      fail(ErrorCode::Validation, "manual-difficulty replay needs CEFR levels per item");
    }
    manual = manual_difficulty_bank(bank, *item_levels);
    active = &manual;
  }
  const auto& grid = default_grid();
  std::vector<ReplayResult> results(logs.size());
  parallel_for(logs.size(), workers, [&](std::size_t k) {
    const auto& log = logs[k];
    auto& out = results[k];
    out.learner_id = log.learner_id;
    if (mode == ReplayMode::FullSession) {
      std::vector<ScoredResponse> scored;
      scored.reserve(log.answers.size());
      for (const auto& [item, correct] : log.answers) scored.push_back({&(*active)[item], correct});
      out.ability = estimate_ability_eap(scored, grid);
      out.length = scored.size();
      out.reason = StopReason::Converged;
      return;
    }
    std::vector<bool> eligible(active->size(), false);
    std::vector<signed char> recorded(active->size(), -1);
    for (const auto& [item, correct] : log.answers) {
      eligible[item] = true;
      recorded[item] = correct ? 1 : 0;
    }
    const AnswerSource replay = [&](const ItemParams& item, std::size_t) {
      return recorded[*active->find(item.item_id)] == 1;
    };
    const auto result = run_session(replay, *active, session,
                                    Rng::derive(master_seed, {k}).next_u64(), grid, &eligible);
    out.ability = result.ability;
    out.length = result.length;
    out.reason = result.reason;
  });
  return results;
}

}  // namespace irtcat
