#pragma once

// Monte-Carlo examinees and batch experiments over the adaptive engine.

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "irtcat/adaptive.hpp"

namespace irtcat {

struct SlipSchedule {
  double base_rate = 0.05;
  double early_rate = 0.05;
  std::size_t early_window = 0;

  static SlipSchedule none() { return {0.0, 0.0, 0}; }
  /// 0.6 for the first 10 answers, 0.1 afterwards.
  static SlipSchedule early_aberrant() { return {0.1, 0.6, 10}; }

  double rate_at(std::size_t step) const noexcept {
    return step < early_window ? early_rate : base_rate;
  }
  void validate() const;
};

/// Samples an answer from the 3PL probability at theta_true, then flips a
/// correct answer to wrong with the slip rate for this step.
bool simulate_answer(double theta_true, const ItemParams& item, std::size_t step,
                     const SlipSchedule& slip, Rng& rng);

/// Answer source for a simulated examinee; draws from its own stream.
AnswerSource simulated_examinee(double theta_true, SlipSchedule slip, std::uint64_t session_seed);

/// Settings shared by every session of an experiment.
struct SimulationTemplate {
  SlipSchedule slip;
  SessionConfig session;

  void validate() const {
    slip.validate();
    session.validate();
  }
};

struct SimulationConfig {
  double theta_true = 0.0;
  SimulationTemplate settings;
  std::uint64_t seed = 0;
};

SessionResult simulate_session(const ItemBank& bank, const SimulationConfig& config,
                               const QuadratureGrid& grid, std::size_t extra_steps = 0);

struct SessionOutcome {
  double theta_true = 0.0;
  double theta_hat = 0.0;
  std::size_t length = 0;
  StopReason reason = StopReason::Converged;
};

struct BatchMetrics {
  std::string label;
  std::size_t n_sessions = 0;
  double mean_iterations = 0.0;
  double sd_iterations = 0.0;
  double mae = 0.0;
  double sd_error = 0.0;
  double mean_signed_error = 0.0;
  std::size_t forced_stops = 0;
};

/// Sample SDs (n - 1); zero for fewer than two sessions.
BatchMetrics summarize(std::string label, std::span<const SessionOutcome> outcomes);

struct BatchSpec {
  std::size_t n_sessions = 500;
  double theta_lo = -3.5;
  double theta_hi = 3.5;
};

/// Seed and true ability of session `index` of a batch with `master_seed`.
std::uint64_t batch_session_seed(std::uint64_t master_seed, std::size_t index);
double batch_theta_true(std::uint64_t master_seed, std::size_t index, const BatchSpec& spec);

std::vector<SessionOutcome> run_batch_sessions(const ItemBank& bank,
                                               const SimulationTemplate& settings,
                                               const BatchSpec& spec, std::uint64_t master_seed,
                                               unsigned workers);

BatchMetrics run_batch(const ItemBank& bank, const SimulationTemplate& settings,
                       const BatchSpec& spec, std::uint64_t master_seed, unsigned workers,
                       std::string label = "batch");

/// Sessions at fixed true abilities, all sharing the batch seeding scheme
/// (session seed derived from the replicate index only).
std::vector<SessionOutcome> run_fixed_theta_sessions(const ItemBank& bank,
                                                     const SimulationTemplate& settings,
                                                     double theta_true, std::size_t count,
                                                     std::uint64_t master_seed, unsigned workers);

struct GridTrace {
  double theta_true = 0.0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  SessionResult result;
};

/// `per_level` sessions at each level; converged sessions continue
/// `extra_steps` past the stopping point.
std::vector<GridTrace> run_artificial_grid(const ItemBank& bank, std::span<const double> levels,
                                           std::size_t per_level,
                                           const SimulationTemplate& settings,
                                           std::uint64_t master_seed, unsigned workers,
                                           std::size_t extra_steps = 10);

struct ExplorationSetting {
  double alpha = 0.5;
  std::size_t n_exp = 60;
};

/// Rows: "baseline" (no slip, no exploration), "slip" (slip, no
/// exploration), then one "alpha:<a>:N:<n>" row per exploration setting.
/// All rows share seeds.
std::vector<BatchMetrics> run_slip_exploration_sweep(const ItemBank& bank,
                                                     const SimulationTemplate& settings,
                                                     const BatchSpec& spec,
                                                     std::span<const ExplorationSetting> grid,
                                                     double slip_rate, std::uint64_t master_seed,
                                                     unsigned workers);

enum class SweepKind { Fixed, Sem, EarlyStop, Overall };

SweepKind parse_sweep_kind(const std::string& name);
const char* to_string(SweepKind kind) noexcept;

/// Settings of each sweep. Fixed lengths raise max_steps to the length.
std::vector<TerminationCriterion> sweep_criteria(SweepKind kind, std::size_t min_steps,
                                                 std::size_t max_steps);

/// One row per criterion on shared seeds; the overall sweep is sorted by MAE.
std::vector<BatchMetrics> run_termination_sweep(const ItemBank& bank,
                                                const SimulationTemplate& settings,
                                                const BatchSpec& spec, SweepKind kind,
                                                std::uint64_t master_seed, unsigned workers);

std::vector<BatchMetrics> run_criteria(const ItemBank& bank, const SimulationTemplate& settings,
                                       const BatchSpec& spec,
                                       std::span<const TerminationCriterion> criteria,
                                       std::uint64_t master_seed, unsigned workers);

struct LearnerLog {
  std::string learner_id;
  std::vector<std::pair<std::size_t, bool>> answers;  // (bank index, correct)
};

/// Groups records by learner (first-appearance order). Unknown item ids
/// raise Error(Validation) naming the learner and item.
std::vector<LearnerLog> group_learner_logs(std::span<const ResponseRecord> records,
                                           const ItemBank& bank);

enum class ReplayMode { AdaptiveReplay, FullSession, ManualDifficulty };

ReplayMode parse_replay_mode(const std::string& name);
const char* to_string(ReplayMode mode) noexcept;

struct ReplayResult {
  std::string learner_id;
  Ability ability;
  std::size_t length = 0;
  StopReason reason = StopReason::Converged;
};

/// Bank with a = 1 and b = center of each item's CEFR bin over the learned
/// difficulty range.
ItemBank manual_difficulty_bank(const ItemBank& learned,
                                const std::unordered_map<std::string, int>& item_levels);

/// Adaptive replay only selects items the learner actually answered and
/// replays the recorded answer; full-session scores every answer at once.
std::vector<ReplayResult> run_real_replay(const ItemBank& bank, std::span<const LearnerLog> logs,
                                          ReplayMode mode, const SessionConfig& session,
                                          std::uint64_t master_seed, unsigned workers,
                                          const std::unordered_map<std::string, int>* item_levels =
                                              nullptr);

}  // namespace irtcat
