#pragma once

// Adaptive test state machine: select -> answer -> record -> check.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "irtcat/calibration.hpp"
#include "irtcat/irt.hpp"
#include "irtcat/rng.hpp"

namespace irtcat {

enum class Phase { WarmUp, Main };

const char* to_string(Phase phase) noexcept;

struct ExplorationConfig {
  bool enabled = true;
  double epsilon = 0.2;       // probability of exploring at an eligible step
  double alpha = 0.5;         // offset magnitude, ability units
  std::size_t trend_window = 5;
  std::size_t start_step = 10;
  std::size_t stop_step = 60;  // exclusive
  double flat_threshold = 0.01;

  static ExplorationConfig disabled() {
    ExplorationConfig cfg;
    cfg.enabled = false;
    return cfg;
  }
  void validate() const;
};

struct FixedLength {
  std::size_t length = 50;
};
struct SemThreshold {
  double max_sem = 0.3;
};
struct EarlyStop {
  std::size_t window = 10;
  double delta = 0.05;
};

struct TerminationCriterion {
  std::variant<FixedLength, SemThreshold, EarlyStop> rule = EarlyStop{};
  std::size_t min_steps = 25;
  std::size_t max_steps = 100;

  void validate() const;
  std::string label() const;
};

struct SelectionPolicy {
  std::size_t top_k = 5;
  double epsilon_coldstart = 0.1;
  bool coldstart_enabled = false;

  void validate() const;
};

struct SessionConfig {
  TerminationCriterion criterion;
  ExplorationConfig exploration;
  SelectionPolicy policy;
  std::size_t warmup_length = 0;
  double theta0_mean = 0.0;
  double theta0_sd = 0.5;

  void validate() const;
};

struct RecordedResponse {
  std::size_t item = 0;  // bank index
  bool correct = false;
  bool counted = true;
  Phase phase = Phase::Main;
};

struct SessionState {
  std::vector<std::size_t> administered;
  std::vector<bool> is_administered;  // by bank index
  std::vector<RecordedResponse> responses;
  std::vector<double> theta_trajectory;  // theta_0 .. theta_n
  std::vector<double> sem_trajectory;    // +inf until counted evidence exists
  std::vector<double> counted_loglik;    // per grid node, counted responses only
  std::size_t n_counted = 0;
  std::size_t warmup_length = 0;
  Phase phase = Phase::Main;
  std::uint64_t rng_seed = 0;

  std::size_t step() const noexcept { return responses.size(); }
  double theta() const noexcept { return theta_trajectory.back(); }
};

/// Independent random streams of one session.
struct SessionStreams {
  Rng init;
  Rng selection;
  Rng exploration;

  explicit SessionStreams(std::uint64_t seed)
      : init(Rng::derive(seed, {1})),
        selection(Rng::derive(seed, {2})),
        exploration(Rng::derive(seed, {3})) {}
};

/// Draws theta_0 ~ Normal(theta0_mean, theta0_sd) from the init stream.
SessionState init_session(std::uint64_t seed, const ItemBank& bank, const SessionConfig& config,
                          const QuadratureGrid& grid);

/// Least-squares slope of the last `window` values (0 for fewer than two).
double trend_slope(std::span<const double> values, std::size_t window) noexcept;

/// Ability used for item selection: theta_n, possibly shifted by +-alpha
/// along the recent trend.
double effective_theta(const SessionState& state, const ExplorationConfig& exploration, Rng& rng);

/// Picks the next item; `eligible` (by bank index) optionally restricts the
/// candidates. Returns nullopt when no candidate remains.
std::optional<std::size_t> select_next_item(const SessionState& state, const ItemBank& bank,
                                            const SelectionPolicy& policy, double selection_theta,
                                            Rng& rng, const std::vector<bool>* eligible = nullptr);

/// Appends a response and refreshes the ability estimate from all counted
/// responses. Wrong answers during warm-up are kept in the log but not
/// counted. With no counted evidence the estimate stays at theta_0.
void record_response(SessionState& state, const ItemBank& bank, std::size_t item, bool correct,
                     const QuadratureGrid& grid);

enum class Decision { Continue, Converged, ForcedStop };

const char* to_string(Decision decision) noexcept;

/// SEM at the current estimate over the counted items (+inf when none).
double current_sem(const SessionState& state, const ItemBank& bank);

Decision check_termination(const SessionState& state, const ItemBank& bank,
                           const TerminationCriterion& criterion);

enum class StopReason { Converged, ForcedStop, OutOfItems };

const char* to_string(StopReason reason) noexcept;

struct SessionResult {
  Ability ability;
  double theta0 = 0.0;
  std::vector<RecordedResponse> responses;
  std::vector<double> theta_trajectory;
  std::vector<double> sem_trajectory;
  std::size_t length = 0;
  StopReason reason = StopReason::Converged;
};

/// Answer oracle: (item, zero-based step) -> correct.
using AnswerSource = std::function<bool(const ItemParams& item, std::size_t step)>;

/// Runs a complete session. `extra_steps` keeps administering items after
/// convergence (used for plot traces); the reported ability and length stay
/// those at the stopping point.
SessionResult run_session(const AnswerSource& answer, const ItemBank& bank,
                          const SessionConfig& config, std::uint64_t seed,
                          const QuadratureGrid& grid, const std::vector<bool>* eligible = nullptr,
                          std::size_t extra_steps = 0);

}  // namespace irtcat
