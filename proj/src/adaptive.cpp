#include "irtcat/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "irtcat/error.hpp"

namespace irtcat {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* to_string(Phase phase) noexcept { return phase == Phase::WarmUp ? "warmup" : "main"; }

const char* to_string(Decision decision) noexcept {
  switch (decision) {
    case Decision::Continue: return "continue";
    case Decision::Converged: return "converged";
    case Decision::ForcedStop: return "forced-stop";
  }
  return "?";
}

const char* to_string(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::Converged: return "converged";
    case StopReason::ForcedStop: return "forced-stop";
    case StopReason::OutOfItems: return "out-of-items";
  }
  return "?";
}

void ExplorationConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) fail(ErrorCode::Validation, "exploration epsilon must lie in [0, 1]");
  if (!(alpha >= 0.0)) fail(ErrorCode::Validation, "exploration alpha must be non-negative");
  if (trend_window < 2) fail(ErrorCode::Validation, "exploration trend_window must be >= 2");
  if (!(start_step < stop_step)) fail(ErrorCode::Validation, "exploration start_step must be < stop_step");
  if (!(flat_threshold >= 0.0)) fail(ErrorCode::Validation, "exploration flat_threshold must be >= 0");
}

void TerminationCriterion::validate() const {
  if (min_steps > max_steps) fail(ErrorCode::Validation, "criterion min_steps must be <= max_steps");
  if (max_steps == 0) fail(ErrorCode::Validation, "criterion max_steps must be positive");
  if (auto* f = std::get_if<FixedLength>(&rule); f && f->length == 0) {
    fail(ErrorCode::Validation, "fixed-length criterion needs a positive length");
  }
  if (auto* s = std::get_if<SemThreshold>(&rule); s && !(s->max_sem > 0.0)) {
    fail(ErrorCode::Validation, "SEM criterion needs a positive threshold");
  }
  if (auto* e = std::get_if<EarlyStop>(&rule); e && (e->window == 0 || !(e->delta > 0.0))) {
    fail(ErrorCode::Validation, "EarlyStop criterion needs window >= 1 and delta > 0");
  }
}

std::string TerminationCriterion::label() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, FixedLength>) {
          os << "fixed:" << r.length;
        } else if constexpr (std::is_same_v<T, SemThreshold>) {
          os << "sem:" << r.max_sem;
        } else {
          os << "earlystop:N" << r.window << ":d" << r.delta;
        }
      },
      rule);
  return os.str();
}

void SelectionPolicy::validate() const {
  if (top_k < 1) fail(ErrorCode::Validation, "selection top_k must be >= 1");
  if (!(epsilon_coldstart >= 0.0 && epsilon_coldstart <= 1.0)) {
    fail(ErrorCode::Validation, "selection epsilon_coldstart must lie in [0, 1]");
  }
}

void SessionConfig::validate() const {
  criterion.validate();
  exploration.validate();
  policy.validate();
  if (!(theta0_sd >= 0.0)) fail(ErrorCode::Validation, "theta0_sd must be non-negative");
}

SessionState init_session(std::uint64_t seed, const ItemBank& bank, const SessionConfig& config,
                          const QuadratureGrid& grid) {
  if (bank.empty()) fail(ErrorCode::InvalidArgument, "cannot start a session on an empty bank");
  config.validate();
  SessionState state;
  state.rng_seed = seed;
  state.is_administered.assign(bank.size(), false);
  state.counted_loglik.assign(grid.size(), 0.0);
  state.warmup_length = config.warmup_length;
  state.phase = config.warmup_length > 0 ? Phase::WarmUp : Phase::Main;
  Rng init = SessionStreams(seed).init;
  state.theta_trajectory.push_back(init.normal(config.theta0_mean, config.theta0_sd));
  state.sem_trajectory.push_back(kInf);
  return state;
}

double trend_slope(std::span<const double> values, std::size_t window) noexcept {
  const std::size_t n = std::min(window, values.size());
  if (n < 2) return 0.0;
  const auto tail = values.subspan(values.size() - n);
  const double x_mean = (static_cast<double>(n) - 1.0) / 2.0;
  double y_mean = 0.0;
  for (double y : tail) y_mean += y;
  y_mean /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - x_mean;
    sxy += dx * (tail[i] - y_mean);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double effective_theta(const SessionState& state, const ExplorationConfig& exploration, Rng& rng) {
  const double theta = state.theta();
  if (!exploration.enabled) return theta;
  const std::size_t step = state.step();
  if (step < exploration.start_step || step >= exploration.stop_step) return theta;
  if (!(rng.uniform() < exploration.epsilon)) return theta;
  const double slope = trend_slope(state.theta_trajectory, exploration.trend_window);
  if (std::abs(slope) <= exploration.flat_threshold) return theta;
  return theta + (slope > 0.0 ? exploration.alpha : -exploration.alpha);
}

std::optional<std::size_t> select_next_item(const SessionState& state, const ItemBank& bank,
                                            const SelectionPolicy& policy, double selection_theta,
                                            Rng& rng, const std::vector<bool>* eligible) {
  auto available = [&](std::size_t i) {
    return !state.is_administered[i] && (eligible == nullptr || (*eligible)[i]);
  };

  if (policy.coldstart_enabled && rng.uniform() < policy.epsilon_coldstart) {
    std::uint64_t fewest = std::numeric_limits<std::uint64_t>::max();
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < bank.size(); ++i) {
      if (!available(i)) continue;
      const auto count = bank[i].response_count;
      if (count < fewest) {
        fewest = count;
        pool.clear();
      }
      if (count == fewest) pool.push_back(i);
    }
    if (pool.empty()) return std::nullopt;
    return pool[rng.index(pool.size())];
  }

  struct Ranked {
    double info;
    std::size_t index;
  };
  // Higher information first; equal information ordered by item id.
  auto better = [&](const Ranked& x, const Ranked& y) {
    if (x.info != y.info) return x.info > y.info;
    return bank[x.index].item_id < bank[y.index].item_id;
  };
  std::vector<Ranked> top;
  top.reserve(policy.top_k + 1);
  for (std::size_t i = 0; i < bank.size(); ++i) {
    if (!available(i)) continue;
    const Ranked cand{item_information(selection_theta, bank[i]), i};
    if (top.size() == policy.top_k && !better(cand, top.back())) continue;
    auto pos = std::upper_bound(top.begin(), top.end(), cand, better);
    top.insert(pos, cand);
    if (top.size() > policy.top_k) top.pop_back();
  }
  if (top.empty()) return std::nullopt;
  return top[rng.index(top.size())].index;
}

double current_sem(const SessionState& state, const ItemBank& bank) {
  if (state.n_counted == 0) return kInf;
  double info = 0.0;
  for (const auto& r : state.responses) {
    if (r.counted) info += item_information(state.theta(), bank[r.item]);
  }
  return sem_from_information(info).value_or(kInf);
}

void record_response(SessionState& state, const ItemBank& bank, std::size_t item, bool correct,
                     const QuadratureGrid& grid) {
  if (item >= bank.size()) fail(ErrorCode::InvalidArgument, "response for an item outside the bank");
  if (state.is_administered[item]) {
    fail(ErrorCode::InvalidArgument, "item '" + bank[item].item_id + "' already recorded in this session");
  }
  const Phase phase = state.phase;
  const bool counted = !(phase == Phase::WarmUp && !correct);
  state.is_administered[item] = true;
  state.administered.push_back(item);
  state.responses.push_back(RecordedResponse{item, correct, counted, phase});
  if (phase == Phase::WarmUp && state.responses.size() >= state.warmup_length) {
    state.phase = Phase::Main;
  }

  double theta = state.theta_trajectory.front();
  if (counted) {
    for (std::size_t q = 0; q < grid.size(); ++q) {
      state.counted_loglik[q] += log_prob(grid.nodes[q], bank[item], correct);
    }
    ++state.n_counted;
  }
  if (state.n_counted > 0) {
    theta = posterior_ability(state.counted_loglik, grid, state.n_counted).theta;
  }
  state.theta_trajectory.push_back(theta);
  state.sem_trajectory.push_back(current_sem(state, bank));
}

Decision check_termination(const SessionState& state, const ItemBank& /*bank*/,
                           const TerminationCriterion& criterion) {
  const std::size_t n = state.step();
  bool met = false;
  if (n >= criterion.min_steps) {
    if (const auto* f = std::get_if<FixedLength>(&criterion.rule)) {
      // warm-up items do not count toward the fixed length
      met = n >= state.warmup_length + f->length;
    } else if (const auto* s = std::get_if<SemThreshold>(&criterion.rule)) {
      met = state.sem_trajectory.back() <= s->max_sem;
    } else if (const auto* e = std::get_if<EarlyStop>(&criterion.rule)) {
      // Only estimates produced after warm-up may enter the window.
      if (n >= state.warmup_length + e->window) {
        met = true;
        const auto& t = state.theta_trajectory;
        for (std::size_t i = n + 1 - e->window; i <= n; ++i) {
          if (!(std::abs(t[i] - t[i - 1]) < e->delta)) {
            met = false;
            break;
          }
        }
      }
    }
  }
  if (met) return Decision::Converged;
  if (n >= criterion.max_steps) return Decision::ForcedStop;
  return Decision::Continue;
}

SessionResult run_session(const AnswerSource& answer, const ItemBank& bank,
                          const SessionConfig& config, std::uint64_t seed,
                          const QuadratureGrid& grid, const std::vector<bool>* eligible,
                          std::size_t extra_steps) {
  SessionState state = init_session(seed, bank, config, grid);
  SessionStreams streams(seed);

  auto advance = [&]() -> bool {
    const double theta = effective_theta(state, config.exploration, streams.exploration);
    const auto item = select_next_item(state, bank, config.policy, theta, streams.selection, eligible);
    if (!item) return false;
    const bool correct = answer(bank[*item], state.step());
    record_response(state, bank, *item, correct, grid);
    return true;
  };

  SessionResult result;
  result.theta0 = state.theta_trajectory.front();
  for (;;) {
    const Decision d = check_termination(state, bank, config.criterion);
    if (d == Decision::Converged) {
      result.reason = StopReason::Converged;
      break;
    }
    if (d == Decision::ForcedStop) {
      result.reason = StopReason::ForcedStop;
      break;
    }
    if (!advance()) {
      result.reason = StopReason::OutOfItems;
      break;
    }
  }
  result.length = state.step();
  result.ability = Ability{state.theta(), state.sem_trajectory.back(), state.n_counted};
  if (result.reason == StopReason::Converged) {
    for (std::size_t k = 0; k < extra_steps && advance(); ++k) {
    }
  }
  result.responses = std::move(state.responses);
  result.theta_trajectory = std::move(state.theta_trajectory);
  result.sem_trajectory = std::move(state.sem_trajectory);
  return result;
}

}  // namespace irtcat
