#pragma once

// Ability estimation (EAP on a fixed quadrature grid) and item calibration
// by alternating penalized likelihood: an E-step computes each learner's
// grid posterior with items held fixed, an M-step refits every item's
// (a, b[, c]) against the expected counts with abilities held fixed.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "irtcat/irt.hpp"

namespace irtcat {

struct QuadratureGrid {
  std::vector<double> nodes;        // strictly ascending
  std::vector<double> weights;      // prior masses, sum to 1
  std::vector<double> log_weights;

  /// Equally spaced nodes over [lo, hi] weighted by a Normal(mean, sd) density.
  static QuadratureGrid normal(std::size_t n_nodes = 61, double lo = -4.0, double hi = 4.0,
                               double mean = 0.0, double sd = 1.0);

  std::size_t size() const noexcept { return nodes.size(); }
  void validate() const;
};

/// 61 nodes over [-4, 4] with a standard normal prior.
const QuadratureGrid& default_grid();

/// Posterior mean / SD over the grid given per-node log-likelihoods (prior
/// excluded). Throws Error(DegeneratePosterior) when every node underflows.
Ability posterior_ability(std::span<const double> log_likelihood, const QuadratureGrid& grid,
                          std::size_t n_responses);

Ability estimate_ability_eap(std::span<const ScoredResponse> responses, const QuadratureGrid& grid);

struct ResponseRecord {
  std::string learner_id;
  std::string item_id;
  bool correct = false;
  std::optional<std::int64_t> timestamp;
};

struct CalibrationConfig {
  int max_outer_iterations = 200;
  double convergence_tol = 1e-4;  // mean |change| over (a, b)
  bool estimate_c = false;
  double fixed_c = 0.25;
  bool estimate_a = true;
  double fixed_a = 1.0;
  // Priors: log a ~ N(0, log_a_prior_sd), b ~ N(0, b_prior_sd),
  // c ~ Beta(c_prior_alpha, c_prior_beta).
  double log_a_prior_sd = 0.5;
  double b_prior_sd = 2.0;
  double c_prior_alpha = 5.0;
  double c_prior_beta = 17.0;
  std::size_t grid_nodes = 61;
  unsigned workers = 1;

  void validate() const;
};

/// Parameter boxes enforced by the item optimizer.
inline constexpr double kMinA = 0.2, kMaxA = 4.0;
inline constexpr double kMinB = -5.0, kMaxB = 5.0;
inline constexpr double kMaxC = 0.5;

/// `successes` out of `trials` for one (learner, item) pair; a single
/// dichotomous response is trials == 1.
struct Observation {
  std::size_t learner = 0;
  std::size_t item = 0;
  std::uint32_t successes = 0;
  std::uint32_t trials = 1;
};

struct CalibrationOutcome {
  std::vector<ItemParams> items;
  std::vector<Ability> abilities;  // per learner index
  int iterations = 0;
  bool converged = false;
  double last_change = 0.0;
  double log_marginal_likelihood = 0.0;
  std::vector<std::size_t> degenerate_items;  // constant response columns
};

/// Core alternating fit. `start` supplies initial parameters (and the fixed
/// c per item when c is not estimated).
CalibrationOutcome calibrate_observations(std::vector<ItemParams> start, std::size_t n_learners,
                                          std::span<const Observation> observations,
                                          const CalibrationConfig& config);

/// Starting difficulties from each item's guess-corrected success rate.
void seed_difficulties(std::vector<ItemParams>& items, std::span<const Observation> observations);

struct BankCalibration {
  ItemBank bank;
  std::vector<std::string> learner_ids;
  std::vector<Ability> abilities;
  int iterations = 0;
  bool converged = false;
  double last_change = 0.0;
  double log_marginal_likelihood = 0.0;
  std::vector<std::string> degenerate_items;
};

/// Items and learners are ordered by first appearance in `records`. When
/// `start` is given, items found there start from its parameters.
BankCalibration calibrate_bank(std::span<const ResponseRecord> records,
                               const CalibrationConfig& config,
                               const ItemBank* start = nullptr);

/// Six equal-width CEFR bins (A1..C2) over a difficulty range.
struct CefrBins {
  double lo = -3.0;
  double hi = 3.0;

  static CefrBins from_bank(const ItemBank& bank);

  int level_of(double theta) const noexcept;
  double center(int level) const;
};

inline constexpr int kCefrLevels = 6;

int map_theta_to_cefr(double theta, const ItemBank& bank);
double cefr_to_difficulty(int level, const ItemBank& bank);

}  // namespace irtcat
