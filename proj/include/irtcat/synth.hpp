#pragma once

// Seeded synthetic datasets standing in for the unavailable real bank and
// learner cohorts.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "irtcat/calibration.hpp"
#include "irtcat/exercise.hpp"
#include "irtcat/simulator.hpp"

namespace irtcat::synth {

struct BankSpec {
  std::size_t n_items = 3000;
  double log_a_sd = 0.3;
  double b_mean = 0.0;
  double b_sd = 1.5;
  double b_lo = -4.0;  // b is truncated to [b_lo, b_hi] by rejection
  double b_hi = 4.0;
  double c = 0.25;
  double level_noise_sd = 0.5;  // expert CEFR label noise on b

  void validate() const;
};

struct SyntheticBank {
  ItemBank bank;
  /// Expert-style CEFR level per item: noisy b binned over the bank's range.
  std::map<std::string, int> item_levels;
};

SyntheticBank make_bank(const BankSpec& spec, std::uint64_t seed);

struct ResponsesSpec {
  std::size_t n_learners = 1000;
  std::size_t responses_per_learner = 150;  // 0 = every item (exhaustive test)
  double theta_mean = 0.0;
  double theta_sd = 1.0;
  double slip_rate = 0.0;

  void validate() const;
};

struct SyntheticResponses {
  std::vector<ResponseRecord> records;
  std::vector<std::pair<std::string, double>> truth;  // learner -> theta
};

/// Each learner answers a random subset of items in random order.
SyntheticResponses make_responses(const ItemBank& bank, const ResponsesSpec& spec,
                                  std::uint64_t seed);

struct ExercisesSpec {
  std::size_t n_students = 400;
  std::size_t min_exercises = 20;
  std::size_t max_exercises = 200;
  std::size_t n_constructs = 60;
  std::size_t min_constructs_per_exercise = 1;
  std::size_t max_constructs_per_exercise = 3;
  double multiple_choice_fraction = 0.4;
  double hint_rate = 0.15;  // scaled by the chance of not knowing the construct
  double theta_sd = 1.0;
  double construct_log_a_sd = 0.3;
  double construct_b_sd = 1.0;
  double labeled_fraction = 0.5;
  double label_noise_sd = 0.3;
  double label_lo = -2.5;  // CEFR bins for teacher labels
  double label_hi = 2.5;

  void validate() const;
};

struct SyntheticExercises {
  std::vector<ExerciseEvent> events;
  CefrLabelTable labels;
  std::vector<std::pair<std::string, double>> truth;
  std::vector<ItemParams> constructs;  // true construct parameters (c unused)
};

SyntheticExercises make_exercises(const ExercisesSpec& spec, std::uint64_t seed);

}  // namespace irtcat::synth
