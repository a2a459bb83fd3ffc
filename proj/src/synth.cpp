#include "irtcat/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "irtcat/error.hpp"
#include "irtcat/rng.hpp"

namespace irtcat::synth {

namespace {

std::string numbered(char prefix, std::size_t k, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, k);
  return buf;
}

}  // namespace

void BankSpec::validate() const {
  if (!(log_a_sd >= 0.0) || !(b_sd >= 0.0) || !(level_noise_sd >= 0.0)) {
    fail(ErrorCode::Validation, "bank spec: standard deviations must be non-negative");
  }
  if (!(b_hi > b_lo)) fail(ErrorCode::Validation, "bank spec: b_hi must exceed b_lo");
  if (!(c >= 0.0 && c < 1.0)) fail(ErrorCode::Validation, "bank spec: c must lie in [0, 1)");
}

SyntheticBank make_bank(const BankSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng = Rng::derive(seed, {0xB4});
  std::vector<ItemParams> items;
  items.reserve(spec.n_items);
  for (std::size_t k = 0; k < spec.n_items; ++k) {
    ItemParams item;
    item.item_id = numbered('Q', k + 1, 5);
    item.a = std::exp(rng.normal(0.0, spec.log_a_sd));
    do {
      item.b = rng.normal(spec.b_mean, spec.b_sd);
    } while (item.b < spec.b_lo || item.b > spec.b_hi);
    item.c = spec.c;
    items.push_back(std::move(item));
  }
  SyntheticBank out;
  out.bank = ItemBank(std::move(items));
  if (!out.bank.empty()) {
    const auto bins = CefrBins::from_bank(out.bank);
    Rng noise = Rng::derive(seed, {0x1E});
    for (const auto& item : out.bank.items()) {
      out.item_levels[item.item_id] = bins.level_of(item.b + noise.normal(0.0, spec.level_noise_sd));
    }
  }
  return out;
}

void ResponsesSpec::validate() const {
  if (!(theta_sd >= 0.0)) fail(ErrorCode::Validation, "responses spec: theta_sd must be non-negative");
  if (!(slip_rate >= 0.0 && slip_rate <= 1.0)) fail(ErrorCode::Validation, "responses spec: slip_rate must lie in [0, 1]");
}

SyntheticResponses make_responses(const ItemBank& bank, const ResponsesSpec& spec,
                                  std::uint64_t seed) {
  spec.validate();
  if (bank.empty()) fail(ErrorCode::InvalidArgument, "cannot draw responses from an empty bank");
  const std::size_t per = spec.responses_per_learner == 0
                              ? bank.size()
                              : std::min(spec.responses_per_learner, bank.size());
  const SlipSchedule slip{spec.slip_rate, spec.slip_rate, 0};
  SyntheticResponses out;
  out.records.reserve(spec.n_learners * per);
  std::vector<std::size_t> order(bank.size());
  for (std::size_t l = 0; l < spec.n_learners; ++l) {
    Rng rng = Rng::derive(seed, {0x5E, l});
    const std::string learner = numbered('L', l + 1, 5);
    const double theta = rng.normal(spec.theta_mean, spec.theta_sd);
    out.truth.emplace_back(learner, theta);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t k = 0; k < per; ++k) {
      std::swap(order[k], order[k + rng.index(order.size() - k)]);
      const auto& item = bank[order[k]];
      const bool correct = simulate_answer(theta, item, k, slip, rng);
      out.records.push_back(ResponseRecord{learner, item.item_id, correct,
                                           static_cast<std::int64_t>(k) * 15000});
    }
  }
  return out;
}

void ExercisesSpec::validate() const {
  if (min_exercises > max_exercises) fail(ErrorCode::Validation, "exercises spec: min_exercises > max_exercises");
  if (min_constructs_per_exercise < 1 || min_constructs_per_exercise > max_constructs_per_exercise) {
    fail(ErrorCode::Validation, "exercises spec: constructs per exercise must satisfy 1 <= min <= max");
  }
  if (n_constructs < max_constructs_per_exercise) {
    fail(ErrorCode::Validation, "exercises spec: n_constructs must be >= max_constructs_per_exercise");
  }
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(multiple_choice_fraction) || !prob(hint_rate) || !prob(labeled_fraction)) {
    fail(ErrorCode::Validation, "exercises spec: fractions and rates must lie in [0, 1]");
  }
  if (!(label_hi > label_lo)) fail(ErrorCode::Validation, "exercises spec: label_hi must exceed label_lo");
}

SyntheticExercises make_exercises(const ExercisesSpec& spec, std::uint64_t seed) {
  spec.validate();
  SyntheticExercises out;
  Rng construct_rng = Rng::derive(seed, {0xC0});
  for (std::size_t k = 0; k < spec.n_constructs; ++k) {
    ItemParams c;
    c.item_id = numbered('C', k + 1, 3);
    c.construct_id = c.item_id;
    c.a = std::exp(construct_rng.normal(0.0, spec.construct_log_a_sd));
    c.b = construct_rng.normal(0.0, spec.construct_b_sd);
    out.constructs.push_back(c);
  }
  const CefrBins label_bins{spec.label_lo, spec.label_hi};
  std::vector<std::size_t> pick(spec.n_constructs);
  for (std::size_t s = 0; s < spec.n_students; ++s) {
    Rng rng = Rng::derive(seed, {0x57, s});
    const std::string student = numbered('S', s + 1, 5);
    const double theta = rng.normal(0.0, spec.theta_sd);
    out.truth.emplace_back(student, theta);
    if (rng.bernoulli(spec.labeled_fraction)) {
      out.labels[student] = label_bins.level_of(theta + rng.normal(0.0, spec.label_noise_sd));
    }
    const std::size_t n_ex =
        spec.min_exercises + rng.index(spec.max_exercises - spec.min_exercises + 1);
    for (std::size_t e = 0; e < n_ex; ++e) {
      ExerciseEvent ev;
      ev.student_id = student;
      ev.exercise_id = student + "-E" + std::to_string(e + 1);
      ev.type = rng.bernoulli(spec.multiple_choice_fraction) ? ExerciseType::MultipleChoice
                                                             : ExerciseType::Cloze;
      ev.timestamp = static_cast<std::int64_t>(e) * 60000;
      const std::size_t n_c =
          spec.min_constructs_per_exercise +
          rng.index(spec.max_constructs_per_exercise - spec.min_constructs_per_exercise + 1);
      std::iota(pick.begin(), pick.end(), 0);
      for (std::size_t k = 0; k < n_c; ++k) {
        std::swap(pick[k], pick[k + rng.index(pick.size() - k)]);
        ItemParams item = out.constructs[pick[k]];
        item.c = guess_factor(ev.type);
        const double know = logistic(item.a * (theta - item.b));
        if (rng.bernoulli(spec.hint_rate * (1.0 - know))) ev.hinted_constructs.insert(item.item_id);
        ev.construct_outcomes[item.item_id] = rng.bernoulli(prob_correct(theta, item));
      }
      out.events.push_back(std::move(ev));
    }
  }
  return out;
}

}  // namespace irtcat::synth
