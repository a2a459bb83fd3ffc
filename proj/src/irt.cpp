#include "irtcat/irt.hpp"

#include <algorithm>
#include <cmath>

#include "irtcat/error.hpp"

namespace irtcat {

void validate_item(const ItemParams& item) {
  if (item.item_id.empty()) fail(ErrorCode::Validation, "item id must not be empty");
  if (!(item.a > 0.0) || !std::isfinite(item.a)) {
    fail(ErrorCode::Validation, "item '" + item.item_id + "': discrimination a must be positive");
  }
  if (!std::isfinite(item.b)) {
    fail(ErrorCode::Validation, "item '" + item.item_id + "': difficulty b must be finite");
  }
  if (!(item.c >= 0.0 && item.c < 1.0)) {
    fail(ErrorCode::Validation, "item '" + item.item_id + "': guessing c must lie in [0, 1)");
  }
}

ItemBank::ItemBank(std::vector<ItemParams> items) : items_(std::move(items)) {
  index_.reserve(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    validate_item(items_[i]);
    if (!index_.emplace(items_[i].item_id, i).second) {
      fail(ErrorCode::Validation, "duplicate item id '" + items_[i].item_id + "'");
    }
  }
}

std::optional<std::size_t> ItemBank::find(const std::string& item_id) const {
  auto it = index_.find(item_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double ItemBank::min_difficulty() const {
  if (items_.empty()) fail(ErrorCode::InvalidArgument, "empty item bank");
  return std::min_element(items_.begin(), items_.end(),
                          [](const auto& x, const auto& y) { return x.b < y.b; })
      ->b;
}

double ItemBank::max_difficulty() const {
  if (items_.empty()) fail(ErrorCode::InvalidArgument, "empty item bank");
  return std::max_element(items_.begin(), items_.end(),
                          [](const auto& x, const auto& y) { return x.b < y.b; })
      ->b;
}

double logistic(double x) noexcept {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double z = std::exp(x);
  return z / (1.0 + z);
}

double prob_correct(double theta, const ItemParams& item) noexcept {
  return item.c + (1.0 - item.c) * logistic(item.a * (theta - item.b));
}

double prob_correct_derivative(double theta, const ItemParams& item) noexcept {
  const double s = logistic(item.a * (theta - item.b));
  return item.a * (1.0 - item.c) * s * (1.0 - s);
}

double item_information(double theta, const ItemParams& item) noexcept {
  // With s = logistic(a(theta - b)): 1 - P = (1 - c)(1 - s) and
  // (P - c) / (1 - c) = s, which avoids cancellation in both factors.
  const double s = logistic(item.a * (theta - item.b));
  const double p = item.c + (1.0 - item.c) * s;
  if (p <= 0.0) return 0.0;
  return item.a * item.a * (1.0 - item.c) * (1.0 - s) * s * (s / p);
}

double test_information(double theta, std::span<const ItemParams> items) noexcept {
  double total = 0.0;
  for (const auto& item : items) total += item_information(theta, item);
  return total;
}

double test_information(double theta, std::span<const ItemParams* const> items) noexcept {
  double total = 0.0;
  for (const auto* item : items) total += item_information(theta, *item);
  return total;
}

std::optional<double> sem_from_information(double information) noexcept {
  if (!(information > 0.0)) return std::nullopt;
  return std::sqrt(1.0 / information);
}

std::optional<double> sem(double theta, std::span<const ItemParams> items) noexcept {
  return sem_from_information(test_information(theta, items));
}

double clamp_probability(double p) noexcept {
  return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
}

double log_prob(double theta, const ItemParams& item, bool correct) noexcept {
  const double p = clamp_probability(prob_correct(theta, item));
  return correct ? std::log(p) : std::log1p(-p);
}

double response_log_likelihood(double theta, std::span<const ScoredResponse> responses) noexcept {
  double total = 0.0;
  for (const auto& r : responses) total += log_prob(theta, *r.item, r.correct);
  return total;
}

}  // namespace irtcat
