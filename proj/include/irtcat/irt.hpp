#pragma once

// Three-parameter logistic (3PL) item response model.
//
//   P(theta) = c + (1 - c) / (1 + exp(-a (theta - b)))
//   I(theta) = a^2 * (1 - P) / P * ((P - c) / (1 - c))^2
//
// Everything here is a pure function over immutable values.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace irtcat {

struct ItemParams {
  std::string item_id;
  double a = 1.0;  // discrimination, > 0
  double b = 0.0;  // difficulty
  double c = 0.0;  // guessing floor, [0, 1)
  std::optional<std::string> construct_id;
  std::uint64_t response_count = 0;
};

struct Ability {
  double theta = 0.0;
  double standard_error = std::numeric_limits<double>::infinity();
  std::size_t n_responses = 0;
};

/// Throws Error(Validation) unless a > 0, 0 <= c < 1 and b is finite.
void validate_item(const ItemParams& item);

/// Ordered item collection with unique ids.
class ItemBank {
 public:
  ItemBank() = default;
  explicit ItemBank(std::vector<ItemParams> items);

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  const ItemParams& operator[](std::size_t i) const { return items_[i]; }
  ItemParams& mutable_item(std::size_t i) { return items_[i]; }
  const std::vector<ItemParams>& items() const noexcept { return items_; }

  std::optional<std::size_t> find(const std::string& item_id) const;

  double min_difficulty() const;
  double max_difficulty() const;

 private:
  std::vector<ItemParams> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Numerically stable logistic function.
double logistic(double x) noexcept;

double prob_correct(double theta, const ItemParams& item) noexcept;

/// d/dtheta of prob_correct.
double prob_correct_derivative(double theta, const ItemParams& item) noexcept;

/// Fisher information of one item; 0 in the P -> 0 limit.
double item_information(double theta, const ItemParams& item) noexcept;

double test_information(double theta, std::span<const ItemParams> items) noexcept;
double test_information(double theta, std::span<const ItemParams* const> items) noexcept;

/// Standard error of measurement, sqrt(1 / test information). Returns
/// nullopt when the total information is zero (SEM undefined).
std::optional<double> sem(double theta, std::span<const ItemParams> items) noexcept;
std::optional<double> sem_from_information(double information) noexcept;

/// Probabilities are clamped to [kProbEpsilon, 1 - kProbEpsilon] before
/// taking logs.
inline constexpr double kProbEpsilon = 1e-12;

double clamp_probability(double p) noexcept;

/// log P(correct) and log P(wrong) for one item at theta, with the clamp.
double log_prob(double theta, const ItemParams& item, bool correct) noexcept;

struct ScoredResponse {
  const ItemParams* item;
  bool correct;
};

double response_log_likelihood(double theta, std::span<const ScoredResponse> responses) noexcept;

}  // namespace irtcat
