#pragma once

// Ability estimation from practice-exercise logs. Linguistic constructs act
// as IRT items; each (student, construct) pair becomes a binomial
// observation of credits out of credits + penalties.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "irtcat/calibration.hpp"
#include "irtcat/stats.hpp"

namespace irtcat {

enum class ExerciseType { Cloze, MultipleChoice };

ExerciseType parse_exercise_type(const std::string& name);
const char* to_string(ExerciseType type) noexcept;

/// 0.0 for cloze, 0.25 for multiple choice.
double guess_factor(ExerciseType type) noexcept;

struct ExerciseEvent {
  std::string student_id;
  std::string exercise_id;
  ExerciseType type = ExerciseType::Cloze;
  std::map<std::string, bool> construct_outcomes;  // final scored attempt
  std::set<std::string> hinted_constructs;
  std::optional<std::int64_t> timestamp;

  void validate() const;
};

struct ConstructPerformance {
  std::string student_id;
  std::string construct_id;
  std::uint32_t credits = 0;
  std::uint32_t penalties = 0;

  std::uint32_t trials() const noexcept { return credits + penalties; }
  std::optional<double> rate() const noexcept {
    if (trials() == 0) return std::nullopt;
    return static_cast<double>(credits) / static_cast<double>(trials());
  }
};

/// Sorted by (student_id, construct_id).
using PerformanceTable = std::vector<ConstructPerformance>;

/// Credit for a correct, unhinted construct; a penalty for each incorrect
/// outcome and one more for each hinted construct (a hint replaces the
/// credit of a correct answer).
PerformanceTable accumulate_performance(std::span<const ExerciseEvent> events);

struct FilterConfig {
  std::size_t min_exer = 1;    // distinct exercises per student
  std::size_t min_constr = 1;  // trials per (student, construct)

  void validate() const;
};

struct ConstructResponses {
  std::vector<std::string> students;
  std::vector<ItemParams> constructs;  // c = trial-weighted guess factor
  std::vector<Observation> observations;
};

/// Throws Error(InsufficientData) when nothing survives the filters.
ConstructResponses build_construct_responses(const PerformanceTable& table,
                                             std::span<const ExerciseEvent> events,
                                             const FilterConfig& filter);

struct ConstructFit {
  ItemBank constructs;
  std::vector<std::string> students;
  std::vector<Ability> abilities;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> degenerate_constructs;
};

/// Calibration defaults for construct fitting: c stays at each construct's
/// guess factor.
CalibrationConfig construct_calibration_defaults();

ConstructFit calibrate_constructs(const ConstructResponses& responses,
                                  const CalibrationConfig& config);

using CefrLabelTable = std::map<std::string, int>;

struct LevelSummary {
  std::size_t count = 0;
  stats::FiveNumber box;
};

struct CefrReport {
  std::size_t n_eval = 0;
  double rho = 0.0;
  std::array<LevelSummary, kCefrLevels> levels{};
};

/// Spearman correlation between CEFR level and estimated ability over the
/// labeled students present in `abilities`.
CefrReport evaluate_against_cefr(const std::unordered_map<std::string, double>& abilities,
                                 const CefrLabelTable& labels);

struct FilterGridRow {
  FilterConfig filter;
  std::string status = "ok";  // or "insufficient data"
  std::size_t n_students_train = 0;
  std::size_t n_students_eval = 0;
  CefrReport report;

  std::string label() const;
};

std::vector<FilterGridRow> run_filter_grid(std::span<const ExerciseEvent> events,
                                           const CefrLabelTable& labels,
                                           std::span<const FilterConfig> grid,
                                           const CalibrationConfig& config);

/// The six (min_exer, min_constr) cells (50|100) x (1|4|7).
std::vector<FilterConfig> default_filter_grid();

}  // namespace irtcat
