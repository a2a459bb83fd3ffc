#include "irtcat/exercise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "irtcat/error.hpp"

namespace irtcat {

ExerciseType parse_exercise_type(const std::string& name) {
  if (name == "cloze") return ExerciseType::Cloze;
  if (name == "multiple-choice" || name == "mc") return ExerciseType::MultipleChoice;
  fail(ErrorCode::Parse, "unknown exercise type '" + name + "' (cloze|multiple-choice)");
}

const char* to_string(ExerciseType type) noexcept {
  return type == ExerciseType::Cloze ? "cloze" : "multiple-choice";
}

double guess_factor(ExerciseType type) noexcept {
  return type == ExerciseType::Cloze ? 0.0 : 0.25;
}

void ExerciseEvent::validate() const {
  if (construct_outcomes.empty()) {
    fail(ErrorCode::Validation, "exercise '" + exercise_id + "' links no constructs");
  }
  if (timestamp && *timestamp < 0) {
    fail(ErrorCode::Validation, "exercise '" + exercise_id + "' has a negative timestamp");
  }
}

void FilterConfig::validate() const {
  if (min_exer < 1 || min_constr < 1) fail(ErrorCode::Validation, "min_exer and min_constr must be >= 1");
}

namespace {

using PairKey = std::pair<std::string, std::string>;

/// (credits, penalties) one event contributes to one of its constructs.
std::pair<std::uint32_t, std::uint32_t> event_evidence(const ExerciseEvent& e,
                                                       const std::string& construct) {
  std::uint32_t credit = 0, penalty = 0;
  const bool hinted = e.hinted_constructs.count(construct) > 0;
  if (auto it = e.construct_outcomes.find(construct); it != e.construct_outcomes.end()) {
    if (!it->second) {
      ++penalty;
    } else if (!hinted) {
      ++credit;
    }
  }
  if (hinted) ++penalty;
  return {credit, penalty};
}

std::set<std::string> event_constructs(const ExerciseEvent& e) {
  std::set<std::string> all = e.hinted_constructs;
  for (const auto& [construct, _] : e.construct_outcomes) all.insert(construct);
  return all;
}

}  // namespace

PerformanceTable accumulate_performance(std::span<const ExerciseEvent> events) {
  std::map<PairKey, ConstructPerformance> cells;
  for (const auto& e : events) {
    e.validate();
    for (const auto& construct : event_constructs(e)) {
      auto [credit, penalty] = event_evidence(e, construct);
      auto& cell = cells[{e.student_id, construct}];
      cell.student_id = e.student_id;
      cell.construct_id = construct;
      cell.credits += credit;
      cell.penalties += penalty;
    }
  }
  PerformanceTable table;
  table.reserve(cells.size());
  for (auto& [_, cell] : cells) table.push_back(std::move(cell));
  return table;
}

ConstructResponses build_construct_responses(const PerformanceTable& table,
                                             std::span<const ExerciseEvent> events,
                                             const FilterConfig& filter) {
  filter.validate();
  std::map<std::string, std::set<std::string>> exercises_by_student;
  for (const auto& e : events) exercises_by_student[e.student_id].insert(e.exercise_id);

  std::set<PairKey> kept_pairs;
  std::set<std::string> kept_students, kept_constructs;
  for (const auto& cell : table) {
    auto it = exercises_by_student.find(cell.student_id);
    if (it == exercises_by_student.end() || it->second.size() < filter.min_exer) continue;
    if (cell.trials() < filter.min_constr) continue;
    kept_pairs.insert({cell.student_id, cell.construct_id});
    kept_students.insert(cell.student_id);
    kept_constructs.insert(cell.construct_id);
  }
  if (kept_pairs.empty()) {
    fail(ErrorCode::InsufficientData, "insufficient data: no (student, construct) pair passes the filters");
  }

  ConstructResponses out;
  out.students.assign(kept_students.begin(), kept_students.end());
  std::map<std::string, std::size_t> student_index, construct_index;
  for (std::size_t s = 0; s < out.students.size(); ++s) student_index[out.students[s]] = s;
  for (const auto& construct : kept_constructs) {
    construct_index[construct] = out.constructs.size();
    ItemParams item;
    item.item_id = construct;
    item.construct_id = construct;
    out.constructs.push_back(item);
  }

  // Guess factor per construct: mean over contributing events weighted by
  // the trials each event adds.
  std::vector<double> gf_sum(out.constructs.size(), 0.0), gf_weight(out.constructs.size(), 0.0);
  for (const auto& e : events) {
    if (!kept_students.count(e.student_id)) continue;
    for (const auto& construct : event_constructs(e)) {
      if (!kept_pairs.count({e.student_id, construct})) continue;
      auto [credit, penalty] = event_evidence(e, construct);
      const double w = credit + penalty;
      const auto k = construct_index[construct];
      gf_sum[k] += w * guess_factor(e.type);
      gf_weight[k] += w;
    }
  }
  for (std::size_t k = 0; k < out.constructs.size(); ++k) {
    out.constructs[k].c = gf_weight[k] > 0.0 ? gf_sum[k] / gf_weight[k] : 0.0;
  }

  for (const auto& cell : table) {
    if (!kept_pairs.count({cell.student_id, cell.construct_id})) continue;
    out.observations.push_back(Observation{student_index[cell.student_id],
                                           construct_index[cell.construct_id], cell.credits,
                                           cell.trials()});
  }
  return out;
}

CalibrationConfig construct_calibration_defaults() {
  CalibrationConfig config;
  config.estimate_c = false;
  return config;
}

ConstructFit calibrate_constructs(const ConstructResponses& responses,
                                  const CalibrationConfig& config) {
  if (responses.observations.empty()) {
    fail(ErrorCode::InsufficientData, "insufficient data: no construct observations");
  }
  CalibrationConfig cfg = config;
  cfg.estimate_c = false;
  auto items = responses.constructs;
  for (auto& item : items) item.a = cfg.estimate_a ? 1.0 : cfg.fixed_a;
  seed_difficulties(items, responses.observations);
  auto outcome = calibrate_observations(std::move(items), responses.students.size(),
                                        responses.observations, cfg);
  ConstructFit fit;
  for (auto i : outcome.degenerate_items) fit.degenerate_constructs.push_back(outcome.items[i].item_id);
  fit.constructs = ItemBank(std::move(outcome.items));
  fit.students = responses.students;
  fit.abilities = std::move(outcome.abilities);
  fit.iterations = outcome.iterations;
  fit.converged = outcome.converged;
  return fit;
}

CefrReport evaluate_against_cefr(const std::unordered_map<std::string, double>& abilities,
                                 const CefrLabelTable& labels) {
  std::vector<double> levels, thetas;
  std::array<std::vector<double>, kCefrLevels> by_level;
  for (const auto& [student, level] : labels) {
    if (level < 0 || level >= kCefrLevels) {
      fail(ErrorCode::Validation, "CEFR level of '" + student + "' must lie in 0..5");
    }
    auto it = abilities.find(student);
    if (it == abilities.end()) continue;
    levels.push_back(level);
    thetas.push_back(it->second);
    by_level[level].push_back(it->second);
  }
  if (thetas.size() < 2) {
    fail(ErrorCode::InsufficientData, "insufficient data: fewer than 2 labeled students with abilities");
  }
  CefrReport report;
  report.n_eval = thetas.size();
  report.rho = stats::spearman(levels, thetas);
  for (int k = 0; k < kCefrLevels; ++k) {
    report.levels[k].count = by_level[k].size();
    if (!by_level[k].empty()) report.levels[k].box = stats::five_number(by_level[k]);
  }
  return report;
}

std::string FilterGridRow::label() const {
  std::ostringstream os;
  os << "min_exer=" << filter.min_exer << ";min_constr=" << filter.min_constr;
  return os.str();
}

std::vector<FilterGridRow> run_filter_grid(std::span<const ExerciseEvent> events,
                                           const CefrLabelTable& labels,
                                           std::span<const FilterConfig> grid,
                                           const CalibrationConfig& config) {
  const auto table = accumulate_performance(events);
  std::vector<FilterGridRow> rows;
  for (const auto& filter : grid) {
    FilterGridRow row;
    row.filter = filter;
    try {
      const auto responses = build_construct_responses(table, events, filter);
      row.n_students_train = responses.students.size();
      const auto fit = calibrate_constructs(responses, config);
      std::unordered_map<std::string, double> abilities;
      for (std::size_t s = 0; s < fit.students.size(); ++s) {
        abilities[fit.students[s]] = fit.abilities[s].theta;
      }
      row.report = evaluate_against_cefr(abilities, labels);
      row.n_students_eval = row.report.n_eval;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientData) throw;
      row.status = "insufficient data";
      row.report.rho = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<FilterConfig> default_filter_grid() {
  return {{50, 1}, {100, 1}, {50, 4}, {100, 4}, {50, 7}, {100, 7}};
}

}  // namespace irtcat
