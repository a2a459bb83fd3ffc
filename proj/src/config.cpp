#include "irtcat/config.hpp"

#include "irtcat/error.hpp"

namespace irtcat::config {

Reader::Reader(const Json& object, std::string path) : object_(object), path_(std::move(path)) {
  if (!object_.is_object()) fail(ErrorCode::Validation, path_ + ": expected a JSON object");
}

const Json* Reader::lookup(const std::string& key) {
  auto it = object_.find(key);
  if (it == object_.end()) return nullptr;
  consumed_.insert(key);
  return &*it;
}

double Reader::number(const std::string& key, double fallback) {
  const Json* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_number()) fail(ErrorCode::Validation, path_ + "." + key + ": expected a number");
  return v->get<double>();
}

std::size_t Reader::count(const std::string& key, std::size_t fallback) {
  const Json* v = lookup(key);
  if (!v) return fallback;
  const bool ok = v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0);
  if (!ok) fail(ErrorCode::Validation, path_ + "." + key + ": expected a non-negative integer");
  return v->get<std::size_t>();
}

bool Reader::flag(const std::string& key, bool fallback) {
  const Json* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_boolean()) fail(ErrorCode::Validation, path_ + "." + key + ": expected true or false");
  return v->get<bool>();
}

std::string Reader::text(const std::string& key, const std::string& fallback) {
  const Json* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_string()) fail(ErrorCode::Validation, path_ + "." + key + ": expected a string");
  return v->get<std::string>();
}

const Json* Reader::raw(const std::string& key) { return lookup(key); }

std::optional<Reader> Reader::child(const std::string& key) {
  const Json* v = lookup(key);
  if (!v) return std::nullopt;
  return Reader(*v, path_ + "." + key);
}

void Reader::finish() const {
  for (auto it = object_.begin(); it != object_.end(); ++it) {
    if (!consumed_.count(it.key())) {
      fail(ErrorCode::Validation, path_ + ": unknown setting '" + it.key() + "'");
    }
  }
}

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::Parse, source + ": invalid JSON: " + e.what());
  }
}

TerminationCriterion read_criterion(Reader& r, TerminationCriterion fallback) {
  TerminationCriterion c = fallback;
  const std::string kind = r.text("kind", std::visit(
      [](const auto& rule) -> std::string {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, FixedLength>) return "fixed";
        else if constexpr (std::is_same_v<T, SemThreshold>) return "sem";
        else return "earlystop";
      },
      fallback.rule));
  if (kind == "fixed") {
    const auto* prev = std::get_if<FixedLength>(&fallback.rule);
    c.rule = FixedLength{r.count("length", prev ? prev->length : 50)};
  } else if (kind == "sem") {
    const auto* prev = std::get_if<SemThreshold>(&fallback.rule);
    c.rule = SemThreshold{r.number("max_sem", prev ? prev->max_sem : 0.3)};
  } else if (kind == "earlystop") {
    const auto* prev = std::get_if<EarlyStop>(&fallback.rule);
    c.rule = EarlyStop{r.count("window", prev ? prev->window : 10),
                       r.number("delta", prev ? prev->delta : 0.05)};
  } else {
    fail(ErrorCode::Validation, r.path() + ".kind: expected fixed, sem or earlystop");
  }
  c.min_steps = r.count("min_steps", fallback.min_steps);
  c.max_steps = r.count("max_steps", fallback.max_steps);
  r.finish();
  c.validate();
  return c;
}

Json to_json(const TerminationCriterion& c) {
  Json j;
  if (const auto* f = std::get_if<FixedLength>(&c.rule)) {
    j["kind"] = "fixed";
    j["length"] = f->length;
  } else if (const auto* s = std::get_if<SemThreshold>(&c.rule)) {
    j["kind"] = "sem";
    j["max_sem"] = s->max_sem;
  } else if (const auto* e = std::get_if<EarlyStop>(&c.rule)) {
    j["kind"] = "earlystop";
    j["window"] = e->window;
    j["delta"] = e->delta;
  }
  j["min_steps"] = c.min_steps;
  j["max_steps"] = c.max_steps;
  return j;
}

ExplorationConfig read_exploration(Reader& r, ExplorationConfig e) {
  e.enabled = r.flag("enabled", e.enabled);
  e.epsilon = r.number("epsilon", e.epsilon);
  e.alpha = r.number("alpha", e.alpha);
  e.trend_window = r.count("trend_window", e.trend_window);
  e.start_step = r.count("start_step", e.start_step);
  e.stop_step = r.count("stop_step", e.stop_step);
  e.flat_threshold = r.number("flat_threshold", e.flat_threshold);
  r.finish();
  e.validate();
  return e;
}

Json to_json(const ExplorationConfig& e) {
  return Json{{"enabled", e.enabled},       {"epsilon", e.epsilon},
              {"alpha", e.alpha},           {"trend_window", e.trend_window},
              {"start_step", e.start_step}, {"stop_step", e.stop_step},
              {"flat_threshold", e.flat_threshold}};
}

SelectionPolicy read_policy(Reader& r, SelectionPolicy p) {
  p.top_k = r.count("top_k", p.top_k);
  p.epsilon_coldstart = r.number("epsilon_coldstart", p.epsilon_coldstart);
  p.coldstart_enabled = r.flag("coldstart_enabled", p.coldstart_enabled);
  r.finish();
  p.validate();
  return p;
}

Json to_json(const SelectionPolicy& p) {
  return Json{{"top_k", p.top_k},
              {"epsilon_coldstart", p.epsilon_coldstart},
              {"coldstart_enabled", p.coldstart_enabled}};
}

SessionConfig read_session(Reader& r, SessionConfig s) {
  s.warmup_length = r.count("warmup_length", s.warmup_length);
  s.theta0_mean = r.number("theta0_mean", s.theta0_mean);
  s.theta0_sd = r.number("theta0_sd", s.theta0_sd);
  if (auto c = r.child("criterion")) s.criterion = read_criterion(*c, s.criterion);
  if (auto e = r.child("exploration")) s.exploration = read_exploration(*e, s.exploration);
  if (auto p = r.child("policy")) s.policy = read_policy(*p, s.policy);
  r.finish();
  s.validate();
  return s;
}

Json to_json(const SessionConfig& s) {
  return Json{{"warmup_length", s.warmup_length},
              {"theta0_mean", s.theta0_mean},
              {"theta0_sd", s.theta0_sd},
              {"criterion", to_json(s.criterion)},
              {"exploration", to_json(s.exploration)},
              {"policy", to_json(s.policy)}};
}

SlipSchedule read_slip(Reader& r, SlipSchedule s) {
  s.base_rate = r.number("base_rate", s.base_rate);
  s.early_rate = r.number("early_rate", s.early_rate);
  s.early_window = r.count("early_window", s.early_window);
  r.finish();
  s.validate();
  return s;
}

Json to_json(const SlipSchedule& s) {
  return Json{{"base_rate", s.base_rate}, {"early_rate", s.early_rate}, {"early_window", s.early_window}};
}

CalibrationConfig read_calibration(Reader& r, CalibrationConfig c) {
  c.max_outer_iterations = static_cast<int>(r.count("max_outer_iterations", c.max_outer_iterations));
  c.convergence_tol = r.number("convergence_tol", c.convergence_tol);
  c.estimate_c = r.flag("estimate_c", c.estimate_c);
  c.fixed_c = r.number("fixed_c", c.fixed_c);
  c.estimate_a = r.flag("estimate_a", c.estimate_a);
  c.fixed_a = r.number("fixed_a", c.fixed_a);
  c.log_a_prior_sd = r.number("log_a_prior_sd", c.log_a_prior_sd);
  c.b_prior_sd = r.number("b_prior_sd", c.b_prior_sd);
  c.c_prior_alpha = r.number("c_prior_alpha", c.c_prior_alpha);
  c.c_prior_beta = r.number("c_prior_beta", c.c_prior_beta);
  c.grid_nodes = r.count("grid_nodes", c.grid_nodes);
  r.finish();
  c.validate();
  return c;
}

Json to_json(const CalibrationConfig& c) {
  return Json{{"max_outer_iterations", c.max_outer_iterations},
              {"convergence_tol", c.convergence_tol},
              {"estimate_c", c.estimate_c},
              {"fixed_c", c.fixed_c},
              {"estimate_a", c.estimate_a},
              {"fixed_a", c.fixed_a},
              {"log_a_prior_sd", c.log_a_prior_sd},
              {"b_prior_sd", c.b_prior_sd},
              {"c_prior_alpha", c.c_prior_alpha},
              {"c_prior_beta", c.c_prior_beta},
              {"grid_nodes", c.grid_nodes}};
}

synth::BankSpec read_bank_spec(Reader& r, synth::BankSpec s) {
  s.n_items = r.count("n_items", s.n_items);
  s.log_a_sd = r.number("log_a_sd", s.log_a_sd);
  s.b_mean = r.number("b_mean", s.b_mean);
  s.b_sd = r.number("b_sd", s.b_sd);
  s.b_lo = r.number("b_lo", s.b_lo);
  s.b_hi = r.number("b_hi", s.b_hi);
  s.c = r.number("c", s.c);
  s.level_noise_sd = r.number("level_noise_sd", s.level_noise_sd);
  r.finish();
  s.validate();
  return s;
}

Json to_json(const synth::BankSpec& s) {
  return Json{{"n_items", s.n_items}, {"log_a_sd", s.log_a_sd}, {"b_mean", s.b_mean},
              {"b_sd", s.b_sd},       {"b_lo", s.b_lo},         {"b_hi", s.b_hi},
              {"c", s.c},             {"level_noise_sd", s.level_noise_sd}};
}

synth::ResponsesSpec read_responses_spec(Reader& r, synth::ResponsesSpec s) {
  s.n_learners = r.count("n_learners", s.n_learners);
  s.responses_per_learner = r.count("responses_per_learner", s.responses_per_learner);
  s.theta_mean = r.number("theta_mean", s.theta_mean);
  s.theta_sd = r.number("theta_sd", s.theta_sd);
  s.slip_rate = r.number("slip_rate", s.slip_rate);
  r.finish();
  s.validate();
  return s;
}

Json to_json(const synth::ResponsesSpec& s) {
  return Json{{"n_learners", s.n_learners},
              {"responses_per_learner", s.responses_per_learner},
              {"theta_mean", s.theta_mean},
              {"theta_sd", s.theta_sd},
              {"slip_rate", s.slip_rate}};
}

synth::ExercisesSpec read_exercises_spec(Reader& r, synth::ExercisesSpec s) {
  s.n_students = r.count("n_students", s.n_students);
  s.min_exercises = r.count("min_exercises", s.min_exercises);
  s.max_exercises = r.count("max_exercises", s.max_exercises);
  s.n_constructs = r.count("n_constructs", s.n_constructs);
  s.min_constructs_per_exercise = r.count("min_constructs_per_exercise", s.min_constructs_per_exercise);
  s.max_constructs_per_exercise = r.count("max_constructs_per_exercise", s.max_constructs_per_exercise);
  s.multiple_choice_fraction = r.number("multiple_choice_fraction", s.multiple_choice_fraction);
  s.hint_rate = r.number("hint_rate", s.hint_rate);
  s.theta_sd = r.number("theta_sd", s.theta_sd);
  s.construct_log_a_sd = r.number("construct_log_a_sd", s.construct_log_a_sd);
  s.construct_b_sd = r.number("construct_b_sd", s.construct_b_sd);
  s.labeled_fraction = r.number("labeled_fraction", s.labeled_fraction);
  s.label_noise_sd = r.number("label_noise_sd", s.label_noise_sd);
  s.label_lo = r.number("label_lo", s.label_lo);
  s.label_hi = r.number("label_hi", s.label_hi);
  r.finish();
  s.validate();
  return s;
}

Json to_json(const synth::ExercisesSpec& s) {
  return Json{{"n_students", s.n_students},
              {"min_exercises", s.min_exercises},
              {"max_exercises", s.max_exercises},
              {"n_constructs", s.n_constructs},
              {"min_constructs_per_exercise", s.min_constructs_per_exercise},
              {"max_constructs_per_exercise", s.max_constructs_per_exercise},
              {"multiple_choice_fraction", s.multiple_choice_fraction},
              {"hint_rate", s.hint_rate},
              {"theta_sd", s.theta_sd},
              {"construct_log_a_sd", s.construct_log_a_sd},
              {"construct_b_sd", s.construct_b_sd},
              {"labeled_fraction", s.labeled_fraction},
              {"label_noise_sd", s.label_noise_sd},
              {"label_lo", s.label_lo},
              {"label_hi", s.label_hi}};
}

}  // namespace irtcat::config
