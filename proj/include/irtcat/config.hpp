#pragma once

// JSON configuration. Every reader starts from defaults, rejects unknown
// keys, and every to_json emits the fully resolved settings so a manifest
// can reproduce a run without the original config file.

#include <optional>
#include <set>
#include <string>

#include "json.hpp"

#include "irtcat/adaptive.hpp"
#include "irtcat/calibration.hpp"
#include "irtcat/exercise.hpp"
#include "irtcat/simulator.hpp"
#include "irtcat/synth.hpp"

namespace irtcat::config {

using Json = nlohmann::json;

/// Tracks which keys of one JSON object were consumed.
class Reader {
 public:
  Reader(const Json& object, std::string path);

  double number(const std::string& key, double fallback);
  std::size_t count(const std::string& key, std::size_t fallback);
  bool flag(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback);
  /// Raw access; marks the key consumed. nullptr when absent.
  const Json* raw(const std::string& key);
  std::optional<Reader> child(const std::string& key);

  const std::string& path() const noexcept { return path_; }

  /// Throws Error(Validation) naming the first unknown key.
  void finish() const;

 private:
  const Json* lookup(const std::string& key);

  const Json& object_;
  std::string path_;
  std::set<std::string> consumed_;
};

Json parse_json(const std::string& text, const std::string& source);

TerminationCriterion read_criterion(Reader& r, TerminationCriterion fallback);
Json to_json(const TerminationCriterion& c);

ExplorationConfig read_exploration(Reader& r, ExplorationConfig fallback);
Json to_json(const ExplorationConfig& e);

SelectionPolicy read_policy(Reader& r, SelectionPolicy fallback);
Json to_json(const SelectionPolicy& p);

/// Keys: warmup_length, theta0_mean, theta0_sd, criterion, exploration, policy.
SessionConfig read_session(Reader& r, SessionConfig fallback);
Json to_json(const SessionConfig& s);

SlipSchedule read_slip(Reader& r, SlipSchedule fallback);
Json to_json(const SlipSchedule& s);

CalibrationConfig read_calibration(Reader& r, CalibrationConfig fallback);
Json to_json(const CalibrationConfig& c);

synth::BankSpec read_bank_spec(Reader& r, synth::BankSpec fallback);
Json to_json(const synth::BankSpec& s);

synth::ResponsesSpec read_responses_spec(Reader& r, synth::ResponsesSpec fallback);
Json to_json(const synth::ResponsesSpec& s);

synth::ExercisesSpec read_exercises_spec(Reader& r, synth::ExercisesSpec fallback);
Json to_json(const synth::ExercisesSpec& s);

}  // namespace irtcat::config
