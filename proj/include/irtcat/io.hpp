#pragma once

// Line-oriented text formats. Tab-separated columns, one header row, and
// optional leading '#' comment lines. Reals are written in shortest
// round-trip form, so reading a file back reproduces every double exactly.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "irtcat/adaptive.hpp"
#include "irtcat/calibration.hpp"
#include "irtcat/exercise.hpp"
#include "irtcat/simulator.hpp"

namespace irtcat::io {

std::string format_double(double x);
double parse_double(std::string_view text, const std::string& where);
std::uint64_t parse_count(std::string_view text, const std::string& where);

std::vector<std::string_view> split(std::string_view line, char delim);

/// Comment lines written before the header, without the leading "# ".
using Comments = std::vector<std::string>;

void write_bank(std::ostream& os, const ItemBank& bank, const Comments& comments = {});
ItemBank read_bank(std::istream& is, const std::string& source);

/// Records as "learner_id,item_id,correct[,timestamp]". Reading accepts
/// comma- or tab-separated lines and an optional header row.
void write_responses(std::ostream& os, std::span<const ResponseRecord> records,
                     const Comments& comments = {});
std::vector<ResponseRecord> read_responses(std::istream& is, const std::string& source);

/// id -> CEFR level (0..5); header "id\tlevel".
void write_levels(std::ostream& os, const std::map<std::string, int>& levels,
                  const Comments& comments = {});
std::map<std::string, int> read_levels(std::istream& is, const std::string& source);

/// id -> true ability; header "id\ttheta".
void write_truth(std::ostream& os, std::span<const std::pair<std::string, double>> truth,
                 const Comments& comments = {});
std::map<std::string, double> read_truth(std::istream& is, const std::string& source);

void write_abilities(std::ostream& os, std::span<const std::string> ids,
                     std::span<const Ability> abilities);

/// step, item_id, a, b, c, correct, counted, theta, sem, phase.
void write_trace(std::ostream& os, const ItemBank& bank, const SessionResult& result,
                 const Comments& comments = {});

void write_metrics(std::ostream& os, std::span<const BatchMetrics> rows);

/// student_id, exercise_id, type, outcomes ("c1:1;c2:0"), hinted ("c1;c2"
/// or "-"), timestamp (or "-").
void write_events(std::ostream& os, std::span<const ExerciseEvent> events,
                  const Comments& comments = {});
std::vector<ExerciseEvent> read_events(std::istream& is, const std::string& source);

void write_performance(std::ostream& os, const PerformanceTable& table);

/// cell label, n_students_train, n_students_eval, rho, then
/// L<k>_{n,min,q1,median,q3,max} for k = 0..5, and status.
void write_filter_report(std::ostream& os, std::span<const FilterGridRow> rows);

void write_replay(std::ostream& os, std::span<const ReplayResult> rows);

/// File helpers; failures raise Error(Io).
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

template <class Reader>
auto read_file(const std::filesystem::path& path, Reader&& reader);

}  // namespace irtcat::io

#include <sstream>

template <class Reader>
auto irtcat::io::read_file(const std::filesystem::path& path, Reader&& reader) {
  std::istringstream is(read_text_file(path));
  return reader(is, path.string());
}
