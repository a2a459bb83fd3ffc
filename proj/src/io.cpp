#include "irtcat/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "irtcat/error.hpp"

namespace irtcat::io {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& where) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    fail(ErrorCode::Parse, where + ": expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t parse_count(std::string_view text, const std::string& where) {
  std::uint64_t value = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    fail(ErrorCode::Parse, where + ": expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

namespace {

/// Iterates data lines, skipping blanks and '#' comments.
class LineCursor {
 public:
  LineCursor(std::istream& is, std::string source) : is_(is), source_(std::move(source)) {}

  bool next() {
    while (std::getline(is_, line_)) {
      ++number_;
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
      if (line_.empty() || line_[0] == '#') continue;
      return true;
    }
    return false;
  }

  const std::string& line() const { return line_; }
  std::string where() const { return source_ + ":" + std::to_string(number_); }

  [[noreturn]] void error(const std::string& what) const { fail(ErrorCode::Parse, where() + ": " + what); }

 private:
  std::istream& is_;
  std::string source_;
  std::string line_;
  std::size_t number_ = 0;
};

void write_comments(std::ostream& os, const Comments& comments) {
  for (const auto& c : comments) os << "# " << c << '\n';
}

std::vector<std::string_view> expect_columns(const LineCursor& cur, char delim, std::size_t min_cols,
                                             std::size_t max_cols) {
  auto cols = split(cur.line(), delim);
  if (cols.size() < min_cols || cols.size() > max_cols) {
    cur.error("expected " + std::to_string(min_cols) +
              (min_cols == max_cols ? "" : "-" + std::to_string(max_cols)) + " columns, found " +
              std::to_string(cols.size()));
  }
  return cols;
}

int parse_level(std::string_view text, const LineCursor& cur) {
  const auto v = parse_count(text, cur.where());
  if (v >= static_cast<std::uint64_t>(kCefrLevels)) cur.error("CEFR level must lie in 0..5");
  return static_cast<int>(v);
}

const char* bool01(bool b) { return b ? "1" : "0"; }

}  // namespace

void write_bank(std::ostream& os, const ItemBank& bank, const Comments& comments) {
  write_comments(os, comments);
  os << "item_id\ta\tb\tc\tconstruct_id\tresponse_count\n";
  for (const auto& item : bank.items()) {
    os << item.item_id << '\t' << format_double(item.a) << '\t' << format_double(item.b) << '\t'
       << format_double(item.c) << '\t' << item.construct_id.value_or("-") << '\t'
       << item.response_count << '\n';
  }
}

ItemBank read_bank(std::istream& is, const std::string& source) {
  LineCursor cur(is, source);
  std::vector<ItemParams> items;
  bool first = true;
  while (cur.next()) {
    if (first && cur.line().rfind("item_id\t", 0) == 0) {
      first = false;
      continue;
    }
    first = false;
    const auto cols = expect_columns(cur, '\t', 6, 6);
    ItemParams item;
    item.item_id = std::string(cols[0]);
    if (item.item_id.empty()) cur.error("empty item id");
    item.a = parse_double(cols[1], cur.where());
    item.b = parse_double(cols[2], cur.where());
    item.c = parse_double(cols[3], cur.where());
    if (cols[4] != "-") item.construct_id = std::string(cols[4]);
    item.response_count = parse_count(cols[5], cur.where());
    try {
      validate_item(item);
    } catch (const Error& e) {
      fail(ErrorCode::Validation, cur.where() + ": " + e.what());
    }
    items.push_back(std::move(item));
  }
  return ItemBank(std::move(items));
}

void write_responses(std::ostream& os, std::span<const ResponseRecord> records,
                     const Comments& comments) {
  write_comments(os, comments);
  os << "learner_id,item_id,correct,timestamp\n";
  for (const auto& r : records) {
    os << r.learner_id << ',' << r.item_id << ',' << bool01(r.correct) << ',';
    if (r.timestamp) os << *r.timestamp;
    os << '\n';
  }
}

std::vector<ResponseRecord> read_responses(std::istream& is, const std::string& source) {
  LineCursor cur(is, source);
  std::vector<ResponseRecord> records;
  bool first = true;
  while (cur.next()) {
    const char delim = cur.line().find('\t') != std::string::npos ? '\t' : ',';
    const auto cols = expect_columns(cur, delim, 3, 4);
    if (first && cols[0] == "learner_id") {
      first = false;
      continue;
    }
    first = false;
    ResponseRecord rec;
    rec.learner_id = std::string(cols[0]);
    rec.item_id = std::string(cols[1]);
    if (rec.learner_id.empty() || rec.item_id.empty()) cur.error("empty learner or item id");
    if (cols[2] == "1") {
      rec.correct = true;
    } else if (cols[2] == "0") {
      rec.correct = false;
    } else {
      cur.error("correctness must be 0 or 1, got '" + std::string(cols[2]) + "'");
    }
    if (cols.size() == 4 && !cols[3].empty()) {
      rec.timestamp = static_cast<std::int64_t>(parse_count(cols[3], cur.where()));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void write_levels(std::ostream& os, const std::map<std::string, int>& levels,
                  const Comments& comments) {
  write_comments(os, comments);
  os << "id\tlevel\n";
  for (const auto& [id, level] : levels) os << id << '\t' << level << '\n';
}

std::map<std::string, int> read_levels(std::istream& is, const std::string& source) {
  LineCursor cur(is, source);
  std::map<std::string, int> out;
  bool first = true;
  while (cur.next()) {
    const auto cols = expect_columns(cur, '\t', 2, 2);
    if (first && cols[0] == "id") {
      first = false;
      continue;
    }
    first = false;
    if (!out.emplace(std::string(cols[0]), parse_level(cols[1], cur)).second) {
      cur.error("duplicate id '" + std::string(cols[0]) + "'");
    }
  }
  return out;
}

void write_truth(std::ostream& os, std::span<const std::pair<std::string, double>> truth,
                 const Comments& comments) {
  write_comments(os, comments);
  os << "id\ttheta\n";
  for (const auto& [id, theta] : truth) os << id << '\t' << format_double(theta) << '\n';
}

std::map<std::string, double> read_truth(std::istream& is, const std::string& source) {
  LineCursor cur(is, source);
  std::map<std::string, double> out;
  bool first = true;
  while (cur.next()) {
    const auto cols = expect_columns(cur, '\t', 2, 2);
    if (first && cols[0] == "id") {
      first = false;
      continue;
    }
    first = false;
    out[std::string(cols[0])] = parse_double(cols[1], cur.where());
  }
  return out;
}

void write_abilities(std::ostream& os, std::span<const std::string> ids,
                     std::span<const Ability> abilities) {
  os << "id\ttheta\tstandard_error\tn_responses\n";
  for (std::size_t k = 0; k < ids.size(); ++k) {
    os << ids[k] << '\t' << format_double(abilities[k].theta) << '\t'
       << format_double(abilities[k].standard_error) << '\t' << abilities[k].n_responses << '\n';
  }
}

void write_trace(std::ostream& os, const ItemBank& bank, const SessionResult& result,
                 const Comments& comments) {
  write_comments(os, comments);
  os << "# theta0 " << format_double(result.theta0) << '\n';
  os << "# stop " << to_string(result.reason) << " at " << result.length << '\n';
  os << "step\titem_id\ta\tb\tc\tcorrect\tcounted\ttheta\tsem\tphase\n";
  for (std::size_t k = 0; k < result.responses.size(); ++k) {
    const auto& r = result.responses[k];
    const auto& item = bank[r.item];
    os << k + 1 << '\t' << item.item_id << '\t' << format_double(item.a) << '\t'
       << format_double(item.b) << '\t' << format_double(item.c) << '\t' << bool01(r.correct)
       << '\t' << bool01(r.counted) << '\t' << format_double(result.theta_trajectory[k + 1])
       << '\t' << format_double(result.sem_trajectory[k + 1]) << '\t' << to_string(r.phase)
       << '\n';
  }
}

void write_metrics(std::ostream& os, std::span<const BatchMetrics> rows) {
  os << "label\tmean_iterations\tsd_iterations\tmae\tsd_error\n";
  for (const auto& m : rows) {
    os << m.label << '\t' << format_double(m.mean_iterations) << '\t'
       << format_double(m.sd_iterations) << '\t' << format_double(m.mae) << '\t'
       << format_double(m.sd_error) << '\n';
  }
}

void write_events(std::ostream& os, std::span<const ExerciseEvent> events,
                  const Comments& comments) {
  write_comments(os, comments);
  os << "student_id\texercise_id\ttype\toutcomes\thinted\ttimestamp\n";
  for (const auto& e : events) {
    os << e.student_id << '\t' << e.exercise_id << '\t' << to_string(e.type) << '\t';
    bool first = true;
    for (const auto& [construct, ok] : e.construct_outcomes) {
      os << (first ? "" : ";") << construct << ':' << bool01(ok);
      first = false;
    }
    os << '\t';
    if (e.hinted_constructs.empty()) os << '-';
    first = true;
    for (const auto& construct : e.hinted_constructs) {
      os << (first ? "" : ";") << construct;
      first = false;
    }
    os << '\t';
    if (e.timestamp) {
      os << *e.timestamp;
    } else {
      os << '-';
    }
    os << '\n';
  }
}

std::vector<ExerciseEvent> read_events(std::istream& is, const std::string& source) {
  LineCursor cur(is, source);
  std::vector<ExerciseEvent> events;
  bool first = true;
  while (cur.next()) {
    const auto cols = expect_columns(cur, '\t', 5, 6);
    if (first && cols[0] == "student_id") {
      first = false;
      continue;
    }
    first = false;
    ExerciseEvent e;
    e.student_id = std::string(cols[0]);
    e.exercise_id = std::string(cols[1]);
    if (e.student_id.empty() || e.exercise_id.empty()) cur.error("empty student or exercise id");
    try {
      e.type = parse_exercise_type(std::string(cols[2]));
    } catch (const Error& err) {
      cur.error(err.what());
    }
    for (auto pair : split(cols[3], ';')) {
      const auto colon = pair.rfind(':');
      if (colon == std::string_view::npos || colon == 0) cur.error("outcome must be construct:0/1");
      const auto flag = pair.substr(colon + 1);
      if (flag != "0" && flag != "1") cur.error("outcome flag must be 0 or 1");
      if (!e.construct_outcomes.emplace(std::string(pair.substr(0, colon)), flag == "1").second) {
        cur.error("construct listed twice in one event");
      }
    }
    if (cols[4] != "-" && !cols[4].empty()) {
      for (auto construct : split(cols[4], ';')) {
        if (construct.empty()) cur.error("empty hinted construct");
        e.hinted_constructs.emplace(construct);
      }
    }
    if (cols.size() == 6 && cols[5] != "-" && !cols[5].empty()) {
      e.timestamp = static_cast<std::int64_t>(parse_count(cols[5], cur.where()));
    }
    try {
      e.validate();
    } catch (const Error& err) {
      fail(ErrorCode::Validation, cur.where() + ": " + err.what());
    }
    events.push_back(std::move(e));
  }
  return events;
}

void write_performance(std::ostream& os, const PerformanceTable& table) {
  os << "student_id\tconstruct_id\tcredits\tpenalties\trate\n";
  for (const auto& cell : table) {
    os << cell.student_id << '\t' << cell.construct_id << '\t' << cell.credits << '\t'
       << cell.penalties << '\t' << format_double(cell.rate().value_or(std::nan(""))) << '\n';
  }
}

void write_filter_report(std::ostream& os, std::span<const FilterGridRow> rows) {
  os << "cell\tn_students_train\tn_students_eval\trho";
  for (int k = 0; k < kCefrLevels; ++k) {
    for (const char* f : {"n", "min", "q1", "median", "q3", "max"}) os << "\tL" << k << '_' << f;
  }
  os << "\tstatus\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : rows) {
    os << row.label() << '\t' << row.n_students_train << '\t' << row.n_students_eval << '\t'
       << format_double(row.report.rho);
    for (const auto& level : row.report.levels) {
      const bool has = level.count > 0;
      os << '\t' << level.count;
      for (double v : {level.box.min, level.box.q1, level.box.median, level.box.q3, level.box.max}) {
        os << '\t' << format_double(has ? v : nan);
      }
    }
    os << '\t' << row.status << '\n';
  }
}

void write_replay(std::ostream& os, std::span<const ReplayResult> rows) {
  os << "learner_id\ttheta\tstandard_error\tlength\treason\n";
  for (const auto& r : rows) {
    os << r.learner_id << '\t' << format_double(r.ability.theta) << '\t'
       << format_double(r.ability.standard_error) << '\t' << r.length << '\t'
       << to_string(r.reason) << '\n';
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) fail(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

}  // namespace irtcat::io
