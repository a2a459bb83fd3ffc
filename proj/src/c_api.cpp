#include "irtcat/irtcat.h"

#include <cmath>
#include <filesystem>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "irtcat/adaptive.hpp"
#include "irtcat/calibration.hpp"
#include "irtcat/commands.hpp"
#include "irtcat/config.hpp"
#include "irtcat/error.hpp"
#include "irtcat/io.hpp"

struct irtcat_bank {
  irtcat::ItemBank bank;
};

struct irtcat_session {
  irtcat::ItemBank bank;
  irtcat::SessionConfig config;
  irtcat::SessionState state;
  irtcat::SessionStreams streams;
  std::optional<std::size_t> pending;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_summary;

irtcat_status to_status(irtcat::ErrorCode code) {
  return static_cast<irtcat_status>(static_cast<int>(code));
}

template <class Fn>
irtcat_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return IRTCAT_OK;
  } catch (const irtcat::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return IRTCAT_IO_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return IRTCAT_INTERNAL_ERROR;
}

void require(bool ok, const char* what) {
  if (!ok) irtcat::fail(irtcat::ErrorCode::InvalidArgument, what);
}

irtcat::ItemParams make_item(double a, double b, double c) {
  irtcat::ItemParams item;
  item.item_id = "item";
  item.a = a;
  item.b = b;
  item.c = c;
  irtcat::validate_item(item);
  return item;
}

}  // namespace

extern "C" {

const char* irtcat_version(void) { return irtcat::commands::kToolVersion; }

const char* irtcat_status_name(irtcat_status status) {
  switch (status) {
    case IRTCAT_OK: return "ok";
    case IRTCAT_INVALID_ARGUMENT: return "invalid argument";
    case IRTCAT_PARSE_ERROR: return "parse error";
    case IRTCAT_VALIDATION_ERROR: return "validation error";
    case IRTCAT_CONVERGENCE_ERROR: return "convergence error";
    case IRTCAT_IO_ERROR: return "io error";
    case IRTCAT_OUT_OF_ITEMS: return "out of items";
    case IRTCAT_INSUFFICIENT_DATA: return "insufficient data";
    case IRTCAT_DEGENERATE_POSTERIOR: return "degenerate posterior";
    case IRTCAT_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

const char* irtcat_last_error(void) { return last_error.c_str(); }
const char* irtcat_last_summary(void) { return last_summary.c_str(); }

irtcat_status irtcat_prob_correct(double theta, double a, double b, double c, double* out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    require(std::isfinite(theta), "theta must be finite");
    *out = irtcat::prob_correct(theta, make_item(a, b, c));
  });
}

irtcat_status irtcat_item_information(double theta, double a, double b, double c, double* out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    require(std::isfinite(theta), "theta must be finite");
    *out = irtcat::item_information(theta, make_item(a, b, c));
  });
}

irtcat_status irtcat_bank_load(const char* path, irtcat_bank** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto bank = irtcat::io::read_file(path, irtcat::io::read_bank);
    *out = new irtcat_bank{std::move(bank)};
  });
}

irtcat_status irtcat_bank_save(const irtcat_bank* bank, const char* path) {
  return guarded([&] {
    require(bank != nullptr && path != nullptr, "null argument");
    std::ostringstream os;
    irtcat::io::write_bank(os, bank->bank);
    irtcat::io::write_text_file(path, os.str());
  });
}

size_t irtcat_bank_size(const irtcat_bank* bank) { return bank ? bank->bank.size() : 0; }

irtcat_status irtcat_bank_item(const irtcat_bank* bank, size_t index, irtcat_item* out) {
  return guarded([&] {
    require(bank != nullptr && out != nullptr, "null argument");
    require(index < bank->bank.size(), "item index out of range");
    const auto& item = bank->bank[index];
    out->item_id = item.item_id.c_str();
    out->a = item.a;
    out->b = item.b;
    out->c = item.c;
    out->construct_id = item.construct_id ? item.construct_id->c_str() : nullptr;
    out->response_count = item.response_count;
  });
}

void irtcat_bank_free(irtcat_bank* bank) { delete bank; }

irtcat_status irtcat_session_create(const irtcat_bank* bank, const char* config_json, uint64_t seed,
                                    irtcat_session** out) {
  return guarded([&] {
    require(bank != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    irtcat::SessionConfig config;
    config.policy.coldstart_enabled = true;
    if (config_json != nullptr) {
      const auto json = irtcat::config::parse_json(config_json, "session config");
      irtcat::config::Reader reader(json, "config");
      config = irtcat::config::read_session(reader, config);
      reader.finish();
    }
    require(!bank->bank.empty(), "bank is empty");
    auto state = irtcat::init_session(seed, bank->bank, config, irtcat::default_grid());
    *out = new irtcat_session{bank->bank, config, std::move(state), irtcat::SessionStreams(seed),
                              std::nullopt};
  });
}

irtcat_status irtcat_session_next_item(irtcat_session* s, size_t* index) {
  return guarded([&] {
    require(s != nullptr && index != nullptr, "null argument");
    if (!s->pending) {
      const double theta = irtcat::effective_theta(s->state, s->config.exploration, s->streams.exploration);
      s->pending = irtcat::select_next_item(s->state, s->bank, s->config.policy, theta, s->streams.selection);
      if (!s->pending) irtcat::fail(irtcat::ErrorCode::OutOfItems, "every item has been administered");
    }
    *index = *s->pending;
  });
}

irtcat_status irtcat_session_record(irtcat_session* s, size_t index, int correct) {
  return guarded([&] {
    require(s != nullptr, "null argument");
    require(s->pending.has_value(), "no item is pending; call irtcat_session_next_item first");
    require(*s->pending == index, "answer does not match the pending item");
    require(correct == 0 || correct == 1, "correct must be 0 or 1");
    irtcat::record_response(s->state, s->bank, index, correct == 1, irtcat::default_grid());
    s->pending.reset();
  });
}

irtcat_status irtcat_session_check(const irtcat_session* s, irtcat_decision* out) {
  return guarded([&] {
    require(s != nullptr && out != nullptr, "null argument");
    switch (irtcat::check_termination(s->state, s->bank, s->config.criterion)) {
      case irtcat::Decision::Continue: *out = IRTCAT_CONTINUE; break;
      case irtcat::Decision::Converged: *out = IRTCAT_CONVERGED; break;
      case irtcat::Decision::ForcedStop: *out = IRTCAT_FORCED_STOP; break;
    }
  });
}

irtcat_status irtcat_session_ability(const irtcat_session* s, double* theta, double* standard_error,
                                     size_t* n_responses) {
  return guarded([&] {
    require(s != nullptr, "null argument");
    if (theta) *theta = s->state.theta();
    if (standard_error) *standard_error = s->state.sem_trajectory.back();
    if (n_responses) *n_responses = s->state.n_counted;
  });
}

size_t irtcat_session_length(const irtcat_session* s) { return s ? s->state.step() : 0; }

irtcat_status irtcat_session_write_trace(const irtcat_session* s, const char* path) {
  return guarded([&] {
    require(s != nullptr && path != nullptr, "null argument");
    irtcat::SessionResult result;
    result.theta0 = s->state.theta_trajectory.front();
    result.responses = s->state.responses;
    result.theta_trajectory = s->state.theta_trajectory;
    result.sem_trajectory = s->state.sem_trajectory;
    result.length = s->state.step();
    result.ability = irtcat::Ability{s->state.theta(), s->state.sem_trajectory.back(), s->state.n_counted};
    const auto d = irtcat::check_termination(s->state, s->bank, s->config.criterion);
    result.reason = d == irtcat::Decision::ForcedStop ? irtcat::StopReason::ForcedStop
                                                      : irtcat::StopReason::Converged;
    std::ostringstream os;
    irtcat::io::write_trace(os, s->bank, result,
                            {"live session", std::string("decision ") + irtcat::to_string(d)});
    irtcat::io::write_text_file(path, os.str());
  });
}

void irtcat_session_free(irtcat_session* session) { delete session; }

irtcat_status irtcat_run(const char* command, const char* subcommand, const irtcat_run_options* options) {
  return guarded([&] {
    require(command != nullptr && options != nullptr, "null argument");
    require(options->out != nullptr, "an output path is required");
    irtcat::commands::Request req;
    req.command = command;
    req.subcommand = subcommand ? subcommand : "";
    if (options->config_json) {
      req.resolved_config = irtcat::config::parse_json(options->config_json, "inline config");
    } else if (options->config_path) {
      req.config_path = options->config_path;
    }
    require(options->n_inputs == 0 || options->inputs != nullptr, "null inputs");
    for (size_t k = 0; k < options->n_inputs; ++k) {
      const auto& in = options->inputs[k];
      require(in.role != nullptr && in.path != nullptr, "null input entry");
      req.inputs[in.role] = in.path;
    }
    req.out = options->out;
    if (options->has_seed) req.seed = options->seed;
    req.workers = options->workers == 0 ? 1 : options->workers;
    last_summary.clear();
    try {
      last_summary = irtcat::commands::run(req).summary;
    } catch (const irtcat::Error& e) {
      if (e.code() == irtcat::ErrorCode::Convergence) last_summary = e.what();
      throw;
    }
  });
}

irtcat_status irtcat_rerun(const char* manifest_path, const char* out, unsigned workers) {
  return guarded([&] {
    require(manifest_path != nullptr && out != nullptr, "null argument");
    last_summary.clear();
    last_summary = irtcat::commands::rerun(manifest_path, out, workers == 0 ? 1 : workers).summary;
  });
}

}  // extern "C"
