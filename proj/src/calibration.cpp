#include "irtcat/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "irtcat/error.hpp"
#include "irtcat/parallel.hpp"

namespace irtcat {

QuadratureGrid QuadratureGrid::normal(std::size_t n_nodes, double lo, double hi, double mean,
                                      double sd) {
  if (n_nodes < 2 || !(hi > lo) || !(sd > 0.0)) {
    fail(ErrorCode::InvalidArgument, "quadrature grid needs >= 2 nodes, hi > lo and sd > 0");
  }
  QuadratureGrid grid;
  grid.nodes.resize(n_nodes);
  grid.weights.resize(n_nodes);
  grid.log_weights.resize(n_nodes);
  const double step = (hi - lo) / static_cast<double>(n_nodes - 1);
  double total = 0.0;
  for (std::size_t q = 0; q < n_nodes; ++q) {
    grid.nodes[q] = q + 1 == n_nodes ? hi : lo + step * static_cast<double>(q);
    const double z = (grid.nodes[q] - mean) / sd;
    // trapezoid rule: end nodes cover half a cell
    grid.weights[q] = std::exp(-0.5 * z * z) * (q == 0 || q + 1 == n_nodes ? 0.5 : 1.0);
    total += grid.weights[q];
  }
  for (std::size_t q = 0; q < n_nodes; ++q) {
    grid.weights[q] /= total;
    grid.log_weights[q] = std::log(grid.weights[q]);
  }
  return grid;
}

const QuadratureGrid& default_grid() {
  static const QuadratureGrid grid = QuadratureGrid::normal();
  return grid;
}

void QuadratureGrid::validate() const {
  if (nodes.size() < 2 || weights.size() != nodes.size() || log_weights.size() != nodes.size()) {
    fail(ErrorCode::Validation, "quadrature grid: inconsistent sizes");
  }
  double total = 0.0;
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    if (q > 0 && !(nodes[q] > nodes[q - 1])) {
      fail(ErrorCode::Validation, "quadrature grid: nodes must be strictly ascending");
    }
    if (!(weights[q] > 0.0)) fail(ErrorCode::Validation, "quadrature grid: weights must be positive");
    total += weights[q];
  }
  if (std::abs(total - 1.0) > 1e-10) {
    fail(ErrorCode::Validation, "quadrature grid: weights must sum to 1");
  }
}

Ability posterior_ability(std::span<const double> log_likelihood, const QuadratureGrid& grid,
                          std::size_t n_responses) {
  const std::size_t n = grid.size();
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < n; ++q) {
    peak = std::max(peak, log_likelihood[q] + grid.log_weights[q]);
  }
  if (!std::isfinite(peak)) {
    fail(ErrorCode::DegeneratePosterior, "degenerate posterior: likelihood underflows on every node");
  }
  double mass = 0.0, first = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    const double w = std::exp(log_likelihood[q] + grid.log_weights[q] - peak);
    mass += w;
    first += w * grid.nodes[q];
  }
  const double mean = first / mass;
  double second = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    const double w = std::exp(log_likelihood[q] + grid.log_weights[q] - peak);
    const double d = grid.nodes[q] - mean;
    second += w * d * d;
  }
  return Ability{mean, std::sqrt(second / mass), n_responses};
}

Ability estimate_ability_eap(std::span<const ScoredResponse> responses, const QuadratureGrid& grid) {
  std::vector<double> loglik(grid.size(), 0.0);
  for (const auto& r : responses) {
    for (std::size_t q = 0; q < grid.size(); ++q) {
      loglik[q] += log_prob(grid.nodes[q], *r.item, r.correct);
    }
  }
  return posterior_ability(loglik, grid, responses.size());
}

void CalibrationConfig::validate() const {
  if (max_outer_iterations < 1) fail(ErrorCode::Validation, "max_outer_iterations must be >= 1");
  if (!(convergence_tol > 0.0)) fail(ErrorCode::Validation, "convergence_tol must be positive");
  if (!(fixed_c >= 0.0 && fixed_c < 1.0)) fail(ErrorCode::Validation, "fixed_c must lie in [0, 1)");
  if (!(fixed_a > 0.0)) fail(ErrorCode::Validation, "fixed_a must be positive");
  if (!(log_a_prior_sd > 0.0) || !(b_prior_sd > 0.0)) {
    fail(ErrorCode::Validation, "prior standard deviations must be positive");
  }
  if (!(c_prior_alpha >= 1.0) || !(c_prior_beta >= 1.0)) {
    fail(ErrorCode::Validation, "c prior shape parameters must be >= 1");
  }
  if (grid_nodes < 2) fail(ErrorCode::Validation, "grid_nodes must be >= 2");
}

namespace {

/// Expected-count objective for one item: r[q] successes out of n[q]
/// trials at each grid node, plus log priors.
class ItemObjective {
 public:
  ItemObjective(const QuadratureGrid& grid, std::span<const double> r, std::span<const double> n,
                const CalibrationConfig& config)
      : grid_(grid), r_(r), n_(n), config_(config) {}

  double value(const ItemParams& item) const {
    double total = 0.0;
    for (std::size_t q = 0; q < grid_.size(); ++q) {
      if (n_[q] == 0.0) continue;
      const double p = clamp_probability(prob_correct(grid_.nodes[q], item));
      total += r_[q] * std::log(p) + (n_[q] - r_[q]) * std::log1p(-p);
    }
    return total + log_prior(item);
  }

  double log_prior(const ItemParams& item) const {
    double lp = 0.0;
    if (config_.estimate_a) {
      const double z = std::log(item.a) / config_.log_a_prior_sd;
      lp -= 0.5 * z * z;
    }
    const double zb = item.b / config_.b_prior_sd;
    lp -= 0.5 * zb * zb;
    if (config_.estimate_c) {
      if (item.c <= 0.0) return -std::numeric_limits<double>::infinity();
      lp += (config_.c_prior_alpha - 1.0) * std::log(item.c) +
            (config_.c_prior_beta - 1.0) * std::log1p(-item.c);
    }
    return lp;
  }

  enum class Param { A, B, C };

  /// Gradient and expected information of the objective along one parameter.
  std::pair<double, double> score(const ItemParams& item, Param which) const {
    double grad = 0.0, info = 0.0;
    for (std::size_t q = 0; q < grid_.size(); ++q) {
      if (n_[q] == 0.0) continue;
      const double theta = grid_.nodes[q];
      const double s = logistic(item.a * (theta - item.b));
      const double p = clamp_probability(item.c + (1.0 - item.c) * s);
      double dp = 0.0;
      switch (which) {
        case Param::A: dp = (1.0 - item.c) * s * (1.0 - s) * (theta - item.b); break;
        case Param::B: dp = -item.a * (1.0 - item.c) * s * (1.0 - s); break;
        case Param::C: dp = 1.0 - s; break;
      }
      const double pq = p * (1.0 - p);
      grad += (r_[q] - n_[q] * p) / pq * dp;
      info += n_[q] * dp * dp / pq;
    }
    switch (which) {
      case Param::A:
        if (config_.estimate_a) {
          const double v = config_.log_a_prior_sd * config_.log_a_prior_sd;
          grad -= std::log(item.a) / (v * item.a);
          info += 1.0 / (v * item.a * item.a);
        }
        break;
      case Param::B: {
        const double v = config_.b_prior_sd * config_.b_prior_sd;
        grad -= item.b / v;
        info += 1.0 / v;
        break;
      }
      case Param::C: {
        const double al = config_.c_prior_alpha - 1.0, be = config_.c_prior_beta - 1.0;
        grad += al / item.c - be / (1.0 - item.c);
        info += al / (item.c * item.c) + be / ((1.0 - item.c) * (1.0 - item.c));
        break;
      }
    }
    return {grad, info};
  }

 private:
  const QuadratureGrid& grid_;
  std::span<const double> r_;
  std::span<const double> n_;
  const CalibrationConfig& config_;
};

double& param_ref(ItemParams& item, ItemObjective::Param which) {
  switch (which) {
    case ItemObjective::Param::A: return item.a;
    case ItemObjective::Param::B: return item.b;
    default: return item.c;
  }
}

std::pair<double, double> param_box(ItemObjective::Param which) {
  switch (which) {
    case ItemObjective::Param::A: return {kMinA, kMaxA};
    case ItemObjective::Param::B: return {kMinB, kMaxB};
    default: return {1e-6, kMaxC};
  }
}

/// Coordinate-wise Fisher-scoring steps with step halving, inside the boxes.
void fit_item(ItemParams& item, const ItemObjective& objective, const CalibrationConfig& config) {
  std::vector<ItemObjective::Param> params;
  if (config.estimate_a) params.push_back(ItemObjective::Param::A);
  params.push_back(ItemObjective::Param::B);
  if (config.estimate_c) params.push_back(ItemObjective::Param::C);

  double current = objective.value(item);
  for (int sweep = 0; sweep < 50; ++sweep) {
    double largest_move = 0.0;
    for (auto which : params) {
      const auto [grad, info] = objective.score(item, which);
      if (!(info > 0.0) || !std::isfinite(grad)) continue;
      double step = grad / info;
      const auto [lo, hi] = param_box(which);
      double& x = param_ref(item, which);
      const double origin = x;
      for (int halving = 0; halving < 30; ++halving) {
        x = std::clamp(origin + step, lo, hi);
        const double candidate = objective.value(item);
        if (candidate >= current) {
          current = candidate;
          break;
        }
        step *= 0.5;
        x = origin;
      }
      largest_move = std::max(largest_move, std::abs(x - origin));
    }
    if (largest_move < 1e-10) break;
  }
}

struct ObservationIndex {
  std::vector<std::vector<std::size_t>> by_item;
  std::vector<std::vector<std::size_t>> by_learner;
};

ObservationIndex index_observations(std::span<const Observation> obs, std::size_t n_items,
                                    std::size_t n_learners) {
  ObservationIndex index;
  index.by_item.resize(n_items);
  index.by_learner.resize(n_learners);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    if (obs[k].item >= n_items || obs[k].learner >= n_learners) {
      fail(ErrorCode::InvalidArgument, "observation refers to an unknown item or learner");
    }
    if (obs[k].trials == 0 || obs[k].successes > obs[k].trials) {
      fail(ErrorCode::Validation, "observation needs 0 <= successes <= trials and trials >= 1");
    }
    index.by_item[obs[k].item].push_back(k);
    index.by_learner[obs[k].learner].push_back(k);
  }
  return index;
}

}  // namespace

CalibrationOutcome calibrate_observations(std::vector<ItemParams> start, std::size_t n_learners,
                                          std::span<const Observation> observations,
                                          const CalibrationConfig& config) {
  config.validate();
  const std::size_t n_items = start.size();
  if (n_items == 0 || n_learners == 0 || observations.empty()) {
    fail(ErrorCode::InsufficientData, "calibration needs at least one item, learner and observation");
  }
  const auto index = index_observations(observations, n_items, n_learners);
  for (std::size_t i = 0; i < n_items; ++i) {
    if (index.by_item[i].empty()) {
      fail(ErrorCode::InsufficientData, "item '" + start[i].item_id + "' has no observations");
    }
  }
  for (std::size_t l = 0; l < n_learners; ++l) {
    if (index.by_learner[l].empty()) {
      fail(ErrorCode::InsufficientData, "learner #" + std::to_string(l) + " has no observations");
    }
  }

  const auto grid = QuadratureGrid::normal(config.grid_nodes);
  const std::size_t nq = grid.size();

  CalibrationOutcome out;
  for (std::size_t i = 0; i < n_items; ++i) {
    std::uint64_t succ = 0, trials = 0;
    for (auto k : index.by_item[i]) {
      succ += observations[k].successes;
      trials += observations[k].trials;
    }
    if (succ == 0 || succ == trials) out.degenerate_items.push_back(i);
    auto& item = start[i];
    item.response_count = trials;
    if (!config.estimate_a) item.a = config.fixed_a;
    item.a = std::clamp(item.a, kMinA, kMaxA);
    item.b = std::clamp(item.b, kMinB, kMaxB);
    if (config.estimate_c) item.c = std::clamp(item.c, 1e-6, kMaxC);
    validate_item(item);
  }

  std::vector<double> log_p(n_items * nq), log_q(n_items * nq);
  std::vector<double> posterior(n_learners * nq);
  std::vector<double> learner_loglik(n_learners);
  std::vector<Ability> abilities(n_learners);

  auto e_step = [&](bool keep_abilities) {
    parallel_for(n_items, config.workers, [&](std::size_t i) {
      for (std::size_t q = 0; q < nq; ++q) {
        const double p = clamp_probability(prob_correct(grid.nodes[q], start[i]));
        log_p[i * nq + q] = std::log(p);
        log_q[i * nq + q] = std::log1p(-p);
      }
    });
    parallel_for(n_learners, config.workers, [&](std::size_t l) {
      double* post = &posterior[l * nq];
      std::copy(grid.log_weights.begin(), grid.log_weights.end(), post);
      for (auto k : index.by_learner[l]) {
        const auto& o = observations[k];
        const double s = o.successes, f = o.trials - o.successes;
        const double* lp = &log_p[o.item * nq];
        const double* lq = &log_q[o.item * nq];
        for (std::size_t q = 0; q < nq; ++q) post[q] += s * lp[q] + f * lq[q];
      }
      const double peak = *std::max_element(post, post + nq);
      if (!std::isfinite(peak)) {
        fail(ErrorCode::DegeneratePosterior, "degenerate posterior for learner #" + std::to_string(l));
      }
      double mass = 0.0;
      for (std::size_t q = 0; q < nq; ++q) {
        post[q] = std::exp(post[q] - peak);
        mass += post[q];
      }
      double mean = 0.0;
      for (std::size_t q = 0; q < nq; ++q) {
        post[q] /= mass;
        mean += post[q] * grid.nodes[q];
      }
      learner_loglik[l] = peak + std::log(mass);
      if (keep_abilities) {
        double var = 0.0;
        for (std::size_t q = 0; q < nq; ++q) {
          const double d = grid.nodes[q] - mean;
          var += post[q] * d * d;
        }
        std::uint64_t n_resp = 0;
        for (auto k : index.by_learner[l]) n_resp += observations[k].trials;
        abilities[l] = Ability{mean, std::sqrt(var), static_cast<std::size_t>(n_resp)};
      }
    });
  };

  std::vector<double> change(n_items);
  for (int iter = 1; iter <= config.max_outer_iterations; ++iter) {
    e_step(false);
    parallel_for(n_items, config.workers, [&](std::size_t i) {
      std::vector<double> r(nq, 0.0), n(nq, 0.0);
      for (auto k : index.by_item[i]) {
        const auto& o = observations[k];
        const double* post = &posterior[o.learner * nq];
        for (std::size_t q = 0; q < nq; ++q) {
          r[q] += o.successes * post[q];
          n[q] += o.trials * post[q];
        }
      }
      const ItemParams before = start[i];
      fit_item(start[i], ItemObjective(grid, r, n, config), config);
      change[i] = 0.5 * (std::abs(start[i].a - before.a) + std::abs(start[i].b - before.b));
    });
    double total = 0.0;
    for (double d : change) total += d;
    out.last_change = total / static_cast<double>(n_items);
    out.iterations = iter;
    if (out.last_change < config.convergence_tol) {
      out.converged = true;
      break;
    }
  }

  e_step(true);
  out.log_marginal_likelihood = 0.0;
  for (double ll : learner_loglik) out.log_marginal_likelihood += ll;
  out.items = std::move(start);
  out.abilities = std::move(abilities);
  return out;
}

void seed_difficulties(std::vector<ItemParams>& items, std::span<const Observation> observations) {
  std::vector<double> succ(items.size(), 0.0), trials(items.size(), 0.0);
  for (const auto& o : observations) {
    if (o.item >= items.size()) fail(ErrorCode::InvalidArgument, "observation refers to an unknown item");
    succ[o.item] += o.successes;
    trials[o.item] += o.trials;
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double p = (succ[i] + 0.5) / (trials[i] + 1.0);
    const double adj = std::clamp((p - items[i].c) / (1.0 - items[i].c), 0.02, 0.98);
    items[i].b = std::clamp(-std::log(adj / (1.0 - adj)), kMinB, kMaxB);
  }
}

BankCalibration calibrate_bank(std::span<const ResponseRecord> records,
                               const CalibrationConfig& config, const ItemBank* start) {
  std::unordered_map<std::string, std::size_t> item_index, learner_index;
  std::vector<ItemParams> items;
  std::vector<std::string> learners;
  std::vector<Observation> observations;
  observations.reserve(records.size());
  for (const auto& rec : records) {
    if (rec.timestamp && *rec.timestamp < 0) {
      fail(ErrorCode::Validation, "negative timestamp for learner '" + rec.learner_id + "'");
    }
    auto [it, fresh] = item_index.emplace(rec.item_id, items.size());
    if (fresh) {
      ItemParams item;
      item.item_id = rec.item_id;
      item.a = config.estimate_a ? 1.0 : config.fixed_a;
      item.b = 0.0;
      item.c = config.estimate_c ? 0.2 : config.fixed_c;
      if (start) {
        if (auto pos = start->find(rec.item_id)) {
          const auto& seed_item = (*start)[*pos];
          item.a = seed_item.a;
          item.b = seed_item.b;
          if (config.estimate_c) item.c = seed_item.c;
          item.construct_id = seed_item.construct_id;
        }
      }
      items.push_back(std::move(item));
    }
    auto [lt, lfresh] = learner_index.emplace(rec.learner_id, learners.size());
    if (lfresh) learners.push_back(rec.learner_id);
    observations.push_back(Observation{lt->second, it->second, rec.correct ? 1u : 0u, 1u});
  }

  if (!start) seed_difficulties(items, observations);

  auto outcome = calibrate_observations(std::move(items), learners.size(), observations, config);

  BankCalibration result;
  for (auto i : outcome.degenerate_items) result.degenerate_items.push_back(outcome.items[i].item_id);
  result.bank = ItemBank(std::move(outcome.items));
  result.learner_ids = std::move(learners);
  result.abilities = std::move(outcome.abilities);
  result.iterations = outcome.iterations;
  result.converged = outcome.converged;
  result.last_change = outcome.last_change;
  result.log_marginal_likelihood = outcome.log_marginal_likelihood;
  return result;
}

CefrBins CefrBins::from_bank(const ItemBank& bank) {
  return CefrBins{bank.min_difficulty(), bank.max_difficulty()};
}

int CefrBins::level_of(double theta) const noexcept {
  const double width = (hi - lo) / kCefrLevels;
  if (!(width > 0.0)) return theta <= lo ? 0 : kCefrLevels - 1;
  const double pos = std::floor((theta - lo) / width);
  if (pos < 0.0) return 0;
  if (pos >= kCefrLevels) return kCefrLevels - 1;
  return static_cast<int>(pos);
}

double CefrBins::center(int level) const {
  if (level < 0 || level >= kCefrLevels) {
    fail(ErrorCode::InvalidArgument, "CEFR level must lie in 0..5");
  }
  const double width = (hi - lo) / kCefrLevels;
  return lo + (static_cast<double>(level) + 0.5) * width;
}

int map_theta_to_cefr(double theta, const ItemBank& bank) {
  return CefrBins::from_bank(bank).level_of(theta);
}

double cefr_to_difficulty(int level, const ItemBank& bank) {
  return CefrBins::from_bank(bank).center(level);
}

}  // namespace irtcat
