#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "irtcat/adaptive.hpp"
#include "irtcat/error.hpp"
#include "irtcat/simulator.hpp"
#include "irtcat/synth.hpp"

using namespace irtcat;

namespace {

ItemParams item(std::string id, double a, double b, double c = 0.0, std::uint64_t count = 0) {
  ItemParams p;
  p.item_id = std::move(id);
  p.a = a;
  p.b = b;
  p.c = c;
  p.response_count = count;
  return p;
}

ItemBank spread_bank(std::size_t n, double c = 0.0) {
  std::vector<ItemParams> items;
  for (std::size_t k = 0; k < n; ++k) {
    items.push_back(item("q" + std::to_string(1000 + k), 1.0 + 0.5 * static_cast<double>(k % 3),
                         -3.0 + 6.0 * static_cast<double>(k) / static_cast<double>(n - 1), c));
  }
  return ItemBank(items);
}

const ItemBank& big_bank() {
  static const ItemBank bank = synth::make_bank(synth::BankSpec{}, 99).bank;
  return bank;
}

SessionConfig plain_config() {
  SessionConfig cfg;
  cfg.exploration.enabled = false;
  return cfg;
}

}  // namespace

TEST_CASE("init_session") {
  const auto bank = spread_bank(10);
  auto cfg = plain_config();
  const auto s1 = init_session(42, bank, cfg, default_grid());
  const auto s2 = init_session(42, bank, cfg, default_grid());
  CHECK(s1.theta() == s2.theta());
  CHECK(s1.phase == Phase::Main);
  CHECK(s1.theta_trajectory.size() == 1);
  cfg.warmup_length = 10;
  CHECK(init_session(42, bank, cfg, default_grid()).phase == Phase::WarmUp);
  CHECK_THROWS_AS(init_session(1, ItemBank(std::vector<ItemParams>{}), cfg, default_grid()), Error);

  double sum = 0, sum2 = 0;
  const int n = 10000;
  for (int seed = 0; seed < n; ++seed) {
    const double t = init_session(static_cast<std::uint64_t>(seed), bank, plain_config(), default_grid()).theta();
    sum += t;
    sum2 += t * t;
  }
  const double mean = sum / n, sd = std::sqrt(sum2 / n - mean * mean);
  CHECK(std::abs(mean) <= 0.02);
  CHECK(std::abs(sd - 0.5) <= 0.02);
}

TEST_CASE("trend slope and effective theta") {
  const std::vector<double> line{0.0, 0.1, 0.3, 0.6, 1.0, 1.5};
  // last five: 0.1 0.3 0.6 1.0 1.5 -> slope = sum(dx*dy)/sum(dx^2) = (-2*-.6 + -1*-.4 + 0 + 1*.3 + 2*.8)/10
  CHECK(std::abs(trend_slope(line, 5) - 0.35) < 1e-12);
  CHECK(trend_slope(std::vector<double>{1.0}, 5) == 0.0);

  SessionState state;
  state.theta_trajectory = {0.0, 0.1, 0.3, 0.6, 1.0, 1.5};
  state.responses.resize(5);
  ExplorationConfig always;
  always.epsilon = 1.0;
  always.start_step = 10;
  Rng rng(1);
  CHECK(effective_theta(state, always, rng) == 1.5);  // step 5 < start_step
  always.start_step = 0;
  CHECK(effective_theta(state, always, rng) == 2.0);
  state.theta_trajectory = {0.0, 1.0, 0.8, 0.6, 0.4, 0.2};
  CHECK(std::abs(effective_theta(state, always, rng) - (0.2 - 0.5)) < 1e-15);
  state.theta_trajectory = {0.4, 0.4, 0.4, 0.4, 0.4, 0.4};
  CHECK(effective_theta(state, always, rng) == 0.4);
  state.theta_trajectory = {0.0, 0.1, 0.3, 0.6, 1.0, 1.5};
  always.stop_step = 5;
  always.start_step = 0;
  CHECK(effective_theta(state, always, rng) == 1.5);  // window closed at step 5
  always.stop_step = 60;
  always.enabled = false;
  CHECK(effective_theta(state, always, rng) == 1.5);
}

TEST_CASE("item selection") {
  SessionConfig cfg = plain_config();
  {
    const ItemBank single({item("only", 1, 0)});
    auto state = init_session(1, single, cfg, default_grid());
    Rng rng(3);
    CHECK(select_next_item(state, single, cfg.policy, 0.0, rng) == 0u);
    record_response(state, single, 0, true, default_grid());
    CHECK_FALSE(select_next_item(state, single, cfg.policy, 0.0, rng).has_value());
  }
  // informations 0.9 .. 0.4 at theta = 0 via a^2/4 with b = 0, c = 0
  std::vector<ItemParams> items;
  const std::vector<double> info{0.9, 0.8, 0.7, 0.6, 0.5, 0.4};
  for (std::size_t k = 0; k < info.size(); ++k) items.push_back(item("i" + std::to_string(k), 2 * std::sqrt(info[k]), 0));
  const ItemBank bank(items);
  for (std::size_t k = 0; k < info.size(); ++k) CHECK(std::abs(item_information(0, bank[k]) - info[k]) < 1e-12);
  auto state = init_session(1, bank, cfg, default_grid());
  SelectionPolicy argmax;
  argmax.top_k = 1;
  Rng rng(5);
  CHECK(select_next_item(state, bank, argmax, 0.0, rng) == 0u);

  std::vector<int> freq(6, 0);
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) ++freq[*select_next_item(state, bank, cfg.policy, 0.0, rng)];
  for (int k = 0; k < 5; ++k) CHECK(std::abs(freq[k] / double(draws) - 0.2) <= 0.01);
  CHECK(freq[5] == 0);

  // ties are broken by item id, not bank order
  const ItemBank tied({item("b", 1, 0), item("a", 1, 0), item("c", 0.5, 0)});
  auto tstate = init_session(1, tied, cfg, default_grid());
  CHECK(select_next_item(tstate, tied, argmax, 0.0, rng) == 1u);

  // eligibility restricts the candidates
  std::vector<bool> eligible{false, false, true, false, false, true};
  std::set<std::size_t> seen;
  for (int k = 0; k < 200; ++k) seen.insert(*select_next_item(state, bank, cfg.policy, 0.0, rng, &eligible));
  CHECK(seen == std::set<std::size_t>{2, 5});
}

TEST_CASE("cold-start draw picks among the least-answered items") {
  const ItemBank bank({item("a", 2, 0, 0, 50), item("b", 0.5, 3, 0, 2), item("c", 0.5, -3, 0, 2), item("d", 1, 0, 0, 9)});
  SessionConfig cfg = plain_config();
  auto state = init_session(1, bank, cfg, default_grid());
  SelectionPolicy cold;
  cold.coldstart_enabled = true;
  cold.epsilon_coldstart = 1.0;
  Rng rng(2);
  std::set<std::size_t> seen;
  for (int k = 0; k < 100; ++k) seen.insert(*select_next_item(state, bank, cold, 0.0, rng));
  CHECK(seen == std::set<std::size_t>{1, 2});
}

TEST_CASE("warm-up discards only wrong answers") {
  const auto bank = spread_bank(40);
  SessionConfig cfg = plain_config();
  cfg.warmup_length = 10;
  auto state = init_session(7, bank, cfg, default_grid());
  const double theta0 = state.theta();
  for (std::size_t k = 0; k < 10; ++k) {
    CHECK(state.phase == Phase::WarmUp);
    record_response(state, bank, k, false, default_grid());
    CHECK_FALSE(state.responses.back().counted);
    CHECK(state.theta() == theta0);
  }
  CHECK(state.phase == Phase::Main);
  CHECK(state.n_counted == 0);
  CHECK(std::isinf(state.sem_trajectory.back()));
  record_response(state, bank, 20, false, default_grid());
  CHECK(state.responses.back().counted);
  CHECK(state.theta() < 0.0);

  auto rising = init_session(7, bank, cfg, default_grid());
  double previous = -INFINITY;
  for (std::size_t k = 0; k < 5; ++k) {
    record_response(rising, bank, 30 + k, true, default_grid());
    CHECK(rising.responses.back().counted);
    if (k > 0) CHECK(rising.theta() > previous);
    previous = rising.theta();
  }
  CHECK_THROWS_AS(record_response(rising, bank, 30, true, default_grid()), Error);
  CHECK(rising.theta_trajectory.size() == rising.responses.size() + 1);
}

TEST_CASE("counted responses determine theta regardless of order") {
  const auto bank = spread_bank(30);
  const SessionConfig cfg = plain_config();
  const std::vector<std::pair<std::size_t, bool>> answers{{3, true}, {10, false}, {17, true}, {22, false}, {25, true}};
  auto a = init_session(1, bank, cfg, default_grid());
  auto b = init_session(2, bank, cfg, default_grid());
  for (const auto& [i, c] : answers) record_response(a, bank, i, c, default_grid());
  for (auto it = answers.rbegin(); it != answers.rend(); ++it) record_response(b, bank, it->first, it->second, default_grid());
  CHECK(std::abs(a.theta() - b.theta()) < 1e-12);
  std::vector<ScoredResponse> scored;
  for (const auto& [i, c] : answers) scored.push_back({&bank[i], c});
  CHECK(std::abs(a.theta() - estimate_ability_eap(scored, default_grid()).theta) < 1e-12);
}

TEST_CASE("termination rules") {
  SessionState state;
  state.theta_trajectory.assign(51, 0.3);
  state.sem_trajectory.assign(51, INFINITY);
  state.responses.resize(50);
  const ItemBank bank({item("x", 1, 0)});
  TerminationCriterion fixed;
  fixed.rule = FixedLength{50};
  CHECK(check_termination(state, bank, fixed) == Decision::Converged);
  state.warmup_length = 10;  // 40 main-phase responses
  CHECK(check_termination(state, bank, fixed) == Decision::Continue);
  state.warmup_length = 0;

  TerminationCriterion early;
  early.rule = EarlyStop{10, 0.05};
  CHECK(check_termination(state, bank, early) == Decision::Converged);
  state.theta_trajectory[45] = 0.5;
  CHECK(check_termination(state, bank, early) == Decision::Continue);
  state.theta_trajectory[45] = 0.3;
  state.warmup_length = 45;  // window would reach into warm-up
  CHECK(check_termination(state, bank, early) == Decision::Continue);
  state.warmup_length = 0;

  TerminationCriterion semrule;
  semrule.rule = SemThreshold{0.5};
  state.sem_trajectory.back() = *sem_from_information(4.1);
  CHECK(std::abs(state.sem_trajectory.back() - 0.4939) < 1e-4);
  CHECK(check_termination(state, bank, semrule) == Decision::Converged);
  state.sem_trajectory.back() = *sem_from_information(3.9);
  CHECK(check_termination(state, bank, semrule) == Decision::Continue);

  // min_steps floor and max_steps forced stop
  SessionState short_state;
  short_state.theta_trajectory.assign(21, 0.0);
  short_state.sem_trajectory.assign(21, 0.01);
  short_state.responses.resize(20);
  CHECK(check_termination(short_state, bank, semrule) == Decision::Continue);
  SessionState long_state;
  long_state.theta_trajectory.resize(101);
  for (std::size_t k = 0; k < 101; ++k) long_state.theta_trajectory[k] = (k % 2) ? 1.0 : -1.0;
  long_state.sem_trajectory.assign(101, 1.0);
  long_state.responses.resize(100);
  CHECK(check_termination(long_state, bank, early) == Decision::ForcedStop);

  TerminationCriterion bad;
  bad.min_steps = 200;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK(early.label() == "earlystop:N10:d0.05");
  CHECK(fixed.label() == "fixed:50");
  CHECK(semrule.label() == "sem:0.5");
}

TEST_CASE("run_session properties") {
  const auto& bank = big_bank();
  SessionConfig cfg;
  const auto examinee = simulated_examinee(0.7, SlipSchedule{0.05, 0.05, 0}, 11);
  const auto a = run_session(examinee, bank, cfg, 11, default_grid());
  const auto b = run_session(simulated_examinee(0.7, SlipSchedule{0.05, 0.05, 0}, 11), bank, cfg, 11, default_grid());
  CHECK(a.theta_trajectory == b.theta_trajectory);
  CHECK(a.length == b.length);
  CHECK(a.theta_trajectory.size() == a.responses.size() + 1);
  std::set<std::size_t> items;
  for (const auto& r : a.responses) items.insert(r.item);
  CHECK(items.size() == a.responses.size());
  CHECK(a.length >= cfg.criterion.min_steps);
  CHECK(a.length <= cfg.criterion.max_steps);

  // always correct on a c = 0 bank: the final estimate tops the trajectory
  std::vector<ItemParams> c0;
  for (const auto& it : bank.items()) {
    auto copy = it;
    copy.c = 0.0;
    c0.push_back(copy);
  }
  const ItemBank zero(c0);
  SessionConfig warm = plain_config();
  warm.warmup_length = 10;
  const auto up = run_session([](const ItemParams&, std::size_t) { return true; }, zero, warm, 3, default_grid());
  for (std::size_t k = warm.warmup_length; k < up.theta_trajectory.size(); ++k) CHECK(up.ability.theta >= up.theta_trajectory[k]);

  // warm-up neutrality when the first ten answers are correct
  std::size_t calls = 0;
  auto first_right = [&calls](const ItemParams& it, std::size_t step) {
    ++calls;
    return step < 10 || (std::hash<std::string>{}(it.item_id) % 3 != 0);
  };
  SessionConfig off = plain_config();
  SessionConfig on = plain_config();
  on.warmup_length = 10;
  on.criterion.rule = EarlyStop{};
  const auto r_off = run_session(first_right, bank, off, 5, default_grid());
  const auto r_on = run_session(first_right, bank, on, 5, default_grid());
  REQUIRE(r_off.theta_trajectory.size() >= 11);
  for (std::size_t k = 0; k <= 10; ++k) CHECK(r_off.theta_trajectory[k] == r_on.theta_trajectory[k]);
  CHECK(calls > 0);
}

TEST_CASE("larger EarlyStop delta never stops later") {
  const auto& bank = big_bank();
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    SessionConfig tight = plain_config();
    tight.criterion.rule = EarlyStop{10, 0.05};
    SessionConfig loose = tight;
    loose.criterion.rule = EarlyStop{10, 0.15};
    const double theta = -2.0 + 0.13 * static_cast<double>(seed);
    const auto t = run_session(simulated_examinee(theta, SlipSchedule::none(), seed), bank, tight, seed, default_grid());
    const auto l = run_session(simulated_examinee(theta, SlipSchedule::none(), seed), bank, loose, seed, default_grid());
    CHECK(l.length <= t.length);
  }
}

TEST_CASE("out of items") {
  const auto bank = spread_bank(5);
  SessionConfig cfg = plain_config();
  const auto r = run_session([](const ItemParams&, std::size_t) { return true; }, bank, cfg, 1, default_grid());
  CHECK(r.reason == StopReason::OutOfItems);
  CHECK(r.length == 5);
}

TEST_CASE("extra steps after convergence leave the reported result alone") {
  const auto& bank = big_bank();
  const SessionConfig cfg = plain_config();
  const auto base = run_session(simulated_examinee(0.0, SlipSchedule::none(), 8), bank, cfg, 8, default_grid());
  const auto more = run_session(simulated_examinee(0.0, SlipSchedule::none(), 8), bank, cfg, 8, default_grid(), nullptr, 10);
  REQUIRE(base.reason == StopReason::Converged);
  CHECK(more.length == base.length);
  CHECK(more.ability.theta == base.ability.theta);
  CHECK(more.responses.size() == base.responses.size() + 10);
}
