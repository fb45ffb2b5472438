#pragma once

#include <cstdint>
#include <utility>
#include <variant>

#include "riskrl/mdp.hpp"

namespace riskrl {

/// Random irreducible MDP: uniform-positive rows normalized, then mixed with
/// epsilon=0.01 uniform mass so every transition probability is at least
/// 0.01/n_states. Costs uniform in [0,1]. Deterministic in the seed.
TabularMdp random_mdp(std::uint64_t seed, int n_states, int n_actions, Setting setting);

/// 4-action grid SSP with unit step cost; the goal cell (last index) is
/// absorbing and cost-free. With probability p_slip the move goes to a
/// uniformly random neighbor instead of the intended one; off-grid moves
/// stay in place.
TabularMdp grid_ssp(int width, int height, double p_slip);

/// Single-decision SSP: the safe action absorbs immediately at cost_safe;
/// the risky action pays cost_risky_low or cost_risky_high with
/// probabilities (1-p_high, p_high), realized through two branch states.
/// State 0 is the decision state, state 3 the absorbing state.
TabularMdp bandit_ssp(double cost_safe, double cost_risky_low, double cost_risky_high,
                      double p_high);

/// Average-cost 2-state deterministic alternating chain; action 0 observes
/// the stream costs_a = (k(state 0), k(state 1)), action 1 the stream
/// costs_b. The default streams have identical average cost 0 but per-period
/// variances 0 and 10^4.
TabularMdp two_stream(std::pair<double, double> costs_a = {0.0, 0.0},
                      std::pair<double, double> costs_b = {100.0, -100.0});

struct RandomMdpSpec {
  std::uint64_t seed = 0;
  int n_states = 4;
  int n_actions = 2;
  Setting setting = Setting::discounted(0.9);
};

struct GridSspSpec {
  int width = 2;
  int height = 2;
  double p_slip = 0.0;
};

struct BanditSspSpec {
  double cost_safe = 1.0;
  double cost_risky_low = 0.0;
  double cost_risky_high = 2.2;
  double p_high = 0.5;
};

struct TwoStreamSpec {
  std::pair<double, double> costs_a = {0.0, 0.0};
  std::pair<double, double> costs_b = {100.0, -100.0};
};

using EnvSpec = std::variant<RandomMdpSpec, GridSspSpec, BanditSspSpec, TwoStreamSpec>;

TabularMdp make_env(const EnvSpec& spec);

}  // namespace riskrl
