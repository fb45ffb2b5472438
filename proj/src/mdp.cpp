#include "riskrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace riskrl {
namespace {

constexpr double kRowSumTol = 1e-12;

}  // namespace

TabularMdp::TabularMdp(int n_states, int n_actions, std::vector<double> transition,
                       std::vector<double> cost, Setting setting)
    : n_states_(n_states),
      n_actions_(n_actions),
      transition_(std::move(transition)),
      cost_(std::move(cost)),
      setting_(setting) {
  if (n_states_ <= 0 || n_actions_ <= 0) throw InvalidModel("state/action counts must be positive");
  const auto n = static_cast<std::size_t>(n_states_);
  const auto a = static_cast<std::size_t>(n_actions_);
  if (transition_.size() != n * a * n) throw InvalidModel("transition tensor has wrong size");
  if (cost_.size() != n * a) throw InvalidModel("cost table has wrong size");

  for (int x = 0; x < n_states_; ++x) {
    for (int act = 0; act < n_actions_; ++act) {
      double sum = 0;
      for (int y = 0; y < n_states_; ++y) {
        const double p = this->transition(x, act, y);
        if (!(p >= 0.0 && p <= 1.0))
          throw InvalidModel("transition probability outside [0,1] at state " + std::to_string(x));
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTol)
        throw InvalidModel("transition row does not sum to 1 at state " + std::to_string(x));
      if (!std::isfinite(this->cost(x, act)))
        throw InvalidModel("non-finite cost at state " + std::to_string(x));
    }
  }

  switch (setting_.kind) {
    case SettingKind::Discounted:
      if (!(setting_.gamma > 0.0 && setting_.gamma < 1.0))
        throw InvalidModel("discount factor must lie strictly inside (0,1)");
      break;
    case SettingKind::Average:
      break;
    case SettingKind::Ssp: {
      const int abs_state = setting_.absorbing_state;
      if (abs_state < 0 || abs_state >= n_states_)
        throw InvalidModel("absorbing state index out of range");
      for (int act = 0; act < n_actions_; ++act) {
        if (std::abs(this->transition(abs_state, act, abs_state) - 1.0) > kRowSumTol)
          throw InvalidModel("absorbing state must self-loop with probability 1");
        if (this->cost(abs_state, act) != 0.0)
          throw InvalidModel("absorbing state must be cost-free");
      }
      break;
    }
  }
}

SoftmaxPolicy::SoftmaxPolicy(int n_states, int n_actions)
    : n_states_(n_states),
      n_actions_(n_actions),
      theta_(static_cast<std::size_t>(n_states) * n_actions, 0.0) {}

SoftmaxPolicy::SoftmaxPolicy(int n_states, int n_actions, std::vector<double> theta)
    : n_states_(n_states), n_actions_(n_actions), theta_(std::move(theta)) {
  if (theta_.size() != static_cast<std::size_t>(n_states_) * n_actions_)
    throw DimensionMismatch("theta dimension does not match n_states * n_actions");
}

void SoftmaxPolicy::set_theta(std::span<const double> theta) {
  if (theta.size() != theta_.size())
    throw DimensionMismatch("theta dimension does not match policy");
  std::copy(theta.begin(), theta.end(), theta_.begin());
}

void SoftmaxPolicy::action_probabilities(int x, std::span<double> out) const {
  const double* block = theta_.data() + static_cast<std::size_t>(x) * n_actions_;
  double max_theta = block[0];
  for (int a = 1; a < n_actions_; ++a) max_theta = std::max(max_theta, block[a]);
  double sum = 0;
  for (int a = 0; a < n_actions_; ++a) {
    out[a] = std::exp(block[a] - max_theta);
    sum += out[a];
  }
  for (int a = 0; a < n_actions_; ++a) out[a] /= sum;
}

std::vector<double> SoftmaxPolicy::action_probabilities(int x) const {
  std::vector<double> probs(n_actions_);
  action_probabilities(x, probs);
  return probs;
}

std::vector<double> SoftmaxPolicy::score(int x, int a) const {
  std::vector<double> s(dim(), 0.0);
  accumulate_score(x, a, s);
  return s;
}

void SoftmaxPolicy::accumulate_score(int x, int a, std::span<double> acc) const {
  if (acc.size() != static_cast<std::size_t>(dim()))
    throw DimensionMismatch("score accumulator has wrong dimension");
  std::vector<double> probs(n_actions_);
  action_probabilities(x, probs);
  for (int b = 0; b < n_actions_; ++b) {
    acc[index(x, b)] += (b == a ? 1.0 : 0.0) - probs[b];
  }
}

double Trajectory::total_cost() const {
  double d = 0;
  for (const auto& t : transitions) d += t.cost;
  return d;
}

Transition simulate_step(const TabularMdp& mdp, const SoftmaxPolicy& policy, int x,
                         RngStream& rng) {
  std::vector<double> probs(mdp.n_actions());
  policy.action_probabilities(x, probs);
  const int a = rng.categorical(probs);
  const int x_next = rng.categorical(mdp.transition_row(x, a));
  return Transition{x, a, mdp.cost(x, a), x_next};
}

Trajectory simulate_episode(const TabularMdp& mdp, const SoftmaxPolicy& policy, int x0,
                            RngStream& rng, std::int64_t max_steps) {
  if (mdp.setting().kind != SettingKind::Ssp)
    throw InvalidModel("simulate_episode requires an SSP setting");
  Trajectory traj;
  traj.score_sum.assign(policy.dim(), 0.0);
  const int absorbing = mdp.setting().absorbing_state;
  int x = x0;
  for (std::int64_t step = 0; step < max_steps; ++step) {
    if (x == absorbing) {
      traj.terminated = true;
      return traj;
    }
    Transition t = simulate_step(mdp, policy, x, rng);
    policy.accumulate_score(t.state, t.action, traj.score_sum);
    traj.transitions.push_back(t);
    x = t.next_state;
  }
  traj.terminated = (x == absorbing);
  return traj;
}

double discounted_return(const Trajectory& trajectory, double gamma) {
  double d = 0;
  double weight = 1.0;
  for (const auto& t : trajectory.transitions) {
    d += weight * t.cost;
    weight *= gamma;
  }
  return d;
}

}  // namespace riskrl
