#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "riskrl/errors.hpp"
#include "riskrl/rng.hpp"

namespace riskrl {

enum class SettingKind { Discounted, Average, Ssp };

/// Cost-accumulation convention of a TabularMdp.
struct Setting {
  SettingKind kind = SettingKind::Discounted;
  double gamma = 0.0;        // Discounted only, strictly inside (0,1)
  int absorbing_state = -1;  // Ssp only

  static Setting discounted(double gamma) { return {SettingKind::Discounted, gamma, -1}; }
  static Setting average() { return {SettingKind::Average, 0.0, -1}; }
  static Setting ssp(int absorbing_state) { return {SettingKind::Ssp, 0.0, absorbing_state}; }
};

/// Finite MDP: transition tensor P[x][a][x'], cost table k[x][a], setting tag.
/// Construction validates row stochasticity (1e-12), cost finiteness and the
/// setting invariants (gamma range, cost-free self-looping absorbing state).
class TabularMdp {
 public:
  TabularMdp(int n_states, int n_actions, std::vector<double> transition,
             std::vector<double> cost, Setting setting);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  const Setting& setting() const { return setting_; }

  double transition(int x, int a, int x_next) const {
    return transition_[(static_cast<std::size_t>(x) * n_actions_ + a) * n_states_ + x_next];
  }
  std::span<const double> transition_row(int x, int a) const {
    return {transition_.data() + (static_cast<std::size_t>(x) * n_actions_ + a) * n_states_,
            static_cast<std::size_t>(n_states_)};
  }
  double cost(int x, int a) const {
    return cost_[static_cast<std::size_t>(x) * n_actions_ + a];
  }

 private:
  int n_states_;
  int n_actions_;
  std::vector<double> transition_;
  std::vector<double> cost_;
  Setting setting_;
};

/// Tabular softmax policy, one parameter per state-action pair:
/// mu(a|x) = exp(theta[x,a]) / sum_b exp(theta[x,b]), stabilized by
/// max-subtraction so saturated parameters cannot overflow.
class SoftmaxPolicy {
 public:
  SoftmaxPolicy(int n_states, int n_actions);
  SoftmaxPolicy(int n_states, int n_actions, std::vector<double> theta);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  int dim() const { return n_states_ * n_actions_; }

  std::span<const double> theta() const { return theta_; }
  void set_theta(std::span<const double> theta);
  double theta_at(int x, int a) const { return theta_[index(x, a)]; }

  std::vector<double> action_probabilities(int x) const;
  void action_probabilities(int x, std::span<double> out) const;

  /// grad log mu(a|x) over the full parameter vector: component (x,b) is
  /// 1{b=a} - mu(b|x), zero outside state x's block.
  std::vector<double> score(int x, int a) const;
  /// Adds the score of (x,a) into an accumulator of dimension dim().
  void accumulate_score(int x, int a, std::span<double> acc) const;

  int index(int x, int a) const { return x * n_actions_ + a; }

 private:
  int n_states_;
  int n_actions_;
  std::vector<double> theta_;
};

struct Transition {
  int state;
  int action;
  double cost;
  int next_state;
};

/// One simulated SSP episode, or its truncated prefix when max_steps ran out
/// before absorption. score_sum caches sum_m grad log mu(a_m|x_m) accumulated
/// during simulation under the policy that generated the episode.
struct Trajectory {
  std::vector<Transition> transitions;
  bool terminated = false;
  std::vector<double> score_sum;

  double total_cost() const;
};

Transition simulate_step(const TabularMdp& mdp, const SoftmaxPolicy& policy, int x,
                         RngStream& rng);

/// Simulates from x0 until the absorbing state or max_steps. A truncated
/// episode is returned with terminated=false, never silently averaged in.
Trajectory simulate_episode(const TabularMdp& mdp, const SoftmaxPolicy& policy, int x0,
                            RngStream& rng, std::int64_t max_steps);

/// sum_m gamma^m k(x_m, a_m) over the recorded transitions.
double discounted_return(const Trajectory& trajectory, double gamma);

}  // namespace riskrl
