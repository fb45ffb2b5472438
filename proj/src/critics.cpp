#include "riskrl/critics.hpp"

#include <algorithm>

namespace riskrl {

TabularCritic::TabularCritic(int n_states, PowerLaw step)
    : j_(n_states, 0.0), u_(n_states, 0.0), visits_(n_states, 0), step_(step) {}

void TabularCritic::reset() {
  std::fill(j_.begin(), j_.end(), 0.0);
  std::fill(u_.begin(), u_.end(), 0.0);
  std::fill(visits_.begin(), visits_.end(), 0);
}

double TabularCritic::step_for(int x) {
  const std::int64_t nu = ++visits_[x];
  return step_(nu - 1);  // k-th visit uses step(k-1): harmonic law gives 1/k
}

void TabularCritic::update_value(const Transition& t, double gamma) {
  const double step = step_for(t.state);
  j_[t.state] += step * (t.cost + gamma * j_[t.next_state] - j_[t.state]);
}

void TabularCritic::update_square(const Transition& t, double gamma) {
  const double step = step_for(t.state);
  u_[t.state] += step * (t.cost * t.cost + 2 * gamma * t.cost * j_[t.next_state] +
                         gamma * gamma * u_[t.next_state] - u_[t.state]);
}

void TabularCritic::update(const Transition& t, double gamma) {
  const double step = step_for(t.state);
  const double j_next = j_[t.next_state];
  const double u_next = u_[t.next_state];
  const double td_j = t.cost + gamma * j_next - j_[t.state];
  const double td_u =
      t.cost * t.cost + 2 * gamma * t.cost * j_next + gamma * gamma * u_next - u_[t.state];
  j_[t.state] += step * td_j;
  u_[t.state] += step * td_u;
}

LinearCritic::LinearCritic(std::vector<std::vector<double>> features, PowerLaw step)
    : features_(std::move(features)), step_(step) {
  if (features_.empty()) throw DimensionMismatch("LinearCritic: no features");
  feature_dim_ = static_cast<int>(features_.front().size());
  for (const auto& phi : features_)
    if (static_cast<int>(phi.size()) != feature_dim_)
      throw DimensionMismatch("LinearCritic: inconsistent feature dimensions");
  v_.assign(feature_dim_, 0.0);
}

double LinearCritic::value(int x) const {
  const auto& phi = features_.at(x);
  double v = 0;
  for (int i = 0; i < feature_dim_; ++i) v += v_[i] * phi[i];
  return v;
}

void LinearCritic::update(const Transition& t, double gamma) {
  const auto& phi = features_.at(t.state);
  const double td = t.cost + gamma * value(t.next_state) - value(t.state);
  const double step = step_(n_++);
  for (int i = 0; i < feature_dim_; ++i) v_[i] += step * phi[i] * td;
}

void RunningAverages::observe(double cost) {
  const double step = step_(n_++);
  j_bar_ += step * (cost - j_bar_);
  eta_bar_ += step * (cost * cost - eta_bar_);
}

void RunningAverages::reset() {
  j_bar_ = 0;
  eta_bar_ = 0;
  n_ = 0;
}

DifferentialCritic::DifferentialCritic(int n_states, PowerLaw zeta3, PowerLaw zeta4)
    : v_(n_states, 0.0), u_(n_states, 0.0), avg_(zeta4), zeta3_(zeta3) {}

void DifferentialCritic::reset() {
  std::fill(v_.begin(), v_.end(), 0.0);
  std::fill(u_.begin(), u_.end(), 0.0);
  avg_.reset();
  n_ = 0;
}

DifferentialCritic::TdErrors DifferentialCritic::update(const Transition& t) {
  avg_.observe(t.cost);
  const double delta = t.cost - avg_.j() + v_[t.next_state] - v_[t.state];
  const double epsilon = t.cost * t.cost - avg_.eta() + u_[t.next_state] - u_[t.state];
  const double step = zeta3_(n_++);
  v_[t.state] += step * delta;
  u_[t.state] += step * epsilon;
  return {delta, epsilon};
}

}  // namespace riskrl
