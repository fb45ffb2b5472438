#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "riskrl/mdp.hpp"

namespace riskrl {

/// Power-law step size c/(n+1)^p, evaluated at a zero-based index.
struct PowerLaw {
  double c = 1.0;
  double p = 1.0;

  double operator()(std::int64_t n) const { return c / std::pow(static_cast<double>(n) + 1.0, p); }
};

/// Tabular TD(0) critic for the value and square-value functions of a
/// discounted MDP. Step sizes are indexed by per-state visit counts: the
/// k-th update of a state uses step(k-1).
class TabularCritic {
 public:
  TabularCritic(int n_states, PowerLaw step);

  void reset();

  /// TD(0) update of J at the visited state; bumps its visit count.
  void update_value(const Transition& t, double gamma);

  /// Square-value TD update of U, consuming the critic's current J estimate
  /// at the next state; bumps the visit count.
  void update_square(const Transition& t, double gamma);

  /// Coupled J and U update from one transition with a single count bump.
  /// Both temporal differences read the pre-update estimates.
  void update(const Transition& t, double gamma);

  double j(int x) const { return j_[x]; }
  double u(int x) const { return u_[x]; }
  std::span<const double> j() const { return j_; }
  std::span<const double> u() const { return u_; }
  std::int64_t visits(int x) const { return visits_[x]; }

 private:
  double step_for(int x);  // bumps the visit count, returns its step size

  std::vector<double> j_, u_;
  std::vector<std::int64_t> visits_;
  PowerLaw step_;
};

/// TD(0) with linear function approximation, v'phi(x); steps use the global
/// update index, not per-state counts.
class LinearCritic {
 public:
  LinearCritic(std::vector<std::vector<double>> features, PowerLaw step);

  void update(const Transition& t, double gamma);

  double value(int x) const;
  std::span<const double> weights() const { return v_; }
  int feature_dim() const { return feature_dim_; }

 private:
  std::vector<std::vector<double>> features_;
  std::vector<double> v_;
  int feature_dim_;
  PowerLaw step_;
  std::int64_t n_ = 0;
};

/// Running estimates of the average cost and average square cost,
/// J <- (1-zeta4)J + zeta4 k. With the harmonic schedule (c=1, p=1) these
/// are exactly the sample means.
class RunningAverages {
 public:
  explicit RunningAverages(PowerLaw step) : step_(step) {}

  void observe(double cost);
  void reset();

  double j() const { return j_bar_; }
  double eta() const { return eta_bar_; }
  std::int64_t count() const { return n_; }

 private:
  double j_bar_ = 0, eta_bar_ = 0;
  std::int64_t n_ = 0;
  PowerLaw step_;
};

/// Differential TD critic for the average-cost setting: couples the running
/// cost averages (zeta4) with differential value / square-value estimates
/// (zeta3, global step index). update() returns the TD errors the actor
/// consumes.
class DifferentialCritic {
 public:
  DifferentialCritic(int n_states, PowerLaw zeta3, PowerLaw zeta4);

  struct TdErrors {
    double delta;
    double epsilon;
  };
  TdErrors update(const Transition& t);

  void reset();

  double j_bar() const { return avg_.j(); }
  double eta_bar() const { return avg_.eta(); }
  double v(int x) const { return v_[x]; }
  double u(int x) const { return u_[x]; }
  std::int64_t steps() const { return n_; }

 private:
  std::vector<double> v_, u_;
  RunningAverages avg_;
  PowerLaw zeta3_;
  std::int64_t n_ = 0;
};

}  // namespace riskrl
