#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace riskrl {

/// Robbins-Monro VaR tracker coupled with a plain-averaged CVaR estimate at
/// level beta. The CVaR recursion averages v(xi_{m-1}, D_m) with harmonic
/// weights, so it equals the running mean of those evaluations exactly.
class VarCvarState {
 public:
  explicit VarCvarState(double beta);

  /// One SA step on a fresh sample of the cost random variable.
  void observe(double sample, double zeta3);

  void reset();

  double var() const { return xi_; }
  double cvar() const { return c_; }
  std::int64_t count() const { return m_; }
  double beta() const { return beta_; }

 private:
  double xi_ = 0;
  double c_ = 0;
  std::int64_t m_ = 0;
  double beta_;
};

struct VarCvar {
  double var;
  double cvar;
};

/// Rockafellar-Uryasev batch solution over the empirical distribution:
/// VaR is the leftmost minimizer of V(xi) = xi + mean((D - xi)+)/(1-beta)
/// over the sample support (the left-continuous empirical quantile), and
/// CVaR is V(VaR). On atomic distributions V(VaR) can exceed the naive
/// conditional tail mean; V is the canonical value here.
VarCvar batch_var_cvar(std::span<const double> samples, double beta);

/// Finite discrete distribution; atoms need not be sorted on input.
struct DiscreteDistribution {
  std::vector<double> values;
  std::vector<double> probabilities;
};

/// Rockafellar-Uryasev VaR/CVaR of an exact finite distribution, same
/// conventions as batch_var_cvar.
VarCvar exact_var_cvar(const DiscreteDistribution& dist, double beta);

/// CPT utility/weight bundle. Utilities map to nonnegative magnitudes and
/// vanish on the wrong sign side; weights are nondecreasing with w(0)=0 and
/// w(1)=1. validate() spot-checks these on a grid.
struct CptModel {
  std::function<double(double)> u_plus;
  std::function<double(double)> u_minus;
  std::function<double(double)> w_plus;
  std::function<double(double)> w_minus;

  /// Identity pieces: the CPT-value collapses to E[(X)+] - E[(X)-].
  static CptModel identity();

  /// Identity utility magnitudes with the inverse-S weight on both sides.
  static CptModel tversky(double exponent = 0.69);

  void validate(int grid_points = 1000) const;
};

/// w(p) = p^e / (p^e + (1-p)^e)^(1/e); inflates small and deflates large
/// probabilities, exact at the endpoints.
double default_tversky_weight(double p, double exponent = 0.69);

/// Order-statistics CPT estimator over an i.i.d. sample.
double cpt_estimate(std::span<const double> samples, const CptModel& model);

/// Exact CPT-value of a finite discrete distribution (tail integrals reduce
/// to finite sums over the sorted support).
double cpt_exact(const DiscreteDistribution& dist, const CptModel& model);

}  // namespace riskrl
