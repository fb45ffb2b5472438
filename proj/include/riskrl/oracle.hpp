#pragma once

#include <span>
#include <vector>

#include "riskrl/mdp.hpp"

namespace riskrl::oracle {

/// Dense solves are guarded to this many states; the oracle exists for
/// desk-scale verification, not production solving.
inline constexpr int kMaxOracleStates = 1000;

std::vector<double> solve_value(const TabularMdp& mdp, const SoftmaxPolicy& policy);

struct SquareValue {
  std::vector<double> U;
  std::vector<double> W;  // flattened [x * n_actions + a]
};
SquareValue solve_square_value(const TabularMdp& mdp, const SoftmaxPolicy& policy);

/// Componentwise U(x) - J(x)^2.
std::vector<double> variance_discounted(std::span<const double> J, std::span<const double> U);

/// Everything the discounted-setting tests need in one solve.
struct DiscountedSolution {
  std::vector<double> J, U, variance;
  std::vector<double> Q, W;  // flattened [x * n_actions + a]
};
DiscountedSolution solve_discounted(const TabularMdp& mdp, const SoftmaxPolicy& policy);

/// One application of the joint value / square-value fixed-point operator,
/// exposed for contraction sanity checks.
void bellman_operator_discounted(const TabularMdp& mdp, const SoftmaxPolicy& policy,
                                 std::span<const double> J_in, std::span<const double> U_in,
                                 std::span<double> J_out, std::span<double> U_out);

struct AverageSolution {
  double avg_cost = 0;            // J
  double avg_square_cost = 0;     // eta
  double per_period_variance = 0; // eta - J^2
  std::vector<double> stationary;       // pi(x,a), flattened
  std::vector<double> state_stationary; // d(x)
  std::vector<double> V, U;             // differential values, pinned to 0 at ref_state
  std::vector<double> Q, W;             // flattened [x * n_actions + a]
};
/// Requires an irreducible policy-induced chain; throws ReducibleChain
/// otherwise. Differential values are normalized by V(ref)=U(ref)=0.
AverageSolution average_cost_solution(const TabularMdp& mdp, const SoftmaxPolicy& policy,
                                      int ref_state = 0);

/// gamma- (or gamma^2-) discounted state occupancy from x0, unnormalized:
/// total mass is 1/(1-factor), exactly as the visiting-distribution
/// definition reads. Callers wanting a distribution must scale themselves.
std::vector<double> discounted_occupancy(const TabularMdp& mdp, const SoftmaxPolicy& policy,
                                         int x0, double factor);

struct DiscountedGradients {
  std::vector<double> grad_J;
  std::vector<double> grad_U;
};
DiscountedGradients exact_grad_discounted(const TabularMdp& mdp, const SoftmaxPolicy& policy,
                                          int x0);

struct AverageGradients {
  std::vector<double> grad_J;
  std::vector<double> grad_eta;
};
AverageGradients exact_grad_average(const TabularMdp& mdp, const SoftmaxPolicy& policy);

/// Expected total cost of an SSP from every state (0 at the absorbing state).
std::vector<double> ssp_expected_cost(const TabularMdp& mdp, const SoftmaxPolicy& policy);

/// Expected first passage time to the absorbing state from x0.
double ssp_expected_hitting_time(const TabularMdp& mdp, const SoftmaxPolicy& policy, int x0);

/// Exact gradient of the expected SSP total cost from x0.
std::vector<double> exact_grad_ssp(const TabularMdp& mdp, const SoftmaxPolicy& policy, int x0);

/// Exact distribution of the SSP total cost from x0, by exhaustive path
/// enumeration with mass aggregation per total cost. Atoms sorted ascending.
/// Throws MassNotCaptured when more than mass_tol of probability remains
/// unabsorbed within max_depth steps.
struct CostDistribution {
  std::vector<double> values;
  std::vector<double> probabilities;
  double residual_mass = 0;

  double expectation() const;
};
CostDistribution ssp_cost_distribution(const TabularMdp& mdp, const SoftmaxPolicy& policy,
                                       int x0, double mass_tol, int max_depth = 64);

}  // namespace riskrl::oracle
