#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "riskrl/mdp.hpp"
#include "riskrl/rng.hpp"

namespace riskrl {

/// SPSA perturbation: magnitude delta_n and a +-1 direction vector Delta(n).
struct Perturbation {
  double delta = 0;
  std::vector<double> direction;
};

/// i.i.d. fair +-1 components from the given stream.
std::vector<double> bernoulli_perturbation(int dim, RngStream& rng);

struct GradientEstimate {
  std::vector<double> vector;
  std::int64_t n_samples = 0;
};

/// Component i: (f_plus - f_minus) / (2 delta Delta_i). Exact on quadratics
/// in expectation over the Delta distribution.
GradientEstimate spsa_two_sided(double f_plus, double f_minus, const Perturbation& pert);

/// Component i: (f_plus - f_at) / (delta Delta_i); one evaluation at the
/// unperturbed parameter, O(delta) bias.
GradientEstimate spsa_one_sided(double f_plus, double f_at, const Perturbation& pert);

/// Unbiased likelihood-ratio estimate of the total-cost gradient: mean over
/// episodes of D * (cached score sum). Rejects truncated episodes.
GradientEstimate lr_total_cost_gradient(std::span<const Trajectory> episodes,
                                        const SoftmaxPolicy& policy);

/// Conditional-form LR estimate of the CVaR gradient at the VaR estimate xi:
/// mean of (D - xi) * score sum over tail episodes {D >= xi}, normalized by
/// the empirical tail probability (floored at 1/n). Empty optional when no
/// episode lands in the tail, so the caller can skip the primal term.
std::optional<GradientEstimate> lr_cvar_gradient(std::span<const Trajectory> episodes,
                                                 const SoftmaxPolicy& policy, double xi,
                                                 double beta);

}  // namespace riskrl
