#include "riskrl/gradients.hpp"

#include <cmath>

#include "riskrl/errors.hpp"

namespace riskrl {

std::vector<double> bernoulli_perturbation(int dim, RngStream& rng) {
  if (dim < 1) throw DimensionMismatch("bernoulli_perturbation: dimension must be >= 1");
  std::vector<double> direction(dim);
  for (auto& c : direction) c = static_cast<double>(rng.sign());
  return direction;
}

namespace {

void check_perturbation(const Perturbation& pert) {
  if (!(pert.delta > 0)) throw ZeroDelta("SPSA perturbation delta must be positive");
  if (pert.direction.empty()) throw DimensionMismatch("SPSA perturbation has no direction");
}

}  // namespace

GradientEstimate spsa_two_sided(double f_plus, double f_minus, const Perturbation& pert) {
  check_perturbation(pert);
  GradientEstimate est;
  est.n_samples = 2;
  est.vector.resize(pert.direction.size());
  const double diff = (f_plus - f_minus) / (2.0 * pert.delta);
  for (std::size_t i = 0; i < est.vector.size(); ++i) est.vector[i] = diff / pert.direction[i];
  return est;
}

GradientEstimate spsa_one_sided(double f_plus, double f_at, const Perturbation& pert) {
  check_perturbation(pert);
  GradientEstimate est;
  est.n_samples = 2;
  est.vector.resize(pert.direction.size());
  const double diff = (f_plus - f_at) / pert.delta;
  for (std::size_t i = 0; i < est.vector.size(); ++i) est.vector[i] = diff / pert.direction[i];
  return est;
}

namespace {

void require_terminated(std::span<const Trajectory> episodes) {
  for (const auto& ep : episodes)
    if (!ep.terminated)
      throw TruncatedEpisodePresent("episode batch contains a truncated episode");
}

}  // namespace

GradientEstimate lr_total_cost_gradient(std::span<const Trajectory> episodes,
                                        const SoftmaxPolicy& policy) {
  require_terminated(episodes);
  const std::size_t d = static_cast<std::size_t>(policy.dim());
  GradientEstimate est;
  est.vector.assign(d, 0.0);
  est.n_samples = static_cast<std::int64_t>(episodes.size());
  if (episodes.empty()) return est;
  for (const auto& ep : episodes) {
    if (ep.score_sum.size() != d)
      throw DimensionMismatch("lr_total_cost_gradient: cached score dimension mismatch");
    const double D = ep.total_cost();
    for (std::size_t i = 0; i < d; ++i) est.vector[i] += D * ep.score_sum[i];
  }
  const double inv_n = 1.0 / static_cast<double>(episodes.size());
  for (auto& g : est.vector) g *= inv_n;
  return est;
}

std::optional<GradientEstimate> lr_cvar_gradient(std::span<const Trajectory> episodes,
                                                 const SoftmaxPolicy& policy, double xi,
                                                 double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidModel("lr_cvar_gradient: beta must be in (0,1)");
  if (!std::isfinite(xi)) throw NonFiniteEstimate("lr_cvar_gradient: xi is not finite");
  require_terminated(episodes);
  const std::size_t d = static_cast<std::size_t>(policy.dim());
  const auto n = static_cast<double>(episodes.size());

  std::vector<double> acc(d, 0.0);
  std::int64_t tail_count = 0;
  for (const auto& ep : episodes) {
    if (ep.score_sum.size() != d)
      throw DimensionMismatch("lr_cvar_gradient: cached score dimension mismatch");
    const double D = ep.total_cost();
    if (D < xi) continue;
    ++tail_count;
    for (std::size_t i = 0; i < d; ++i) acc[i] += (D - xi) * ep.score_sum[i];
  }
  if (tail_count == 0) return std::nullopt;

  // Conditional expectation form: mean over all episodes divided by the
  // empirical tail probability, floored at 1/n against blowup.
  const double tail_prob = std::max(static_cast<double>(tail_count) / n, 1.0 / n);
  GradientEstimate est;
  est.n_samples = tail_count;
  est.vector.resize(d);
  for (std::size_t i = 0; i < d; ++i) est.vector[i] = acc[i] / n / tail_prob;
  return est;
}

}  // namespace riskrl
