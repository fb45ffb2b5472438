#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "riskrl/gradients.hpp"
#include "riskrl/mdp.hpp"
#include "riskrl/optimizer.hpp"
#include "riskrl/risk.hpp"

namespace riskrl {

enum class AlgorithmId { VarDiscounted, VarAverage, CvarSsp, Cpt };

/// Full description of one algorithm run on one environment. The SPSA-based
/// drivers (VarDiscounted, Cpt) require schedules passing A4'; the
/// likelihood-ratio drivers (VarAverage, CvarSsp) require A4, plus the
/// driver-specific orderings checked by validate_run_config.
struct RunConfig {
  TabularMdp mdp;
  AlgorithmId algorithm = AlgorithmId::VarDiscounted;

  double alpha = 0;                       // risk bound
  double beta = 0.95;                     // CVaR level (CvarSsp)
  CptModel cpt = CptModel::tversky();     // Cpt
  double cpt_holder_alpha = 1.0;          // Holder order of the CPT estimator

  Schedules schedules;
  std::optional<BoxConstraint> box;       // defaults to [-theta_half_width, +]^d
  double theta_half_width = 10.0;
  double lambda_max = 1e3;

  std::int64_t outer_iterations = 0;
  std::uint64_t seed = 0;
  int x0 = 0;
  std::int64_t max_steps = 10000;         // per-episode cap (SSP)
  std::int64_t cpt_horizon = 0;           // 0: derive from gamma (discounted Cpt)

  std::vector<double> theta0;             // empty: zero vector (uniform policy)
  double lambda0 = 0.0;
};

struct IterationRecord {
  std::int64_t n;
  std::vector<double> theta;  // iterate entering this iteration
  double lambda;
  double J_hat = 0;
  double G_hat = 0;
  double grad_norm_J = 0;
  double grad_norm_G = 0;
  std::int64_t episodes_used = 0;
};

struct RunTrace {
  std::vector<IterationRecord> records;
  std::vector<double> final_theta;
  double final_lambda = 0;
  std::int64_t truncated_episodes = 0;
};

/// Environment/setting compatibility, schedule mode for the algorithm and
/// driver-specific schedule orderings, risk-parameter ranges.
ValidationReport validate_run_config(const RunConfig& config);

/// SPSA + coupled value/square-value TD critics; variance of the cumulative
/// discounted cost as the constraint.
RunTrace run_variance_discounted(const RunConfig& config);

/// Single-trajectory actor-critic with differential TD; per-period variance
/// as the constraint.
RunTrace run_variance_average(const RunConfig& config);

/// Episodic likelihood-ratio gradients with Robbins-Monro VaR/CVaR tracking;
/// CVaR of the total cost as the constraint.
RunTrace run_cvar_ssp(const RunConfig& config);

/// SPSA on Monte Carlo CPT estimates with a TD objective critic; CPT-value
/// of the episodic return as the constraint.
RunTrace run_cpt(const RunConfig& config);

/// Dispatch on config.algorithm.
RunTrace run(const RunConfig& config);

}  // namespace riskrl
