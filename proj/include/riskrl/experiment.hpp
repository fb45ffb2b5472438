#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "riskrl/algorithms.hpp"
#include "riskrl/environments.hpp"

namespace riskrl {

/// Parsed experiment file: environment, algorithm, schedules, replication
/// plan and output location. See README for the JSON schema.
struct ExperimentConfig {
  EnvSpec env = BanditSspSpec{};
  AlgorithmId algorithm = AlgorithmId::CvarSsp;

  double alpha = 0;
  double beta = 0.95;
  bool cpt_identity = false;
  double cpt_weight_exponent = 0.69;

  Schedules schedules;
  double theta_half_width = 10.0;
  double lambda_max = 1e3;
  std::int64_t outer_iterations = 0;
  int x0 = 0;
  std::int64_t max_steps = 10000;
  std::int64_t cpt_horizon = 0;

  int replications = 1;
  std::uint64_t base_seed = 0;
  std::vector<std::uint64_t> seeds;  // explicit list; wins over base_seed

  std::filesystem::path output_dir = "out";
  double constraint_tolerance = 0.0;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Schedule validation for the algorithm's mode plus environment guards.
ValidationReport validate_experiment(const ExperimentConfig& config);

std::uint64_t replication_seed(const ExperimentConfig& config, int replication);
RunConfig make_run_config(const ExperimentConfig& config, int replication);

struct OracleSummary {
  double J = 0;
  double G = 0;
};

/// Setting-appropriate exact (objective, risk) pair at theta: discounted
/// variance, per-period variance, CVaR of the exact SSP cost distribution,
/// or exact CPT-value. CPT evaluation requires an SSP environment.
OracleSummary oracle_eval(const TabularMdp& mdp, const ExperimentConfig& config,
                          std::span<const double> theta);

struct ReplicationSummary {
  int replication = 0;
  std::uint64_t seed = 0;
  double final_lambda = 0;
  OracleSummary oracle;
  bool constraint_satisfied = false;
  std::vector<double> final_theta;
};

struct ExperimentResult {
  std::vector<ReplicationSummary> rows;
};

/// Lossless, locale-independent float formatting used in every artifact.
std::string format_double(double v);

void write_trace_csv(const RunTrace& trace, std::ostream& out);

/// Runs every replication (in parallel, joined in replication order), writes
/// trace_r<k>.csv per replication plus summary.csv, and returns the summary
/// rows. Byte-identical artifacts for identical configs.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace riskrl
