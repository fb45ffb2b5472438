#include "riskrl/experiment.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include "riskrl/oracle.hpp"

namespace riskrl {
namespace {

using nlohmann::json;

PowerLaw parse_power_law(const json& j, PowerLaw fallback) {
  PowerLaw out = fallback;
  if (j.contains("c")) out.c = j.at("c").get<double>();
  if (j.contains("p")) out.p = j.at("p").get<double>();
  return out;
}

Setting parse_setting(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "discounted") return Setting::discounted(j.at("gamma").get<double>());
  if (kind == "average") return Setting::average();
  if (kind == "ssp") return Setting::ssp(j.at("absorbing_state").get<int>());
  throw std::invalid_argument("unknown setting kind: " + kind);
}

EnvSpec parse_env(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "random_mdp") {
    RandomMdpSpec s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.n_states = j.at("n_states").get<int>();
    s.n_actions = j.at("n_actions").get<int>();
    s.setting = parse_setting(j.at("setting"));
    return s;
  }
  if (kind == "grid_ssp") {
    GridSspSpec s;
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    s.p_slip = j.value("p_slip", 0.0);
    return s;
  }
  if (kind == "bandit_ssp") {
    BanditSspSpec s;
    s.cost_safe = j.at("cost_safe").get<double>();
    s.cost_risky_low = j.at("cost_risky_low").get<double>();
    s.cost_risky_high = j.at("cost_risky_high").get<double>();
    s.p_high = j.at("p_high").get<double>();
    return s;
  }
  if (kind == "two_stream") {
    TwoStreamSpec s;
    if (j.contains("costs_a")) s.costs_a = {j.at("costs_a").at(0), j.at("costs_a").at(1)};
    if (j.contains("costs_b")) s.costs_b = {j.at("costs_b").at(0), j.at("costs_b").at(1)};
    return s;
  }
  throw std::invalid_argument("unknown environment kind: " + kind);
}

AlgorithmId parse_algorithm_id(const std::string& id) {
  if (id == "variance_discounted") return AlgorithmId::VarDiscounted;
  if (id == "variance_average") return AlgorithmId::VarAverage;
  if (id == "cvar_ssp") return AlgorithmId::CvarSsp;
  if (id == "cpt") return AlgorithmId::Cpt;
  throw std::invalid_argument("unknown algorithm id: " + id);
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  const json j = json::parse(json_text);
  ExperimentConfig cfg;
  cfg.env = parse_env(j.at("env"));

  const json& alg = j.at("algorithm");
  cfg.algorithm = parse_algorithm_id(alg.at("id").get<std::string>());
  cfg.alpha = alg.at("alpha").get<double>();
  cfg.beta = alg.value("beta", cfg.beta);
  cfg.outer_iterations = alg.at("outer_iterations").get<std::int64_t>();
  cfg.x0 = alg.value("x0", 0);
  cfg.lambda_max = alg.value("lambda_max", cfg.lambda_max);
  cfg.theta_half_width = alg.value("theta_half_width", cfg.theta_half_width);
  cfg.max_steps = alg.value("max_steps", cfg.max_steps);
  cfg.cpt_horizon = alg.value("cpt_horizon", cfg.cpt_horizon);
  cfg.constraint_tolerance = alg.value("constraint_tolerance", cfg.constraint_tolerance);
  if (alg.contains("cpt")) {
    cfg.cpt_identity = alg.at("cpt").value("identity", false);
    cfg.cpt_weight_exponent = alg.at("cpt").value("weight_exponent", cfg.cpt_weight_exponent);
  }

  if (j.contains("schedules")) {
    const json& s = j.at("schedules");
    Schedules& sch = cfg.schedules;
    if (s.contains("zeta1")) sch.zeta1 = parse_power_law(s.at("zeta1"), sch.zeta1);
    if (s.contains("zeta2")) sch.zeta2 = parse_power_law(s.at("zeta2"), sch.zeta2);
    if (s.contains("zeta3")) sch.zeta3 = parse_power_law(s.at("zeta3"), sch.zeta3);
    if (s.contains("zeta4")) sch.zeta4 = parse_power_law(s.at("zeta4"), sch.zeta4);
    if (s.contains("delta")) sch.delta = parse_power_law(s.at("delta"), sch.delta);
    if (s.contains("batch")) {
      const json& b = s.at("batch");
      sch.batch.m0 = b.value("m0", sch.batch.m0);
      sch.batch.c = b.value("c", sch.batch.c);
      sch.batch.q = b.value("q", sch.batch.q);
    }
  }

  cfg.replications = j.value("replications", 1);
  if (j.contains("seeds")) {
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  } else {
    cfg.base_seed = j.value("seed", 0);
  }
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

std::uint64_t replication_seed(const ExperimentConfig& config, int replication) {
  if (!config.seeds.empty()) {
    if (replication >= static_cast<int>(config.seeds.size()))
      throw std::invalid_argument("not enough explicit seeds for the replication count");
    return config.seeds[replication];
  }
  return config.base_seed + static_cast<std::uint64_t>(replication);
}

RunConfig make_run_config(const ExperimentConfig& config, int replication) {
  RunConfig rc{make_env(config.env)};
  rc.algorithm = config.algorithm;
  rc.alpha = config.alpha;
  rc.beta = config.beta;
  rc.cpt = config.cpt_identity ? CptModel::identity()
                               : CptModel::tversky(config.cpt_weight_exponent);
  rc.schedules = config.schedules;
  rc.theta_half_width = config.theta_half_width;
  rc.lambda_max = config.lambda_max;
  rc.outer_iterations = config.outer_iterations;
  rc.seed = replication_seed(config, replication);
  rc.x0 = config.x0;
  rc.max_steps = config.max_steps;
  rc.cpt_horizon = config.cpt_horizon;
  return rc;
}

ValidationReport validate_experiment(const ExperimentConfig& config) {
  ValidationReport report;
  try {
    const RunConfig probe = make_run_config(config, 0);
    report = validate_run_config(probe);
    report.require("x0 in range", config.x0 >= 0 && config.x0 < probe.mdp.n_states());
  } catch (const std::exception& e) {
    report.require("environment constructible", false, e.what());
    return report;
  }
  report.require("replications nonnegative", config.replications >= 0);
  report.require("enough explicit seeds",
                 config.seeds.empty() ||
                     static_cast<int>(config.seeds.size()) >= config.replications);
  return report;
}

OracleSummary oracle_eval(const TabularMdp& mdp, const ExperimentConfig& config,
                          std::span<const double> theta) {
  SoftmaxPolicy policy(mdp.n_states(), mdp.n_actions(),
                       std::vector<double>(theta.begin(), theta.end()));
  OracleSummary out;
  switch (mdp.setting().kind) {
    case SettingKind::Discounted: {
      const auto sol = oracle::solve_discounted(mdp, policy);
      out.J = sol.J[config.x0];
      out.G = sol.variance[config.x0];
      return out;
    }
    case SettingKind::Average: {
      const auto sol = oracle::average_cost_solution(mdp, policy);
      out.J = sol.avg_cost;
      out.G = sol.per_period_variance;
      return out;
    }
    case SettingKind::Ssp: {
      const auto dist =
          oracle::ssp_cost_distribution(mdp, policy, config.x0, 1e-9, 1024);
      out.J = dist.expectation();
      const DiscreteDistribution d{dist.values, dist.probabilities};
      if (config.algorithm == AlgorithmId::Cpt) {
        const CptModel model = config.cpt_identity
                                   ? CptModel::identity()
                                   : CptModel::tversky(config.cpt_weight_exponent);
        out.G = cpt_exact(d, model);
      } else {
        out.G = exact_var_cvar(d, config.beta).cvar;
      }
      return out;
    }
  }
  throw InvalidModel("oracle_eval: unknown setting");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trace_csv(const RunTrace& trace, std::ostream& out) {
  const std::size_t d = trace.final_theta.size();
  out << "iter";
  for (std::size_t i = 0; i < d; ++i) out << ",theta_" << i;
  out << ",lambda,J_hat,G_hat,grad_norm_J,grad_norm_G,episodes_used\n";
  for (const auto& rec : trace.records) {
    out << rec.n;
    for (const double t : rec.theta) out << ',' << format_double(t);
    out << ',' << format_double(rec.lambda) << ',' << format_double(rec.J_hat) << ','
        << format_double(rec.G_hat) << ',' << format_double(rec.grad_norm_J) << ','
        << format_double(rec.grad_norm_G) << ',' << rec.episodes_used << '\n';
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto report = validate_experiment(config);
  if (!report.all_pass())
    throw ScheduleInvalid("experiment config rejected: " + report.failures());

  std::filesystem::create_directories(config.output_dir);

  const auto run_one = [&config](int r) -> ReplicationSummary {
    const RunConfig rc = make_run_config(config, r);
    const RunTrace trace = riskrl::run(rc);

    std::ofstream trace_file(config.output_dir / ("trace_r" + std::to_string(r) + ".csv"),
                             std::ios::binary);
    write_trace_csv(trace, trace_file);

    ReplicationSummary row;
    row.replication = r;
    row.seed = rc.seed;
    row.final_lambda = trace.final_lambda;
    row.final_theta = trace.final_theta;
    row.oracle = oracle_eval(rc.mdp, config, trace.final_theta);
    row.constraint_satisfied = row.oracle.G <= config.alpha + config.constraint_tolerance;
    return row;
  };

  // Replications run in parallel with disjoint seeds; the join below is in
  // replication order so artifacts are deterministic.
  std::vector<std::future<ReplicationSummary>> futures;
  futures.reserve(config.replications);
  for (int r = 0; r < config.replications; ++r)
    futures.push_back(std::async(std::launch::async, run_one, r));

  ExperimentResult result;
  result.rows.reserve(config.replications);
  for (auto& f : futures) result.rows.push_back(f.get());

  std::ofstream summary(config.output_dir / "summary.csv", std::ios::binary);
  summary << "replication,seed,final_lambda,oracle_J,oracle_G,constraint_satisfied";
  const std::size_t d = result.rows.empty() ? 0 : result.rows.front().final_theta.size();
  for (std::size_t i = 0; i < d; ++i) summary << ",theta_" << i;
  summary << '\n';
  for (const auto& row : result.rows) {
    summary << row.replication << ',' << row.seed << ',' << format_double(row.final_lambda)
            << ',' << format_double(row.oracle.J) << ',' << format_double(row.oracle.G) << ','
            << (row.constraint_satisfied ? 1 : 0);
    for (const double t : row.final_theta) summary << ',' << format_double(t);
    summary << '\n';
  }
  return result;
}

}  // namespace riskrl
