#include "riskrl/algorithms.hpp"

#include <cmath>
#include <string>

#include "riskrl/critics.hpp"

namespace riskrl {
namespace {

double norm2(std::span<const double> v) {
  double s = 0;
  for (const double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> initial_theta(const RunConfig& config, int dim) {
  if (config.theta0.empty()) return std::vector<double>(dim, 0.0);
  if (config.theta0.size() != static_cast<std::size_t>(dim))
    throw DimensionMismatch("theta0 dimension does not match the environment");
  return config.theta0;
}

BoxConstraint config_box(const RunConfig& config, int dim) {
  if (config.box) {
    if (config.box->dim() != dim) throw DimensionMismatch("box dimension mismatch");
    return *config.box;
  }
  return BoxConstraint::symmetric(dim, config.theta_half_width);
}

void require_valid(const RunConfig& config) {
  const auto report = validate_run_config(config);
  if (!report.all_pass())
    throw ScheduleInvalid("run config rejected: " + report.failures());
}

IterationRecord make_record(std::int64_t n, const PrimalDualState& state, double J_hat,
                            double G_hat, std::span<const double> grad_J,
                            std::span<const double> grad_G, std::int64_t episodes) {
  IterationRecord rec;
  rec.n = n;
  rec.theta.assign(state.theta().begin(), state.theta().end());
  rec.lambda = state.lambda();
  rec.J_hat = J_hat;
  rec.G_hat = G_hat;
  rec.grad_norm_J = norm2(grad_J);
  rec.grad_norm_G = norm2(grad_G);
  rec.episodes_used = episodes;
  return rec;
}

void finalize(RunTrace& trace, const PrimalDualState& state) {
  trace.final_theta.assign(state.theta().begin(), state.theta().end());
  trace.final_lambda = state.lambda();
}

}  // namespace

ValidationReport validate_run_config(const RunConfig& config) {
  const bool spsa_based = config.algorithm == AlgorithmId::VarDiscounted ||
                          config.algorithm == AlgorithmId::Cpt;
  ValidationReport report =
      validate_schedules(config.schedules, spsa_based ? ScheduleMode::A4Prime : ScheduleMode::A4);

  const auto kind = config.mdp.setting().kind;
  switch (config.algorithm) {
    case AlgorithmId::VarDiscounted:
      report.require("environment is discounted", kind == SettingKind::Discounted);
      report.require("zeta3 in SA range (1/2 < p3 <= 1)",
                     config.schedules.zeta3.p > 0.5 && config.schedules.zeta3.p <= 1.0);
      break;
    case AlgorithmId::VarAverage: {
      report.require("environment is average-cost", kind == SettingKind::Average);
      const double p2 = config.schedules.zeta2.p, p3 = config.schedules.zeta3.p;
      report.require("critic ordering zeta2 = o(zeta3) (p2 > p3)", p2 > p3);
      report.require("zeta4 a constant multiple of zeta3 (p4 == p3)",
                     config.schedules.zeta4.p == p3);
      report.require("zeta3 in SA range (1/2 < p3 <= 1)", p3 > 0.5 && p3 <= 1.0);
      break;
    }
    case AlgorithmId::CvarSsp:
      report.require("environment is SSP", kind == SettingKind::Ssp);
      report.require("beta in (0,1)", config.beta > 0.0 && config.beta < 1.0);
      report.require("zeta3 in SA range (1/2 < p3 <= 1)",
                     config.schedules.zeta3.p > 0.5 && config.schedules.zeta3.p <= 1.0);
      break;
    case AlgorithmId::Cpt: {
      report.require("environment is discounted or SSP",
                     kind == SettingKind::Discounted || kind == SettingKind::Ssp);
      const double q = config.schedules.batch.q, pd = config.schedules.delta.p;
      report.require("CPT batch growth m_n^(aH/2) delta_n -> inf",
                     q * config.cpt_holder_alpha / 2.0 > pd);
      report.require("zeta3 in SA range (1/2 < p3 <= 1)",
                     config.schedules.zeta3.p > 0.5 && config.schedules.zeta3.p <= 1.0);
      try {
        config.cpt.validate();
        report.require("CPT model valid", true);
      } catch (const InvalidModel& e) {
        report.require("CPT model valid", false, e.what());
      }
      break;
    }
  }
  report.require("outer iterations nonnegative", config.outer_iterations >= 0);
  report.require("alpha finite", std::isfinite(config.alpha));
  report.require("lambda_max nonnegative", config.lambda_max >= 0);
  return report;
}

RunTrace run_variance_discounted(const RunConfig& config) {
  require_valid(config);
  const TabularMdp& mdp = config.mdp;
  const double gamma = mdp.setting().gamma;
  const int dim = mdp.n_states() * mdp.n_actions();

  PrimalDualState state(initial_theta(config, dim), config.lambda0, config_box(config, dim),
                        config.lambda_max);
  RngStream delta_rng(config.seed, "spsa-delta");
  RngStream sim_unpert(config.seed, "sim-unperturbed");
  RngStream sim_pert(config.seed, "sim-perturbed");

  SoftmaxPolicy policy(mdp.n_states(), mdp.n_actions());
  SoftmaxPolicy policy_pert(mdp.n_states(), mdp.n_actions());
  TabularCritic critic(mdp.n_states(), config.schedules.zeta3);
  TabularCritic critic_pert(mdp.n_states(), config.schedules.zeta3);

  RunTrace trace;
  trace.records.reserve(config.outer_iterations);
  for (std::int64_t n = 0; n < config.outer_iterations; ++n) {
    const double delta = config.schedules.delta(n);
    const std::int64_t m_n = config.schedules.batch(n);
    Perturbation pert{delta, bernoulli_perturbation(dim, delta_rng)};

    policy.set_theta(state.theta());
    std::vector<double> theta_plus(state.theta().begin(), state.theta().end());
    for (int i = 0; i < dim; ++i) theta_plus[i] += delta * pert.direction[i];
    policy_pert.set_theta(theta_plus);

    // Fresh critics and fresh trajectories from x0 every outer iteration; the
    // two chains draw from independent streams.
    critic.reset();
    critic_pert.reset();
    int x = config.x0;
    int x_pert = config.x0;
    for (std::int64_t m = 0; m < m_n; ++m) {
      const Transition t = simulate_step(mdp, policy, x, sim_unpert);
      critic.update(t, gamma);
      x = t.next_state;
      const Transition tp = simulate_step(mdp, policy_pert, x_pert, sim_pert);
      critic_pert.update(tp, gamma);
      x_pert = tp.next_state;
    }

    const double J_hat = critic.j(config.x0);
    const double U_hat = critic.u(config.x0);
    const GradientEstimate grad_J = spsa_one_sided(critic_pert.j(config.x0), J_hat, pert);
    const GradientEstimate grad_U = spsa_one_sided(critic_pert.u(config.x0), U_hat, pert);

    std::vector<double> grad_G(dim);
    for (int i = 0; i < dim; ++i)
      grad_G[i] = grad_U.vector[i] - 2.0 * J_hat * grad_J.vector[i];
    const double G_hat = U_hat - J_hat * J_hat;

    trace.records.push_back(
        make_record(n, state, J_hat, G_hat, grad_J.vector, grad_G, 2 * m_n));
    state.step(grad_J.vector, grad_G, G_hat, config.alpha, config.schedules);
  }
  finalize(trace, state);
  return trace;
}

RunTrace run_variance_average(const RunConfig& config) {
  require_valid(config);
  const TabularMdp& mdp = config.mdp;
  const int dim = mdp.n_states() * mdp.n_actions();

  PrimalDualState state(initial_theta(config, dim), config.lambda0, config_box(config, dim),
                        config.lambda_max);
  RngStream sim(config.seed, "sim");
  SoftmaxPolicy policy(mdp.n_states(), mdp.n_actions());
  DifferentialCritic critic(mdp.n_states(), config.schedules.zeta3, config.schedules.zeta4);

  RunTrace trace;
  trace.records.reserve(config.outer_iterations);
  std::vector<double> psi(dim), grad_J(dim), grad_G(dim);
  int x = config.x0;
  for (std::int64_t n = 0; n < config.outer_iterations; ++n) {
    policy.set_theta(state.theta());
    const Transition t = simulate_step(mdp, policy, x, sim);
    const auto [delta, epsilon] = critic.update(t);

    std::fill(psi.begin(), psi.end(), 0.0);
    policy.accumulate_score(t.state, t.action, psi);

    const double J_hat = critic.j_bar();
    const double eta_hat = critic.eta_bar();
    for (int i = 0; i < dim; ++i) {
      grad_J[i] = delta * psi[i];
      grad_G[i] = epsilon * psi[i] - 2.0 * J_hat * delta * psi[i];
    }
    const double G_hat = eta_hat - J_hat * J_hat;

    trace.records.push_back(make_record(n, state, J_hat, G_hat, grad_J, grad_G, 1));
    state.step(grad_J, grad_G, G_hat, config.alpha, config.schedules);
    x = t.next_state;
  }
  finalize(trace, state);
  return trace;
}

RunTrace run_cvar_ssp(const RunConfig& config) {
  require_valid(config);
  const TabularMdp& mdp = config.mdp;
  const int dim = mdp.n_states() * mdp.n_actions();

  PrimalDualState state(initial_theta(config, dim), config.lambda0, config_box(config, dim),
                        config.lambda_max);
  RngStream sim(config.seed, "sim");
  SoftmaxPolicy policy(mdp.n_states(), mdp.n_actions());

  RunTrace trace;
  trace.records.reserve(config.outer_iterations);
  std::vector<Trajectory> episodes;
  for (std::int64_t n = 0; n < config.outer_iterations; ++n) {
    const std::int64_t m_n = config.schedules.batch(n);
    policy.set_theta(state.theta());

    episodes.clear();
    episodes.reserve(m_n);
    VarCvarState risk(config.beta);  // fresh policy evaluation each iteration
    std::vector<double> psi_bar(dim, 0.0);
    double d_bar = 0;
    for (std::int64_t m = 0; m < m_n; ++m) {
      episodes.push_back(simulate_episode(mdp, policy, config.x0, sim, config.max_steps));
      const Trajectory& ep = episodes.back();
      if (!ep.terminated)
        throw TruncatedEpisodePresent("run_cvar_ssp: episode truncated at max_steps");
      risk.observe(ep.total_cost(), config.schedules.zeta3(m));
      d_bar += ep.total_cost();
      for (int i = 0; i < dim; ++i) psi_bar[i] += ep.score_sum[i];
    }
    d_bar /= static_cast<double>(m_n);
    for (auto& c : psi_bar) c /= static_cast<double>(m_n);

    std::vector<double> grad_J(dim);
    for (int i = 0; i < dim; ++i) grad_J[i] = d_bar * psi_bar[i];

    std::vector<double> grad_G(dim, 0.0);
    if (const auto cvar_grad = lr_cvar_gradient(episodes, policy, risk.var(), config.beta))
      grad_G = cvar_grad->vector;  // empty tail: skip the primal risk term

    const double G_hat = risk.cvar();
    trace.records.push_back(make_record(n, state, d_bar, G_hat, grad_J, grad_G, m_n));
    state.step(grad_J, grad_G, G_hat, config.alpha, config.schedules);
  }
  finalize(trace, state);
  return trace;
}

RunTrace run_cpt(const RunConfig& config) {
  require_valid(config);
  const TabularMdp& mdp = config.mdp;
  const bool episodic = mdp.setting().kind == SettingKind::Ssp;
  const double gamma = episodic ? 1.0 : mdp.setting().gamma;
  const int dim = mdp.n_states() * mdp.n_actions();

  // Return samples for a discounted environment come from fixed-horizon
  // trajectories; the default horizon makes the truncation error negligible.
  std::int64_t horizon = config.cpt_horizon;
  if (!episodic && horizon <= 0)
    horizon = static_cast<std::int64_t>(std::ceil(std::log(1e-10) / std::log(gamma)));

  PrimalDualState state(initial_theta(config, dim), config.lambda0, config_box(config, dim),
                        config.lambda_max);
  RngStream delta_rng(config.seed, "spsa-delta");
  RngStream sim_unpert(config.seed, "sim-unperturbed");
  RngStream sim_pert(config.seed, "sim-perturbed");
  SoftmaxPolicy policy(mdp.n_states(), mdp.n_actions());
  SoftmaxPolicy policy_pert(mdp.n_states(), mdp.n_actions());
  TabularCritic critic(mdp.n_states(), config.schedules.zeta3);
  TabularCritic critic_pert(mdp.n_states(), config.schedules.zeta3);

  const auto sample_returns = [&](const SoftmaxPolicy& pol, TabularCritic& cr, RngStream& rng,
                                  std::int64_t m_n, std::vector<double>& returns) {
    returns.clear();
    returns.reserve(m_n);
    for (std::int64_t m = 0; m < m_n; ++m) {
      if (episodic) {
        const Trajectory ep = simulate_episode(mdp, pol, config.x0, rng, config.max_steps);
        if (!ep.terminated)
          throw TruncatedEpisodePresent("run_cpt: episode truncated at max_steps");
        for (const auto& t : ep.transitions) cr.update_value(t, gamma);
        returns.push_back(ep.total_cost());
      } else {
        int x = config.x0;
        double ret = 0, weight = 1;
        for (std::int64_t s = 0; s < horizon; ++s) {
          const Transition t = simulate_step(mdp, pol, x, rng);
          cr.update_value(t, gamma);
          ret += weight * t.cost;
          weight *= gamma;
          x = t.next_state;
        }
        returns.push_back(ret);
      }
    }
  };

  RunTrace trace;
  trace.records.reserve(config.outer_iterations);
  std::vector<double> returns, returns_pert;
  for (std::int64_t n = 0; n < config.outer_iterations; ++n) {
    const double delta = config.schedules.delta(n);
    const std::int64_t m_n = config.schedules.batch(n);
    Perturbation pert{delta, bernoulli_perturbation(dim, delta_rng)};

    policy.set_theta(state.theta());
    std::vector<double> theta_plus(state.theta().begin(), state.theta().end());
    for (int i = 0; i < dim; ++i) theta_plus[i] += delta * pert.direction[i];
    policy_pert.set_theta(theta_plus);

    critic.reset();
    critic_pert.reset();
    sample_returns(policy, critic, sim_unpert, m_n, returns);
    sample_returns(policy_pert, critic_pert, sim_pert, m_n, returns_pert);

    const double C_hat = cpt_estimate(returns, config.cpt);
    const double C_hat_pert = cpt_estimate(returns_pert, config.cpt);
    const double J_hat = critic.j(config.x0);
    const GradientEstimate grad_J = spsa_one_sided(critic_pert.j(config.x0), J_hat, pert);
    const GradientEstimate grad_C = spsa_one_sided(C_hat_pert, C_hat, pert);

    trace.records.push_back(
        make_record(n, state, J_hat, C_hat, grad_J.vector, grad_C.vector, 2 * m_n));
    state.step(grad_J.vector, grad_C.vector, C_hat, config.alpha, config.schedules);
  }
  finalize(trace, state);
  return trace;
}

RunTrace run(const RunConfig& config) {
  switch (config.algorithm) {
    case AlgorithmId::VarDiscounted:
      return run_variance_discounted(config);
    case AlgorithmId::VarAverage:
      return run_variance_average(config);
    case AlgorithmId::CvarSsp:
      return run_cvar_ssp(config);
    case AlgorithmId::Cpt:
      return run_cpt(config);
  }
  throw InvalidModel("unknown algorithm id");
}

}  // namespace riskrl
