#include "riskrl/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

namespace riskrl::oracle {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kResidualTol = 1e-8;

void check_size(const TabularMdp& mdp) {
  if (mdp.n_states() > kMaxOracleStates)
    throw InvalidModel("oracle dense solves are guarded to " +
                       std::to_string(kMaxOracleStates) + " states");
}

/// Policy-averaged kernel P^theta, cost k^theta and squared cost (k^2)^theta.
struct PolicyAveraged {
  MatrixXd P;       // P(x, x')
  VectorXd k;       // k^theta(x)
  VectorXd k2;      // sum_a mu(a|x) k(x,a)^2
  MatrixXd probs;   // mu(a|x), n_states x n_actions
};

PolicyAveraged policy_average(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
  const int n = mdp.n_states();
  const int na = mdp.n_actions();
  PolicyAveraged out;
  out.P = MatrixXd::Zero(n, n);
  out.k = VectorXd::Zero(n);
  out.k2 = VectorXd::Zero(n);
  out.probs = MatrixXd::Zero(n, na);
  for (int x = 0; x < n; ++x) {
    const auto mu = policy.action_probabilities(x);
    for (int a = 0; a < na; ++a) {
      out.probs(x, a) = mu[a];
      const double kxa = mdp.cost(x, a);
      out.k(x) += mu[a] * kxa;
      out.k2(x) += mu[a] * kxa * kxa;
      const auto row = mdp.transition_row(x, a);
      for (int y = 0; y < n; ++y) out.P(x, y) += mu[a] * row[y];
    }
  }
  return out;
}

VectorXd solve_checked(const MatrixXd& A, const VectorXd& b, const char* what) {
  VectorXd sol = A.partialPivLu().solve(b);
  const double scale = std::max(1.0, b.lpNorm<Eigen::Infinity>());
  const double residual = (A * sol - b).lpNorm<Eigen::Infinity>();
  if (!sol.allFinite() || residual > kResidualTol * scale)
    throw SingularSystem(std::string(what) + ": linear solve failed (residual " +
                         std::to_string(residual) + ")");
  return sol;
}

MatrixXd solve_checked(const MatrixXd& A, const MatrixXd& B, const char* what) {
  MatrixXd sol = A.partialPivLu().solve(B);
  const double scale = std::max(1.0, B.lpNorm<Eigen::Infinity>());
  const double residual = (A * sol - B).lpNorm<Eigen::Infinity>();
  if (!sol.allFinite() || residual > kResidualTol * scale)
    throw SingularSystem(std::string(what) + ": linear solve failed (residual " +
                         std::to_string(residual) + ")");
  return sol;
}

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void require_setting(const TabularMdp& mdp, SettingKind kind, const char* what) {
  if (mdp.setting().kind != kind) throw InvalidModel(std::string(what) + ": wrong MDP setting");
}

/// W(x,a) = k(x,a)^2 + gamma^2 sum_x' P U(x') + 2 gamma k(x,a) sum_x' P J(x').
std::vector<double> w_table(const TabularMdp& mdp, const VectorXd& J, const VectorXd& U) {
  const int n = mdp.n_states();
  const int na = mdp.n_actions();
  const double gamma = mdp.setting().gamma;
  std::vector<double> W(static_cast<std::size_t>(n) * na, 0.0);
  for (int x = 0; x < n; ++x) {
    for (int a = 0; a < na; ++a) {
      const auto row = mdp.transition_row(x, a);
      double pu = 0, pj = 0;
      for (int y = 0; y < n; ++y) {
        pu += row[y] * U(y);
        pj += row[y] * J(y);
      }
      const double kxa = mdp.cost(x, a);
      W[static_cast<std::size_t>(x) * na + a] = kxa * kxa + gamma * gamma * pu + 2 * gamma * kxa * pj;
    }
  }
  return W;
}

std::vector<double> q_table_discounted(const TabularMdp& mdp, const VectorXd& J) {
  const int n = mdp.n_states();
  const int na = mdp.n_actions();
  const double gamma = mdp.setting().gamma;
  std::vector<double> Q(static_cast<std::size_t>(n) * na, 0.0);
  for (int x = 0; x < n; ++x) {
    for (int a = 0; a < na; ++a) {
      const auto row = mdp.transition_row(x, a);
      double pj = 0;
      for (int y = 0; y < n; ++y) pj += row[y] * J(y);
      Q[static_cast<std::size_t>(x) * na + a] = mdp.cost(x, a) + gamma * pj;
    }
  }
  return Q;
}

}  // namespace

std::vector<double> solve_value(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
  require_setting(mdp, SettingKind::Discounted, "solve_value");
  check_size(mdp);
  const auto avg = policy_average(mdp, policy);
  const int n = mdp.n_states();
  const MatrixXd A = MatrixXd::Identity(n, n) - mdp.setting().gamma * avg.P;
  return to_std(solve_checked(A, avg.k, "solve_value"));
}

SquareValue solve_square_value(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
  require_setting(mdp, SettingKind::Discounted, "solve_square_value");
  check_size(mdp);
  const auto avg = policy_average(mdp, policy);
  const int n = mdp.n_states();
  const double gamma = mdp.setting().gamma;
  const MatrixXd A = MatrixXd::Identity(n, n) - gamma * avg.P;
  const VectorXd J = solve_checked(A, avg.k, "solve_square_value");
  // U = (I - gamma^2 P)^{-1} (K k + 2 gamma K P J), with K = diag(k^theta).
  // The policy-averaged forcing term is k2 + 2 gamma * avg over actions of
  // k(x,a) P(.|x,a) J, which differs from k^theta * (P^theta J) when costs
  // vary across actions; build it action-wise.
  VectorXd forcing = avg.k2;
  for (int x = 0; x < n; ++x) {
    double cross = 0;
    for (int a = 0; a < mdp.n_actions(); ++a) {
      const auto row = mdp.transition_row(x, a);
      double pj = 0;
      for (int y = 0; y < n; ++y) pj += row[y] * J(y);
      cross += avg.probs(x, a) * mdp.cost(x, a) * pj;
    }
    forcing(x) += 2 * gamma * cross;
  }
  const MatrixXd A2 = MatrixXd::Identity(n, n) - gamma * gamma * avg.P;
  const VectorXd U = solve_checked(A2, forcing, "solve_square_value");
  return SquareValue{to_std(U), w_table(mdp, J, U)};
}

std::vector<double> variance_discounted(std::span<const double> J, std::span<const double> U) {
  if (J.size() != U.size()) throw DimensionMismatch("variance_discounted: J and U differ in length");
  std::vector<double> g(J.size());
  for (std::size_t i = 0; i < J.size(); ++i) g[i] = U[i] - J[i] * J[i];
  return g;
}

DiscountedSolution solve_discounted(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
  DiscountedSolution out;
  out.J = solve_value(mdp, policy);
  auto sq = solve_square_value(mdp, policy);
  out.U = std::move(sq.U);
  out.W = std::move(sq.W);
  out.variance = variance_discounted(out.J, out.U);
  Eigen::Map<const VectorXd> j(out.J.data(), static_cast<Eigen::Index>(out.J.size()));
  out.Q = q_table_discounted(mdp, j);
  return out;
}

void bellman_operator_discounted(const TabularMdp& mdp, const SoftmaxPolicy& policy,
                                 std::span<const double> J_in, std::span<const double> U_in,
                                 std::span<double> J_out, std::span<double> U_out) {
  require_setting(mdp, SettingKind::Discounted, "bellman_operator_discounted");
  const int n = mdp.n_states();
  const double gamma = mdp.setting().gamma;
  if (J_in.size() != static_cast<std::size_t>(n) || U_in.size() != J_in.size() ||
      J_out.size() != J_in.size() || U_out.size() != J_in.size())
    throw DimensionMismatch("bellman_operator_discounted: vector sizes");
  for (int x = 0; x < n; ++x) {
    const auto mu = policy.action_probabilities(x);
    double tj = 0, tu = 0;
    for (int a = 0; a < mdp.n_actions(); ++a) {
      const double kxa = mdp.cost(x, a);
      const auto row = mdp.transition_row(x, a);
      double pj = 0, pu = 0;
      for (int y = 0; y < n; ++y) {
        pj += row[y] * J_in[y];
        pu += row[y] * U_in[y];
      }
      tj += mu[a] * (kxa + gamma * pj);
      tu += mu[a] * (kxa * kxa + 2 * gamma * kxa * pj + gamma * gamma * pu);
    }
    J_out[x] = tj;
    U_out[x] = tu;
  }
}

AverageSolution average_cost_solution(const TabularMdp& mdp, const SoftmaxPolicy& policy,
                                      int ref_state) {
  require_setting(mdp, SettingKind::Average, "average_cost_solution");
  check_size(mdp);
  const int n = mdp.n_states();
  const int na = mdp.n_actions();
  const auto avg = policy_average(mdp, policy);

  // Invariant distribution: d' P = d', sum d = 1; the normalization row
  // replaces the last balance equation.
  MatrixXd A = avg.P.transpose() - MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  VectorXd b = VectorXd::Zero(n);
  b(n - 1) = 1.0;
  VectorXd d;
  try {
    d = solve_checked(A, b, "average_cost_solution/stationary");
  } catch (const SingularSystem&) {
    throw ReducibleChain("policy-induced chain has no unique invariant distribution");
  }
  const double invariance = (avg.P.transpose() * d - d).lpNorm<Eigen::Infinity>();
  if (d.minCoeff() < -1e-12 || invariance > 1e-10)
    throw ReducibleChain("policy-induced chain has no unique invariant distribution");
  for (int x = 0; x < n; ++x)
    if (d(x) <= 1e-12) throw ReducibleChain("invariant distribution not strictly positive");

  AverageSolution out;
  out.state_stationary = to_std(d);
  out.stationary.assign(static_cast<std::size_t>(n) * na, 0.0);
  for (int x = 0; x < n; ++x)
    for (int a = 0; a < na; ++a)
      out.stationary[static_cast<std::size_t>(x) * na + a] = d(x) * avg.probs(x, a);

  out.avg_cost = d.dot(avg.k);
  out.avg_square_cost = d.dot(avg.k2);
  out.per_period_variance = out.avg_square_cost - out.avg_cost * out.avg_cost;

  // Poisson systems (I - P) V = k - J 1 and (I - P) U = k2 - eta 1, each with
  // the ref-state row replaced by the pin V(ref) = 0. The replaced equation
  // is implied by stationarity of d.
  MatrixXd Ap = MatrixXd::Identity(n, n) - avg.P;
  Ap.row(ref_state).setZero();
  Ap(ref_state, ref_state) = 1.0;
  VectorXd bv = avg.k - VectorXd::Constant(n, out.avg_cost);
  bv(ref_state) = 0.0;
  VectorXd bu = avg.k2 - VectorXd::Constant(n, out.avg_square_cost);
  bu(ref_state) = 0.0;
  const VectorXd V = solve_checked(Ap, bv, "average_cost_solution/poisson-V");
  const VectorXd U = solve_checked(Ap, bu, "average_cost_solution/poisson-U");
  out.V = to_std(V);
  out.U = to_std(U);

  out.Q.assign(static_cast<std::size_t>(n) * na, 0.0);
  out.W.assign(static_cast<std::size_t>(n) * na, 0.0);
  for (int x = 0; x < n; ++x) {
    for (int a = 0; a < na; ++a) {
      const auto row = mdp.transition_row(x, a);
      double pv = 0, pu = 0;
      for (int y = 0; y < n; ++y) {
        pv += row[y] * V(y);
        pu += row[y] * U(y);
      }
      const double kxa = mdp.cost(x, a);
      out.Q[static_cast<std::size_t>(x) * na + a] = kxa - out.avg_cost + pv;
      out.W[static_cast<std::size_t>(x) * na + a] = kxa * kxa - out.avg_square_cost + pu;
    }
  }
  return out;
}

std::vector<double> discounted_occupancy(const TabularMdp& mdp, const SoftmaxPolicy& policy,
                                         int x0, double factor) {
  check_size(mdp);
  if (!(factor > 0.0 && factor < 1.0))
    throw InvalidModel("discounted_occupancy: factor must lie in (0,1)");
  const auto avg = policy_average(mdp, policy);
  const int n = mdp.n_states();
  const MatrixXd A = MatrixXd::Identity(n, n) - factor * avg.P.transpose();
  VectorXd e = VectorXd::Zero(n);
  e(x0) = 1.0;
  return to_std(solve_checked(A, e, "discounted_occupancy"));
}

DiscountedGradients exact_grad_discounted(const TabularMdp& mdp, const SoftmaxPolicy& policy,
                                          int x0) {
  require_setting(mdp, SettingKind::Discounted, "exact_grad_discounted");
  check_size(mdp);
  const int n = mdp.n_states();
  const int na = mdp.n_actions();
  const int d = n * na;
  const double gamma = mdp.setting().gamma;
  const auto avg = policy_average(mdp, policy);

  const MatrixXd A1 = MatrixXd::Identity(n, n) - gamma * avg.P;
  const VectorXd J = solve_checked(A1, avg.k, "exact_grad_discounted/J");
  const auto sq = solve_square_value(mdp, policy);
  Eigen::Map<const VectorXd> U(sq.U.data(), n);
  const auto Q = q_table_discounted(mdp, J);

  // Row x of G_J is sum_a mu(a|x) score(x,a) Q(x,a); the score's block
  // structure collapses it to mu(b|x) (Q(x,b) - J(x)) on state x's block.
  MatrixXd G_J = MatrixXd::Zero(n, d);
  MatrixXd G_U = MatrixXd::Zero(n, d);
  for (int x = 0; x < n; ++x) {
    for (int b = 0; b < na; ++b) {
      const int col = x * na + b;
      G_J(x, col) = avg.probs(x, b) * (Q[static_cast<std::size_t>(x) * na + b] - J(x));
      G_U(x, col) = avg.probs(x, b) * (sq.W[static_cast<std::size_t>(x) * na + b] - U(x));
    }
  }

  // grad J at every state: (I - gamma P)^{-1} G_J; needed in full because
  // grad U pulls in grad J(x') at all successor states.
  const MatrixXd gradJ_all = solve_checked(A1, G_J, "exact_grad_discounted/gradJ");

  MatrixXd H = MatrixXd::Zero(n, d);
  for (int x = 0; x < n; ++x) {
    for (int a = 0; a < na; ++a) {
      const double w = avg.probs(x, a) * mdp.cost(x, a);
      if (w == 0.0) continue;
      const auto row = mdp.transition_row(x, a);
      for (int y = 0; y < n; ++y) {
        if (row[y] == 0.0) continue;
        H.row(x) += w * row[y] * gradJ_all.row(y);
      }
    }
  }

  const MatrixXd A2 = MatrixXd::Identity(n, n) - gamma * gamma * avg.P;
  const MatrixXd gradU_all = solve_checked(A2, MatrixXd(G_U + 2 * gamma * H),
                                           "exact_grad_discounted/gradU");

  DiscountedGradients out;
  out.grad_J = {gradJ_all.row(x0).begin(), gradJ_all.row(x0).end()};
  out.grad_U = {gradU_all.row(x0).begin(), gradU_all.row(x0).end()};
  return out;
}

AverageGradients exact_grad_average(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
  const auto sol = average_cost_solution(mdp, policy);
  const int n = mdp.n_states();
  const int na = mdp.n_actions();
  AverageGradients out;
  out.grad_J.assign(static_cast<std::size_t>(n) * na, 0.0);
  out.grad_eta.assign(static_cast<std::size_t>(n) * na, 0.0);
  const auto probs = [&](int x) { return policy.action_probabilities(x); };
  for (int x = 0; x < n; ++x) {
    const auto mu = probs(x);
    const double dx = sol.state_stationary[x];
    for (int b = 0; b < na; ++b) {
      const std::size_t i = static_cast<std::size_t>(x) * na + b;
      out.grad_J[i] = dx * mu[b] * (sol.Q[i] - sol.V[x]);
      out.grad_eta[i] = dx * mu[b] * (sol.W[i] - sol.U[x]);
    }
  }
  return out;
}

namespace {

/// Transient-state linear solve for an SSP: J_t = (I - P_tt)^{-1} k_t.
struct SspSolve {
  std::vector<int> transient;       // state ids in solve order
  std::vector<int> position;        // state id -> index in transient, -1 for absorbing
  VectorXd J;                       // over transient states
};

SspSolve ssp_value_solve(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
  require_setting(mdp, SettingKind::Ssp, "ssp solve");
  check_size(mdp);
  const int n = mdp.n_states();
  const int absorbing = mdp.setting().absorbing_state;
  SspSolve out;
  out.position.assign(n, -1);
  for (int x = 0; x < n; ++x) {
    if (x == absorbing) continue;
    out.position[x] = static_cast<int>(out.transient.size());
    out.transient.push_back(x);
  }
  const int m = static_cast<int>(out.transient.size());
  const auto avg = policy_average(mdp, policy);
  MatrixXd A = MatrixXd::Identity(m, m);
  VectorXd b = VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    const int x = out.transient[i];
    b(i) = avg.k(x);
    for (int j = 0; j < m; ++j) A(i, j) -= avg.P(x, out.transient[j]);
  }
  out.J = solve_checked(A, b, "ssp_expected_cost");
  return out;
}

}  // namespace

std::vector<double> ssp_expected_cost(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
  const auto solve = ssp_value_solve(mdp, policy);
  std::vector<double> J(mdp.n_states(), 0.0);
  for (std::size_t i = 0; i < solve.transient.size(); ++i) J[solve.transient[i]] = solve.J(i);
  return J;
}

double ssp_expected_hitting_time(const TabularMdp& mdp, const SoftmaxPolicy& policy, int x0) {
  require_setting(mdp, SettingKind::Ssp, "ssp_expected_hitting_time");
  // Unit-cost copy of the MDP: expected total cost becomes E[tau].
  const int n = mdp.n_states();
  const int na = mdp.n_actions();
  std::vector<double> transition(static_cast<std::size_t>(n) * na * n);
  std::vector<double> cost(static_cast<std::size_t>(n) * na, 1.0);
  for (int x = 0; x < n; ++x)
    for (int a = 0; a < na; ++a) {
      const auto row = mdp.transition_row(x, a);
      std::copy(row.begin(), row.end(),
                transition.begin() + (static_cast<std::size_t>(x) * na + a) * n);
      if (x == mdp.setting().absorbing_state) cost[static_cast<std::size_t>(x) * na + a] = 0.0;
    }
  const TabularMdp unit(n, na, std::move(transition), std::move(cost), mdp.setting());
  return ssp_expected_cost(unit, policy)[x0];
}

std::vector<double> exact_grad_ssp(const TabularMdp& mdp, const SoftmaxPolicy& policy, int x0) {
  const auto solve = ssp_value_solve(mdp, policy);
  const int n = mdp.n_states();
  const int na = mdp.n_actions();
  const int m = static_cast<int>(solve.transient.size());
  const auto avg = policy_average(mdp, policy);

  // Undiscounted transient occupancy rho' = e_{x0}' + rho' P_tt.
  MatrixXd A = MatrixXd::Identity(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) A(i, j) -= avg.P(solve.transient[j], solve.transient[i]);
  VectorXd e = VectorXd::Zero(m);
  if (solve.position[x0] >= 0) e(solve.position[x0]) = 1.0;
  const VectorXd rho = solve_checked(A, e, "exact_grad_ssp/occupancy");

  std::vector<double> grad(static_cast<std::size_t>(n) * na, 0.0);
  for (int i = 0; i < m; ++i) {
    const int x = solve.transient[i];
    const auto mu = policy.action_probabilities(x);
    for (int b = 0; b < na; ++b) {
      const auto row = mdp.transition_row(x, b);
      double pj = 0;
      for (int j = 0; j < m; ++j) pj += row[solve.transient[j]] * solve.J(j);
      const double q = mdp.cost(x, b) + pj;
      grad[static_cast<std::size_t>(x) * na + b] = rho(i) * mu[b] * (q - solve.J(i));
    }
  }
  return grad;
}

double CostDistribution::expectation() const {
  double e = 0;
  for (std::size_t i = 0; i < values.size(); ++i) e += values[i] * probabilities[i];
  return e;
}

CostDistribution ssp_cost_distribution(const TabularMdp& mdp, const SoftmaxPolicy& policy,
                                       int x0, double mass_tol, int max_depth) {
  require_setting(mdp, SettingKind::Ssp, "ssp_cost_distribution");
  constexpr double kCostQuantum = 1e-9;
  constexpr std::size_t kMaxFrontier = 1 << 20;
  const int absorbing = mdp.setting().absorbing_state;
  const int n = mdp.n_states();
  const int na = mdp.n_actions();

  // Frontier keyed by (state, quantized accumulated cost) so paths with equal
  // cost merge instead of fragmenting the enumeration.
  std::map<std::pair<int, std::int64_t>, double> frontier;
  std::map<std::int64_t, double> absorbed;
  const auto quantize = [&](double c) {
    return static_cast<std::int64_t>(std::llround(c / kCostQuantum));
  };

  if (x0 == absorbing) {
    return CostDistribution{{0.0}, {1.0}, 0.0};
  }
  frontier[{x0, 0}] = 1.0;

  for (int depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
    std::map<std::pair<int, std::int64_t>, double> next;
    for (const auto& [key, mass] : frontier) {
      const auto [x, cost_key] = key;
      const auto mu = policy.action_probabilities(x);
      for (int a = 0; a < na; ++a) {
        if (mu[a] == 0.0) continue;
        const double kxa = mdp.cost(x, a);
        const std::int64_t new_cost = cost_key + quantize(kxa);
        const auto row = mdp.transition_row(x, a);
        for (int y = 0; y < n; ++y) {
          const double p = mu[a] * row[y];
          if (p == 0.0) continue;
          if (y == absorbing) {
            absorbed[new_cost] += mass * p;
          } else {
            next[{y, new_cost}] += mass * p;
          }
        }
      }
    }
    frontier = std::move(next);
    if (frontier.size() > kMaxFrontier)
      throw MassNotCaptured("ssp_cost_distribution: enumeration frontier exploded");
  }

  double residual = 0;
  for (const auto& [key, mass] : frontier) residual += mass;
  if (residual >= mass_tol)
    throw MassNotCaptured("ssp_cost_distribution: unabsorbed mass " + std::to_string(residual) +
                          " >= tolerance " + std::to_string(mass_tol));

  CostDistribution out;
  out.residual_mass = residual;
  out.values.reserve(absorbed.size());
  out.probabilities.reserve(absorbed.size());
  for (const auto& [cost_key, mass] : absorbed) {
    out.values.push_back(static_cast<double>(cost_key) * kCostQuantum);
    out.probabilities.push_back(mass);
  }
  return out;
}

}  // namespace riskrl::oracle
