#include "riskrl/environments.hpp"

#include <cmath>

namespace riskrl {

TabularMdp random_mdp(std::uint64_t seed, int n_states, int n_actions, Setting setting) {
  if (n_states > 50) throw InvalidModel("random_mdp: guarded to 50 states");
  RngStream rng(seed, "random-mdp");
  const auto n = static_cast<std::size_t>(n_states);
  const auto na = static_cast<std::size_t>(n_actions);
  std::vector<double> transition(n * na * n);
  std::vector<double> cost(n * na);
  constexpr double kMix = 0.01;  // uniform mixing floor keeps every chain irreducible
  for (int x = 0; x < n_states; ++x) {
    for (int a = 0; a < n_actions; ++a) {
      double* row = transition.data() + (static_cast<std::size_t>(x) * na + a) * n;
      double sum = 0;
      for (int y = 0; y < n_states; ++y) {
        row[y] = rng.uniform01() + 1e-3;
        sum += row[y];
      }
      for (int y = 0; y < n_states; ++y)
        row[y] = (1.0 - kMix) * row[y] / sum + kMix / n_states;
      cost[static_cast<std::size_t>(x) * na + a] = rng.uniform01();
    }
  }
  return TabularMdp(n_states, n_actions, std::move(transition), std::move(cost), setting);
}

TabularMdp grid_ssp(int width, int height, double p_slip) {
  if (width * height > 100) throw InvalidModel("grid_ssp: guarded to 100 cells");
  if (!(p_slip >= 0.0 && p_slip <= 0.5)) throw InvalidModel("grid_ssp: p_slip must be in [0, 0.5]");
  const int n = width * height;
  const int goal = n - 1;
  constexpr int kActions = 4;  // up, down, left, right
  std::vector<double> transition(static_cast<std::size_t>(n) * kActions * n, 0.0);
  std::vector<double> cost(static_cast<std::size_t>(n) * kActions, 1.0);

  const auto cell = [&](int x, int y) { return y * width + x; };
  const auto move = [&](int x, int y, int action) {
    const int dx[] = {0, 0, -1, 1};
    const int dy[] = {-1, 1, 0, 0};
    const int nx = std::min(std::max(0, x + dx[action]), width - 1);
    const int ny = std::min(std::max(0, y + dy[action]), height - 1);
    return cell(nx, ny);
  };

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int s = cell(x, y);
      for (int a = 0; a < kActions; ++a) {
        double* row = transition.data() + (static_cast<std::size_t>(s) * kActions + a) * n;
        if (s == goal) {
          row[goal] = 1.0;
          cost[static_cast<std::size_t>(s) * kActions + a] = 0.0;
          continue;
        }
        row[move(x, y, a)] += 1.0 - p_slip;
        for (int b = 0; b < kActions; ++b) row[move(x, y, b)] += p_slip / kActions;
      }
    }
  }
  return TabularMdp(n, kActions, std::move(transition), std::move(cost), Setting::ssp(goal));
}

TabularMdp bandit_ssp(double cost_safe, double cost_risky_low, double cost_risky_high,
                      double p_high) {
  if (!(p_high > 0.0 && p_high < 1.0)) throw InvalidModel("bandit_ssp: p_high must be in (0,1)");
  // States: 0 decision, 1 low branch, 2 high branch, 3 absorbing.
  // The risky action costs nothing at the decision state and pays the branch
  // cost on the next (forced) step, so the episodic total keeps the intended
  // two-point law.
  const int n = 4, na = 2, absorbing = 3;
  std::vector<double> transition(static_cast<std::size_t>(n) * na * n, 0.0);
  std::vector<double> cost(static_cast<std::size_t>(n) * na, 0.0);
  const auto row = [&](int x, int a) {
    return transition.data() + (static_cast<std::size_t>(x) * na + a) * n;
  };

  row(0, 0)[absorbing] = 1.0;  // safe
  cost[0 * na + 0] = cost_safe;
  row(0, 1)[1] = 1.0 - p_high;  // risky
  row(0, 1)[2] = p_high;

  for (int a = 0; a < na; ++a) {
    row(1, a)[absorbing] = 1.0;
    cost[1 * na + a] = cost_risky_low;
    row(2, a)[absorbing] = 1.0;
    cost[2 * na + a] = cost_risky_high;
    row(absorbing, a)[absorbing] = 1.0;
  }
  return TabularMdp(n, na, std::move(transition), std::move(cost), Setting::ssp(absorbing));
}

TabularMdp two_stream(std::pair<double, double> costs_a, std::pair<double, double> costs_b) {
  // Deterministic 2-state alternator; the action picks which cost stream is
  // observed while the dynamics stay fixed.
  const int n = 2, na = 2;
  std::vector<double> transition(static_cast<std::size_t>(n) * na * n, 0.0);
  std::vector<double> cost(static_cast<std::size_t>(n) * na, 0.0);
  for (int a = 0; a < na; ++a) {
    transition[(0 * na + a) * static_cast<std::size_t>(n) + 1] = 1.0;
    transition[(1 * na + a) * static_cast<std::size_t>(n) + 0] = 1.0;
  }
  cost[0 * na + 0] = costs_a.first;
  cost[1 * na + 0] = costs_a.second;
  cost[0 * na + 1] = costs_b.first;
  cost[1 * na + 1] = costs_b.second;
  return TabularMdp(n, na, std::move(transition), std::move(cost), Setting::average());
}

TabularMdp make_env(const EnvSpec& spec) {
  return std::visit(
      [](const auto& s) -> TabularMdp {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, RandomMdpSpec>) {
          return random_mdp(s.seed, s.n_states, s.n_actions, s.setting);
        } else if constexpr (std::is_same_v<T, GridSspSpec>) {
          return grid_ssp(s.width, s.height, s.p_slip);
        } else if constexpr (std::is_same_v<T, BanditSspSpec>) {
          return bandit_ssp(s.cost_safe, s.cost_risky_low, s.cost_risky_high, s.p_high);
        } else {
          return two_stream(s.costs_a, s.costs_b);
        }
      },
      spec);
}

}  // namespace riskrl
