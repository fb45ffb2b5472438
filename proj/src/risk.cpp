#include "riskrl/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "riskrl/errors.hpp"

namespace riskrl {
namespace {

double positive_part(double x) { return x > 0 ? x : 0.0; }

/// Rockafellar-Uryasev objective over a weighted sample/support.
double ru_value(double xi, std::span<const double> values, std::span<const double> weights,
                double beta) {
  double tail = 0;
  for (std::size_t i = 0; i < values.size(); ++i) tail += weights[i] * positive_part(values[i] - xi);
  return xi + tail / (1.0 - beta);
}

void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidModel("beta must lie in (0,1)");
}

}  // namespace

VarCvarState::VarCvarState(double beta) : beta_(beta) { check_beta(beta); }

void VarCvarState::observe(double sample, double zeta3) {
  const double xi_prev = xi_;
  const double indicator = sample >= xi_prev ? 1.0 : 0.0;
  xi_ = xi_prev - zeta3 * (1.0 - indicator / (1.0 - beta_));
  const double v = xi_prev + positive_part(sample - xi_prev) / (1.0 - beta_);
  ++m_;
  c_ -= (c_ - v) / static_cast<double>(m_);
}

void VarCvarState::reset() {
  xi_ = 0;
  c_ = 0;
  m_ = 0;
}

VarCvar batch_var_cvar(std::span<const double> samples, double beta) {
  check_beta(beta);
  if (samples.empty()) throw EmptySample("batch_var_cvar: empty sample");
  const double w = 1.0 / static_cast<double>(samples.size());
  std::vector<double> weights(samples.size(), w);

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  // Leftmost minimizer of the RU objective over the sample support.
  double best_xi = sorted.front();
  double best_v = ru_value(best_xi, samples, weights, beta);
  for (const double xi : sorted) {
    const double v = ru_value(xi, samples, weights, beta);
    if (v < best_v - 1e-15 * std::max(1.0, std::abs(best_v))) {
      best_v = v;
      best_xi = xi;
    }
  }
  return {best_xi, best_v};
}

VarCvar exact_var_cvar(const DiscreteDistribution& dist, double beta) {
  check_beta(beta);
  if (dist.values.empty()) throw EmptySample("exact_var_cvar: empty distribution");
  if (dist.values.size() != dist.probabilities.size())
    throw InvalidDistribution("exact_var_cvar: values/probabilities size mismatch");

  std::vector<std::size_t> order(dist.values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return dist.values[a] < dist.values[b]; });

  // Left-continuous quantile: first support point with CDF >= beta.
  double cdf = 0;
  double xi = dist.values[order.back()];
  for (const std::size_t i : order) {
    cdf += dist.probabilities[i];
    if (cdf >= beta) {
      xi = dist.values[i];
      break;
    }
  }
  return {xi, ru_value(xi, dist.values, dist.probabilities, beta)};
}

double default_tversky_weight(double p, double exponent) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double pe = std::pow(p, exponent);
  const double qe = std::pow(1.0 - p, exponent);
  return pe / std::pow(pe + qe, 1.0 / exponent);
}

CptModel CptModel::identity() {
  CptModel m;
  m.u_plus = [](double x) { return positive_part(x); };
  m.u_minus = [](double x) { return positive_part(-x); };
  m.w_plus = [](double p) { return p; };
  m.w_minus = [](double p) { return p; };
  return m;
}

CptModel CptModel::tversky(double exponent) {
  CptModel m = identity();
  m.w_plus = [exponent](double p) { return default_tversky_weight(p, exponent); };
  m.w_minus = [exponent](double p) { return default_tversky_weight(p, exponent); };
  return m;
}

void CptModel::validate(int grid_points) const {
  if (!u_plus || !u_minus || !w_plus || !w_minus)
    throw InvalidModel("CptModel: missing utility or weight function");
  const auto check_weight = [&](const std::function<double(double)>& w, const char* name) {
    if (std::abs(w(0.0)) > 1e-12 || std::abs(w(1.0) - 1.0) > 1e-12)
      throw InvalidModel(std::string("CptModel: ") + name + " endpoints must be 0 and 1");
    double prev = 0;
    for (int i = 1; i <= grid_points; ++i) {
      const double p = static_cast<double>(i) / grid_points;
      const double v = w(p);
      if (v < prev - 1e-12)
        throw InvalidModel(std::string("CptModel: ") + name + " must be nondecreasing");
      prev = v;
    }
  };
  check_weight(w_plus, "w_plus");
  check_weight(w_minus, "w_minus");

  const double span = 50.0;
  double prev_plus = 0, prev_minus_at = 0;
  for (int i = 0; i <= grid_points; ++i) {
    const double x = -span + 2 * span * static_cast<double>(i) / grid_points;
    const double up = u_plus(x);
    const double um = u_minus(x);
    if (up < 0 || um < 0) throw InvalidModel("CptModel: utilities must be nonnegative");
    if (x <= 0 && up > 1e-12) throw InvalidModel("CptModel: u_plus must vanish for x <= 0");
    if (x >= 0 && um > 1e-12) throw InvalidModel("CptModel: u_minus must vanish for x >= 0");
    if (x > 0 && up < prev_plus - 1e-12)
      throw InvalidModel("CptModel: u_plus must be nondecreasing");
    if (x > 0) prev_plus = up;
    if (x < 0 && i > 0 && um > prev_minus_at + 1e-12)
      throw InvalidModel("CptModel: u_minus must be nonincreasing in x");
    if (x < 0) prev_minus_at = um;
  }
}

double cpt_estimate(std::span<const double> samples, const CptModel& model) {
  if (samples.empty()) throw EmptySample("cpt_estimate: empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());

  double c_plus = 0, c_minus = 0;
  for (std::size_t idx = 0; idx < sorted.size(); ++idx) {
    const double i = static_cast<double>(idx) + 1;  // order statistic X_[i], 1-based
    c_plus += model.u_plus(sorted[idx]) *
              (model.w_plus((n + 1 - i) / n) - model.w_plus((n - i) / n));
    c_minus += model.u_minus(sorted[idx]) *
               (model.w_minus(i / n) - model.w_minus((i - 1) / n));
  }
  return c_plus - c_minus;
}

namespace {

/// Tail integral of w(P(Y > z)) dz for a discrete nonnegative Y given as
/// (value, prob) atoms; zero-valued atoms contribute nothing.
double distorted_tail_integral(std::vector<std::pair<double, double>> atoms,
                               const std::function<double(double)>& w) {
  std::sort(atoms.begin(), atoms.end());
  // P(Y > z) is a right-continuous step function; between consecutive
  // distinct positive values y_{j-1} < z < y_j the tail equals the mass at
  // or above y_j.
  double integral = 0;
  double prev_y = 0;
  // Suffix masses over distinct values.
  std::vector<std::pair<double, double>> distinct;  // (value, mass)
  for (const auto& [y, p] : atoms) {
    if (y <= 0 || p == 0) continue;
    if (!distinct.empty() && distinct.back().first == y)
      distinct.back().second += p;
    else
      distinct.emplace_back(y, p);
  }
  double suffix = 0;
  std::vector<double> tail_at(distinct.size());
  for (std::size_t j = distinct.size(); j-- > 0;) {
    suffix += distinct[j].second;
    tail_at[j] = suffix;
  }
  for (std::size_t j = 0; j < distinct.size(); ++j) {
    integral += (distinct[j].first - prev_y) * w(tail_at[j]);
    prev_y = distinct[j].first;
  }
  return integral;
}

}  // namespace

double cpt_exact(const DiscreteDistribution& dist, const CptModel& model) {
  if (dist.values.empty()) throw InvalidDistribution("cpt_exact: empty distribution");
  if (dist.values.size() != dist.probabilities.size())
    throw InvalidDistribution("cpt_exact: values/probabilities size mismatch");
  double total = 0;
  for (const double p : dist.probabilities) {
    if (p < 0) throw InvalidDistribution("cpt_exact: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidDistribution("cpt_exact: probabilities must sum to 1");

  std::vector<std::pair<double, double>> plus, minus;
  plus.reserve(dist.values.size());
  minus.reserve(dist.values.size());
  for (std::size_t i = 0; i < dist.values.size(); ++i) {
    plus.emplace_back(model.u_plus(dist.values[i]), dist.probabilities[i]);
    minus.emplace_back(model.u_minus(dist.values[i]), dist.probabilities[i]);
  }
  return distorted_tail_integral(std::move(plus), model.w_plus) -
         distorted_tail_integral(std::move(minus), model.w_minus);
}

}  // namespace riskrl
