#include "riskrl/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "riskrl/errors.hpp"

namespace riskrl {

BoxConstraint BoxConstraint::symmetric(int dim, double half_width) {
  BoxConstraint box;
  box.lower.assign(dim, -half_width);
  box.upper.assign(dim, half_width);
  return box;
}

std::vector<double> project_box(std::span<const double> v, const BoxConstraint& box) {
  if (v.size() != box.lower.size() || box.lower.size() != box.upper.size())
    throw DimensionMismatch("project_box: dimension mismatch");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = std::min(std::max(box.lower[i], v[i]), box.upper[i]);
  return out;
}

std::int64_t BatchSchedule::operator()(std::int64_t n) const {
  const auto grown = static_cast<std::int64_t>(std::ceil(c * std::pow(static_cast<double>(n), q)));
  return std::max<std::int64_t>(1, m0 + grown);
}

void ValidationReport::require(std::string name, bool pass, std::string detail) {
  checks.push_back({std::move(name), pass, std::move(detail)});
}

bool ValidationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

std::string ValidationReport::failures() const {
  std::string out;
  for (const auto& c : checks) {
    if (c.pass) continue;
    if (!out.empty()) out += ", ";
    out += c.name;
  }
  return out;
}

ValidationReport validate_schedules(const Schedules& s, ScheduleMode mode) {
  ValidationReport report;
  const double p1 = s.zeta1.p, p2 = s.zeta2.p, pd = s.delta.p;

  report.require("positive coefficients",
                 s.zeta1.c > 0 && s.zeta2.c > 0 && s.zeta3.c > 0 && s.zeta4.c > 0 && s.delta.c > 0,
                 "all power-law coefficients must be positive");
  report.require("zeta1 divergent (p1 <= 1)", p1 <= 1.0);
  report.require("zeta2 divergent (p2 <= 1)", p2 <= 1.0);
  report.require("zeta1 square-summable (p1 > 1/2)", p1 > 0.5);
  report.require("zeta2 square-summable (p2 > 1/2)", p2 > 0.5);
  report.require("timescale separation zeta1 = o(zeta2) (p1 > p2)", p1 > p2);

  if (mode == ScheduleMode::A4Prime) {
    report.require("delta vanishing (p_delta > 0)", pd > 0.0);
    report.require("zeta2/delta square-summable (p2 - p_delta > 1/2)", p2 - pd > 0.5);
    report.require("batch growth sqrt(m_n) delta_n -> inf (q/2 > p_delta)",
                   s.batch.q / 2.0 > pd && s.batch.c > 0);
  }
  return report;
}

PrimalDualState::PrimalDualState(std::vector<double> theta0, double lambda0, BoxConstraint box,
                                 double lambda_max)
    : theta_(std::move(theta0)), lambda_(lambda0), box_(std::move(box)), lambda_max_(lambda_max) {
  if (theta_.size() != box_.lower.size())
    throw DimensionMismatch("PrimalDualState: theta/box dimension mismatch");
  if (lambda_max_ < 0) throw InvalidModel("PrimalDualState: lambda_max must be nonnegative");
  theta_ = project_box(theta_, box_);
  lambda_ = std::min(std::max(0.0, lambda_), lambda_max_);
}

void PrimalDualState::step(std::span<const double> grad_J, std::span<const double> grad_G,
                           double G_hat, double alpha, const Schedules& schedules) {
  if (grad_J.size() != theta_.size() || grad_G.size() != theta_.size())
    throw DimensionMismatch("primal_dual_step: gradient dimension mismatch");
  if (!std::isfinite(G_hat) || !std::isfinite(alpha))
    throw NonFiniteEstimate("primal_dual_step: non-finite constraint estimate");
  for (std::size_t i = 0; i < theta_.size(); ++i)
    if (!std::isfinite(grad_J[i]) || !std::isfinite(grad_G[i]))
      throw NonFiniteEstimate("primal_dual_step: non-finite gradient component");

  const double zeta2 = schedules.zeta2(n_);
  const double zeta1 = schedules.zeta1(n_);
  const double lambda_pre = lambda_;
  for (std::size_t i = 0; i < theta_.size(); ++i) {
    const double v = theta_[i] - zeta2 * (grad_J[i] + lambda_pre * grad_G[i]);
    theta_[i] = std::min(std::max(box_.lower[i], v), box_.upper[i]);
  }
  lambda_ = std::min(std::max(0.0, lambda_pre + zeta1 * (G_hat - alpha)), lambda_max_);
  ++n_;
}

}  // namespace riskrl
