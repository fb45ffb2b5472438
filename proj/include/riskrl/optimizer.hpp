#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskrl/critics.hpp"

namespace riskrl {

/// Componentwise box Theta = prod_i [lower_i, upper_i].
struct BoxConstraint {
  std::vector<double> lower;
  std::vector<double> upper;

  static BoxConstraint symmetric(int dim, double half_width);
  int dim() const { return static_cast<int>(lower.size()); }
};

/// Componentwise clamp onto the box.
std::vector<double> project_box(std::span<const double> v, const BoxConstraint& box);

/// Batch-size schedule m_n = m0 + ceil(c * n^q).
struct BatchSchedule {
  std::int64_t m0 = 1;
  double c = 0;
  double q = 0;

  std::int64_t operator()(std::int64_t n) const;
};

/// Step-size and perturbation schedules of the two-timescale engine:
/// zeta1 dual ascent (slowest), zeta2 policy descent, zeta3/zeta4 critic and
/// risk-estimator scales (fastest), delta the SPSA perturbation magnitude,
/// batch the per-iteration sample count.
struct Schedules {
  PowerLaw zeta1{1.0, 1.0};
  PowerLaw zeta2{1.0, 0.75};
  PowerLaw zeta3{1.0, 0.7};
  PowerLaw zeta4{1.0, 0.7};
  PowerLaw delta{1.0, 0.1};
  BatchSchedule batch{1, 1.0, 0.5};
};

enum class ScheduleMode { A4, A4Prime };

struct ConditionCheck {
  std::string name;
  bool pass;
  std::string detail;
};

struct ValidationReport {
  std::vector<ConditionCheck> checks;

  void require(std::string name, bool pass, std::string detail = "");
  bool all_pass() const;
  /// Comma-joined names of failed conditions, empty when everything passed.
  std::string failures() const;
};

/// Exponent arithmetic for the power-law family. A4: divergent sums
/// (p <= 1), square summability (p > 1/2), timescale separation p1 > p2.
/// A4Prime additionally: vanishing perturbations (p_delta > 0), square
/// summability of zeta2/delta (p2 - p_delta > 1/2), and the batch growth
/// condition sqrt(m_n) * delta_n -> inf (q/2 > p_delta).
ValidationReport validate_schedules(const Schedules& schedules, ScheduleMode mode);

/// Projected primal-dual iterate (theta_n, lambda_n). After every step theta
/// lies in the box and lambda in [0, lambda_max].
class PrimalDualState {
 public:
  PrimalDualState(std::vector<double> theta0, double lambda0, BoxConstraint box,
                  double lambda_max);

  /// One coupled step with the pre-step lambda in the theta direction:
  ///   theta <- Gamma[theta - zeta2(n) (grad_J + lambda grad_G)]
  ///   lambda <- Gamma_lambda[lambda + zeta1(n) (G_hat - alpha)]
  /// Throws NonFiniteEstimate if any input is not finite.
  void step(std::span<const double> grad_J, std::span<const double> grad_G, double G_hat,
            double alpha, const Schedules& schedules);

  std::span<const double> theta() const { return theta_; }
  double lambda() const { return lambda_; }
  std::int64_t n() const { return n_; }
  double lambda_max() const { return lambda_max_; }
  const BoxConstraint& box() const { return box_; }

 private:
  std::vector<double> theta_;
  double lambda_;
  std::int64_t n_ = 0;
  BoxConstraint box_;
  double lambda_max_;
};

}  // namespace riskrl
