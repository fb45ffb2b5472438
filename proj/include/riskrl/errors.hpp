#pragma once

#include <stdexcept>

namespace riskrl {

struct InvalidModel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Linear solve failed or left an unacceptable residual.
struct SingularSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Policy-induced chain has no unique invariant distribution.
struct ReducibleChain : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// SSP path enumeration left too much unabsorbed probability mass.
struct MassNotCaptured : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptySample : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidDistribution : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroDelta : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A truncated episode reached an estimator that requires full termination.
struct TruncatedEpisodePresent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteEstimate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScheduleInvalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace riskrl
