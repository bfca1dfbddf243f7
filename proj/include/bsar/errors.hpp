#pragma once

#include <stdexcept>
#include <string>

namespace bsar {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Weight-matrix construction: some unit has no neighbor within the threshold.
struct IsolatedUnit : Error {
  using Error::Error;
};

// log(1 - rho*omega) undefined for a real eigenvalue.
struct DomainError : Error {
  using Error::Error;
};

struct SingularSystem : Error {
  using Error::Error;
};

struct NonPositiveVariance : Error {
  using Error::Error;
};

struct SingularDesign : Error {
  using Error::Error;
};

struct CholeskyFailure : Error {
  using Error::Error;
};

struct RankDeficientInstruments : Error {
  using Error::Error;
};

struct SingularSecondStage : Error {
  using Error::Error;
};

struct OptimizerFailure : Error {
  using Error::Error;
};

struct EmptyCell : Error {
  using Error::Error;
};

}  // namespace bsar
