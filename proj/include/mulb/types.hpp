#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mulb {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  SolverFailure,
  NonSimpleTarget,
  DegeneratePair,
  SigmaUnderflow,
  AssumptionViolated,
  TooManyParameters,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; the code tells callers which
// recovery path applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mulb
