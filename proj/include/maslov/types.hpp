#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace maslov {

using cplx = std::complex<double>;

using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

inline constexpr cplx I_unit{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Relative singular-value cutoff used for every rank decision.
inline constexpr double kRankTol = 1e-10;

enum class ErrorKind {
  Validation,  // malformed or inconsistent input
  Numerical,   // a computation failed or two routes disagreed
  Unsupported  // input is valid but outside the handled case
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& what)
      : std::runtime_error(what), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] inline void fail_validation(const std::string& code, const std::string& msg) {
  throw Error(ErrorKind::Validation, code, msg);
}

[[noreturn]] inline void fail_numerical(const std::string& code, const std::string& msg) {
  throw Error(ErrorKind::Numerical, code, msg);
}

[[noreturn]] inline void fail_unsupported(const std::string& code, const std::string& msg) {
  throw Error(ErrorKind::Unsupported, code, msg);
}

}  // namespace maslov
