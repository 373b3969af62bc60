#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace birkhoff {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Coefficients at or below this magnitude are treated as exact zeros by
// canonicalization and by coefficient-level equality.
inline constexpr double kCoeffEps = 1e-14;

// Truncation policy for operations that grow the band.
struct Budget {
  int band_cap = 512;       // max number of stored exponents per series
  double tail_tol = 1e-10;  // l1 mass that may be dropped when hitting the cap

  static Budget unlimited() { return Budget{1 << 28, 0.0}; }
};

// Band cap was hit and the dropped l1 tail mass exceeded the tolerance.
struct TruncationError : std::runtime_error {
  double discarded;
  TruncationError(const std::string& what, double mass)
      : std::runtime_error(what + " (discarded l1 mass " + std::to_string(mass) + ")"),
        discarded(mass) {}
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Persistent rank deficiency of the finite sections: the loop has nonzero
// partial indices, so the canonical solve cannot succeed.
struct IndexObstructionError : NumericError {
  using NumericError::NumericError;
};

struct NotInvertibleError : std::domain_error {
  double margin;
  NotInvertibleError(const std::string& what, double m)
      : std::domain_error(what + " (margin " + std::to_string(m) + ")"), margin(m) {}
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace birkhoff
