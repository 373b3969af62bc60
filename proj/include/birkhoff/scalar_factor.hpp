#pragma once

// Winding number and the scalar splitting g = plus * z^kappa * minus with
// plus holomorphic in the disk, minus in the exterior, minus(inf) = 1.

#include "birkhoff/norms.hpp"

namespace birkhoff {

enum class ScalarRoute { ExpLog, Roots };

struct ScalarFactorization {
  LaurentSeries plus;   // kmin >= 0, invertible on the circle
  int kappa = 0;
  LaurentSeries minus;  // kmax <= 0, constant coefficient exactly 1
  double residual = 0.0;
  double plus_margin = 0.0;
  double minus_margin = 0.0;
  ScalarRoute route = ScalarRoute::ExpLog;
};

// unwrapped argument increments over the sample grid, rounded to an integer;
// samples = 0 picks a default and retries on a finer grid when unwrapping or
// rounding is ambiguous
int winding_number(const LaurentSeries& g, int samples = 0);

// exact splitting of a Laurent polynomial by its roots: |w| > 1 into plus,
// |w| < 1 into minus (in powers of 1/z), kappa = kmin + #roots inside
ScalarFactorization factor_laurent_poly(const LaurentSeries& g);

// winding reduction followed by log/exp splitting; falls back to the root
// route when the sampled logarithm cannot reach the tolerance
ScalarFactorization scalar_factorize(const LaurentSeries& g,
                                     const Budget& budget = {},
                                     double tol = 1e-8);

}  // namespace birkhoff
