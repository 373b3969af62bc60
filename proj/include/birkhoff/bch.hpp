#pragma once

// Truncated Baker-Campbell-Hausdorff arithmetic on loop-algebra elements,
// the contraction solver for the splitting bch(P+x, Pominus x) = y, and the
// resulting near-identity factorization g = exp(plus part) * exp(minus part).

#include <cstdint>
#include <functional>
#include <random>

#include "birkhoff/norms.hpp"

namespace birkhoff {

struct LieAlgebraRep {
  int n = 0;
  std::vector<CMatrix> basis;
  MatNorm norm_tag = MatNorm::Op2;
};

// validates linear independence and bracket closure of the basis
LieAlgebraRep make_rep(std::vector<CMatrix> basis, MatNorm norm_tag = MatNorm::Op2,
                       double closure_tol = 1e-10);

LieAlgebraRep sl2_rep();
LieAlgebraRep gl_rep(int n);
LieAlgebraRep strictly_upper_rep(int n);

struct LoopAlgebraElement {
  LieAlgebraRep rep;
  MatrixLoop series;
};

// checks every coefficient against span(rep.basis) and snaps it onto the
// span; deviation beyond span_tol is an error
LoopAlgebraElement make_element(const LieAlgebraRep& rep, const MatrixLoop& series,
                                double span_tol = 1e-8);

// coefficient-wise draw from span(rep.basis) scaled to the target Wiener norm
MatrixLoop random_loop_algebra_series(const LieAlgebraRep& rep, int kmin, int kmax,
                                      double target_norm, std::mt19937_64& rng);

struct BchConfig {
  int order = 6;
  double radius = 0.125;
  double step_tol = 1e-12;
  int max_iter = 100;
  double solve_tol = 1e-10;
  Budget budget;
};

// partial sum of the BCH series z(x, y) = x + y + [x,y]/2 + ... through
// bracket words of total degree <= order, on raw matrix loops
MatrixLoop bch_series(const MatrixLoop& x, const MatrixLoop& y, int order,
                      const Budget& budget = {});

// ball-gated element versions
LoopAlgebraElement bch_multiply(const LoopAlgebraElement& x,
                                const LoopAlgebraElement& y, int order,
                                const BchConfig& cfg = {});
LoopAlgebraElement bch_remainder(const LoopAlgebraElement& x,
                                 const LoopAlgebraElement& y, int order,
                                 const BchConfig& cfg = {});

struct SplitSolution {
  LoopAlgebraElement x;
  int iterations = 0;
  double contraction = 0.0;  // largest observed ratio of consecutive steps
  double final_step = 0.0;
  double residual = 0.0;     // Wiener norm of bch(P+x, Pominus x) - y
};

// contraction iteration x <- y - R(x) with R(x) the remainder of the
// projected halves; requires the Wiener norm of y to be at most radius/4
SplitSolution split_solve(const LoopAlgebraElement& y, const BchConfig& cfg = {});

struct LocalFactorization {
  MatrixLoop plus;   // entries with kmin >= 0
  MatrixLoop minus;  // entries with kmax <= 0, value I at infinity
  double residual = 0.0;  // sup of |g - plus*minus| over the sample grid
  SplitSolution solve;
};

LocalFactorization group_factorize_local(const MatrixLoop& g,
                                         const LieAlgebraRep& rep,
                                         const BchConfig& cfg = {},
                                         int verify_samples = 256,
                                         double verify_tol = 1e-8);

// sampled lower bounds for Lipschitz constants over a ball of loop-algebra
// series with the given band; never an upper-bound certificate
double lipschitz_estimate(const std::function<MatrixLoop(const MatrixLoop&)>& map,
                          const LieAlgebraRep& rep, int kmin, int kmax,
                          double radius, int samples,
                          std::uint64_t seed = 0x9e3779b97f4a7c15ull);

// two-argument variant with the max norm on argument pairs
double lipschitz_estimate_pair(
    const std::function<MatrixLoop(const MatrixLoop&, const MatrixLoop&)>& map,
    const LieAlgebraRep& rep, int kmin, int kmax, double radius, int samples,
    std::uint64_t seed = 0x9e3779b97f4a7c15ull);

}  // namespace birkhoff
