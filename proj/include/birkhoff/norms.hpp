#pragma once

// Coefficient norms, circle invertibility with margin, and the sampled
// transforms built on them: inversion, exp, and log of loops.

#include <map>
#include <vector>

#include "birkhoff/loops.hpp"

namespace birkhoff {

enum class MatNorm { Op2, Frobenius, One, Inf };

double matrix_norm(const CMatrix& m, MatNorm which = MatNorm::Op2);

// sum over the band of |coeff| resp. the chosen submultiplicative matrix norm
double wiener_norm(const LaurentSeries& f);
double wiener_norm(const MatrixLoop& g, MatNorm which = MatNorm::Op2);

// sum of max{|k|^m, 1} * |coeff_k|
double weighted_wiener_norm(const LaurentSeries& f, double m);

// sampled sup over the unit circle (largest singular value for matrix loops);
// samples = 0 picks a default proportional to the band width
double sup_circle(const LaurentSeries& f, int samples = 0);
double sup_circle(const MatrixLoop& g, int samples = 0);

// max of the sampled sup over the two circles |z| = 1 -/+ 1/n and the Wiener
// norm; for banded series the sup over the closed annulus sits on those radii
double annulus_norm(const LaurentSeries& f, int n, int samples = 0);

struct NormReport {
  double wiener = 0.0;
  std::map<double, double> weighted;
  double sup = 0.0;
  std::map<int, double> annulus;
};

NormReport norm_report(const LaurentSeries& f,
                       const std::vector<double>& weights = {1.0, 2.0},
                       const std::vector<int>& annuli = {2, 4, 8},
                       int samples = 0);

inline constexpr double kInvertibilityFloor = 1e-8;

struct Invertibility {
  bool invertible = false;
  double margin = 0.0;
};

// margin = min over circle samples of |g(z)| resp. the smallest singular value
Invertibility is_invertible_on_circle(const LaurentSeries& g, int samples = 0);
Invertibility is_invertible_on_circle(const MatrixLoop& g, int samples = 0);

// pointwise inversion on a circle grid, resynthesized with the band doubled
// until the Wiener residual of g*h - 1 drops below tol
LaurentSeries invert(const LaurentSeries& g, const Budget& budget = {},
                     double tol = 1e-10);
MatrixLoop invert(const MatrixLoop& g, const Budget& budget = {},
                  double tol = 1e-10);

// partial sums of sum_k f^k / k! until the term mass falls below term_tol
LaurentSeries exp_loop(const LaurentSeries& f, const Budget& budget = {},
                       double term_tol = 1e-14);
MatrixLoop exp_loop(const MatrixLoop& f, const Budget& budget = {},
                    double term_tol = 1e-14);

// continuous logarithm: pointwise log with angular unwrapping (scalar) or the
// Mercator series (matrix), resynthesized until exp_loop(result) matches g
// within tol in Wiener norm. Scalar loops must have winding number zero.
LaurentSeries log_loop(const LaurentSeries& g, const Budget& budget = {},
                       double tol = 1e-10);
MatrixLoop log_loop(const MatrixLoop& g, const Budget& budget = {},
                    double tol = 1e-10);

namespace detail {

int default_samples(int band_width, int factor, int floor);

// continuous argument along the sample sequence; throws NumericError when a
// step exceeds max_step (grid too coarse to certify the branch)
std::vector<double> unwrap_phases(const std::vector<Complex>& values,
                                  double max_step);

// total argument increment around the closed sample loop, in turns
double winding_turns(const std::vector<Complex>& values, double max_step);

}  // namespace detail

}  // namespace birkhoff
