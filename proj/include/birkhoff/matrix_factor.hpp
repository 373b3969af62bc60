#pragma once

#include <vector>

#include "birkhoff/banded.hpp"
#include "birkhoff/loops.hpp"
#include "birkhoff/norms.hpp"
#include "birkhoff/types.hpp"

namespace birkhoff {

// enumeration order for index-tuple trials; the winner is the same either
// way, the order only decides how fast it is found
enum class TupleOrder { BalancedFirst, LexDescending };

struct SectionConfig {
  int section_start = 0;    // 0 picks n * (band width) + 4
  int section_cap = 256;    // largest exponent window the solver will try
  double residual_tol = 1e-8;
  double rcond_floor = 1e-10;  // below this the section counts as obstructed
  int verify_samples = 256;
  Budget budget{};
};

struct MatrixFactorization {
  MatrixLoop plus;           // entries supported on exponents >= 0
  std::vector<int> indices;  // non-increasing
  MatrixLoop minus;          // entries supported on exponents <= 0
  double residual = 0.0;     // sup over the sample grid of |g - plus*D*minus|
  double plus_margin = 0.0;
  double minus_margin = 0.0;
  // true when the constant term of minus reached its normal form: the
  // identity for all-zero indices, unit lower triangular otherwise
  bool canonical = true;
};

// winding number of the determinant loop
int total_index(const MatrixLoop& g, const Budget& budget = {});

// factorization with all partial indices zero, by finite-section solves of
// the row-wise projection equations; persistent ill-conditioning of the
// sections signals nonzero indices and raises IndexObstructionError
MatrixFactorization canonical_factorize(const MatrixLoop& g,
                                        const SectionConfig& cfg = {});

// the unique non-increasing index tuple, found by trying candidate tuples
// with the correct sum until one admits a verified factorization
std::vector<int> partial_indices(const MatrixLoop& g, int bound,
                                 TupleOrder order = TupleOrder::BalancedFirst,
                                 const SectionConfig& cfg = {});

MatrixFactorization full_factorize(const MatrixLoop& g, int bound,
                                   TupleOrder order = TupleOrder::BalancedFirst,
                                   const SectionConfig& cfg = {});

struct VerifyReport {
  double residual = 0.0;          // sup over circle samples
  bool plus_analytic = false;     // plus supported on exponents >= 0
  bool minus_antianalytic = false;
  bool indices_sorted = false;
  double plus_margin = 0.0;   // least singular value over a closed-disk grid
  double minus_margin = 0.0;  // same over an exterior grid including infinity
  double normalization_defect = 0.0;  // minus(inf) against unit lower triangular
  bool ok = false;
};

VerifyReport verify_factorization(const MatrixLoop& g,
                                  const MatrixFactorization& fact,
                                  int samples = 256, double tol = 1e-8);

// entry-wise admissibility of a coupling against an index tuple: entry (k,j)
// vanishes if kappa_k < kappa_j, is constant if they are equal, and is a
// polynomial of degree at most kappa_k - kappa_j otherwise
bool coupling_structure_ok(const MatrixLoop& c, const std::vector<int>& indices,
                           double tol = 1e-8);

struct Coupling {
  MatrixLoop c;
  bool structure_ok = false;
  double defect = 0.0;  // worst offending coefficient or relation mass
};

// the loop C with fact2.plus = fact1.plus * C, checked against the entry
// conditions above and the matching relation for the minus factors
Coupling coupling_matrix(const MatrixFactorization& fact1,
                         const MatrixFactorization& fact2,
                         const Budget& budget = {}, double tol = 1e-8);

}  // namespace birkhoff
