#include "birkhoff/matrix_factor.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "birkhoff/scalar_factor.hpp"

namespace birkhoff {

namespace {

double smallest_singular_value(const CMatrix& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues().minCoeff();
}

int default_section(const MatrixLoop& g) {
  int n = loop_dim(g);
  return n * (g.kmax() - g.kmin() + 1) + 4;
}

// exponent-window coefficient matrix: block (m, k) holds the coefficient of
// z^{k-m}, so a row vector of stacked u-coefficients hits the exponent-k
// coefficient of u*g when multiplied from the left
Eigen::MatrixXcd toeplitz_section(const MatrixLoop& g, int K) {
  int n = loop_dim(g);
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(n * (K + 1), n * (K + 1));
  for (int m = 0; m <= K; ++m)
    for (int k = 0; k <= K; ++k) {
      int d = k - m;
      if (d < g.kmin() || d > g.kmax()) continue;
      t.block(m * n, k * n, n, n) = g.coeff(d);
    }
  return t;
}

double section_rcond(const Eigen::MatrixXcd& t) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(t);
  const auto& sv = svd.singularValues();
  double top = sv(0);
  if (top <= 0.0) return 0.0;
  return sv(sv.size() - 1) / top;
}

std::vector<int> zero_tuple(int n) { return std::vector<int>(static_cast<std::size_t>(n), 0); }

// non-increasing tuples with the prescribed sum and entry bound
std::vector<std::vector<int>> index_tuples(int n, int total, int bound) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int remaining, int hi, int slots) -> void {
    if (slots == 1) {
      if (remaining >= -bound && remaining <= hi) {
        cur.push_back(remaining);
        out.push_back(cur);
        cur.pop_back();
      }
      return;
    }
    for (int k = std::min(hi, bound); k >= -bound; --k) {
      if (remaining > slots * k) break;  // later entries cannot exceed k
      if (remaining - k < -(slots - 1) * bound) continue;
      cur.push_back(k);
      self(self, remaining - k, k, slots - 1);
      cur.pop_back();
    }
  };
  rec(rec, total, bound, n);
  return out;
}

void sort_tuples(std::vector<std::vector<int>>& tuples, TupleOrder order) {
  if (order == TupleOrder::BalancedFirst) {
    std::sort(tuples.begin(), tuples.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) {
                int sa = a.front() - a.back();
                int sb = b.front() - b.back();
                if (sa != sb) return sa < sb;
                return a > b;
              });
  } else {
    std::sort(tuples.begin(), tuples.end(), std::greater<>());
  }
}

// rows of u supported on [0, K], found per row by least squares: the product
// u_j * g must vanish at every exponent above kappa_j, and is pinned to 1 in
// one component at exponent kappa_j to exclude the zero solution; the shift
// rotates which component gets pinned first, so degenerate pins that make
// the assembled rows dependent can be routed around deterministically
std::optional<MatrixLoop> solve_rows(const MatrixLoop& g,
                                     const std::vector<int>& kappa, int K,
                                     double row_tol, int shift) {
  int n = loop_dim(g);
  int cols = n * (K + 1);
  int top = K + g.kmax();
  std::vector<Eigen::VectorXcd> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    int kj = kappa[static_cast<std::size_t>(j)];
    if (top < kj) return std::nullopt;
    int vrows = n * (top - kj);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(vrows + 1, cols);
    for (int k = kj + 1; k <= top; ++k) {
      int base = n * (k - kj - 1);
      for (int m = 0; m <= K; ++m) {
        int d = k - m;
        if (d < g.kmin() || d > g.kmax()) continue;
        const CMatrix& coeff = g.coeff(d);
        for (int i = 0; i < n; ++i)
          for (int s = 0; s < n; ++s) a(base + i, m * n + s) = coeff(s, i);
      }
    }
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(vrows + 1);
    b(vrows) = Complex(1.0, 0.0);

    bool found = false;
    for (int attempt = 0; attempt < n && !found; ++attempt) {
      int pin = (j + shift + attempt) % n;
      a.row(vrows).setZero();
      for (int m = 0; m <= K; ++m) {
        int d = kj - m;
        if (d < g.kmin() || d > g.kmax()) continue;
        const CMatrix& coeff = g.coeff(d);
        for (int s = 0; s < n; ++s) a(vrows, m * n + s) = coeff(s, pin);
      }
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(a);
      Eigen::VectorXcd x = cod.solve(b);
      if ((a * x - b).norm() <= row_tol) {
        rows.push_back(std::move(x));
        found = true;
      }
    }
    if (!found) return std::nullopt;
  }

  std::vector<CMatrix> coeffs(static_cast<std::size_t>(K + 1),
                              CMatrix::Zero(n, n));
  for (int m = 0; m <= K; ++m)
    for (int j = 0; j < n; ++j)
      for (int s = 0; s < n; ++s)
        coeffs[static_cast<std::size_t>(m)](j, s) =
            rows[static_cast<std::size_t>(j)](m * n + s);
  return MatrixLoop(0, coeffs);
}

// position of the first index equal to kappa[k]; the normalizing constant
// may only combine row k with rows of equal or smaller index
int block_start(const std::vector<int>& kappa, int k) {
  int s = k;
  while (s > 0 && kappa[static_cast<std::size_t>(s - 1)] == kappa[static_cast<std::size_t>(k)]) --s;
  return s;
}

struct Normalization {
  CMatrix b;       // block upper triangular, left-multiplies minus
  bool canonical;  // all rows reached their target pattern
};

// seek B with (B * m0) equal to 1 on the diagonal and 0 at every column
// inside or right of the row's index block; reachable transforms of the
// value at infinity are exactly the block-upper-triangular ones
Normalization normalize_at_infinity(const CMatrix& m0,
                                    const std::vector<int>& kappa) {
  int n = static_cast<int>(m0.rows());
  CMatrix b = CMatrix::Identity(n, n);
  for (int k = 0; k < n; ++k) {
    int s = block_start(kappa, k);
    int w = n - s;
    CMatrix sub = m0.block(s, s, w, w);
    Eigen::FullPivLU<CMatrix> lu(sub.transpose());
    if (!lu.isInvertible()) return {CMatrix::Identity(n, n), false};
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(w);
    e(k - s) = Complex(1.0, 0.0);
    Eigen::VectorXcd row = lu.solve(e);
    b.row(k).setZero();
    for (int i = 0; i < w; ++i) b(k, s + i) = row(i);
  }
  if (!b.allFinite() || b.norm() > 1e12) return {CMatrix::Identity(n, n), false};
  return {b, true};
}

MatrixLoop constant_twist(const CMatrix& b) {
  return MatrixLoop(0, {b});
}

// plus-side compensation for the constant B on the minus side: entries
// (B^{-1})_{kj} z^{kappa_k - kappa_j}, a polynomial loop because B^{-1} is
// block upper triangular along a non-increasing tuple
MatrixLoop plus_twist(const CMatrix& binv, const std::vector<int>& kappa) {
  int n = static_cast<int>(binv.rows());
  LaurentSeries zero(0, {Complex(0.0, 0.0)});
  std::vector<std::vector<LaurentSeries>> entries(
      static_cast<std::size_t>(n),
      std::vector<LaurentSeries>(static_cast<std::size_t>(n), zero));
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      if (std::abs(binv(k, j)) == 0.0) continue;
      int d = kappa[static_cast<std::size_t>(k)] - kappa[static_cast<std::size_t>(j)];
      entries[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
          monomial(d, binv(k, j));
    }
  return from_entries(entries);
}

double sup_residual(const MatrixLoop& g, const MatrixLoop& plus,
                    const std::vector<int>& kappa, const MatrixLoop& minus,
                    int samples) {
  int n = loop_dim(g);
  double sup = 0.0;
  for (const Complex& z : unit_circle_grid(samples)) {
    CMatrix d = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      d(i, i) = detail::int_pow(z, kappa[static_cast<std::size_t>(i)]);
    CMatrix diff = eval_point(g, z) - eval_point(plus, z) * d * eval_point(minus, z);
    sup = std::max(sup, matrix_norm(diff, MatNorm::Op2));
  }
  return sup;
}

// from the solved window u: recover both factors, normalize the value of
// minus at infinity, and accept only when the reconstruction verifies
std::optional<MatrixFactorization> assemble(const MatrixLoop& g,
                                            const MatrixLoop& u,
                                            const std::vector<int>& kappa,
                                            const SectionConfig& cfg) {
  int n = loop_dim(g);
  MatrixLoop v = multiply(u, g, Budget::unlimited());

  LaurentSeries zero(0, {Complex(0.0, 0.0)});
  std::vector<std::vector<LaurentSeries>> rows(
      static_cast<std::size_t>(n),
      std::vector<LaurentSeries>(static_cast<std::size_t>(n), zero));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      LaurentSeries e = shifted(entry(v, j, i), -kappa[static_cast<std::size_t>(j)]);
      rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
          restricted_band(e, std::min(e.kmin(), 0), 0);
    }
  MatrixLoop minus = from_entries(rows);

  CMatrix m0 = minus.coeff(0);
  if (smallest_singular_value(m0) < 1e-6) return std::nullopt;

  MatrixLoop plus = identity_loop(n);
  try {
    plus = project_plus(invert(u, cfg.budget));
  } catch (const NotInvertibleError&) {
    return std::nullopt;
  } catch (const TruncationError&) {
    return std::nullopt;
  }

  Normalization norm = normalize_at_infinity(m0, kappa);
  bool canonical = norm.canonical;
  if (canonical) {
    minus = multiply(constant_twist(norm.b), minus, Budget::unlimited());
    plus = multiply(plus, plus_twist(norm.b.inverse(), kappa), Budget::unlimited());
    // snap the constrained entries of the constant term to their exact
    // pattern once they agree with it to solver accuracy
    CMatrix c0 = minus.coeff(0);
    double defect = 0.0;
    for (int k = 0; k < n; ++k)
      for (int c = block_start(kappa, k); c < n; ++c)
        defect = std::max(defect,
                          std::abs(c0(k, c) - (c == k ? Complex(1.0, 0.0)
                                                      : Complex(0.0, 0.0))));
    if (defect <= 1e-9) {
      for (int k = 0; k < n; ++k)
        for (int c = block_start(kappa, k); c < n; ++c)
          c0(k, c) = (c == k) ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
      minus = set_coeff(minus, 0, c0);
    } else {
      canonical = false;
    }
  }

  double residual = sup_residual(g, plus, kappa, minus, cfg.verify_samples);
  if (residual > cfg.residual_tol) return std::nullopt;

  MatrixFactorization fact{std::move(plus), kappa, std::move(minus), residual,
                           0.0, 0.0, canonical};
  fact.plus_margin = is_invertible_on_circle(fact.plus).margin;
  fact.minus_margin = is_invertible_on_circle(fact.minus).margin;
  return fact;
}

}  // namespace

int total_index(const MatrixLoop& g, const Budget& budget) {
  Invertibility inv = is_invertible_on_circle(g);
  if (!inv.invertible)
    throw NotInvertibleError("loop is not invertible on the circle", inv.margin);
  return winding_number(det_loop(g, budget));
}

MatrixFactorization canonical_factorize(const MatrixLoop& g,
                                        const SectionConfig& cfg) {
  Invertibility inv = is_invertible_on_circle(g);
  if (!inv.invertible)
    throw NotInvertibleError("loop is not invertible on the circle", inv.margin);

  int n = loop_dim(g);
  int K = cfg.section_start > 0 ? cfg.section_start : default_section(g);
  K = std::min(K, cfg.section_cap);
  int bad_sections = 0;
  double last_rcond = 1.0;
  while (true) {
    Eigen::MatrixXcd t = toeplitz_section(g, K);
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n * (K + 1), n);
    e.topRows(n) = CMatrix::Identity(n, n);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(t.transpose());
    Eigen::MatrixXcd x = cod.solve(e);

    std::vector<CMatrix> coeffs(static_cast<std::size_t>(K + 1),
                                CMatrix::Zero(n, n));
    for (int m = 0; m <= K; ++m)
      coeffs[static_cast<std::size_t>(m)] = x.middleRows(m * n, n).transpose();
    MatrixLoop u(0, coeffs);

    std::optional<MatrixFactorization> fact = assemble(g, u, zero_tuple(n), cfg);
    if (fact) return std::move(*fact);

    last_rcond = section_rcond(t);
    bad_sections = last_rcond < cfg.rcond_floor ? bad_sections + 1 : 0;
    if (bad_sections >= 2)
      throw IndexObstructionError(
          "Toeplitz sections stay rank deficient under refinement; nonzero "
          "partial indices likely");
    if (K >= cfg.section_cap) break;
    K = std::min(2 * K, cfg.section_cap);
  }
  if (last_rcond < cfg.rcond_floor)
    throw IndexObstructionError(
        "Toeplitz section is rank deficient at the window cap; nonzero "
        "partial indices likely");
  std::ostringstream msg;
  msg << "finite sections did not reach the residual target "
      << cfg.residual_tol << " within the window cap " << cfg.section_cap;
  throw NumericError(msg.str());
}

namespace {

MatrixFactorization run_trials(const MatrixLoop& g, int bound, TupleOrder order,
                               const SectionConfig& cfg) {
  Invertibility inv = is_invertible_on_circle(g);
  if (!inv.invertible)
    throw NotInvertibleError("loop is not invertible on the circle", inv.margin);
  int band = std::max(std::abs(g.kmin()), std::abs(g.kmax()));
  if (bound < band) {
    std::ostringstream msg;
    msg << "index bound " << bound << " is below the loop band " << band;
    throw std::invalid_argument(msg.str());
  }

  int n = loop_dim(g);
  int total = total_index(g, cfg.budget);
  std::vector<std::vector<int>> tuples = index_tuples(n, total, bound);
  sort_tuples(tuples, order);

  int K = cfg.section_start > 0 ? cfg.section_start : default_section(g);
  K = std::min(K, cfg.section_cap);
  while (true) {
    for (const std::vector<int>& kappa : tuples) {
      for (int shift = 0; shift < n; ++shift) {
        std::optional<MatrixLoop> u = solve_rows(g, kappa, K, cfg.residual_tol, shift);
        if (!u) break;  // some row is infeasible regardless of the pin
        std::optional<MatrixFactorization> fact = assemble(g, *u, kappa, cfg);
        if (fact) return std::move(*fact);
      }
    }
    if (K >= cfg.section_cap) break;
    K = std::min(2 * K, cfg.section_cap);
  }
  std::ostringstream msg;
  msg << "no index tuple with sum " << total << " and entries within "
      << bound << " admitted a factorization; raise the bound or the "
      << "truncation budget";
  throw NumericError(msg.str());
}

}  // namespace

std::vector<int> partial_indices(const MatrixLoop& g, int bound,
                                 TupleOrder order, const SectionConfig& cfg) {
  return run_trials(g, bound, order, cfg).indices;
}

MatrixFactorization full_factorize(const MatrixLoop& g, int bound,
                                   TupleOrder order, const SectionConfig& cfg) {
  MatrixFactorization fact = run_trials(g, bound, order, cfg);
  VerifyReport report =
      verify_factorization(g, fact, cfg.verify_samples, cfg.residual_tol);
  if (!report.ok) {
    std::ostringstream msg;
    msg << "factorization failed verification: residual " << report.residual
        << ", margins " << report.plus_margin << " and " << report.minus_margin;
    throw NumericError(msg.str());
  }
  return fact;
}

VerifyReport verify_factorization(const MatrixLoop& g,
                                  const MatrixFactorization& fact,
                                  int samples, double tol) {
  VerifyReport report;
  int n = loop_dim(g);
  if (loop_dim(fact.plus) != n || loop_dim(fact.minus) != n ||
      static_cast<int>(fact.indices.size()) != n)
    return report;

  report.indices_sorted =
      std::is_sorted(fact.indices.rbegin(), fact.indices.rend());
  report.plus_analytic = fact.plus.kmin() >= 0 || fact.plus.is_zero();
  report.minus_antianalytic = fact.minus.kmax() <= 0;

  report.residual = sup_residual(g, fact.plus, fact.indices, fact.minus,
                                 std::max(samples, 8));

  int angles = std::max(16, samples / 4);
  if (report.plus_analytic) {
    double margin = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= 8; ++r) {
      double radius = static_cast<double>(r) / 8.0;
      if (radius == 0.0) {
        margin = std::min(margin, smallest_singular_value(fact.plus.coeff(0)));
        continue;
      }
      for (const Complex& w : unit_circle_grid(angles)) {
        Complex z = radius * w;
        margin = std::min(margin,
                          smallest_singular_value(eval_point(fact.plus, z)));
      }
    }
    report.plus_margin = margin;
  }
  if (report.minus_antianalytic) {
    double margin = smallest_singular_value(fact.minus.coeff(0));
    MatrixLoop strict = project_ominus(fact.minus);
    for (int r = 1; r <= 8; ++r) {
      double w = static_cast<double>(r) / 8.0;
      for (const Complex& dir : unit_circle_grid(angles)) {
        Complex z = dir / w;
        CMatrix value = fact.minus.coeff(0);
        if (!strict.is_zero()) value += eval_exterior(strict, z);
        margin = std::min(margin, smallest_singular_value(value));
      }
    }
    report.minus_margin = margin;
  }

  CMatrix m0 = fact.minus.coeff(0);
  double defect = 0.0;
  for (int k = 0; k < n; ++k) {
    defect = std::max(defect, std::abs(m0(k, k) - Complex(1.0, 0.0)));
    for (int c = k + 1; c < n; ++c) defect = std::max(defect, std::abs(m0(k, c)));
  }
  report.normalization_defect = defect;

  report.ok = report.plus_analytic && report.minus_antianalytic &&
              report.indices_sorted && report.residual <= tol &&
              report.plus_margin > kInvertibilityFloor &&
              report.minus_margin > kInvertibilityFloor;
  return report;
}

bool coupling_structure_ok(const MatrixLoop& c, const std::vector<int>& indices,
                           double tol) {
  int n = loop_dim(c);
  if (static_cast<int>(indices.size()) != n) return false;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      LaurentSeries e = entry(c, k, j);
      int gap = indices[static_cast<std::size_t>(k)] -
                indices[static_cast<std::size_t>(j)];
      double off = 0.0;
      if (gap < 0) {
        off = l1_mass(e);
      } else {
        off = l1_mass(e - restricted_band(e, 0, gap));
      }
      if (off > tol) return false;
    }
  return true;
}

Coupling coupling_matrix(const MatrixFactorization& fact1,
                         const MatrixFactorization& fact2,
                         const Budget& budget, double tol) {
  if (fact1.indices != fact2.indices)
    throw InvariantViolation(
        "coupling requested between factorizations with different partial "
        "indices");

  MatrixLoop c = multiply(invert(fact1.plus, budget), fact2.plus, budget);

  int n = loop_dim(c);
  double defect = 0.0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      LaurentSeries e = entry(c, k, j);
      int gap = fact1.indices[static_cast<std::size_t>(k)] -
                fact1.indices[static_cast<std::size_t>(j)];
      double off = gap < 0 ? l1_mass(e) : l1_mass(e - restricted_band(e, 0, gap));
      defect = std::max(defect, off);
    }

  MatrixLoop d = diag_powers(fact1.indices);
  MatrixLoop relation =
      multiply(c, multiply(d, fact2.minus, budget), budget) -
      multiply(d, fact1.minus, budget);
  double relation_defect = wiener_norm(relation, MatNorm::Op2);
  defect = std::max(defect, relation_defect);

  return Coupling{std::move(c), defect <= tol, defect};
}

}  // namespace birkhoff
