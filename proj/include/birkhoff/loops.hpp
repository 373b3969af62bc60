#pragma once

// Loop construction helpers, the circle-sampling transform pair, and
// evaluation on the circle, the closed disk, and the exterior.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "birkhoff/banded.hpp"

namespace birkhoff {

inline LaurentSeries monomial(int k, Complex c = Complex(1.0, 0.0)) {
  return LaurentSeries(k, {c});
}

inline LaurentSeries constant_series(Complex c) { return LaurentSeries(0, {c}); }

inline MatrixLoop constant_loop(const CMatrix& m) { return MatrixLoop(0, {m}); }

inline MatrixLoop identity_loop(int n) {
  if (n < 1) throw std::invalid_argument("loop dimension must be positive");
  return constant_loop(CMatrix::Identity(n, n));
}

inline int loop_dim(const MatrixLoop& g) {
  const CMatrix& m = g.zero_model();
  if (m.rows() != m.cols() || m.rows() < 1)
    throw std::invalid_argument("matrix loop must have square coefficients");
  return static_cast<int>(m.rows());
}

// diag(z^{kappa_1}, ..., z^{kappa_n})
inline MatrixLoop diag_powers(const std::vector<int>& kappa) {
  int n = static_cast<int>(kappa.size());
  if (n < 1) throw std::invalid_argument("empty index tuple");
  int lo = *std::min_element(kappa.begin(), kappa.end());
  int hi = *std::max_element(kappa.begin(), kappa.end());
  std::vector<CMatrix> c(static_cast<std::size_t>(hi - lo + 1), CMatrix::Zero(n, n));
  for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(kappa[i] - lo)](i, i) = 1.0;
  return MatrixLoop(lo, std::move(c));
}

inline LaurentSeries entry(const MatrixLoop& g, int i, int j) {
  int n = loop_dim(g);
  if (i < 0 || i >= n || j < 0 || j >= n)
    throw std::invalid_argument("entry index out of range");
  std::vector<Complex> c;
  c.reserve(static_cast<std::size_t>(g.count()));
  for (int k = g.kmin(); k <= g.kmax(); ++k) c.push_back(g.coeff(k)(i, j));
  return LaurentSeries(g.kmin(), std::move(c));
}

inline MatrixLoop from_entries(const std::vector<std::vector<LaurentSeries>>& e) {
  int n = static_cast<int>(e.size());
  if (n < 1) throw std::invalid_argument("empty entry table");
  int lo = 0, hi = 0;
  bool first = true;
  for (const auto& row : e) {
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("entry table must be square");
    for (const auto& s : row) {
      if (first) {
        lo = s.kmin();
        hi = s.kmax();
        first = false;
      } else {
        lo = std::min(lo, s.kmin());
        hi = std::max(hi, s.kmax());
      }
    }
  }
  std::vector<CMatrix> c(static_cast<std::size_t>(hi - lo + 1), CMatrix::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = e[i][j].kmin(); k <= e[i][j].kmax(); ++k)
        c[static_cast<std::size_t>(k - lo)](i, j) = e[i][j].coeff(k);
  return MatrixLoop(lo, std::move(c));
}

inline MatrixLoop as_matrix_loop(const LaurentSeries& f) {
  std::vector<CMatrix> c;
  c.reserve(static_cast<std::size_t>(f.count()));
  for (int k = f.kmin(); k <= f.kmax(); ++k) {
    CMatrix m(1, 1);
    m(0, 0) = f.coeff(k);
    c.push_back(std::move(m));
  }
  return MatrixLoop(f.kmin(), std::move(c));
}

inline LaurentSeries as_scalar(const MatrixLoop& g) {
  if (loop_dim(g) != 1) throw std::invalid_argument("loop is not 1x1");
  return entry(g, 0, 0);
}

inline bool is_point_at_infinity(const Complex& z) {
  return std::isinf(z.real()) || std::isinf(z.imag());
}

namespace detail {

inline Complex int_pow(Complex z, int k) {
  if (k < 0) return Complex(1.0, 0.0) / int_pow(z, -k);
  Complex acc(1.0, 0.0);
  while (k > 0) {
    if (k & 1) acc *= z;
    z *= z;
    k >>= 1;
  }
  return acc;
}

}  // namespace detail

// Horner evaluation at any z != 0; domain checks live in the eval_* wrappers.
template <typename Coeff>
Coeff eval_point(const Banded<Coeff>& f, const Complex& z) {
  Coeff acc = f.coeff(f.kmax());
  for (int k = f.kmax() - 1; k >= f.kmin(); --k) acc = acc * z + f.coeff(k);
  return acc * detail::int_pow(z, f.kmin());
}

template <typename Coeff>
Coeff eval_circle(const Banded<Coeff>& f, const Complex& z) {
  if (std::abs(std::abs(z) - 1.0) > 1e-12)
    throw std::invalid_argument("eval_circle: point is off the unit circle");
  return eval_point(f, z);
}

template <typename Coeff>
Coeff eval_disk(const Banded<Coeff>& f, const Complex& z) {
  if (f.kmin() < 0)
    throw std::domain_error("eval_disk: series has negative exponents");
  if (std::abs(z) > 1.0 + 1e-12)
    throw std::invalid_argument("eval_disk: point is outside the closed disk");
  if (z == Complex(0.0, 0.0)) return f.coeff(0);
  Coeff acc = f.coeff(f.kmax());
  for (int k = f.kmax() - 1; k >= 0; --k) acc = acc * z + f.coeff(k);
  return acc;
}

// strictly negative band; f(inf) := 0 exactly
template <typename Coeff>
Coeff eval_exterior(const Banded<Coeff>& f, const Complex& z) {
  if (f.kmax() > -1 && !f.is_zero())
    throw std::domain_error("eval_exterior: series has nonnegative exponents");
  if (is_point_at_infinity(z)) return f.zero_model();
  if (std::abs(z) < 1.0 - 1e-12)
    throw std::invalid_argument("eval_exterior: point is inside the open disk");
  if (f.is_zero()) return f.zero_model();
  // in w = 1/z the series is sum_{j>=1} coeff(-j) w^j; Horner leaves one factor w
  Complex w = Complex(1.0, 0.0) / z;
  Coeff acc = f.coeff(f.kmin());
  for (int k = f.kmin() + 1; k <= -1; ++k) acc = acc * w + f.coeff(k);
  return acc * w;
}

// the j-th root of unity e^{2*pi*i*j/N}, j = 0..N-1
inline std::vector<Complex> unit_circle_grid(int N) {
  if (N < 1) throw std::invalid_argument("grid needs at least one sample");
  std::vector<Complex> z(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) {
    double t = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(N);
    z[static_cast<std::size_t>(j)] = Complex(std::cos(t), std::sin(t));
  }
  return z;
}

template <typename Coeff>
std::vector<Coeff> circle_samples(const Banded<Coeff>& f, int N) {
  std::vector<Complex> grid = unit_circle_grid(N);
  std::vector<Coeff> out;
  out.reserve(grid.size());
  for (const Complex& z : grid) out.push_back(eval_point(f, z));
  return out;
}

// Inverse transform on the N-th roots of unity: coeff_k = (1/N) sum_j v_j w^{-jk}.
// Exact for input band-limited within [kmin, kmax] when N > kmax - kmin
// (wider exponents alias mod N).
template <typename Coeff>
Banded<Coeff> from_samples(const std::vector<Coeff>& values, int kmin, int kmax) {
  using Ops = CoeffOps<Coeff>;
  int N = static_cast<int>(values.size());
  if (N < 1) throw std::invalid_argument("from_samples: no samples");
  if (kmin > kmax) throw std::invalid_argument("from_samples: kmin exceeds kmax");
  if (kmax - kmin > N - 1)
    throw std::invalid_argument("from_samples: band wider than sample count allows");
  for (const Coeff& v : values) {
    if (!Ops::same_shape(v, values.front()))
      throw std::invalid_argument("from_samples: sample shapes differ");
    if (!Ops::finite(v)) throw NumericError("from_samples: non-finite sample");
  }
  std::vector<Complex> grid = unit_circle_grid(N);
  std::vector<Coeff> c;
  c.reserve(static_cast<std::size_t>(kmax - kmin + 1));
  for (int k = kmin; k <= kmax; ++k) {
    Coeff acc = Ops::zero_like(values.front());
    for (int j = 0; j < N; ++j) {
      int idx = static_cast<int>((static_cast<long long>(j) * k) % N);
      if (idx < 0) idx += N;
      // w^{-jk} = conj of grid[jk mod N]
      acc += values[static_cast<std::size_t>(j)] * std::conj(grid[static_cast<std::size_t>(idx)]);
    }
    c.push_back(acc * (1.0 / static_cast<double>(N)));
  }
  return Banded<Coeff>(kmin, std::move(c));
}

// Laurent-series determinant by cofactor expansion over column subsets
// (exact banded arithmetic; fine for desk-scale n)
LaurentSeries det_loop(const MatrixLoop& g, const Budget& budget = Budget::unlimited());

}  // namespace birkhoff
