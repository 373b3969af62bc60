#pragma once

// Banded Laurent series over a coefficient ring (complex scalars or complex
// matrices), stored as a dense coefficient block over a contiguous exponent
// band [kmin, kmax].

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <utility>
#include <vector>

#include "birkhoff/types.hpp"

namespace birkhoff {

template <typename Coeff>
struct CoeffOps;

template <>
struct CoeffOps<Complex> {
  static Complex zero_like(const Complex&) { return {0.0, 0.0}; }
  static Complex one_like(const Complex&) { return {1.0, 0.0}; }
  static Complex prod_zero(const Complex&, const Complex&) { return {0.0, 0.0}; }
  static double mass(const Complex& c) { return std::abs(c); }
  static bool finite(const Complex& c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
  }
  static bool same_shape(const Complex&, const Complex&) { return true; }
  static bool product_compatible(const Complex&, const Complex&) { return true; }
};

template <>
struct CoeffOps<CMatrix> {
  static CMatrix zero_like(const CMatrix& m) { return CMatrix::Zero(m.rows(), m.cols()); }
  static CMatrix one_like(const CMatrix& m) { return CMatrix::Identity(m.rows(), m.cols()); }
  static CMatrix prod_zero(const CMatrix& a, const CMatrix& b) {
    return CMatrix::Zero(a.rows(), b.cols());
  }
  // Frobenius norm: cheap and dominates the operator 2-norm, so tail-mass
  // accounting based on it is conservative.
  static double mass(const CMatrix& m) { return m.norm(); }
  static bool finite(const CMatrix& m) { return m.allFinite(); }
  static bool same_shape(const CMatrix& a, const CMatrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
  }
  static bool product_compatible(const CMatrix& a, const CMatrix& b) {
    return a.cols() == b.rows();
  }
};

template <typename Coeff>
class Banded {
 public:
  using Ops = CoeffOps<Coeff>;

  Banded()
    requires std::is_same_v<Coeff, Complex>
      : kmin_(0), coeffs_{Complex(0.0, 0.0)}, zero_(0.0, 0.0) {}

  // zero series with coefficients shaped like the model
  explicit Banded(const Coeff& shape_model)
      : kmin_(0), coeffs_{Ops::zero_like(shape_model)}, zero_(Ops::zero_like(shape_model)) {}

  Banded(int kmin, std::vector<Coeff> coeffs) : kmin_(kmin), coeffs_(std::move(coeffs)) {
    if (coeffs_.empty())
      throw std::invalid_argument("banded series needs at least one coefficient");
    zero_ = Ops::zero_like(coeffs_.front());
    for (const Coeff& c : coeffs_) {
      if (!Ops::same_shape(c, zero_))
        throw std::invalid_argument("coefficient shapes differ within one series");
      if (!Ops::finite(c)) throw NumericError("non-finite coefficient in banded series");
    }
    canonicalize();
  }

  int kmin() const { return kmin_; }
  int kmax() const { return kmin_ + static_cast<int>(coeffs_.size()) - 1; }
  int count() const { return static_cast<int>(coeffs_.size()); }

  const Coeff& coeff(int k) const {
    if (k < kmin_ || k > kmax()) return zero_;
    return coeffs_[static_cast<std::size_t>(k - kmin_)];
  }

  const Coeff& zero_model() const { return zero_; }

  bool is_zero() const { return coeffs_.size() == 1 && Ops::mass(coeffs_[0]) <= kCoeffEps; }

 private:
  int kmin_;
  std::vector<Coeff> coeffs_;
  Coeff zero_;

  // trim eps-zero fringe coefficients; the literal zero series is band (0,0)
  void canonicalize() {
    std::size_t lo = 0, hi = coeffs_.size();
    while (hi - lo > 1 && Ops::mass(coeffs_[hi - 1]) <= kCoeffEps) --hi;
    while (hi - lo > 1 && Ops::mass(coeffs_[lo]) <= kCoeffEps) ++lo;
    if (hi - lo == 1 && Ops::mass(coeffs_[lo]) <= kCoeffEps) {
      kmin_ = 0;
      coeffs_.assign(1, zero_);
      return;
    }
    if (lo != 0 || hi != coeffs_.size()) {
      kmin_ += static_cast<int>(lo);
      coeffs_.erase(coeffs_.begin() + static_cast<std::ptrdiff_t>(hi), coeffs_.end());
      coeffs_.erase(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(lo));
    }
  }
};

using LaurentSeries = Banded<Complex>;
using MatrixLoop = Banded<CMatrix>;

// l1 sum of coefficient masses; for scalars this is the Wiener norm, for
// matrices a Frobenius-based upper proxy of it (used for cheap convergence
// and tail checks, never as a reported norm)
template <typename Coeff>
double l1_mass(const Banded<Coeff>& f) {
  double s = 0.0;
  for (int k = f.kmin(); k <= f.kmax(); ++k) s += CoeffOps<Coeff>::mass(f.coeff(k));
  return s;
}

template <typename Coeff>
Banded<Coeff> shifted(const Banded<Coeff>& f, int m) {
  std::vector<Coeff> c;
  c.reserve(static_cast<std::size_t>(f.count()));
  for (int k = f.kmin(); k <= f.kmax(); ++k) c.push_back(f.coeff(k));
  return Banded<Coeff>(f.kmin() + m, std::move(c));
}

// keep only exponents in [lo, hi] (exact coefficient surgery)
template <typename Coeff>
Banded<Coeff> restricted_band(const Banded<Coeff>& f, int lo, int hi) {
  lo = std::max(lo, f.kmin());
  hi = std::min(hi, f.kmax());
  if (lo > hi) return Banded<Coeff>(f.zero_model());
  std::vector<Coeff> c;
  c.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (int k = lo; k <= hi; ++k) c.push_back(f.coeff(k));
  return Banded<Coeff>(lo, std::move(c));
}

template <typename Coeff>
Banded<Coeff> project_plus(const Banded<Coeff>& f) {
  if (f.kmax() < 0) return Banded<Coeff>(f.zero_model());
  return restricted_band(f, 0, f.kmax());
}

template <typename Coeff>
Banded<Coeff> project_ominus(const Banded<Coeff>& f) {
  if (f.kmin() >= 0) return Banded<Coeff>(f.zero_model());
  return restricted_band(f, f.kmin(), -1);
}

template <typename Coeff>
Banded<Coeff> set_coeff(const Banded<Coeff>& f, int k, const Coeff& value) {
  int lo = std::min(k, f.kmin());
  int hi = std::max(k, f.kmax());
  std::vector<Coeff> c;
  c.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (int j = lo; j <= hi; ++j) c.push_back(j == k ? value : f.coeff(j));
  return Banded<Coeff>(lo, std::move(c));
}

template <typename Coeff>
Banded<Coeff> operator+(const Banded<Coeff>& f, const Banded<Coeff>& g) {
  using Ops = CoeffOps<Coeff>;
  if (!Ops::same_shape(f.zero_model(), g.zero_model()))
    throw std::invalid_argument("adding series with mismatched coefficient shapes");
  int lo = std::min(f.kmin(), g.kmin());
  int hi = std::max(f.kmax(), g.kmax());
  std::vector<Coeff> c;
  c.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (int k = lo; k <= hi; ++k) c.push_back(f.coeff(k) + g.coeff(k));
  return Banded<Coeff>(lo, std::move(c));
}

template <typename Coeff>
Banded<Coeff> operator-(const Banded<Coeff>& f) {
  std::vector<Coeff> c;
  c.reserve(static_cast<std::size_t>(f.count()));
  for (int k = f.kmin(); k <= f.kmax(); ++k) c.push_back(-f.coeff(k));
  return Banded<Coeff>(f.kmin(), std::move(c));
}

template <typename Coeff>
Banded<Coeff> operator-(const Banded<Coeff>& f, const Banded<Coeff>& g) {
  return f + (-g);
}

template <typename Coeff>
Banded<Coeff> operator*(const Banded<Coeff>& f, const Complex& s) {
  std::vector<Coeff> c;
  c.reserve(static_cast<std::size_t>(f.count()));
  for (int k = f.kmin(); k <= f.kmax(); ++k) c.push_back(f.coeff(k) * s);
  return Banded<Coeff>(f.kmin(), std::move(c));
}

template <typename Coeff>
Banded<Coeff> operator*(const Complex& s, const Banded<Coeff>& f) {
  return f * s;
}

// Cauchy product. The exact band is [kmin_f+kmin_g, kmax_f+kmax_g]; if that
// exceeds the cap, fringe coefficients are dropped smallest-end-first and the
// discarded l1 mass must stay within the budget's tail tolerance.
template <typename Coeff>
Banded<Coeff> multiply(const Banded<Coeff>& f, const Banded<Coeff>& g,
                       const Budget& budget = {}) {
  using Ops = CoeffOps<Coeff>;
  if (!Ops::product_compatible(f.zero_model(), g.zero_model()))
    throw std::invalid_argument("multiplying series with incompatible coefficient shapes");
  Coeff pzero = Ops::prod_zero(f.zero_model(), g.zero_model());
  if (f.is_zero() || g.is_zero()) return Banded<Coeff>(pzero);

  int lo = f.kmin() + g.kmin();
  std::size_t n = static_cast<std::size_t>(f.count() + g.count() - 1);
  std::vector<Coeff> out(n, pzero);
  for (int i = f.kmin(); i <= f.kmax(); ++i) {
    if (Ops::mass(f.coeff(i)) == 0.0) continue;
    for (int j = g.kmin(); j <= g.kmax(); ++j)
      out[static_cast<std::size_t>(i + j - lo)] += f.coeff(i) * g.coeff(j);
  }

  double discarded = 0.0;
  std::size_t a = 0, b = n;
  while (static_cast<int>(b - a) > budget.band_cap) {
    if (Ops::mass(out[a]) <= Ops::mass(out[b - 1])) {
      discarded += Ops::mass(out[a]);
      ++a;
    } else {
      discarded += Ops::mass(out[b - 1]);
      --b;
    }
  }
  if (discarded > budget.tail_tol)
    throw TruncationError("product band exceeds cap", discarded);
  return Banded<Coeff>(lo + static_cast<int>(a),
                       std::vector<Coeff>(out.begin() + static_cast<std::ptrdiff_t>(a),
                                          out.begin() + static_cast<std::ptrdiff_t>(b)));
}

template <typename Coeff>
Banded<Coeff> operator*(const Banded<Coeff>& f, const Banded<Coeff>& g) {
  return multiply(f, g);
}

// largest coefficientwise deviation; the natural "equal up to eps" metric
template <typename Coeff>
double coeff_distance(const Banded<Coeff>& f, const Banded<Coeff>& g) {
  using Ops = CoeffOps<Coeff>;
  int lo = std::min(f.kmin(), g.kmin());
  int hi = std::max(f.kmax(), g.kmax());
  double d = 0.0;
  for (int k = lo; k <= hi; ++k) d = std::max(d, Ops::mass(f.coeff(k) - g.coeff(k)));
  return d;
}

}  // namespace birkhoff
