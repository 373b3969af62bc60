#include "birkhoff/norms.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace birkhoff {

double matrix_norm(const CMatrix& m, MatNorm which) {
  switch (which) {
    case MatNorm::Op2: {
      if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
      Eigen::JacobiSVD<CMatrix> svd(m);
      return svd.singularValues()(0);
    }
    case MatNorm::Frobenius:
      return m.norm();
    case MatNorm::One:
      return m.cwiseAbs().colwise().sum().maxCoeff();
    case MatNorm::Inf:
      return m.cwiseAbs().rowwise().sum().maxCoeff();
  }
  throw std::invalid_argument("unknown matrix norm tag");
}

double wiener_norm(const LaurentSeries& f) { return l1_mass(f); }

double wiener_norm(const MatrixLoop& g, MatNorm which) {
  double s = 0.0;
  for (int k = g.kmin(); k <= g.kmax(); ++k) s += matrix_norm(g.coeff(k), which);
  return s;
}

double weighted_wiener_norm(const LaurentSeries& f, double m) {
  if (m < 0.0) throw std::invalid_argument("weight exponent must be nonnegative");
  double s = 0.0;
  for (int k = f.kmin(); k <= f.kmax(); ++k) {
    double w = std::max(std::pow(std::abs(static_cast<double>(k)), m), 1.0);
    s += w * std::abs(f.coeff(k));
  }
  return s;
}

namespace detail {

int default_samples(int band_width, int factor, int floor) {
  long long want = static_cast<long long>(factor) * band_width;
  long long n = std::max<long long>(want, floor);
  return static_cast<int>(std::min<long long>(n, 1 << 20));
}

std::vector<double> unwrap_phases(const std::vector<Complex>& values,
                                  double max_step) {
  if (values.empty()) throw std::invalid_argument("no samples to unwrap");
  std::vector<double> phi(values.size());
  phi[0] = std::arg(values[0]);
  for (std::size_t j = 1; j < values.size(); ++j) {
    if (values[j] == Complex(0.0, 0.0) || values[j - 1] == Complex(0.0, 0.0))
      throw NumericError("argument unwrapping hit a zero sample");
    double step = std::arg(values[j] / values[j - 1]);
    if (std::abs(step) > max_step)
      throw NumericError(
          "argument step between adjacent samples too large; increase the "
          "sample count");
    phi[j] = phi[j - 1] + step;
  }
  return phi;
}

double winding_turns(const std::vector<Complex>& values, double max_step) {
  std::vector<double> phi = unwrap_phases(values, max_step);
  double closing = std::arg(values.front() / values.back());
  if (std::abs(closing) > max_step)
    throw NumericError(
        "argument step between adjacent samples too large; increase the "
        "sample count");
  return (phi.back() + closing - phi.front()) / (2.0 * std::numbers::pi);
}

namespace {

double point_margin(const Complex& v) { return std::abs(v); }

double point_margin(const CMatrix& v) {
  Eigen::JacobiSVD<CMatrix> svd(v);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

Complex point_inverse(const Complex& v) { return Complex(1.0, 0.0) / v; }

CMatrix point_inverse(const CMatrix& v) {
  return v.partialPivLu().solve(CMatrix::Identity(v.rows(), v.cols()));
}

double point_gauge(const Complex& v) { return std::abs(v); }

double point_gauge(const CMatrix& v) { return matrix_norm(v, MatNorm::Op2); }

template <typename Coeff>
Banded<Coeff> banded_one(const Banded<Coeff>& like) {
  return Banded<Coeff>(0, {CoeffOps<Coeff>::one_like(like.zero_model())});
}

template <typename Coeff>
double residual_mass(const Banded<Coeff>& f) {
  double s = 0.0;
  for (int k = f.kmin(); k <= f.kmax(); ++k) s += point_gauge(f.coeff(k));
  return s;
}

template <typename Coeff>
Invertibility invertibility_impl(const Banded<Coeff>& g, int samples) {
  int N = samples > 0 ? samples : default_samples(g.count(), 4, 256);
  if (N < 4 * g.count())
    throw std::invalid_argument("sample count below four times the band width");
  double margin = std::numeric_limits<double>::infinity();
  for (const Complex& z : unit_circle_grid(N))
    margin = std::min(margin, point_margin(eval_point(g, z)));
  return Invertibility{margin > kInvertibilityFloor, margin};
}

template <typename Coeff>
Banded<Coeff> invert_impl(const Banded<Coeff>& g, const Budget& budget,
                          double tol) {
  Invertibility inv = is_invertible_on_circle(g, 0);
  if (!inv.invertible)
    throw NotInvertibleError("loop is not invertible on the circle",
                             inv.margin);
  const Banded<Coeff> one = banded_one(g);
  double best = std::numeric_limits<double>::infinity();
  for (int K = std::max(g.count(), 8);; K *= 2) {
    if (2 * K + 1 > budget.band_cap) {
      std::ostringstream msg;
      msg << "inversion band cap reached at residual " << best;
      throw TruncationError(msg.str(), best);
    }
    int N = std::max(2 * (2 * K + 1), 4 * g.count());
    std::vector<Coeff> values = circle_samples(g, N);
    for (Coeff& v : values) v = point_inverse(v);
    Banded<Coeff> h = from_samples(values, -K, K);
    double res = residual_mass(multiply(g, h, Budget::unlimited()) - one);
    if (res <= tol) return h;
    best = std::min(best, res);
  }
}

template <typename Coeff>
Banded<Coeff> exp_impl(const Banded<Coeff>& f, const Budget& budget,
                       double term_tol) {
  Banded<Coeff> acc = banded_one(f);
  Banded<Coeff> term = acc;
  const int max_terms = 400;
  for (int k = 1; k <= max_terms; ++k) {
    term = multiply(term, f, budget) * Complex(1.0 / static_cast<double>(k), 0.0);
    acc = acc + term;
    if (residual_mass(term) <= term_tol) return acc;
  }
  throw NumericError("exponential series did not reach the term tolerance");
}

// shared resynthesis loop: sample a pointwise log, build a banded candidate,
// accept when exp of the candidate reproduces g in Wiener norm
template <typename Coeff, typename LogSampler>
Banded<Coeff> log_impl(const Banded<Coeff>& g, const Budget& budget, double tol,
                       LogSampler&& log_samples) {
  Invertibility inv = is_invertible_on_circle(g, 0);
  if (!inv.invertible)
    throw NotInvertibleError("loop is not invertible on the circle",
                             inv.margin);
  double best = std::numeric_limits<double>::infinity();
  std::string last_unwrap_error;
  for (int K = std::max(g.count(), 8);; K *= 2) {
    if (2 * K + 1 > budget.band_cap) {
      if (!last_unwrap_error.empty()) throw NumericError(last_unwrap_error);
      std::ostringstream msg;
      msg << "logarithm band cap reached at residual " << best;
      throw TruncationError(msg.str(), best);
    }
    int N = std::max(2 * (2 * K + 1), 8 * g.count());
    std::vector<Coeff> values;
    try {
      values = log_samples(g, N);
    } catch (const NumericError& e) {
      last_unwrap_error = e.what();
      continue;
    }
    Banded<Coeff> x = from_samples(values, -K, K);
    last_unwrap_error.clear();
    double res =
        residual_mass(exp_impl(x, Budget::unlimited(), 1e-15) - g);
    if (res <= tol) return x;
    best = std::min(best, res);
  }
}

std::vector<Complex> scalar_log_samples(const LaurentSeries& g, int N) {
  std::vector<Complex> v = circle_samples(g, N);
  std::vector<double> phi =
      detail::unwrap_phases(v, 0.9 * std::numbers::pi);
  double closing = std::arg(v.front() / v.back());
  double turns = (phi.back() + closing - phi.front()) / (2.0 * std::numbers::pi);
  if (std::abs(turns) > 0.01)
    throw std::domain_error(
        "loop has nonzero winding number; no continuous logarithm exists");
  for (std::size_t j = 0; j < v.size(); ++j)
    v[j] = Complex(std::log(std::abs(v[j])), phi[j]);
  return v;
}

CMatrix mercator_log(const CMatrix& value) {
  int n = static_cast<int>(value.rows());
  CMatrix M = value - CMatrix::Identity(n, n);
  Eigen::ComplexEigenSolver<CMatrix> es(M, false);
  if (es.info() != Eigen::Success)
    throw NumericError("eigenvalue computation failed in matrix logarithm");
  double rho = es.eigenvalues().cwiseAbs().maxCoeff();
  if (rho >= 1.0 - 1e-9)
    throw std::domain_error(
        "matrix logarithm out of range: spectral radius of g - I reaches 1");
  CMatrix X = M;
  CMatrix P = M;
  const int max_terms = 5000;
  for (int j = 2; j <= max_terms; ++j) {
    P = P * M;
    double sign = (j % 2 == 0) ? -1.0 : 1.0;
    X += (sign / static_cast<double>(j)) * P;
    if (P.norm() / static_cast<double>(j) <=
        1e-16 * std::max(1.0, X.norm()))
      return X;
  }
  throw NumericError("matrix logarithm series did not converge");
}

std::vector<CMatrix> matrix_log_samples(const MatrixLoop& g, int N) {
  std::vector<CMatrix> v = circle_samples(g, N);
  for (CMatrix& m : v) m = mercator_log(m);
  return v;
}

}  // namespace

}  // namespace detail

double sup_circle(const LaurentSeries& f, int samples) {
  int N = samples > 0 ? samples : detail::default_samples(f.count(), 4, 256);
  double s = 0.0;
  for (const Complex& z : unit_circle_grid(N))
    s = std::max(s, std::abs(eval_point(f, z)));
  return s;
}

double sup_circle(const MatrixLoop& g, int samples) {
  int N = samples > 0 ? samples : detail::default_samples(g.count(), 4, 256);
  double s = 0.0;
  for (const Complex& z : unit_circle_grid(N))
    s = std::max(s, matrix_norm(eval_point(g, z), MatNorm::Op2));
  return s;
}

namespace {

LaurentSeries radial_scale(const LaurentSeries& f, double r) {
  std::vector<Complex> c;
  c.reserve(static_cast<std::size_t>(f.count()));
  for (int k = f.kmin(); k <= f.kmax(); ++k)
    c.push_back(f.coeff(k) * std::pow(r, k));
  return LaurentSeries(f.kmin(), std::move(c));
}

}  // namespace

double annulus_norm(const LaurentSeries& f, int n, int samples) {
  if (n < 1) throw std::invalid_argument("annulus parameter must be positive");
  int N = samples > 0 ? samples : detail::default_samples(f.count(), 8, 1024);
  double inner = sup_circle(radial_scale(f, 1.0 - 1.0 / n), N);
  double outer = sup_circle(radial_scale(f, 1.0 + 1.0 / n), N);
  return std::max({inner, outer, wiener_norm(f)});
}

NormReport norm_report(const LaurentSeries& f, const std::vector<double>& weights,
                       const std::vector<int>& annuli, int samples) {
  NormReport rep;
  rep.wiener = wiener_norm(f);
  for (double m : weights) rep.weighted[m] = weighted_wiener_norm(f, m);
  rep.sup = sup_circle(f, samples);
  for (int n : annuli) rep.annulus[n] = annulus_norm(f, n, samples);
  return rep;
}

Invertibility is_invertible_on_circle(const LaurentSeries& g, int samples) {
  return detail::invertibility_impl(g, samples);
}

Invertibility is_invertible_on_circle(const MatrixLoop& g, int samples) {
  return detail::invertibility_impl(g, samples);
}

LaurentSeries invert(const LaurentSeries& g, const Budget& budget, double tol) {
  return detail::invert_impl(g, budget, tol);
}

MatrixLoop invert(const MatrixLoop& g, const Budget& budget, double tol) {
  loop_dim(g);
  return detail::invert_impl(g, budget, tol);
}

LaurentSeries exp_loop(const LaurentSeries& f, const Budget& budget,
                       double term_tol) {
  return detail::exp_impl(f, budget, term_tol);
}

MatrixLoop exp_loop(const MatrixLoop& f, const Budget& budget, double term_tol) {
  loop_dim(f);
  return detail::exp_impl(f, budget, term_tol);
}

LaurentSeries log_loop(const LaurentSeries& g, const Budget& budget, double tol) {
  return detail::log_impl(g, budget, tol, detail::scalar_log_samples);
}

MatrixLoop log_loop(const MatrixLoop& g, const Budget& budget, double tol) {
  loop_dim(g);
  return detail::log_impl(g, budget, tol, detail::matrix_log_samples);
}

}  // namespace birkhoff
