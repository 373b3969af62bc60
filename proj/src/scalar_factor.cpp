#include "birkhoff/scalar_factor.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace birkhoff {

namespace {

int winding_from_samples(const LaurentSeries& g, int N) {
  double turns =
      detail::winding_turns(circle_samples(g, N), 0.9 * std::numbers::pi);
  double nearest = std::round(turns);
  if (std::abs(turns - nearest) > 0.01) {
    std::ostringstream msg;
    msg << "winding number ambiguous (" << turns
        << " turns); increase the sample count or the margin";
    throw NumericError(msg.str());
  }
  return static_cast<int>(nearest);
}

std::vector<Complex> polynomial_roots(const std::vector<Complex>& p) {
  int d = static_cast<int>(p.size()) - 1;
  CMatrix companion = CMatrix::Zero(d, d);
  for (int i = 1; i < d; ++i) companion(i, i - 1) = Complex(1.0, 0.0);
  for (int i = 0; i < d; ++i)
    companion(i, d - 1) = -p[static_cast<std::size_t>(i)] / p[static_cast<std::size_t>(d)];
  Eigen::ComplexEigenSolver<CMatrix> es(companion, false);
  if (es.info() != Eigen::Success)
    throw NumericError("companion-matrix eigenvalue computation failed");
  std::vector<Complex> roots(es.eigenvalues().data(),
                             es.eigenvalues().data() + d);
  std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

void finalize(ScalarFactorization& fact, const LaurentSeries& g) {
  LaurentSeries rec = multiply(
      multiply(fact.plus, monomial(fact.kappa), Budget::unlimited()),
      fact.minus, Budget::unlimited());
  fact.residual = wiener_norm(g - rec);
  fact.plus_margin = is_invertible_on_circle(fact.plus).margin;
  fact.minus_margin = is_invertible_on_circle(fact.minus).margin;
}

}  // namespace

int winding_number(const LaurentSeries& g, int samples) {
  Invertibility inv = is_invertible_on_circle(g, 0);
  if (!inv.invertible)
    throw NotInvertibleError("loop is not invertible on the circle", inv.margin);
  if (samples > 0) {
    if (samples < 8 * g.count())
      throw std::invalid_argument(
          "winding sample count below eight times the band width");
    return winding_from_samples(g, samples);
  }
  int N = detail::default_samples(g.count(), 8, 256);
  for (;; N *= 2) {
    try {
      return winding_from_samples(g, N);
    } catch (const NumericError&) {
      if (2 * N > (1 << 20)) throw;
    }
  }
}

ScalarFactorization factor_laurent_poly(const LaurentSeries& g) {
  Invertibility inv = is_invertible_on_circle(g, 0);
  if (!inv.invertible)
    throw NotInvertibleError("loop is not invertible on the circle", inv.margin);

  ScalarFactorization fact;
  fact.route = ScalarRoute::Roots;

  // g = z^kmin * p with p a genuine polynomial (canonical form makes the
  // leading coefficient nonzero)
  std::vector<Complex> p;
  p.reserve(static_cast<std::size_t>(g.count()));
  for (int k = g.kmin(); k <= g.kmax(); ++k) p.push_back(g.coeff(k));
  int d = static_cast<int>(p.size()) - 1;

  if (d == 0) {
    fact.plus = constant_series(p[0]);
    fact.kappa = g.kmin();
    fact.minus = constant_series(Complex(1.0, 0.0));
    finalize(fact, g);
    return fact;
  }

  std::vector<Complex> roots = polynomial_roots(p);
  LaurentSeries plus = constant_series(p[static_cast<std::size_t>(d)]);
  LaurentSeries minus = constant_series(Complex(1.0, 0.0));
  int inside = 0;
  for (const Complex& w : roots) {
    double dist = std::abs(std::abs(w) - 1.0);
    if (dist <= 1e-8)
      throw NotInvertibleError("root of the loop lies on the circle", dist);
    if (std::abs(w) > 1.0) {
      plus = multiply(plus, monomial(1) - constant_series(w), Budget::unlimited());
    } else {
      minus = multiply(minus, constant_series(Complex(1.0, 0.0)) - monomial(-1, w),
                       Budget::unlimited());
      ++inside;
    }
  }
  fact.plus = plus;
  fact.kappa = g.kmin() + inside;
  fact.minus = minus;
  finalize(fact, g);
  return fact;
}

ScalarFactorization scalar_factorize(const LaurentSeries& g, const Budget& budget,
                                     double tol) {
  Invertibility inv = is_invertible_on_circle(g, 0);
  if (!inv.invertible)
    throw NotInvertibleError("loop is not invertible on the circle", inv.margin);

  int kappa = winding_number(g);
  std::string exp_route_error;
  try {
    LaurentSeries h = shifted(g, -kappa);
    LaurentSeries x = log_loop(h, budget);
    LaurentSeries plus = exp_loop(project_plus(x), budget);
    LaurentSeries minus = exp_loop(project_ominus(x), budget);
    ScalarFactorization fact;
    fact.plus = plus;
    fact.kappa = kappa;
    fact.minus = minus;
    fact.route = ScalarRoute::ExpLog;
    finalize(fact, g);
    if (fact.residual <= tol) return fact;
    std::ostringstream msg;
    msg << "exp/log route residual " << fact.residual << " above tolerance";
    exp_route_error = msg.str();
  } catch (const TruncationError& e) {
    exp_route_error = e.what();
  } catch (const NumericError& e) {
    exp_route_error = e.what();
  }

  ScalarFactorization fact = factor_laurent_poly(g);
  if (fact.kappa != kappa)
    throw InvariantViolation(
        "root-count index disagrees with the winding number");
  if (fact.residual > tol) {
    std::ostringstream msg;
    msg << "factorization residual " << fact.residual << " above tolerance "
        << tol << " on both routes (exp/log route: " << exp_route_error << ")";
    throw NumericError(msg.str());
  }
  return fact;
}

}  // namespace birkhoff
