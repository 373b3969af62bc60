#include "birkhoff/bch.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace birkhoff {

namespace {

CMatrix vec(const CMatrix& m) {
  CMatrix v(m.rows() * m.cols(), 1);
  int idx = 0;
  for (int j = 0; j < m.cols(); ++j)
    for (int i = 0; i < m.rows(); ++i) v(idx++, 0) = m(i, j);
  return v;
}

// least-squares coordinates of m in span(basis) through the stacked matrix B
struct SpanSolver {
  CMatrix B;
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod;

  explicit SpanSolver(const std::vector<CMatrix>& basis) {
    int rows = static_cast<int>(basis.front().rows() * basis.front().cols());
    B = CMatrix(rows, static_cast<int>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j) B.col(static_cast<int>(j)) = vec(basis[j]);
    cod.compute(B);
  }

  // returns the span residual and overwrites m with its span projection
  double snap(CMatrix& m) const {
    CMatrix rhs = vec(m);
    CMatrix coords = cod.solve(rhs);
    CMatrix proj = B * coords;
    double res = (rhs - proj).norm();
    int idx = 0;
    for (int j = 0; j < m.cols(); ++j)
      for (int i = 0; i < m.rows(); ++i) m(i, j) = proj(idx++, 0);
    return res;
  }
};

MatrixLoop bracket(const MatrixLoop& a, const MatrixLoop& b, const Budget& budget) {
  return multiply(a, b, budget) - multiply(b, a, budget);
}

// compositions of total into exactly parts summands, each at least 1
void for_each_composition(int total, int parts, std::vector<int>& scratch,
                          const std::function<void(const std::vector<int>&)>& fn) {
  if (parts == 1) {
    if (total >= 1) {
      scratch.push_back(total);
      fn(scratch);
      scratch.pop_back();
    }
    return;
  }
  for (int head = 1; head + (parts - 1) <= total; ++head) {
    scratch.push_back(head);
    for_each_composition(total - head, parts - 1, scratch, fn);
    scratch.pop_back();
  }
}

double element_norm(const LoopAlgebraElement& e) {
  return wiener_norm(e.series, e.rep.norm_tag);
}

void check_same_rep(const LieAlgebraRep& a, const LieAlgebraRep& b) {
  if (a.n != b.n || a.basis.size() != b.basis.size())
    throw std::invalid_argument("loop-algebra elements use different representations");
  for (std::size_t i = 0; i < a.basis.size(); ++i)
    if ((a.basis[i] - b.basis[i]).norm() > 1e-12)
      throw std::invalid_argument("loop-algebra elements use different representations");
}

LoopAlgebraElement wrap(const LieAlgebraRep& rep, MatrixLoop series) {
  return LoopAlgebraElement{rep, std::move(series)};
}

}  // namespace

LieAlgebraRep make_rep(std::vector<CMatrix> basis, MatNorm norm_tag,
                       double closure_tol) {
  if (basis.empty()) throw std::invalid_argument("empty Lie-algebra basis");
  int n = static_cast<int>(basis.front().rows());
  if (n < 1 || basis.front().cols() != n)
    throw std::invalid_argument("basis matrices must be square");
  for (const CMatrix& b : basis)
    if (b.rows() != n || b.cols() != n)
      throw std::invalid_argument("basis matrices differ in size");
  if (static_cast<int>(basis.size()) > n * n)
    throw std::invalid_argument("more basis matrices than the matrix space holds");

  SpanSolver span(basis);
  Eigen::ColPivHouseholderQR<CMatrix> qr(span.B);
  if (qr.rank() < static_cast<Eigen::Index>(basis.size()))
    throw std::invalid_argument("Lie-algebra basis is linearly dependent");

  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i + 1; j < basis.size(); ++j) {
      CMatrix br = basis[i] * basis[j] - basis[j] * basis[i];
      double scale = std::max(1.0, br.norm());
      CMatrix snapped = br;
      double res = span.snap(snapped);
      if (res > closure_tol * scale)
        throw std::invalid_argument(
            "Lie-algebra basis is not closed under the bracket");
    }

  return LieAlgebraRep{n, std::move(basis), norm_tag};
}

LieAlgebraRep sl2_rep() {
  CMatrix e = CMatrix::Zero(2, 2), f = CMatrix::Zero(2, 2), h = CMatrix::Zero(2, 2);
  e(0, 1) = 1.0;
  f(1, 0) = 1.0;
  h(0, 0) = 1.0;
  h(1, 1) = -1.0;
  return make_rep({e, f, h});
}

LieAlgebraRep gl_rep(int n) {
  if (n < 1) throw std::invalid_argument("dimension must be positive");
  std::vector<CMatrix> basis;
  basis.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      CMatrix b = CMatrix::Zero(n, n);
      b(i, j) = 1.0;
      basis.push_back(std::move(b));
    }
  return make_rep(std::move(basis));
}

LieAlgebraRep strictly_upper_rep(int n) {
  if (n < 2) throw std::invalid_argument("dimension must be at least 2");
  std::vector<CMatrix> basis;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      CMatrix b = CMatrix::Zero(n, n);
      b(i, j) = 1.0;
      basis.push_back(std::move(b));
    }
  return make_rep(std::move(basis));
}

LoopAlgebraElement make_element(const LieAlgebraRep& rep, const MatrixLoop& series,
                                double span_tol) {
  if (static_cast<int>(series.zero_model().rows()) != rep.n ||
      static_cast<int>(series.zero_model().cols()) != rep.n)
    throw std::invalid_argument("series dimension does not match the representation");
  SpanSolver span(rep.basis);
  std::vector<CMatrix> snapped;
  snapped.reserve(static_cast<std::size_t>(series.count()));
  for (int k = series.kmin(); k <= series.kmax(); ++k) {
    CMatrix c = series.coeff(k);
    double res = span.snap(c);
    if (res > span_tol) {
      std::ostringstream msg;
      msg << "coefficient at exponent " << k << " leaves the Lie-algebra span by "
          << res;
      throw std::domain_error(msg.str());
    }
    snapped.push_back(std::move(c));
  }
  return LoopAlgebraElement{rep, MatrixLoop(series.kmin(), std::move(snapped))};
}

MatrixLoop random_loop_algebra_series(const LieAlgebraRep& rep, int kmin, int kmax,
                                      double target_norm, std::mt19937_64& rng) {
  if (kmin > kmax) throw std::invalid_argument("empty exponent band");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<CMatrix> c;
  for (int k = kmin; k <= kmax; ++k) {
    CMatrix m = CMatrix::Zero(rep.n, rep.n);
    for (const CMatrix& b : rep.basis) m += Complex(gauss(rng), gauss(rng)) * b;
    c.push_back(std::move(m));
  }
  MatrixLoop series(kmin, std::move(c));
  double norm = wiener_norm(series, rep.norm_tag);
  if (norm == 0.0) return series;
  return series * Complex(target_norm / norm, 0.0);
}

MatrixLoop bch_series(const MatrixLoop& x, const MatrixLoop& y, int order,
                      const Budget& budget) {
  if (order < 1 || order > 8)
    throw std::invalid_argument("BCH truncation order must lie in [1, 8]");
  loop_dim(x);
  if (!CoeffOps<CMatrix>::same_shape(x.zero_model(), y.zero_model()))
    throw std::invalid_argument("BCH arguments differ in dimension");

  // K_{2p} = B_{2p} / (2p)!
  static constexpr double kEven[4] = {0.0, 1.0 / 12.0, -1.0 / 720.0,
                                      1.0 / 30240.0};

  MatrixLoop sum = x + y;
  if (order == 1) return sum;
  MatrixLoop diff = x - y;
  std::vector<MatrixLoop> c = {sum};  // c[m] holds the degree-(m+1) term

  for (int n = 1; n < order; ++n) {
    // (n+1) c_{n+1} = [x - y, c_n]/2
    //   + sum over even p <= n of K_p * sum over compositions
    //     k_1 + ... + k_p = n of [c_{k_1}, [..., [c_{k_p}, x + y]...]]
    MatrixLoop next = bracket(diff, c[static_cast<std::size_t>(n - 1)], budget) *
                      Complex(0.5, 0.0);
    for (int p = 2; p <= n; p += 2) {
      double kp = kEven[p / 2];
      MatrixLoop inner(CoeffOps<CMatrix>::zero_like(x.zero_model()));
      std::vector<int> scratch;
      for_each_composition(n, p, scratch, [&](const std::vector<int>& parts) {
        MatrixLoop acc = sum;
        for (int i = p - 1; i >= 0; --i)
          acc = bracket(c[static_cast<std::size_t>(parts[static_cast<std::size_t>(i)] - 1)],
                        acc, budget);
        inner = inner + acc;
      });
      next = next + inner * Complex(kp, 0.0);
    }
    c.push_back(next * Complex(1.0 / (n + 1), 0.0));
  }

  MatrixLoop z = c[0];
  for (int m = 1; m < order; ++m) z = z + c[static_cast<std::size_t>(m)];
  return z;
}

LoopAlgebraElement bch_multiply(const LoopAlgebraElement& x,
                                const LoopAlgebraElement& y, int order,
                                const BchConfig& cfg) {
  check_same_rep(x.rep, y.rep);
  double nx = element_norm(x), ny = element_norm(y);
  if (nx > cfg.radius || ny > cfg.radius) {
    std::ostringstream msg;
    msg << "BCH arguments outside the convergence ball (norms " << nx << ", "
        << ny << ", radius " << cfg.radius << ")";
    throw std::domain_error(msg.str());
  }
  return wrap(x.rep, bch_series(x.series, y.series, order, cfg.budget));
}

LoopAlgebraElement bch_remainder(const LoopAlgebraElement& x,
                                 const LoopAlgebraElement& y, int order,
                                 const BchConfig& cfg) {
  LoopAlgebraElement z = bch_multiply(x, y, order, cfg);
  return wrap(x.rep, z.series - x.series - y.series);
}

SplitSolution split_solve(const LoopAlgebraElement& y, const BchConfig& cfg) {
  double ny = element_norm(y);
  if (ny > cfg.radius / 4.0) {
    std::ostringstream msg;
    msg << "right-hand side norm " << ny << " exceeds the solvable ball radius "
        << cfg.radius / 4.0;
    throw std::domain_error(msg.str());
  }

  auto remainder_of = [&](const MatrixLoop& x) {
    return bch_series(project_plus(x), project_ominus(x), cfg.order, cfg.budget) -
           x;
  };

  MatrixLoop x = y.series;
  int iterations = 0;
  double contraction = 0.0;
  double final_step = 0.0;
  double prev_step = -1.0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    MatrixLoop next = y.series - remainder_of(x);
    double step = wiener_norm(next - x, y.rep.norm_tag);
    iterations = it;
    final_step = step;
    // ratios only count while the steps are well above the roundoff floor
    if (prev_step > 1e-10 && step > 1e-16)
      contraction = std::max(contraction, step / prev_step);
    prev_step = step;
    x = next;
    if (step < cfg.step_tol) break;
  }

  double residual = wiener_norm(
      bch_series(project_plus(x), project_ominus(x), cfg.order, cfg.budget) -
          y.series,
      y.rep.norm_tag);
  if (residual > cfg.solve_tol) {
    std::ostringstream msg;
    msg << "split solver stalled: residual " << residual << " after "
        << iterations << " iterations";
    throw NumericError(msg.str());
  }
  return SplitSolution{wrap(y.rep, x), iterations, contraction, final_step,
                       residual};
}

LocalFactorization group_factorize_local(const MatrixLoop& g,
                                         const LieAlgebraRep& rep,
                                         const BchConfig& cfg, int verify_samples,
                                         double verify_tol) {
  MatrixLoop y_loop = log_loop(g, cfg.budget);
  LoopAlgebraElement y = make_element(rep, y_loop, 1e-8);

  SplitSolution solve = split_solve(y, cfg);
  MatrixLoop plus = exp_loop(project_plus(solve.x.series), cfg.budget);
  MatrixLoop minus = exp_loop(project_ominus(solve.x.series), cfg.budget);

  double sup = 0.0;
  for (const Complex& z : unit_circle_grid(verify_samples)) {
    CMatrix d = eval_point(g, z) - eval_point(plus, z) * eval_point(minus, z);
    sup = std::max(sup, matrix_norm(d, MatNorm::Op2));
  }
  if (sup > verify_tol) {
    std::ostringstream msg;
    msg << "factor product misses the loop by " << sup << " in sup norm";
    throw NumericError(msg.str());
  }
  return LocalFactorization{std::move(plus), std::move(minus), sup,
                            std::move(solve)};
}

namespace {

std::vector<MatrixLoop> lipschitz_points(const LieAlgebraRep& rep, int kmin,
                                         int kmax, double radius, int count,
                                         std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<MatrixLoop> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    pts.push_back(random_loop_algebra_series(rep, kmin, kmax,
                                             radius * unif(rng), rng));
  return pts;
}

}  // namespace

double lipschitz_estimate(const std::function<MatrixLoop(const MatrixLoop&)>& map,
                          const LieAlgebraRep& rep, int kmin, int kmax,
                          double radius, int samples, std::uint64_t seed) {
  if (samples < 100)
    throw std::invalid_argument("lipschitz estimate needs at least 100 samples");
  std::mt19937_64 rng(seed);
  std::vector<MatrixLoop> a = lipschitz_points(rep, kmin, kmax, radius, samples, rng);
  std::vector<MatrixLoop> b = lipschitz_points(rep, kmin, kmax, radius, samples, rng);
  double lip = 0.0;
  for (int i = 0; i < samples; ++i) {
    // pair each global draw with a nearby second point on odd indices
    MatrixLoop second = (i % 2 == 0)
                            ? b[static_cast<std::size_t>(i)]
                            : a[static_cast<std::size_t>(i)] +
                                  b[static_cast<std::size_t>(i)] * Complex(1e-4, 0.0);
    double dist = wiener_norm(second - a[static_cast<std::size_t>(i)], rep.norm_tag);
    if (dist < 1e-12) continue;
    double image_dist = wiener_norm(map(second) - map(a[static_cast<std::size_t>(i)]),
                                    rep.norm_tag);
    lip = std::max(lip, image_dist / dist);
  }
  return lip;
}

double lipschitz_estimate_pair(
    const std::function<MatrixLoop(const MatrixLoop&, const MatrixLoop&)>& map,
    const LieAlgebraRep& rep, int kmin, int kmax, double radius, int samples,
    std::uint64_t seed) {
  if (samples < 100)
    throw std::invalid_argument("lipschitz estimate needs at least 100 samples");
  std::mt19937_64 rng(seed);
  std::vector<MatrixLoop> x1 = lipschitz_points(rep, kmin, kmax, radius, samples, rng);
  std::vector<MatrixLoop> y1 = lipschitz_points(rep, kmin, kmax, radius, samples, rng);
  std::vector<MatrixLoop> x2 = lipschitz_points(rep, kmin, kmax, radius, samples, rng);
  std::vector<MatrixLoop> y2 = lipschitz_points(rep, kmin, kmax, radius, samples, rng);
  double lip = 0.0;
  for (int i = 0; i < samples; ++i) {
    std::size_t s = static_cast<std::size_t>(i);
    MatrixLoop xb = x2[s], yb = y2[s];
    if (i % 2 == 1) {
      // probe locally around (x1, y1) as well
      xb = x1[s] + x2[s] * Complex(1e-4, 0.0);
      yb = y1[s] + y2[s] * Complex(1e-4, 0.0);
    }
    double dist = std::max(wiener_norm(xb - x1[s], rep.norm_tag),
                           wiener_norm(yb - y1[s], rep.norm_tag));
    if (dist < 1e-12) continue;
    double image_dist =
        wiener_norm(map(xb, yb) - map(x1[s], y1[s]), rep.norm_tag);
    lip = std::max(lip, image_dist / dist);
  }
  return lip;
}

}  // namespace birkhoff
