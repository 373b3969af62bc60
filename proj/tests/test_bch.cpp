#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "birkhoff/bch.hpp"

using namespace birkhoff;

namespace {

std::mt19937_64 rng(88131421u);

MatrixLoop constant_element(const CMatrix& m) { return MatrixLoop(0, {m}); }

double sup_distance(const MatrixLoop& a, const MatrixLoop& b, int samples) {
  double sup = 0.0;
  for (const Complex& z : unit_circle_grid(samples))
    sup = std::max(sup,
                   matrix_norm(eval_point(a, z) - eval_point(b, z), MatNorm::Op2));
  return sup;
}

}  // namespace

TEST_CASE("representation construction validates independence and closure") {
  LieAlgebraRep sl2 = sl2_rep();
  CHECK(sl2.n == 2);
  CHECK(sl2.basis.size() == 3);

  CHECK(gl_rep(3).basis.size() == 9);
  CHECK(strictly_upper_rep(3).basis.size() == 3);

  // duplicated matrix: dependent
  CMatrix e = CMatrix::Zero(2, 2);
  e(0, 1) = 1.0;
  CHECK_THROWS_AS(make_rep({e, e}), std::invalid_argument);

  // {E, H} alone is not closed: [H, E] = 2E stays, but {E, F} misses H
  CMatrix f = CMatrix::Zero(2, 2);
  f(1, 0) = 1.0;
  CHECK_THROWS_AS(make_rep({e, f}), std::invalid_argument);
}

TEST_CASE("element construction snaps coefficients onto the span") {
  LieAlgebraRep rep = sl2_rep();

  CMatrix ok = CMatrix::Zero(2, 2);
  ok(0, 1) = Complex(0.3, 0.1);
  ok(0, 0) = Complex(1e-10, 0.0);  // small trace part: projected out
  LoopAlgebraElement el = make_element(rep, constant_element(ok));
  CMatrix snapped = el.series.coeff(0);
  CHECK(std::abs(snapped(0, 0) + snapped(1, 1)) <= 1e-15);  // traceless
  CHECK(std::abs(snapped(0, 1) - Complex(0.3, 0.1)) <= 1e-12);

  CMatrix bad = CMatrix::Identity(2, 2);  // trace 2: far from sl2
  CHECK_THROWS_AS(make_element(rep, constant_element(bad)), std::domain_error);
}

TEST_CASE("BCH of commuting arguments is the sum") {
  LieAlgebraRep rep = gl_rep(2);
  CMatrix d1 = CMatrix::Zero(2, 2), d2 = CMatrix::Zero(2, 2);
  d1(0, 0) = 0.03;
  d1(1, 1) = 0.01;
  d2(0, 0) = 0.02;
  d2(1, 1) = 0.05;
  MatrixLoop x(1, {d1});
  MatrixLoop y(-1, {d2});
  for (int order : {1, 2, 4, 6}) {
    MatrixLoop z = bch_series(x, y, order);
    CHECK(coeff_distance(z, x + y) <= 1e-15);
  }

  // y = 0 returns x at any order
  MatrixLoop zero(CMatrix::Zero(2, 2));
  CHECK(coeff_distance(bch_series(x, zero, 6), x) <= 1e-15);

  // equal arguments: every bracket vanishes
  CHECK(coeff_distance(bch_series(x, x, 6), x * Complex(2.0, 0.0)) <= 1e-15);
}

TEST_CASE("BCH matches the frozen sl2 oracle") {
  LieAlgebraRep rep = sl2_rep();
  CMatrix e = rep.basis[0], f = rep.basis[1];
  MatrixLoop x = constant_element(0.05 * e);
  MatrixLoop y = constant_element(0.05 * f);
  MatrixLoop z = bch_series(x, y, 6);
  CHECK(z.kmin() == 0);
  CHECK(z.kmax() == 0);
  CMatrix zc = z.coeff(0);
  CHECK(std::abs(zc(0, 1) - Complex(0.049979177077756065, 0.0)) <= 1e-10);
  CHECK(std::abs(zc(1, 0) - Complex(0.049979177077756065, 0.0)) <= 1e-10);
  CHECK(std::abs(zc(0, 0) - Complex(0.0012494794269437175, 0.0)) <= 1e-10);
  CHECK(std::abs(zc(1, 1) + Complex(0.0012494794269437175, 0.0)) <= 1e-10);

  // remainder leading term (eps^2/2) [E, F] = (eps^2/2) H
  BchConfig cfg;
  LoopAlgebraElement ex = make_element(rep, x);
  LoopAlgebraElement ey = make_element(rep, y);
  LoopAlgebraElement r = bch_remainder(ex, ey, 2, cfg);
  CHECK(std::abs(r.series.coeff(0)(0, 0) - Complex(0.00125, 0.0)) <= 1e-15);
}

TEST_CASE("exp of the BCH combination matches the product of exps") {
  LieAlgebraRep rep = sl2_rep();
  for (int trial = 0; trial < 20; ++trial) {
    MatrixLoop x = random_loop_algebra_series(rep, -2, 2, 0.05, rng);
    MatrixLoop y = random_loop_algebra_series(rep, -2, 2, 0.05, rng);
    MatrixLoop z = bch_series(x, y, 6);
    MatrixLoop lhs = multiply(exp_loop(x), exp_loop(y), Budget::unlimited());
    MatrixLoop rhs = exp_loop(z, Budget::unlimited());
    CHECK(sup_distance(lhs, rhs, 256) <= 1e-10);
  }
}

TEST_CASE("BCH is exact at the nilpotency order for strictly upper loops") {
  LieAlgebraRep rep = strictly_upper_rep(3);
  for (int trial = 0; trial < 10; ++trial) {
    MatrixLoop x = random_loop_algebra_series(rep, -1, 1, 0.3, rng);
    MatrixLoop y = random_loop_algebra_series(rep, -1, 1, 0.3, rng);
    // brackets of degree 3 and higher vanish identically
    MatrixLoop z2 = bch_series(x, y, 2);
    MatrixLoop z6 = bch_series(x, y, 6);
    CHECK(coeff_distance(z2, z6) <= 1e-14);
    MatrixLoop lhs = multiply(exp_loop(x), exp_loop(y), Budget::unlimited());
    CHECK(sup_distance(lhs, exp_loop(z2, Budget::unlimited()), 128) <= 1e-13);
  }
}

TEST_CASE("ball gating on the element api") {
  LieAlgebraRep rep = sl2_rep();
  MatrixLoop big = random_loop_algebra_series(rep, -1, 1, 0.5, rng);
  MatrixLoop ok = random_loop_algebra_series(rep, -1, 1, 0.05, rng);
  LoopAlgebraElement eb = make_element(rep, big);
  LoopAlgebraElement eo = make_element(rep, ok);
  BchConfig cfg;
  CHECK_THROWS_AS(bch_multiply(eb, eo, 6, cfg), std::domain_error);
  CHECK_THROWS_AS(bch_series(ok, ok, 0), std::invalid_argument);
  CHECK_THROWS_AS(bch_series(ok, ok, 9), std::invalid_argument);
}

TEST_CASE("split solver fixed points") {
  LieAlgebraRep rep = sl2_rep();
  BchConfig cfg;

  // purely plus right-hand side: x = y and the remainder vanishes
  MatrixLoop yplus = project_plus(random_loop_algebra_series(rep, 0, 2, 0.02, rng));
  SplitSolution s1 = split_solve(make_element(rep, yplus), cfg);
  CHECK(coeff_distance(s1.x.series, yplus) <= 1e-13);
  CHECK(s1.iterations <= 3);

  // abelian representation: remainder is identically zero
  LieAlgebraRep ab = make_rep({CMatrix::Identity(2, 2)});
  MatrixLoop yab = random_loop_algebra_series(ab, -2, 2, 0.02, rng);
  SplitSolution s2 = split_solve(make_element(ab, yab), cfg);
  CHECK(coeff_distance(s2.x.series, yab) <= 1e-13);

  // ball gate
  MatrixLoop fat = random_loop_algebra_series(rep, -1, 1, 0.05, rng);
  CHECK_THROWS_AS(split_solve(make_element(rep, fat), cfg), std::domain_error);
}

TEST_CASE("split solver solves the mixed problem with geometric convergence") {
  LieAlgebraRep rep = sl2_rep();
  BchConfig cfg;
  for (int trial = 0; trial < 15; ++trial) {
    MatrixLoop ys = random_loop_algebra_series(rep, -2, 2, 0.02, rng);
    LoopAlgebraElement y = make_element(rep, ys);
    SplitSolution sol = split_solve(y, cfg);
    CHECK(sol.iterations <= 60);
    CHECK(sol.contraction <= 0.55);
    CHECK(sol.residual <= 1e-10);

    MatrixLoop lhs = multiply(exp_loop(project_plus(sol.x.series)),
                              exp_loop(project_ominus(sol.x.series)),
                              Budget::unlimited());
    MatrixLoop rhs = exp_loop(ys, Budget::unlimited());
    CHECK(sup_distance(lhs, rhs, 256) <= 1e-9);
  }
}

TEST_CASE("near-identity group factorization") {
  LieAlgebraRep rep = sl2_rep();
  BchConfig cfg;

  LocalFactorization id = group_factorize_local(identity_loop(2), rep, cfg);
  CHECK(id.residual <= 1e-12);
  CHECK(coeff_distance(id.plus, identity_loop(2)) <= 1e-10);
  CHECK(coeff_distance(id.minus, identity_loop(2)) <= 1e-10);

  // purely plus input factors as (g, I)
  MatrixLoop a = project_plus(random_loop_algebra_series(rep, 1, 2, 0.02, rng));
  MatrixLoop g = exp_loop(a);
  LocalFactorization f = group_factorize_local(g, rep, cfg);
  CHECK(sup_distance(f.plus, g, 128) <= 1e-9);
  CHECK(coeff_distance(f.minus, identity_loop(2)) <= 1e-9);

  // mixed input: reconstruction and exact normalization
  MatrixLoop xs = random_loop_algebra_series(rep, -2, 2, 0.02, rng);
  MatrixLoop gm = exp_loop(xs);
  LocalFactorization fm = group_factorize_local(gm, rep, cfg);
  CHECK(fm.residual <= 1e-8);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CHECK(fm.minus.coeff(0)(i, j) == (i == j ? Complex(1.0, 0.0) : Complex(0.0, 0.0)));
    }
  CHECK(fm.minus.kmax() <= 0);
  CHECK(fm.plus.kmin() >= 0);

  // coefficients outside the algebra are rejected
  CMatrix off = CMatrix::Identity(2, 2) * 0.01;
  MatrixLoop bad = exp_loop(MatrixLoop(1, {off}) + identity_loop(2) * Complex(0.0, 0.0));
  CHECK_THROWS_AS(group_factorize_local(identity_loop(2) + MatrixLoop(1, {off}), rep, cfg),
                  std::domain_error);
}

TEST_CASE("lipschitz estimates recognize linear maps") {
  LieAlgebraRep rep = sl2_rep();
  double ident = lipschitz_estimate([](const MatrixLoop& m) { return m; }, rep,
                                    -1, 1, 0.05, 120);
  CHECK(ident >= 1.0 - 1e-9);
  CHECK(ident <= 1.0 + 1e-9);

  double doubler = lipschitz_estimate(
      [](const MatrixLoop& m) { return m * Complex(2.0, 0.0); }, rep, -1, 1,
      0.05, 120);
  CHECK(doubler == doctest::Approx(2.0).epsilon(1e-9));

  CHECK_THROWS_AS(lipschitz_estimate([](const MatrixLoop& m) { return m; }, rep,
                                     -1, 1, 0.05, 50),
                  std::invalid_argument);
}

TEST_CASE("the BCH remainder is a strict contraction on the working ball") {
  LieAlgebraRep rep = sl2_rep();
  BchConfig cfg;
  double lip = lipschitz_estimate_pair(
      [&](const MatrixLoop& x, const MatrixLoop& y) {
        return bch_series(x, y, cfg.order, cfg.budget) - x - y;
      },
      rep, -2, 2, 0.125, 150);
  CHECK(lip <= 0.27);

  // the projection-composed solver map stays below 1/2 on the half ball
  double lip_solver = lipschitz_estimate(
      [&](const MatrixLoop& x) {
        return bch_series(project_plus(x), project_ominus(x), cfg.order,
                          cfg.budget) -
               x;
      },
      rep, -2, 2, 0.0625, 150);
  CHECK(lip_solver <= 0.52);
}
