#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>

#include "rank1/gallery.hpp"
#include "rank1/stability.hpp"
#include "test_util.hpp"

using namespace rank1;
using namespace rank1::testing;
using Rational = boost::multiprecision::cpp_rational;

namespace {

RankOneSystem plain(DenseMatrix a, Vector b) {
  const Index n = b.size();
  return RankOneSystem(Matrix(std::move(a)), Vector(n, 0.0), Vector(n, 0.0), std::move(b));
}

double default_kappas_for_test(std::uint64_t seed) {
  constexpr double grid[] = {1e6, 1e8, 1e10, 1e12};
  return grid[seed % 4];
}

GeneratedProblem problem(CaseTag c, Index n, double kappa, std::uint64_t seed) {
  return make_case(make_base(default_base_spec(c), n, kappa, seed), c, seed, {false});
}

}  // namespace

TEST_CASE("residual special cases") {
  const DenseMatrix a = well_conditioned(6, 1);
  const Vector b = random_vector(6, 2), u = random_vector(6, 3), v = random_vector(6, 4);
  const RankOneSystem sys(Matrix(a), u, v, b);
  CHECK(residual(sys, Vector(6, 0.0)) == b);
  CHECK(residual_compensated(sys, Vector(6, 0.0)) == b);

  const RankOneSystem p = plain(a, b);
  const Vector x = random_vector(6, 5);
  const Vector ax = matvec(Matrix(a), x);
  const Vector r = residual(p, x);
  for (Index i = 0; i < 6; ++i) CHECK(r[i] == b[i] - ax[i]);
}

TEST_CASE("residual of the rounded exact solution of a 3x3 integer system") {
  // B = A + u v^T with integer data; x solved exactly, rounded, then tested
  const DenseMatrix a{{2, 1, 0}, {1, 3, 1}, {0, 1, 4}};
  const Vector u{1, -1, 2}, v{0, 1, 1}, b{1, 2, 3};
  const RankOneSystem sys(Matrix(a), u, v, b);
  // exact solution by Cramer's rule on B
  Rational bm[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) bm[i][j] = Rational(a(i, j)) + Rational(u[i]) * Rational(v[j]);
  auto det = [](Rational m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const Rational d = det(bm);
  REQUIRE(d != 0);
  Vector x(3);
  for (int k = 0; k < 3; ++k) {
    Rational m[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[i][j] = j == k ? Rational(b[i]) : bm[i][j];
    x[k] = Rational(det(m) / d).convert_to<double>();
  }
  const Vector r = residual(sys, x);
  const Vector bx = sys.abs_b_times(x);
  for (Index i = 0; i < 3; ++i) CHECK(std::abs(r[i]) <= 4.0 * 3 * kUnitRoundoff * (std::abs(b[i]) + bx[i]));
}

TEST_CASE("normwise backward error") {
  const RankOneSystem id = plain(DenseMatrix::identity(2), Vector{2, 0});
  const Vector x{1, 0};
  CHECK(normwise_berr(id, x, residual(id, x)) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const Vector exact{2, 0};
  CHECK(residual(id, exact) == Vector{0, 0});
  CHECK(normwise_berr(id, exact, residual(id, exact)) == 0.0);

  // eta = 0 exactly when r = 0
  const RankOneSystem zero = plain(DenseMatrix(2, 2), Vector{0, 0});
  CHECK(normwise_berr(zero, Vector{0, 0}, Vector{0, 0}) == 0.0);
  CHECK(std::isinf(normwise_berr(zero, Vector{0, 0}, Vector{1, 0})));
}

TEST_CASE("componentwise backward error") {
  // |B||x| + |b| = (2, 4) and r = (1, 1)
  const RankOneSystem id = plain(DenseMatrix::identity(2), Vector{1.5, 2.5});
  const Vector x{0.5, 1.5};
  const Vector r = residual(id, x);
  CHECK(r == Vector{1, 1});
  CHECK(componentwise_berr(id, x, r) == 0.5);
  CHECK(componentwise_berr(id, Vector{1.5, 2.5}, residual(id, Vector{1.5, 2.5})) == 0.0);
}

TEST_CASE("GEPP with one refinement step is componentwise stable") {
  for (CaseTag c : {CaseTag::C2ii, CaseTag::C4}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto p = problem(c, 150, 1e4, seed);
      const RankOneSystem sys = p.system();
      const PluFactorization fb(sys.b_dense());
      Vector x = fb.solve(sys.b());
      const Vector d = fb.solve(residual(sys, x));
      for (Index i = 0; i < x.size(); ++i) x[i] += d[i];
      CHECK(componentwise_berr(sys, x, residual(sys, x)) <= 8.0 * 150 * kUnitRoundoff);
    }
  }
}

TEST_CASE("forward error") {
  const Vector xr{1, -2, 4};
  CHECK(forward_err(xr, xr).value == 0.0);
  const Vector scaled{1.01, -2.02, 4.04};
  CHECK(forward_err(scaled, xr).value == doctest::Approx(0.01).epsilon(1e-12));
  const ForwardError abs = forward_err(Vector{0.5, 0}, Vector{0, 0});
  CHECK(abs.absolute);
  CHECK(abs.value == 0.5);
}

TEST_CASE("error_report bundles the metrics") {
  const auto p = problem(CaseTag::C1i, 60, 1e6, 1);
  const RankOneSystem sys = p.system();
  const auto f = factor_lu(sys.a());
  const Vector x = sm_solve(sys, *f).solution;
  const ErrorReport e = error_report(sys, x, std::span<const double>(p.x_ref));
  CHECK(e.residual == residual(sys, x));
  CHECK(e.residual_norm == norm_inf(e.residual));
  CHECK(e.normwise_berr == normwise_berr(sys, x, e.residual));
  CHECK(e.componentwise_berr == componentwise_berr(sys, x, e.residual));
  REQUIRE(e.forward_err);
  CHECK(e.forward_err->value == forward_err(x, p.x_ref).value);
  CHECK_FALSE(error_report(sys, x).forward_err);
}

TEST_CASE("normwise backward error is invariant under joint scaling") {
  // Scaling A, u and b by s scales B, b and r by s with x fixed. Only powers
  // of two scale the stored data without rounding, so only they leave eta
  // unchanged to rounding; s = 3 perturbs A at the level of eta itself.
  const auto p = problem(CaseTag::C2i, 40, 1e3, 5);
  const RankOneSystem sys = p.system();
  const auto f = factor_lu(sys.a());
  const Vector x = sm_solve(sys, *f).solution;
  const double eta = normwise_berr(sys, x, residual(sys, x));
  for (double s : {0.25, 0x1p-20, 1024.0, 0x1p40}) {
    DenseMatrix a = to_dense(p.a);
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < a.cols(); ++j) a(i, j) *= s;
    Vector u = p.u, b = p.b;
    for (auto& e : u) e *= s;
    for (auto& e : b) e *= s;
    const RankOneSystem scaled(Matrix(a), u, p.v, b);
    const double eta_s = normwise_berr(scaled, x, residual(scaled, x));
    CHECK(std::abs(eta_s - eta) <= 2.0 * kUnitRoundoff * eta + 1e-300);
  }
}

TEST_CASE("Rigal-Gaches perturbation reproduces eta") {
  CHECK(rigal_gaches_check(plain(DenseMatrix::identity(2), Vector{2, 0}), Vector{2, 0}).eta == 0.0);
  CHECK(rigal_gaches_check(plain(DenseMatrix::identity(2), Vector{2, 0}), Vector{2, 0}).passed);
  for (CaseTag c : {CaseTag::C1i, CaseTag::C1ii, CaseTag::C2i, CaseTag::C2ii, CaseTag::C3, CaseTag::C4}) {
    const auto p = problem(c, 80, c == CaseTag::C3 ? 1e9 : 1e4, 2);
    const RankOneSystem sys = p.system();
    const auto f = factor_lu(sys.a());
    for (const Vector& x : {sm_solve(sys, *f).solution, sm_ir_solve(sys, *f).solution, gepp_on_b(sys).solution}) {
      const RigalGachesCheck rg = rigal_gaches_check(sys, x);
      CHECK(rg.passed);
      CHECK(rg.eta == doctest::Approx(normwise_berr(sys, x, residual_compensated(sys, x))));
    }
  }
}

TEST_CASE("lemma31_check on a constructed trace") {
  const Vector v{1, 1};
  SmTrace t;
  t.y_hat = v;
  t.z_hat = v;
  t.vz = 2.0;
  t.alpha = 2.0;
  t.beta = 3.0;
  const Lemma31Result r = lemma31_check(t, v);
  CHECK(r.hypothesis_holds);
  CHECK(r.zeta == 0.5);
  CHECK(r.cos_vy == doctest::Approx(1.0));
  CHECK(r.cos_vz == doctest::Approx(1.0));
  CHECK(r.c_check == doctest::Approx(3.0));
  CHECK(r.lhs == doctest::Approx(std::sqrt(2.0) * 5.0 / 3.0));
  CHECK(r.bound_holds);

  t.vz = 1.0;
  t.beta = 2.0;
  const Lemma31Result b = lemma31_check(t, v);
  CHECK_FALSE(b.hypothesis_holds);
  CHECK(std::isinf(b.c_check));
  CHECK_FALSE(b.bound_holds);
}

TEST_CASE("property: lemma31 bound holds whenever its hypothesis does (Case 1i)") {
  int hyp = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto p = problem(CaseTag::C1i, 60, 1e6, seed);
    const RankOneSystem sys = p.system();
    const auto f = factor_lu(sys.a());
    const Lemma31Result r = lemma31_check(*sm_solve(sys, *f).sm, sys.v());
    CHECK(r.c_check >= 1.0);
    if (!r.hypothesis_holds) continue;
    ++hyp;
    CHECK(r.zeta == 1.0 / sm_solve(sys, *f).sm->vz);
    CHECK(r.bound_holds);
  }
  MESSAGE("hypothesis held in " << hyp << " of 100 trials");
}

TEST_CASE("prop32_bound evaluation") {
  // kappa = 1, unit norms, c_check = 2, c = c1 = 1
  const Prop32Inputs in{2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  const double u = kUnitRoundoff;
  CHECK(prop32_bound(in) == doctest::Approx(4.0 * u / (1.0 - u)).epsilon(1e-15));

  Prop32Inputs bad = in;
  bad.kappa_a = 1.0 / u;
  CHECK_THROWS_AS(prop32_bound(bad), HypothesisViolated);
}

TEST_CASE("property: prop32 residual bound on Case 1i") {
  int held = 0, trials = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto p = problem(CaseTag::C1i, 60, 1e6, seed);
    const RankOneSystem sys = p.system();
    const auto f = factor_lu(sys.a());
    const SmTrace t = *sm_solve(sys, *f).sm;
    const Lemma31Result l = lemma31_check(t, sys.v());
    const double c1 = 8.0 * 60;
    if (!l.hypothesis_holds) continue;
    const DenseMatrix bd = sys.b_dense();
    const double norm_b = singular_values(bd).front();
    const Prop32Inputs in{l.c_check, 1e6, p.sigma.front(), norm_b, 1.0 / p.sigma.back(), norm_2(sys.b()), c1, c1};
    ++trials;
    held += norm_2(residual(sys, t.x_hat)) <= prop32_bound(in);
  }
  REQUIRE(trials > 0);
  CHECK(double(held) >= 0.99 * double(trials));
}

TEST_CASE("g, h and t on a scalar system") {
  // A = 2, u = v = 1, b = 3: B = 3, x = 1 exactly
  const RankOneSystem sys(Matrix(DenseMatrix{{2}}), Vector{1}, Vector{1}, Vector{3});
  const PluFactorization f(DenseMatrix{{2}});
  const SmTrace t = *sm_solve(sys, f).sm;
  CHECK(t.z_hat == Vector{0.5});
  CHECK(t.alpha / t.beta == 1.0);
  CHECK(t.x_hat == Vector{1});

  const Vector g = g_times(sys, t.x_hat);
  const Vector h = h_bound(sys, t.z_hat, 1.0);
  CHECK(g == Vector{6});   // n^2 |A||x| + |A||x| + 2 |u||v||x|
  CHECK(h == Vector{12});  // (2 + 3) |A||z| + 2 * 5 |u||v||z| + 2 |u|
  const Vector r = residual(sys, t.x_hat);
  CHECK(std::abs(r[0]) <= kUnitRoundoff * (g[0] + h[0]));

  const Vector tb = t_bound(sys, t.x_hat);
  CHECK(tb[0] == doctest::Approx(rank1::gamma(3.0) / kUnitRoundoff * 6.0));
  CHECK(t_bound(sys, Vector{0})[0] == doctest::Approx(rank1::gamma(3.0) / kUnitRoundoff * 3.0));
}

TEST_CASE("u = 0: h vanishes and the plain-solve residual meets the bound") {
  const DenseMatrix a = well_conditioned(30, 8);
  const RankOneSystem sys(Matrix(a), Vector(30, 0.0), random_vector(30, 1), random_vector(30, 2));
  const PluFactorization f(a);
  const SmTrace t = *sm_solve(sys, f).sm;
  const Vector h = h_bound(sys, t.z_hat, 0.0);
  for (double e : h) CHECK(e == 0.0);
  CHECK(sm_residual_bound_ratio(residual_compensated(sys, t.x_hat), g_times(sys, t.x_hat), h) <= 1.0);

  IrOptions one;
  one.tol = 0.0;
  one.max_ir = 1;
  const SolveReport ir = sm_ir_solve(sys, f, one);
  REQUIRE(ir.ir->step_count() == 1);
  CHECK(thm46_ratio(sys, *ir.sm, *ir.ir) == 0.0);
}

TEST_CASE("property: residual bounds on Case 1i, n = 100, 100 seeds") {
  double worst43 = 0.0, worst44 = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto p = problem(CaseTag::C1i, 100, default_kappas_for_test(seed), seed);
    const RankOneSystem sys = p.system();
    const auto f = factor_lu(sys.a());
    const SmTrace t = *sm_solve(sys, *f).sm;
    const BoundReport br = bound_report(sys, t);
    worst43 = std::max(worst43, br.thm43_ratio);
    worst44 = std::max(worst44, br.residual_rounding_ratio);
  }
  CHECK(worst43 <= 10.0);
  CHECK(worst44 <= 4.0);
}

TEST_CASE("refinement ratio on Case 4") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto p = problem(CaseTag::C4, 100, 1e2, seed);
    const RankOneSystem sys = p.system();
    const auto f = factor_lu(sys.a());
    IrOptions one;
    one.tol = 0.0;
    one.max_ir = 1;
    const SolveReport ir = sm_ir_solve(sys, *f, one);
    CHECK(thm46_ratio(sys, *ir.sm, *ir.ir) <= 1e2);
    CHECK(ir.ir->steps[0].componentwise_berr <= 10.0 * kUnitRoundoff);
  }
}

TEST_CASE("bound_report") {
  const auto p = problem(CaseTag::C1i, 50, 1e6, 3);
  const RankOneSystem sys = p.system();
  const auto f = factor_lu(sys.a());
  const SolveReport ir = sm_ir_solve(sys, *f);
  const Prop32Inputs in{0.0, 1e6, p.sigma.front(), 1.0, 1.0 / p.sigma.back(), norm_2(sys.b()), 400, 400};
  const BoundReport br = bound_report(sys, *ir.sm, &*ir.ir, in);
  CHECK(br.g_vec.size() == 50);
  CHECK(br.h_vec.size() == 50);
  CHECK(br.t_vec.size() == 50);
  CHECK(br.thm46_ratio.has_value() == !ir.ir->steps.empty());
  CHECK(br.prop32_bound.has_value() == br.lemma31.hypothesis_holds);
  CHECK_FALSE(bound_report(sys, *ir.sm).thm46_ratio.has_value());
}
