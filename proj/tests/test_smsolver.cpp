#include <doctest.h>

#include <algorithm>
#include <array>

#include "rank1/gallery.hpp"
#include "rank1/smsolver.hpp"
#include "rank1/stability.hpp"
#include "rational_oracle.hpp"
#include "test_util.hpp"

using namespace rank1;
using namespace rank1::testing;

namespace {

/// Forwards to a real factorization and counts the solves.
class CountingSolver final : public LinearSolver {
public:
  explicit CountingSolver(const LinearSolver& inner) : inner_(inner) {}
  Index order() const override { return inner_.order(); }
  SolverKind kind() const override { return inner_.kind(); }
  Vector solve(std::span<const double> b) const override {
    ++solves;
    return inner_.solve(b);
  }
  Vector solve_transpose(std::span<const double> b) const override { return inner_.solve_transpose(b); }
  mutable int solves = 0;

private:
  const LinearSolver& inner_;
};

RankOneSystem identity_e1_system() {
  return RankOneSystem(Matrix(DenseMatrix::identity(3)), Vector{1, 0, 0}, Vector{1, 0, 0}, Vector{1, 0, 0});
}

}  // namespace

TEST_CASE("method names") {
  for (Method m : {Method::GeppOnB, Method::SmLu, Method::SmQr, Method::SmLuIr, Method::Bec})
    CHECK(parse_method(to_string(m)) == m);
  CHECK(parse_method("gepp-on-b") == Method::GeppOnB);
  CHECK_FALSE(parse_method("lu").has_value());
}

TEST_CASE("closed-form system A = I, u = v = b = e1") {
  const RankOneSystem sys = identity_e1_system();
  const PluFactorization f(DenseMatrix::identity(3));

  const SolveReport sm = sm_solve(sys, f);
  CHECK(sm.sm->beta == 2.0);
  CHECK(sm.sm->alpha == 1.0);
  CHECK(sm.sm->theta == 0.5);
  CHECK(std::abs(sm.solution[0] - 0.5) <= 4.0 * kUnitRoundoff);
  CHECK(sm.solution[1] == 0.0);

  const SolveReport bec = bec_solve(sys, f);
  CHECK(bec.solution == sm.solution);
  CHECK(*bec.zeta == 0.5);
}

TEST_CASE("u = 0 reduces to a plain solve") {
  const DenseMatrix a = well_conditioned(10, 1);
  const Vector b = random_vector(10, 2), v = random_vector(10, 3);
  const RankOneSystem sys(Matrix(a), Vector(10, 0.0), v, b);
  const PluFactorization f(a);
  const QrFactorization q(a);
  CHECK(sm_solve(sys, f).solution == f.solve(b));
  CHECK(sm_solve(sys, q).solution == q.solve(b));
  CHECK(sm_solve(sys, q).method == Method::SmQr);
  // theta = v^T y stays nonzero, the correction vanishes through z = 0
  const SmTrace t0 = *sm_solve(sys, f).sm;
  CHECK(t0.beta == 1.0);
  CHECK(t0.theta == t0.alpha);
  CHECK(std::all_of(t0.w_hat.begin(), t0.w_hat.end(), [](double w) { return w == 0.0; }));

  const SolveReport bec = bec_solve(sys, f);
  CHECK(bec.solution == f.solve(b));
  CHECK(*bec.zeta == doctest::Approx(dot(v, bec.solution)));

  const SolveReport ir = sm_ir_solve(sys, f);
  CHECK(ir.ir->step_count() == 0);

  const RankOneSystem id(Matrix(DenseMatrix::identity(3)), Vector(3, 0.0), Vector(3, 1.0), Vector{1, 2, 3});
  CHECK(gepp_on_b(id).solution == Vector{1, 2, 3});
}

TEST_CASE("trace scalars are recomputable from the stored vectors") {
  const auto p = make_case(make_base(default_base_spec(CaseTag::C1i), 80, 1e6, 4), CaseTag::C1i, 4, {false});
  const RankOneSystem sys = p.system();
  const auto f = factor_lu(sys.a());
  const SmTrace t = *sm_solve(sys, *f).sm;
  CHECK(t.alpha == dot(sys.v(), t.y_hat));
  CHECK(t.vz == dot(sys.v(), t.z_hat));
  CHECK(t.beta == 1.0 + t.vz);
  CHECK(t.theta == t.alpha / t.beta);
  for (Index i = 0; i < sys.n(); ++i) {
    CHECK(t.w_hat[i] == t.theta * t.z_hat[i]);
    CHECK(t.x_hat[i] == t.y_hat[i] - t.w_hat[i]);
  }
}

TEST_CASE("breakdown when 1 + v^T A^{-1} u vanishes") {
  const RankOneSystem sys(Matrix(DenseMatrix::identity(3)), Vector{1, 0, 0}, Vector{-1, 0, 0}, Vector{1, 1, 1});
  const PluFactorization f(DenseMatrix::identity(3));
  CHECK(sm_steps(sys, f).breakdown);
  CHECK_THROWS_AS(sm_solve(sys, f), SmBreakdown);
  CHECK_THROWS_AS(sm_ir_solve(sys, f), SmBreakdown);
  CHECK_THROWS_AS(bec_solve(sys, f), SmBreakdown);
}

TEST_CASE("dimension mismatch between system and factorization") {
  const PluFactorization f(DenseMatrix::identity(4));
  CHECK_THROWS_AS(sm_solve(identity_e1_system(), f), DimensionError);
}

TEST_CASE("SM-IR wraps the base solve and reuses the factorization") {
  for (double kappa : {1e6, 1e10}) {
    const auto p = make_case(make_base(default_base_spec(CaseTag::C1i), 200, kappa, 2), CaseTag::C1i, 2, {false});
    const RankOneSystem sys = p.system();
    const auto f = factor_lu(sys.a());
    const SolveReport sm = sm_solve(sys, *f);

    CountingSolver counted(*f);
    const SolveReport ir = sm_ir_solve(sys, counted);
    CHECK(ir.sm->x_hat == sm.solution);
    CHECK(ir.ir->step_count() >= 1);
    CHECK(counted.solves == int(2 + ir.ir->step_count()));
    CHECK(ir.solution == ir.ir->steps.back().w_hat);
    CHECK(ir.ir->converged);
    CHECK(ir.ir->steps.back().normwise_berr < 5.0 * kUnitRoundoff);
    CHECK(ir.ir->step_count() <= IrOptions{}.max_ir);
  }
}

TEST_CASE("SM-IR options: cap, criterion and an already converged start") {
  const auto p = make_case(make_base(default_base_spec(CaseTag::C1i), 200, 1e12, 3), CaseTag::C1i, 3, {false});
  const RankOneSystem sys = p.system();
  const auto f = factor_lu(sys.a());

  IrOptions capped;
  capped.max_ir = 1;
  const SolveReport one = sm_ir_solve(sys, *f, capped);
  CHECK(one.ir->step_count() == 1);
  CHECK_FALSE(one.ir->converged);

  IrOptions cw;
  cw.criterion = StopCriterion::Componentwise;
  cw.tol = 1e3 * kUnitRoundoff;
  const SolveReport c = sm_ir_solve(sys, *f, cw);
  CHECK(c.ir->converged);
  CHECK(c.ir->steps.back().componentwise_berr < cw.tol);

  const DenseMatrix a = well_conditioned(20, 7);
  const RankOneSystem easy(Matrix(a), random_vector(20, 1, "u"), random_vector(20, 1, "v"), random_vector(20, 1, "b"));
  const PluFactorization fe(a);
  IrOptions loose;
  loose.tol = 1e-8;
  const SolveReport e = sm_ir_solve(easy, fe, loose);
  CHECK(e.ir->step_count() == 0);
  CHECK(e.solution == sm_solve(easy, fe).solution);
}

TEST_CASE("exact equivalence and floating-point accuracy on 3x3 integer systems") {
  int tested = 0;
  for (std::uint64_t seed = 1; tested < 300; ++seed) {
    const RationalSystem s = random_integer_system(seed);
    const auto exact = rational_solve(s.bm, s.b);
    const auto via_sm = rational_sm(s.a, s.u, s.v, s.b);
    if (!exact || !via_sm) continue;
    ++tested;
    CHECK(*exact == *via_sm);

    const DenseMatrix bd = s.sys.b_dense();
    const double tol = 1e2 * kUnitRoundoff * kappa2(bd);
    const PluFactorization f(to_dense(s.sys.a()));
    try {
      CHECK(rel_err(sm_solve(s.sys, f).solution, *exact) <= tol);
      CHECK(rel_err(bec_solve(s.sys, f).solution, *exact) <= tol);
    } catch (const SmBreakdown&) {
    }
    CHECK(rel_err(gepp_on_b(s.sys).solution, *exact) <= tol);
  }
}

TEST_CASE("SM and BEC agree bit for bit with the same factorization") {
  for (CaseTag c : {CaseTag::C1i, CaseTag::C1ii, CaseTag::C2i, CaseTag::C2ii, CaseTag::C3, CaseTag::C4}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const double kappa = c == CaseTag::C3 ? 1e7 : 1e4;
      const auto p = make_case(make_base(default_base_spec(c), 50, kappa, seed), c, seed, {false});
      const RankOneSystem sys = p.system();
      const auto f = factor_lu(sys.a());
      const Vector xs = sm_solve(sys, *f).solution, xb = bec_solve(sys, *f).solution;
      CHECK(xs == xb);
      CHECK(max_abs_diff(xs, xb) <= 1e3 * kUnitRoundoff * kappa * norm_inf(xs));
    }
  }
}

TEST_CASE("GEPP on B is backward stable on gallery problems") {
  for (CaseTag c : {CaseTag::C1i, CaseTag::C2ii, CaseTag::C4}) {
    const auto p = make_case(make_base(default_base_spec(c), 100, 1e4, 9), c, 9, {false});
    const RankOneSystem sys = p.system();
    const SolveReport g = gepp_on_b(sys);
    const Vector r = residual(sys, g.solution);
    CHECK(normwise_berr(sys, g.solution, r) <= 8.0 * 100 * kUnitRoundoff);
  }
}
