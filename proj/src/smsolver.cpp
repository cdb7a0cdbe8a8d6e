#include "rank1/smsolver.hpp"

#include <chrono>
#include <cmath>

#include "rank1/stability.hpp"

namespace rank1 {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Method sm_method(const LinearSolver& f) { return f.kind() == SolverKind::Qr ? Method::SmQr : Method::SmLu; }

void check_order(const RankOneSystem& sys, const LinearSolver& f) {
  require_dims(f.order() == sys.n(), "factorization order differs from the system");
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::GeppOnB: return "gepp";
    case Method::SmLu: return "sm-lu";
    case Method::SmQr: return "sm-qr";
    case Method::SmLuIr: return "sm-lu-ir";
    case Method::Bec: return "bec";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view s) {
  for (Method m : {Method::GeppOnB, Method::SmLu, Method::SmQr, Method::SmLuIr, Method::Bec})
    if (s == to_string(m)) return m;
  if (s == "gepp-on-b") return Method::GeppOnB;
  return std::nullopt;
}

SmTrace sm_steps(const RankOneSystem& sys, const LinearSolver& f) {
  check_order(sys, f);
  const Index n = sys.n();
  const Vector& v = sys.v();
  SmTrace t;
  t.y_hat = f.solve(sys.b());
  t.z_hat = f.solve(sys.u());

  double magnitude = 0.0;
  for (Index i = 0; i < n; ++i) {
    t.alpha += v[i] * t.y_hat[i];
    const double p = v[i] * t.z_hat[i];
    t.vz += p;
    magnitude += std::abs(p);
  }
  t.beta = 1.0 + t.vz;
  t.breakdown = std::abs(t.beta) <= 10.0 * double(n) * kUnitRoundoff * (1.0 + magnitude);
  t.theta = t.alpha / t.beta;

  t.w_hat.resize(n);
  t.x_hat.resize(n);
  for (Index i = 0; i < n; ++i) {
    t.w_hat[i] = t.theta * t.z_hat[i];
    t.x_hat[i] = t.y_hat[i] - t.w_hat[i];
  }
  return t;
}

SolveReport sm_solve(const RankOneSystem& sys, const LinearSolver& f) {
  const auto t0 = Clock::now();
  SmTrace t = sm_steps(sys, f);
  if (t.breakdown)
    throw SmBreakdown("Sherman-Morrison breakdown: 1 + v^T A^{-1} u is numerically zero (beta = " +
                      std::to_string(t.beta) + ")");
  SolveReport rep;
  rep.method = sm_method(f);
  rep.solution = t.x_hat;
  rep.sm = std::move(t);
  rep.timings.solve_seconds = seconds_since(t0);
  return rep;
}

SolveReport sm_ir_solve(const RankOneSystem& sys, const LinearSolver& f, const IrOptions& opts) {
  const auto t0 = Clock::now();
  SolveReport rep = sm_solve(sys, f);
  rep.method = Method::SmLuIr;
  const SmTrace& sm = *rep.sm;
  const Index n = sys.n();
  const Vector& v = sys.v();

  auto resid = [&](const Vector& x) {
    return opts.compensated_residual ? residual_compensated(sys, x) : residual(sys, x);
  };
  auto metric = [&](double nw, double cw) { return opts.criterion == StopCriterion::Normwise ? nw : cw; };

  IrTrace ir;
  Vector x = sm.x_hat;
  Vector r = resid(x);
  ir.initial_residual_norm = norm_inf(r);
  ir.initial_normwise_berr = normwise_berr(sys, x, r);
  ir.initial_componentwise_berr = componentwise_berr(sys, x, r);
  double prev = metric(ir.initial_normwise_berr, ir.initial_componentwise_berr);
  ir.converged = prev < opts.tol;

  std::size_t increases = 0;
  while (!ir.converged && ir.steps.size() < opts.max_ir) {
    IrStep s;
    s.y_r = f.solve(r);
    s.alpha_r = dot(v, s.y_r);
    s.theta_r = s.alpha_r / sm.beta;  // beta of the base solve, not recomputed
    s.w_hat.resize(n);
    // The correction is formed before it is added: evaluating x + y_r first
    // would lose x entirely when y_r is of order kappa(A) ||x||.
    for (Index i = 0; i < n; ++i) s.w_hat[i] = x[i] + (s.y_r[i] - s.theta_r * sm.z_hat[i]);
    s.r_hat = std::move(r);

    x = s.w_hat;
    r = resid(x);
    s.residual_norm = norm_inf(r);
    s.normwise_berr = normwise_berr(sys, x, r);
    s.componentwise_berr = componentwise_berr(sys, x, r);
    const double now = metric(s.normwise_berr, s.componentwise_berr);
    ir.steps.push_back(std::move(s));

    if (now < opts.tol) {
      ir.converged = true;
      break;
    }
    increases = now > prev ? increases + 1 : 0;
    if (increases >= opts.divergence_window) {
      ir.diverged = true;
      break;
    }
    prev = now;
  }

  rep.solution = std::move(x);
  rep.ir = std::move(ir);
  rep.timings.solve_seconds = seconds_since(t0);
  return rep;
}

SolveReport bec_solve(const RankOneSystem& sys, const LinearSolver& f) {
  check_order(sys, f);
  const auto t0 = Clock::now();
  const Index n = sys.n();
  const Vector& v = sys.v();

  // Lower block factor [[A, 0], [v^T, delta]] with delta = -1 - v^T A^{-1} u;
  // upper block factor [[I, A^{-1} u], [0, 1]].
  const Vector z = f.solve(sys.u());
  double vz = 0.0, magnitude = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double p = v[i] * z[i];
    vz += p;
    magnitude += std::abs(p);
  }
  const double delta = -1.0 - vz;
  if (std::abs(delta) <= 10.0 * double(n) * kUnitRoundoff * (1.0 + magnitude))
    throw SmBreakdown("BEC breakdown: bordered pivot -1 - v^T A^{-1} u is numerically zero");

  // forward substitution
  const Vector y = f.solve(sys.b());
  const double q = -dot(v, y) / delta;
  // back substitution
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = y[i] - z[i] * q;

  SolveReport rep;
  rep.method = Method::Bec;
  rep.solution = std::move(x);
  rep.zeta = q;
  rep.timings.solve_seconds = seconds_since(t0);
  return rep;
}

SolveReport gepp_on_b(const RankOneSystem& sys) {
  auto t0 = Clock::now();
  const PluFactorization f(sys.b_dense());
  SolveReport rep;
  rep.method = Method::GeppOnB;
  rep.timings.factor_seconds = seconds_since(t0);
  t0 = Clock::now();
  rep.solution = f.solve(sys.b());
  rep.timings.solve_seconds = seconds_since(t0);
  return rep;
}

}  // namespace rank1
