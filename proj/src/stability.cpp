#include "rank1/stability.hpp"

#include <cmath>

namespace rank1 {

using compensated::Accumulator;

namespace {

double safe_ratio(double num, double den) {
  if (den == 0.0) return num == 0.0 ? 0.0 : kInf;
  return num / den;
}

}  // namespace

Vector residual(const RankOneSystem& sys, std::span<const double> x) {
  require_dims(x.size() == sys.n(), "residual: dimension mismatch");
  const Vector ax = matvec(sys.a(), x);
  const double vx = dot(sys.v(), x);
  const Vector& b = sys.b();
  const Vector& u = sys.u();
  Vector r(sys.n());
  for (Index i = 0; i < r.size(); ++i) r[i] = (b[i] - ax[i]) - vx * u[i];
  return r;
}

Vector residual_compensated(const RankOneSystem& sys, std::span<const double> x) {
  require_dims(x.size() == sys.n(), "residual: dimension mismatch");
  const Accumulator vx = compensated::dot2_pair(sys.v(), x);
  const Vector& b = sys.b();
  const Vector& u = sys.u();
  Vector r(sys.n());
  for (Index i = 0; i < r.size(); ++i) {
    Accumulator acc;
    acc.add(b[i]);
    for_each_in_row(sys.a(), i, [&](Index j, double aij) { acc.add_product(-aij, x[j]); });
    acc.add_product(vx.hi, vx.lo, -u[i]);
    r[i] = acc.value();
  }
  return r;
}

double normwise_berr(const RankOneSystem& sys, std::span<const double> x, std::span<const double> r) {
  const double den = sys.norm_b_inf() * norm_inf(x) + norm_inf(sys.b());
  return safe_ratio(norm_inf(r), den);
}

double componentwise_berr(const RankOneSystem& sys, std::span<const double> x, std::span<const double> r) {
  require_dims(r.size() == sys.n(), "componentwise_berr: dimension mismatch");
  const Vector bx = sys.abs_b_times(x);
  const Vector& b = sys.b();
  double worst = 0.0;
  for (Index i = 0; i < r.size(); ++i)
    worst = std::max(worst, safe_ratio(std::abs(r[i]), bx[i] + std::abs(b[i])));
  return worst;
}

ForwardError forward_err(std::span<const double> x, std::span<const double> x_ref) {
  require_dims(x.size() == x_ref.size(), "forward_err: dimension mismatch");
  double diff = 0.0;
  for (Index i = 0; i < x.size(); ++i) diff = std::max(diff, std::abs(x[i] - x_ref[i]));
  const double ref = norm_inf(x_ref);
  if (ref == 0.0) return {diff, true};
  return {diff / ref, false};
}

ErrorReport error_report(const RankOneSystem& sys, std::span<const double> x,
                         std::optional<std::span<const double>> x_ref) {
  ErrorReport e;
  e.residual = residual(sys, x);
  e.residual_norm = norm_inf(e.residual);
  e.normwise_berr = normwise_berr(sys, x, e.residual);
  e.componentwise_berr = componentwise_berr(sys, x, e.residual);
  if (x_ref) e.forward_err = forward_err(x, *x_ref);
  return e;
}

RigalGachesCheck rigal_gaches_check(const RankOneSystem& sys, std::span<const double> x) {
  const Index n = sys.n();
  const Vector r = residual_compensated(sys, x);
  const double nb = sys.norm_b_inf();
  const double nrhs = norm_inf(sys.b());
  const double nx = norm_inf(x);
  const double den = nb * nx + nrhs;

  RigalGachesCheck c;
  c.eta = normwise_berr(sys, x, r);
  c.defect_tol = 10.0 * kUnitRoundoff * den;
  if (den == 0.0) {
    c.passed = norm_inf(r) == 0.0;
    return c;
  }

  Index k = 0;
  for (Index i = 1; i < n; ++i)
    if (std::abs(x[i]) > std::abs(x[k])) k = i;
  const double s = x[k] < 0.0 ? -1.0 : 1.0;

  // column k of dB, and db
  Vector dbk(n), db(n);
  for (Index i = 0; i < n; ++i) {
    dbk[i] = (nb / den) * r[i] * s;
    db[i] = -(nrhs / den) * r[i];
  }

  const Accumulator vx = compensated::dot2_pair(sys.v(), x);
  double defect = 0.0;
  for (Index i = 0; i < n; ++i) {
    Accumulator acc;
    for_each_in_row(sys.a(), i, [&](Index j, double aij) { acc.add_product(aij, x[j]); });
    acc.add_product(vx.hi, vx.lo, sys.u()[i]);
    acc.add_product(dbk[i], x[k]);
    acc.add(-sys.b()[i]);
    acc.add(-db[i]);
    defect = std::max(defect, std::abs(acc.value()));
  }
  c.defect = defect;
  c.rel_db_matrix = nb > 0.0 ? norm_inf(dbk) / nb : 0.0;
  c.rel_db_rhs = nrhs > 0.0 ? norm_inf(db) / nrhs : 0.0;
  c.passed = c.defect <= c.defect_tol && c.rel_db_matrix <= 1.01 * c.eta && c.rel_db_rhs <= 1.01 * c.eta;
  return c;
}

Lemma31Result lemma31_check(const SmTrace& t, std::span<const double> v) {
  Lemma31Result res;
  res.hypothesis_holds = std::abs(t.vz) > 1.1;
  res.zeta = 1.0 / t.vz;
  const double nv = norm_2(v), ny = norm_2(t.y_hat), nz = norm_2(t.z_hat);
  res.cos_vy = (nv > 0 && ny > 0) ? t.alpha / (nv * ny) : 0.0;
  res.cos_vz = (nv > 0 && nz > 0) ? t.vz / (nv * nz) : 0.0;
  if (std::abs(res.zeta) < 1.0 && res.cos_vz != 0.0)
    res.c_check = 1.0 + std::abs(res.cos_vy) / (std::abs(res.cos_vz) * (1.0 - std::abs(res.zeta)));
  res.lhs = ny + std::abs(t.alpha / t.beta) * nz;
  res.rhs = res.c_check * ny;
  res.bound_holds = res.hypothesis_holds && res.lhs <= res.rhs * (1.0 + 16.0 * kUnitRoundoff);
  return res;
}

double prop32_bound(const Prop32Inputs& in) {
  const double q = in.c1 * kUnitRoundoff * in.kappa_a;
  if (!(q < 1.0)) throw HypothesisViolated("prop32_bound: c1 * u * kappa(A) >= 1");
  return kUnitRoundoff * in.c_check / (1.0 - q) * (in.c * in.norm_a + in.norm_b) * in.norm_a_inv * in.norm_rhs;
}

Vector g_times(const RankOneSystem& sys, std::span<const double> x, double c) {
  const Index n = sys.n();
  const double dn = double(n);
  const Vector ax = abs_matvec(sys.a(), x);
  double total = 0.0;
  for (double e : ax) total += e;
  double vx = 0.0;
  for (Index j = 0; j < n; ++j) vx += std::abs(sys.v()[j]) * std::abs(x[j]);
  Vector g(n);
  for (Index i = 0; i < n; ++i) g[i] = c * dn * dn * total + ax[i] + (dn + 1.0) * std::abs(sys.u()[i]) * vx;
  return g;
}

Vector h_bound(const RankOneSystem& sys, std::span<const double> z_hat, double alpha_ratio, double d) {
  const Index n = sys.n();
  const double dn = double(n);
  const Vector az = abs_matvec(sys.a(), z_hat);
  double total = 0.0;
  for (double e : az) total += e;
  double vz = 0.0;
  for (Index j = 0; j < n; ++j) vz += std::abs(sys.v()[j]) * std::abs(z_hat[j]);
  Vector h(n);
  for (Index i = 0; i < n; ++i) {
    const double au = std::abs(sys.u()[i]);
    h[i] = alpha_ratio * (2.0 * d * dn * dn * total + 3.0 * az[i] + 2.0 * (dn + 4.0) * au * vz) +
           2.0 * alpha_ratio * au;
  }
  return h;
}

Vector t_bound(const RankOneSystem& sys, std::span<const double> x) {
  const Index n = sys.n();
  const double scale = gamma(double(n) + 2.0) / kUnitRoundoff;
  const Vector ax = abs_matvec(sys.a(), x);
  double vx = 0.0;
  for (Index j = 0; j < n; ++j) vx += std::abs(sys.v()[j]) * std::abs(x[j]);
  Vector t(n);
  for (Index i = 0; i < n; ++i) t[i] = scale * (std::abs(sys.b()[i]) + ax[i] + std::abs(sys.u()[i]) * vx);
  return t;
}

double thm46_ratio(const RankOneSystem& sys, const SmTrace& sm, const IrTrace& ir, std::size_t step, double d) {
  require_dims(step < ir.steps.size(), "thm46_ratio: refinement step out of range");
  const IrStep& s = ir.steps[step];
  const Vector h = h_bound(sys, sm.z_hat, std::abs(s.alpha_r) / std::abs(sm.beta), d);
  const Vector bw = sys.abs_b_times(s.w_hat);
  double worst = 0.0;
  for (Index i = 0; i < h.size(); ++i) worst = std::max(worst, safe_ratio(h[i], bw[i] + std::abs(sys.b()[i])));
  return worst;
}

double sm_residual_bound_ratio(std::span<const double> r, std::span<const double> g_x, std::span<const double> h) {
  double worst = 0.0;
  for (Index i = 0; i < r.size(); ++i)
    worst = std::max(worst, safe_ratio(std::abs(r[i]), kUnitRoundoff * (g_x[i] + h[i])));
  return worst;
}

BoundReport bound_report(const RankOneSystem& sys, const SmTrace& sm, const IrTrace* ir,
                         std::optional<Prop32Inputs> prop32, const BoundConstants& k) {
  BoundReport rep;
  rep.lemma31 = lemma31_check(sm, sys.v());
  if (prop32 && rep.lemma31.hypothesis_holds) {
    prop32->c_check = rep.lemma31.c_check;
    try {
      rep.prop32_bound = prop32_bound(*prop32);
    } catch (const HypothesisViolated&) {
    }
  }

  const Vector r_exact = residual_compensated(sys, sm.x_hat);
  const Vector r_hat = residual(sys, sm.x_hat);
  rep.g_vec = g_times(sys, sm.x_hat, k.c);
  rep.h_vec = h_bound(sys, sm.z_hat, std::abs(sm.alpha) / std::abs(sm.beta), k.d);
  rep.t_vec = t_bound(sys, sm.x_hat);
  rep.thm43_ratio = sm_residual_bound_ratio(r_exact, rep.g_vec, rep.h_vec);
  for (Index i = 0; i < r_hat.size(); ++i)
    rep.residual_rounding_ratio = std::max(
        rep.residual_rounding_ratio, safe_ratio(std::abs(r_exact[i] - r_hat[i]), kUnitRoundoff * rep.t_vec[i]));
  if (ir && !ir->steps.empty()) rep.thm46_ratio = thm46_ratio(sys, sm, *ir, 0, k.d);
  return rep;
}

}  // namespace rank1
