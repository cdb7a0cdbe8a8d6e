#pragma once

#include <optional>
#include <span>

#include "rank1/smsolver.hpp"

namespace rank1 {

// ----- residuals and backward errors ----------------------------------------

/// r = b - A x - (v^T x) u in working precision: A x first (sequential rows),
/// then the rank-one term, each component as (b_i - (Ax)_i) - (v^T x) u_i.
Vector residual(const RankOneSystem& sys, std::span<const double> x);
/// The same residual evaluated in double-double and rounded once.
Vector residual_compensated(const RankOneSystem& sys, std::span<const double> x);

/// ||r||_inf / (||B||_inf ||x||_inf + ||b||_inf). A zero denominator gives 0
/// when r = 0 and +inf otherwise.
double normwise_berr(const RankOneSystem& sys, std::span<const double> x, std::span<const double> r);
/// max_i |r_i| / (|B||x| + |b|)_i, with 0/0 counted as 0 and c/0 as +inf.
double componentwise_berr(const RankOneSystem& sys, std::span<const double> x, std::span<const double> r);

struct ForwardError {
  double value = 0.0;
  bool absolute = false;  // x_ref was zero, so value is ||x - x_ref||_inf
};
ForwardError forward_err(std::span<const double> x, std::span<const double> x_ref);

struct ErrorReport {
  Vector residual;
  double residual_norm = 0.0;
  double normwise_berr = 0.0;
  double componentwise_berr = 0.0;
  std::optional<ForwardError> forward_err;
};
ErrorReport error_report(const RankOneSystem& sys, std::span<const double> x,
                         std::optional<std::span<const double>> x_ref = std::nullopt);

/// Explicit minimal perturbation realising the normwise backward error in
/// the infinity norm: dB = (||B|| / den) r s e_k^T with k = argmax |x_k| and
/// s = sign(x_k), db = -(||b|| / den) r, den = ||B|| ||x|| + ||b||. The
/// residual is taken in double-double so that the defect of the perturbed
/// system measures the formula rather than residual rounding.
struct RigalGachesCheck {
  double eta = 0.0;
  double defect = 0.0;      // ||(B + dB) x - (b + db)||_inf, double-double
  double defect_tol = 0.0;  // 10 u (||B|| ||x|| + ||b||)
  double rel_db_matrix = 0.0;  // ||dB|| / ||B||
  double rel_db_rhs = 0.0;     // ||db|| / ||b||
  bool passed = false;
};
RigalGachesCheck rigal_gaches_check(const RankOneSystem& sys, std::span<const double> x);

// ----- SM bounds --------------------------------------------------------------

struct Lemma31Result {
  bool hypothesis_holds = false;  // |v^T z_hat| > 1.1
  double zeta = 0.0;              // 1 / (v^T z_hat)
  double cos_vy = 0.0;
  double cos_vz = 0.0;
  double c_check = kInf;          // infinite unless |zeta| < 1
  double lhs = 0.0;               // ||y|| + |alpha/beta| ||z||
  double rhs = 0.0;               // c_check ||y||
  bool bound_holds = false;       // meaningful only under the hypothesis
};
/// Two-norms throughout. The comparison allows a relative slack of 16 u for
/// the rounding in alpha, beta and the norms; with v^T z < 0 the inequality
/// is an equality in exact arithmetic.
Lemma31Result lemma31_check(const SmTrace& trace, std::span<const double> v);

struct Prop32Inputs {
  double c_check = 1.0;
  double kappa_a = 1.0;
  double norm_a = 1.0;
  double norm_b = 1.0;      // ||A + u v^T||
  double norm_a_inv = 1.0;
  double norm_rhs = 1.0;    // ||b||
  double c1 = 1.0;
  double c = 1.0;
};
/// u c_check / (1 - c1 u kappa) (c ||A|| + ||B||) ||A^{-1}|| ||b||.
/// Throws HypothesisViolated when c1 u kappa >= 1.
double prop32_bound(const Prop32Inputs& in);

struct BoundConstants {
  double c = 1.0;
  double d = 1.0;
};

/// g(A,u,v) |x| = c n^2 e e^T |A||x| + |A||x| + (n+1) |u| (|v|^T |x|).
Vector g_times(const RankOneSystem& sys, std::span<const double> x, double c = 1.0);
/// h with |A^{-1}u| replaced by |z_hat| and alpha_ratio = |alpha| / |beta|.
Vector h_bound(const RankOneSystem& sys, std::span<const double> z_hat, double alpha_ratio, double d = 1.0);
/// t = (gamma_{n+2} / u) (|b| + |A||x| + |u| (|v|^T |x|)).
Vector t_bound(const RankOneSystem& sys, std::span<const double> x);

/// max_i h(A,u,v,r_hat)_i / (|B||w| + |b|)_i for the given refinement step,
/// using alpha_r of that step and the base beta. Zero when u = 0.
double thm46_ratio(const RankOneSystem& sys, const SmTrace& sm, const IrTrace& ir,
                   std::size_t step = 0, double d = 1.0);

/// max_i |r_i| / (u (g|x| + h)_i): at most 1 when the componentwise SM
/// residual bound holds exactly. 0/0 counts as 0.
double sm_residual_bound_ratio(std::span<const double> r, std::span<const double> g_x,
                               std::span<const double> h);

struct BoundReport {
  Lemma31Result lemma31;
  std::optional<double> prop32_bound;
  Vector g_vec;  // g |x_hat|
  Vector h_vec;
  Vector t_vec;
  double thm43_ratio = 0.0;  // sm_residual_bound_ratio for the SM iterate
  /// max_i |r_exact - r_hat|_i / (u t_i): rounding in the computed residual.
  double residual_rounding_ratio = 0.0;
  std::optional<double> thm46_ratio;
};

/// Collects the bound diagnostics of one SM solve. The residual of the SM
/// iterate is taken in double-double so that the ratio reflects the solve
/// rather than the residual evaluation. prop32 (with any c_check, which is
/// replaced) is evaluated only when the trace satisfies |v^T z_hat| > 1.1 and
/// c1 u kappa < 1. ir supplies its first refinement step, if any.
BoundReport bound_report(const RankOneSystem& sys, const SmTrace& sm, const IrTrace* ir = nullptr,
                         std::optional<Prop32Inputs> prop32 = std::nullopt, const BoundConstants& k = {});

}  // namespace rank1
