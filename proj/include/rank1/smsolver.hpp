#pragma once

#include <optional>
#include <string_view>

#include "rank1/factor.hpp"
#include "rank1/system.hpp"

namespace rank1 {

enum class Method { GeppOnB, SmLu, SmQr, SmLuIr, Bec };

std::string_view to_string(Method m);
/// Accepts the CLI spellings: gepp, sm-lu, sm-qr, sm-lu-ir, bec.
std::optional<Method> parse_method(std::string_view s);

/// Intermediate quantities of the seven-step Sherman-Morrison evaluation.
struct SmTrace {
  Vector y_hat;   // A \ b
  Vector z_hat;   // A \ u
  double vz = 0.0;     // fl(v^T z_hat), sequential
  double alpha = 0.0;  // fl(v^T y_hat)
  double beta = 0.0;   // fl(1 + vz)
  double theta = 0.0;  // fl(alpha / beta)
  Vector w_hat;   // theta * z_hat
  Vector x_hat;   // y_hat - w_hat
  bool breakdown = false;
};

struct IrStep {
  Vector r_hat;  // residual of the previous iterate
  Vector y_r;    // A \ r_hat
  double alpha_r = 0.0;
  double theta_r = 0.0;
  Vector w_hat;  // new iterate
  double residual_norm = 0.0;  // of w_hat
  double normwise_berr = 0.0;
  double componentwise_berr = 0.0;
};

struct IrTrace {
  // metrics of the SM iterate before any refinement
  double initial_residual_norm = 0.0;
  double initial_normwise_berr = 0.0;
  double initial_componentwise_berr = 0.0;
  std::vector<IrStep> steps;
  bool converged = false;
  bool diverged = false;

  std::size_t step_count() const noexcept { return steps.size(); }
};

struct Timings {
  double factor_seconds = 0.0;
  double solve_seconds = 0.0;
};

struct SolveReport {
  Method method = Method::SmLu;
  Vector solution;
  std::optional<SmTrace> sm;
  std::optional<IrTrace> ir;
  std::optional<double> zeta;  // BEC border unknown
  Timings timings;
  std::optional<double> kappa_a;
  std::optional<double> kappa_b;
};

enum class StopCriterion { Normwise, Componentwise };

struct IrOptions {
  double tol = 5.0 * kUnitRoundoff;
  std::size_t max_ir = 20;
  StopCriterion criterion = StopCriterion::Normwise;
  /// Residuals in double-double arithmetic. For oracle runs only; the
  /// algorithm as analysed uses working-precision residuals.
  bool compensated_residual = false;
  /// Stop after this many consecutive increases of the stopping metric.
  std::size_t divergence_window = 3;
};

/// The seven SM steps without the breakdown check raising. trace.breakdown
/// is set when |beta| <= 10 n u (1 + sum_i |v_i z_i|).
SmTrace sm_steps(const RankOneSystem& sys, const LinearSolver& f);

/// Sherman-Morrison solve reusing the factorization f of A. Throws
/// SmBreakdown when 1 + v^T A^{-1} u is numerically zero.
SolveReport sm_solve(const RankOneSystem& sys, const LinearSolver& f);

/// SM followed by fixed-precision iterative refinement, reusing f, z_hat and
/// beta. Performs 2 + (number of steps) solves with f.
SolveReport sm_ir_solve(const RankOneSystem& sys, const LinearSolver& f, const IrOptions& opts = {});

/// Block elimination (Crout) on the bordered system [[A, u], [v^T, -1]].
SolveReport bec_solve(const RankOneSystem& sys, const LinearSolver& f);

/// Dense GEPP applied to B = A + u v^T.
SolveReport gepp_on_b(const RankOneSystem& sys);

}  // namespace rank1
