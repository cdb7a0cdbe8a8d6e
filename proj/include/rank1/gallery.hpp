#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "rank1/factor.hpp"
#include "rank1/system.hpp"

namespace rank1 {

enum class CaseTag { C1i, C1ii, C2i, C2ii, C3, C4 };

std::string_view to_string(CaseTag c);
/// "1i", "1ii", "2i", "2ii", "3", "4".
std::optional<CaseTag> parse_case(std::string_view s);
/// Cases whose right-hand side is built from a known solution (b = B x_ref).
bool is_small_norm(CaseTag c);

/// A generated test problem with its construction-time ground truth.
struct GeneratedProblem {
  Matrix a;
  Vector u, v, b;  // empty until make_case fills them
  Vector sigma;    // exact singular values of A, descending
  /// Left and right singular vectors of A for sigma_min, when retained.
  std::optional<Vector> u_min, v_min;
  int mode = 0;
  std::string structure;
  double kappa_a_target = 1.0;
  double kappa_b_measured = 0.0;  // 0 until measured
  Vector x_ref;
  bool x_ref_reliable = true;
  std::optional<CaseTag> case_tag;
  std::uint64_t seed = 0;

  Index n() const { return rows(a); }
  RankOneSystem system() const { return RankOneSystem(a, u, v, b); }
};

/// Singular value profile: mode 1 (1, 1/k, ..., 1/k), mode 2 (1, ..., 1, 1/k),
/// mode 3 geometric k^(-i/(n-1)), mode 5 log-uniform random in [1/k, 1] with
/// the end points pinned. Sorted descending.
Vector randsvd_sigma(Index n, double kappa, int mode, std::uint64_t seed);

/// A = L diag(sigma) R^T built from seeded Givens rotations applied
/// alternately from the left and right, each accepted only if the result stays
/// inside the band. Bandwidths of at least n-1 give a dense matrix mixed by
/// rotations in random planes. With lower = upper = 1 the admissible
/// rotations only ever couple adjacent pairs, so the matrix is block
/// diagonal with 2 x 2 blocks (still tridiagonal).
GeneratedProblem randsvd_banded(Index n, double kappa, int mode, Index lower, Index upper, std::uint64_t seed);

/// Sparse A with mode-3 singular values: diag(sigma) mixed by rotations in
/// random planes until nnz is within 10% of density n^2. kappa is exact by
/// construction. density >= 1 gives the dense randsvd matrix.
GeneratedProblem sparse_random(Index n, double density, double kappa, std::uint64_t seed);

enum class Structure { Tridiagonal, Pentadiagonal, Dense, Sparse };

struct BaseSpec {
  Structure structure = Structure::Tridiagonal;
  int mode = 1;
  double density = 0.01;  // sparse only
};

/// The structure and randsvd mode used for each case by default.
BaseSpec default_base_spec(CaseTag c);
GeneratedProblem make_base(const BaseSpec& spec, Index n, double kappa, std::uint64_t seed);

struct CaseOptions {
  /// Estimate kappa_2(B) with sigma_extremes on a dense LU of B.
  bool measure_kappa_b = true;
  /// Case 3 scales u and v by independent random multiples whose magnitude
  /// is uniform in this range (signs random).
  double case3_scale_lo = 0.5;
  double case3_scale_hi = 1.5;
};

/// Fills u, v, b and x_ref for one of the six cases.
GeneratedProblem make_case(GeneratedProblem base, CaseTag c, std::uint64_t seed, const CaseOptions& opts = {});

struct OracleResult {
  Vector x;
  bool reliable = true;  // kappa_2(B) u <= 0.1
  double kappa_b = 0.0;
  double normwise_berr = 0.0;
  std::size_t steps = 0;
};

/// Dense GEPP on B followed by refinement with double-double residuals until
/// the normwise backward error drops below u or 40 steps have run.
OracleResult oracle_solution(const RankOneSystem& sys);
OracleResult oracle_solution(const RankOneSystem& sys, const PluFactorization& fb);

/// A.mtx, u.mtx, v.mtx, b.mtx, x_ref.mtx plus manifest.json.
void export_problem(const GeneratedProblem& p, const std::filesystem::path& dir);

}  // namespace rank1
