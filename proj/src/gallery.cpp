#include "rank1/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "rank1/matrix_market.hpp"
#include "rank1/rng.hpp"
#include "rank1/stability.hpp"

namespace rank1 {

std::string_view to_string(CaseTag c) {
  switch (c) {
    case CaseTag::C1i: return "1i";
    case CaseTag::C1ii: return "1ii";
    case CaseTag::C2i: return "2i";
    case CaseTag::C2ii: return "2ii";
    case CaseTag::C3: return "3";
    case CaseTag::C4: return "4";
  }
  return "?";
}

std::optional<CaseTag> parse_case(std::string_view s) {
  for (CaseTag c : {CaseTag::C1i, CaseTag::C1ii, CaseTag::C2i, CaseTag::C2ii, CaseTag::C3, CaseTag::C4})
    if (s == to_string(c)) return c;
  return std::nullopt;
}

bool is_small_norm(CaseTag c) { return c != CaseTag::C1ii && c != CaseTag::C2ii; }

namespace {

struct Rotation {
  Index p, q;
  double c, s;
};

// (x_p, x_q) <- (c x_p + s x_q, -s x_p + c x_q)
inline void rotate(double& xp, double& xq, double c, double s) {
  const double a = xp, b = xq;
  xp = c * a + s * b;
  xq = -s * a + c * b;
}

void random_cs(Xoshiro256pp& rng, double& c, double& s) {
  double a, b, r;
  do {
    a = rng.uniform(-1.0, 1.0);
    b = rng.uniform(-1.0, 1.0);
    r = std::hypot(a, b);
  } while (r < 0.25);
  c = a / r;
  s = b / r;
}

Vector apply_log(const std::vector<Rotation>& log, Index n, Index k) {
  Vector x(n, 0.0);
  x[k] = 1.0;
  for (const auto& g : log) rotate(x[g.p], x[g.q], g.c, g.s);
  return x;
}

void validate(Index n, double kappa, int mode) {
  if (n == 0) throw ConfigError("gallery: n must be positive");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw ConfigError("gallery: kappa must be finite and >= 1");
  if (mode != 1 && mode != 2 && mode != 3 && mode != 5)
    throw ConfigError("gallery: randsvd mode must be 1, 2, 3 or 5");
}

// diag(sigma) with sigma placed at random diagonal positions; pos[k] is the
// position of sigma[k].
DenseMatrix scattered_diagonal(const Vector& sigma, Xoshiro256pp& rng, std::vector<Index>& pos) {
  const Index n = sigma.size();
  pos.resize(n);
  for (Index i = 0; i < n; ++i) pos[i] = i;
  for (Index i = n; i > 1; --i) std::swap(pos[i - 1], pos[rng.below(i)]);
  DenseMatrix d(n, n);
  for (Index k = 0; k < n; ++k) d(pos[k], pos[k]) = sigma[k];
  return d;
}

void attach_singular_vectors(GeneratedProblem& p, const std::vector<Rotation>& left,
                             const std::vector<Rotation>& right, Index position) {
  p.u_min = apply_log(left, p.sigma.size(), position);
  p.v_min = apply_log(right, p.sigma.size(), position);
}

void rotate_rows(DenseMatrix& w, Index p, Index q, double c, double s, Index lo, Index hi) {
  for (Index j = lo; j <= hi; ++j) rotate(w(p, j), w(q, j), c, s);
}

void rotate_cols(DenseMatrix& w, Index p, Index q, double c, double s, Index lo, Index hi) {
  for (Index i = lo; i <= hi; ++i) rotate(w(i, p), w(i, q), c, s);
}

Index log2_ceil(Index n) {
  Index k = 0;
  while ((Index(1) << k) < n) ++k;
  return k;
}

}  // namespace

Vector randsvd_sigma(Index n, double kappa, int mode, std::uint64_t seed) {
  validate(n, kappa, mode);
  Vector s(n, 1.0);
  if (n == 1) return s;
  const double small = 1.0 / kappa;
  switch (mode) {
    case 1:
      std::fill(s.begin() + 1, s.end(), small);
      break;
    case 2:
      s[n - 1] = small;
      break;
    case 3:
      for (Index i = 0; i < n; ++i) s[i] = std::pow(kappa, -double(i) / double(n - 1));
      s[n - 1] = small;
      break;
    case 5: {
      auto rng = Xoshiro256pp::stream(seed, "sigma");
      const double lk = std::log(kappa);
      for (Index i = 1; i + 1 < n; ++i) s[i] = std::exp(-lk * rng.uniform());
      s[n - 1] = small;
      std::sort(s.begin() + 1, s.end() - 1, std::greater<>());
      break;
    }
  }
  return s;
}

GeneratedProblem randsvd_banded(Index n, double kappa, int mode, Index lower, Index upper, std::uint64_t seed) {
  validate(n, kappa, mode);
  lower = std::min(lower, n - 1);
  upper = std::min(upper, n - 1);

  GeneratedProblem p;
  p.sigma = randsvd_sigma(n, kappa, mode, seed);
  p.mode = mode;
  p.kappa_a_target = kappa;
  p.seed = seed;

  auto rng = Xoshiro256pp::stream(seed, "A");
  std::vector<Index> pos;
  DenseMatrix w = scattered_diagonal(p.sigma, rng, pos);
  std::vector<Rotation> left, right;

  const bool dense = lower + upper + 1 > n || (lower == n - 1 && upper == n - 1);
  if (dense || n == 1) {
    const Index count = n * (log2_ceil(n) + 1);
    for (Index k = 0; n > 1 && k < 2 * count; ++k) {
      const Index a = rng.below(n);
      Index b = rng.below(n - 1);
      if (b >= a) ++b;
      double c, s;
      random_cs(rng, c, s);
      if (k % 2 == 0) {
        rotate_rows(w, a, b, c, s, 0, n - 1);
        left.push_back({a, b, c, s});
      } else {
        rotate_cols(w, a, b, c, s, 0, n - 1);
        right.push_back({a, b, c, s});
      }
    }
    p.a = w;
    p.structure = "dense";
  } else {
    // Conservative support ranges of every row and column.
    std::vector<Index> row_lo(n), row_hi(n), col_lo(n), col_hi(n);
    for (Index i = 0; i < n; ++i) row_lo[i] = row_hi[i] = col_lo[i] = col_hi[i] = i;

    const Index attempts = 8 * n;
    for (Index k = 0; k < attempts; ++k) {
      const Index i = rng.below(n - 1);
      double c, s;
      random_cs(rng, c, s);
      if (k % 2 == 0) {
        const Index lo = std::min(row_lo[i], row_lo[i + 1]);
        const Index hi = std::max(row_hi[i], row_hi[i + 1]);
        if (lo + lower < i + 1 || hi > i + upper) continue;
        rotate_rows(w, i, i + 1, c, s, lo, hi);
        left.push_back({i, i + 1, c, s});
        row_lo[i] = row_lo[i + 1] = lo;
        row_hi[i] = row_hi[i + 1] = hi;
        for (Index j = lo; j <= hi; ++j) {
          col_lo[j] = std::min(col_lo[j], i);
          col_hi[j] = std::max(col_hi[j], i + 1);
        }
      } else {
        const Index lo = std::min(col_lo[i], col_lo[i + 1]);
        const Index hi = std::max(col_hi[i], col_hi[i + 1]);
        if (hi > i + lower || lo + upper < i + 1) continue;
        rotate_cols(w, i, i + 1, c, s, lo, hi);
        right.push_back({i, i + 1, c, s});
        col_lo[i] = col_lo[i + 1] = lo;
        col_hi[i] = col_hi[i + 1] = hi;
        for (Index r = lo; r <= hi; ++r) {
          row_lo[r] = std::min(row_lo[r], i);
          row_hi[r] = std::max(row_hi[r], i + 1);
        }
      }
    }
    p.a = BandedMatrix::from_dense(w, lower, upper);
    if (lower == 1 && upper == 1)
      p.structure = "tridiagonal";
    else if (lower == 2 && upper == 2)
      p.structure = "pentadiagonal";
    else
      p.structure = "banded(" + std::to_string(lower) + "," + std::to_string(upper) + ")";
  }
  attach_singular_vectors(p, left, right, pos[n - 1]);
  return p;
}

GeneratedProblem sparse_random(Index n, double density, double kappa, std::uint64_t seed) {
  validate(n, kappa, 3);
  if (density >= 1.0) {
    GeneratedProblem p = randsvd_banded(n, kappa, 3, n - 1, n - 1, seed);
    return p;
  }
  const double target = density * double(n) * double(n);
  if (!(target >= double(n))) throw ConfigError("sparse_random: density * n^2 must be at least n");

  GeneratedProblem p;
  p.sigma = randsvd_sigma(n, kappa, 3, seed);
  p.mode = 3;
  p.kappa_a_target = kappa;
  p.seed = seed;
  p.structure = "sparse";

  auto rng = Xoshiro256pp::stream(seed, "A");
  std::vector<Index> pos;
  DenseMatrix w = scattered_diagonal(p.sigma, rng, pos);
  std::vector<Rotation> left, right;
  std::vector<long> row_nnz(n, 1), col_nnz(n, 1);
  double nnz = double(n);

  const double ceiling = 1.1 * target;
  const Index attempts = 20 * n + Index(10.0 * target);
  for (Index k = 0; k < attempts && nnz < target && n > 1; ++k) {
    const Index a = rng.below(n);
    Index b = rng.below(n - 1);
    if (b >= a) ++b;
    double c, s;
    random_cs(rng, c, s);
    const bool on_rows = k % 2 == 0;

    // nonzeros of the two rotated lines after the rotation (union support)
    Index uni = 0;
    for (Index t = 0; t < n; ++t) {
      const bool nz = on_rows ? (w(a, t) != 0.0 || w(b, t) != 0.0) : (w(t, a) != 0.0 || w(t, b) != 0.0);
      uni += nz;
    }
    const long before = on_rows ? row_nnz[a] + row_nnz[b] : col_nnz[a] + col_nnz[b];
    if (nnz - double(before) + 2.0 * double(uni) > ceiling) continue;

    // rotate entry pairs, keeping the nonzero counts current
    for (Index t = 0; t < n; ++t) {
      double& x = on_rows ? w(a, t) : w(t, a);
      double& y = on_rows ? w(b, t) : w(t, b);
      if (x == 0.0 && y == 0.0) continue;
      const int old_x = x != 0.0, old_y = y != 0.0;
      rotate(x, y, c, s);
      const int dx = int(x != 0.0) - old_x, dy = int(y != 0.0) - old_y;
      nnz += dx + dy;
      if (on_rows) {
        row_nnz[a] += dx;
        row_nnz[b] += dy;
        col_nnz[t] += dx + dy;
      } else {
        col_nnz[a] += dx;
        col_nnz[b] += dy;
        row_nnz[t] += dx + dy;
      }
    }
    (on_rows ? left : right).push_back({a, b, c, s});
  }
  p.a = SparseMatrix::from_dense(w);
  attach_singular_vectors(p, left, right, pos[n - 1]);
  return p;
}

BaseSpec default_base_spec(CaseTag c) {
  switch (c) {
    case CaseTag::C1i:
    case CaseTag::C1ii: return {Structure::Tridiagonal, 1, 0.0};
    case CaseTag::C2i:
    case CaseTag::C2ii: return {Structure::Tridiagonal, 5, 0.0};
    case CaseTag::C3: return {Structure::Pentadiagonal, 2, 0.0};
    case CaseTag::C4: return {Structure::Pentadiagonal, 3, 0.0};
  }
  return {};
}

GeneratedProblem make_base(const BaseSpec& spec, Index n, double kappa, std::uint64_t seed) {
  switch (spec.structure) {
    case Structure::Tridiagonal: return randsvd_banded(n, kappa, spec.mode, 1, 1, seed);
    case Structure::Pentadiagonal: return randsvd_banded(n, kappa, spec.mode, 2, 2, seed);
    case Structure::Dense: return randsvd_banded(n, kappa, spec.mode, n - 1, n - 1, seed);
    case Structure::Sparse: return sparse_random(n, spec.density, kappa, seed);
  }
  throw ConfigError("make_base: unknown structure");
}

namespace {

Vector gaussian(Index n, std::uint64_t seed, std::string_view field) {
  auto rng = Xoshiro256pp::stream(seed, field);
  Vector x(n);
  for (double& e : x) e = rng.normal();
  return x;
}

void scale_to_2norm(Vector& x, double target) {
  const double f = target / norm_2(x);
  for (double& e : x) e *= f;
}

// B x in double-double, rounded once per component.
Vector b_times_compensated(const Matrix& a, const Vector& u, const Vector& v, const Vector& x) {
  const auto vx = compensated::dot2_pair(v, x);
  Vector b(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    compensated::Accumulator acc;
    for_each_in_row(a, i, [&](Index j, double aij) { acc.add_product(aij, x[j]); });
    acc.add_product(vx.hi, vx.lo, u[i]);
    b[i] = acc.value();
  }
  return b;
}

LinearOperator b_operator(const RankOneSystem& sys) {
  return {sys.n(),
          [&sys](std::span<const double> x) {
            Vector y = matvec(sys.a(), x);
            const double vx = dot(sys.v(), x);
            for (Index i = 0; i < y.size(); ++i) y[i] += vx * sys.u()[i];
            return y;
          },
          [&sys](std::span<const double> x) {
            Vector y = matvec_transpose(sys.a(), x);
            const double ux = dot(sys.u(), x);
            for (Index i = 0; i < y.size(); ++i) y[i] += ux * sys.v()[i];
            return y;
          }};
}

}  // namespace

OracleResult oracle_solution(const RankOneSystem& sys, const PluFactorization& fb) {
  OracleResult out;
  const SigmaExtremes se = sigma_extremes(b_operator(sys), fb);
  out.kappa_b = se.condition();
  out.reliable = !se.near_singular && out.kappa_b * kUnitRoundoff <= 0.1;

  out.x = fb.solve(sys.b());
  for (;;) {
    const Vector r = residual_compensated(sys, out.x);
    out.normwise_berr = normwise_berr(sys, out.x, r);
    if (out.normwise_berr < kUnitRoundoff || out.steps == 40) break;
    const Vector d = fb.solve(r);
    for (Index i = 0; i < d.size(); ++i) out.x[i] += d[i];
    ++out.steps;
  }
  return out;
}

OracleResult oracle_solution(const RankOneSystem& sys) {
  return oracle_solution(sys, PluFactorization(sys.b_dense()));
}

GeneratedProblem make_case(GeneratedProblem p, CaseTag c, std::uint64_t seed, const CaseOptions& opts) {
  const Index n = p.n();
  p.case_tag = c;
  p.seed = seed;

  switch (c) {
    case CaseTag::C3: {
      if (!p.u_min || !p.v_min) throw ConfigError("make_case: case 3 needs the singular vectors of sigma_min");
      // u along the left and v along the right singular vector, so that u v^T
      // replaces the sigma_min component of A.
      auto rng = Xoshiro256pp::stream(seed, "scalars");
      auto multiple = [&] {
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        return sign * rng.uniform(opts.case3_scale_lo, opts.case3_scale_hi);
      };
      const double su = multiple();
      const double sv = multiple();
      p.u = *p.u_min;
      p.v = *p.v_min;
      for (double& e : p.u) e *= su;
      for (double& e : p.v) e *= sv;
      break;
    }
    case CaseTag::C4:
      p.u = gaussian(n, seed, "u");
      p.v = gaussian(n, seed, "v");
      scale_to_2norm(p.u, std::sqrt(p.sigma.back() / 2.0));
      scale_to_2norm(p.v, std::sqrt(p.sigma.back() / 2.0));
      break;
    default:
      p.u = gaussian(n, seed, "u");
      p.v = gaussian(n, seed, "v");
      break;
  }

  std::optional<PluFactorization> fb;
  auto factor_b = [&]() -> const PluFactorization& {
    if (!fb) fb.emplace(RankOneSystem(p.a, p.u, p.v, Vector(n, 0.0)).b_dense());
    return *fb;
  };

  if (is_small_norm(c)) {
    p.x_ref = gaussian(n, seed, "x");
    p.b = b_times_compensated(p.a, p.u, p.v, p.x_ref);
    p.x_ref_reliable = true;
    if (opts.measure_kappa_b) {
      const RankOneSystem sys = p.system();
      p.kappa_b_measured = sigma_extremes(b_operator(sys), factor_b()).condition();
    }
  } else {
    p.b = gaussian(n, seed, "b");
    const RankOneSystem sys = p.system();
    const OracleResult o = oracle_solution(sys, factor_b());
    p.x_ref = o.x;
    p.x_ref_reliable = o.reliable;
    p.kappa_b_measured = o.kappa_b;
  }
  return p;
}

void export_problem(const GeneratedProblem& p, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  mm_write(p.a, dir / "A.mtx");
  write_vector(p.u, dir / "u.mtx");
  write_vector(p.v, dir / "v.mtx");
  write_vector(p.b, dir / "b.mtx");
  if (!p.x_ref.empty()) write_vector(p.x_ref, dir / "x_ref.mtx");

  nlohmann::ordered_json m;
  m["n"] = p.n();
  m["structure"] = p.structure;
  m["mode"] = p.mode;
  m["seed"] = p.seed;
  m["case"] = p.case_tag ? std::string(to_string(*p.case_tag)) : std::string();
  m["kappa_a_target"] = p.kappa_a_target;
  m["kappa_b_measured"] = p.kappa_b_measured;
  m["x_ref_reliable"] = p.x_ref_reliable;
  m["sigma"] = p.sigma;
  m["files"] = {{"A", "A.mtx"}, {"u", "u.mtx"}, {"v", "v.mtx"}, {"b", "b.mtx"}, {"x_ref", "x_ref.mtx"}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error("export_problem: cannot write manifest in " + dir.string());
  out << m.dump(2) << '\n';
}

}  // namespace rank1
