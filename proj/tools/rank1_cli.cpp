#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rank1/experiment.hpp"
#include "rank1/matrix_market.hpp"

using namespace rank1;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

/// "5eps", "eps" or a plain number.
double parse_tol(const std::string& s) {
  if (s == "eps") return kUnitRoundoff;
  if (s.size() > 3 && s.ends_with("eps")) {
    const std::string head = s.substr(0, s.size() - 3);
    std::size_t used = 0;
    const double k = std::stod(head, &used);
    if (used != head.size()) throw ConfigError("bad tolerance '" + s + "'");
    return k * kUnitRoundoff;
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad tolerance '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("bad tolerance '" + s + "'");
  return v;
}

std::uint64_t default_seed() {
  if (const char* e = std::getenv("RANK1_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(e, &end, 10);
    if (end == e || *end != '\0') throw ConfigError(std::string("RANK1_SEED is not an integer: ") + e);
    return v;
  }
  return 1;
}

struct ConfigArgs {
  std::string case_tag = "1i";
  Index n = 500;
  std::vector<double> kappas;
  int mode = 0;  // 0: the case default
  std::string structure;
  double density = 0.01;
  std::size_t seeds = 10;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> methods;
  std::string tol = "5eps";
  std::size_t max_ir = 20;
  std::string criterion = "normwise";
  bool no_kappa_b = false;
  std::string out;
};

void add_problem_options(CLI::App* app, ConfigArgs& a) {
  app->add_option("--case", a.case_tag, "Experiment case: 1i, 1ii, 2i, 2ii, 3, 4")->capture_default_str();
  app->add_option("--n", a.n, "Matrix order")->capture_default_str();
  app->add_option("--mode", a.mode, "randsvd mode 1, 2, 3 or 5 (default: per case)");
  app->add_option("--structure", a.structure, "tridiagonal, pentadiagonal, dense or sparse (default: per case)");
  app->add_option("--density", a.density, "Target density for --structure sparse")->capture_default_str();
}

void add_config_options(CLI::App* app, ConfigArgs& a) {
  add_problem_options(app, a);
  app->add_option("--kappa", a.kappas, "Comma-separated kappa(A) list (default: per case)")->delimiter(',');
  app->add_option("--seeds", a.seeds, "Number of seeds per kappa")->capture_default_str();
  app->add_option("--seed", a.seed, "First seed (default: RANK1_SEED or 1)");
  app->add_option("--tol", a.tol, "IR stopping tolerance, e.g. 5eps or 1e-15")->capture_default_str();
  app->add_option("--max-ir", a.max_ir, "Maximum IR steps")->capture_default_str();
  app->add_option("--criterion", a.criterion, "IR stopping metric: normwise or componentwise")
      ->capture_default_str();
  app->add_option("--out", a.out, "Output directory")->required();
}

BaseSpec base_spec(const ConfigArgs& a, CaseTag c) {
  BaseSpec spec = default_base_spec(c);
  if (!a.structure.empty()) {
    if (a.structure == "tridiagonal") spec.structure = Structure::Tridiagonal;
    else if (a.structure == "pentadiagonal") spec.structure = Structure::Pentadiagonal;
    else if (a.structure == "dense") spec.structure = Structure::Dense;
    else if (a.structure == "sparse") spec.structure = Structure::Sparse;
    else throw ConfigError("unknown structure '" + a.structure + "'");
  }
  if (spec.structure == Structure::Sparse) spec.mode = 3;
  if (a.mode != 0) {
    if (spec.structure == Structure::Sparse && a.mode != 3)
      throw ConfigError("sparse matrices use randsvd mode 3");
    spec.mode = a.mode;
  }
  spec.density = a.density;
  return spec;
}

ExperimentConfig make_config(const ConfigArgs& a) {
  const auto c = parse_case(a.case_tag);
  if (!c) throw ConfigError("unknown case '" + a.case_tag + "'");
  ExperimentConfig cfg = default_config(*c);
  cfg.n = a.n;
  if (!a.kappas.empty()) cfg.kappas = a.kappas;
  cfg.base = base_spec(a, *c);
  cfg.seeds = a.seeds;
  cfg.base_seed = a.seed ? *a.seed : default_seed();
  if (!a.methods.empty()) {
    cfg.methods.clear();
    for (const auto& s : a.methods) {
      const auto m = parse_method(s);
      if (!m) throw ConfigError("unknown method '" + s + "'");
      cfg.methods.push_back(*m);
    }
  }
  cfg.ir.tol = parse_tol(a.tol);
  cfg.ir.max_ir = a.max_ir;
  if (a.criterion == "normwise") cfg.ir.criterion = StopCriterion::Normwise;
  else if (a.criterion == "componentwise") cfg.ir.criterion = StopCriterion::Componentwise;
  else throw ConfigError("unknown criterion '" + a.criterion + "'");
  cfg.measure_kappa_b = !a.no_kappa_b;
  cfg.output_dir = a.out;
  validate(cfg);
  return cfg;
}

void print_summary(const nlohmann::ordered_json& s) {
  std::printf("%-10s %-9s %6s %12s %12s %12s %8s\n", "kappa(A)", "method", "fails", "med nw-berr", "med cw-berr",
              "med fwd-err", "med IR");
  auto med = [](const nlohmann::ordered_json& stats) {
    if (stats["median"].is_null()) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", stats["median"].get<double>());
    return std::string(buf);
  };
  for (const auto& g : s["groups"]) {
    const std::string ir = g.contains("ir_steps") ? med(g["ir_steps"]) : std::string("-");
    std::printf("%-10.3g %-9s %6zu %12s %12s %12s %8s\n", g["kappa_a_target"].get<double>(),
                g["method"].get<std::string>().c_str(), g["failures"].get<std::size_t>(),
                med(g["normwise_berr"]).c_str(), med(g["componentwise_berr"]).c_str(), med(g["forward_err"]).c_str(),
                ir.c_str());
  }
}

int cmd_run(const ConfigArgs& a) {
  const ExperimentConfig cfg = make_config(a);
  const ExperimentResult r = run_experiment(cfg);
  write_experiment_outputs(r, cfg.output_dir);
  print_summary(summary_json(r));
  std::printf("wrote %s\n", (cfg.output_dir / "trials.csv").string().c_str());
  if (r.failures) {
    std::fprintf(stderr, "%zu method runs failed; see the error column of trials.csv\n", r.failures);
    return kExitPartial;
  }
  return kExitOk;
}

int cmd_trace(const ConfigArgs& a) {
  const ExperimentConfig cfg = make_config(a);
  const IrTraceResult r = ir_trace_report(cfg);
  write_ir_trace_outputs(r, cfg.output_dir);
  std::printf("wrote %zu trace rows to %s\n", r.rows.size(), (cfg.output_dir / "ir_trace.csv").string().c_str());
  return r.failures ? kExitPartial : kExitOk;
}

struct AuditArgs {
  std::string a, u, v, b, x_hat, x_ref, out;
  std::string tol = "5eps";
  std::size_t max_ir = 20;
};

RankOneSystem load_system(const std::string& a, const std::string& u, const std::string& v, const std::string& b) {
  Matrix m = to_matrix(mm_read(a));
  if (rows(m) != cols(m)) throw DimensionError(a + ": matrix is not square");
  const Index n = rows(m);
  auto vec = [n](const std::string& path) {
    Vector x = read_vector(path);
    if (x.size() != n)
      throw DimensionError(path + ": length " + std::to_string(x.size()) + " does not match n = " + std::to_string(n));
    return x;
  };
  return RankOneSystem(std::move(m), vec(u), vec(v), vec(b));
}

void emit_json(const nlohmann::ordered_json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error("cannot write " + out);
  f << j.dump(2) << '\n';
}

int cmd_audit(const AuditArgs& a) {
  const RankOneSystem sys = load_system(a.a, a.u, a.v, a.b);
  auto opt_vec = [&](const std::string& p) -> std::optional<Vector> {
    if (p.empty()) return std::nullopt;
    Vector x = read_vector(p);
    if (x.size() != sys.n()) throw DimensionError(p + ": length does not match n = " + std::to_string(sys.n()));
    return x;
  };
  AuditOptions opts;
  opts.ir.tol = parse_tol(a.tol);
  opts.ir.max_ir = a.max_ir;
  emit_json(audit_system(sys, opt_vec(a.x_hat), opt_vec(a.x_ref), opts), a.out);
  return kExitOk;
}

int cmd_gen(const ConfigArgs& a, double kappa) {
  const auto c = parse_case(a.case_tag);
  if (!c) throw ConfigError("unknown case '" + a.case_tag + "'");
  if (!(kappa >= 1.0)) throw ConfigError("kappa must be at least 1");
  if (a.n < 3) throw ConfigError("n must be at least 3");
  const std::uint64_t seed = a.seed ? *a.seed : default_seed();
  const GeneratedProblem p = make_case(make_base(base_spec(a, *c), a.n, kappa, seed), *c, seed);
  const std::filesystem::path dir = a.out;
  export_problem(p, dir);

  // audit what was written, so that auditing the files later reproduces it
  const RankOneSystem sys = load_system((dir / "A.mtx").string(), (dir / "u.mtx").string(),
                                        (dir / "v.mtx").string(), (dir / "b.mtx").string());
  emit_json(audit_system(sys, std::nullopt, read_vector(dir / "x_ref.mtx")), (dir / "audit.json").string());
  std::printf("wrote case %s problem (n = %zu, kappa(A) = %g) to %s\n", a.case_tag.c_str(), a.n, kappa,
              dir.string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-one updated linear systems: Sherman-Morrison solves, refinement and stability audits"};
  app.require_subcommand(1);

  ConfigArgs run_args;
  auto* run = app.add_subcommand("run", "Run an experiment grid and write trials.csv, summary.json and plots");
  add_config_options(run, run_args);
  run->add_option("--methods", run_args.methods, "Comma-separated subset of gepp,sm-lu,sm-qr,sm-lu-ir,bec")
      ->delimiter(',');
  run->add_flag("--no-kappa-b", run_args.no_kappa_b, "Skip measuring kappa(B) for small-norm cases");

  ConfigArgs trace_args;
  auto* trace = app.add_subcommand("trace", "Record SM-LU-IR convergence per step");
  add_config_options(trace, trace_args);

  AuditArgs audit_args;
  auto* audit = app.add_subcommand("audit", "Error and bound report for a system in Matrix Market files");
  audit->add_option("--A", audit_args.a, "Matrix A")->required();
  audit->add_option("--u", audit_args.u, "Vector u")->required();
  audit->add_option("--v", audit_args.v, "Vector v")->required();
  audit->add_option("--b", audit_args.b, "Right-hand side b")->required();
  audit->add_option("--x-hat", audit_args.x_hat, "Solution to audit (default: solve with SM-LU-IR)");
  audit->add_option("--x-ref", audit_args.x_ref, "Reference solution for the forward error");
  audit->add_option("--tol", audit_args.tol, "IR tolerance when solving")->capture_default_str();
  audit->add_option("--max-ir", audit_args.max_ir, "Maximum IR steps when solving")->capture_default_str();
  audit->add_option("--out", audit_args.out, "Write JSON here instead of stdout");

  ConfigArgs gen_args;
  double gen_kappa = 1e8;
  auto* gen = app.add_subcommand("gen", "Export one generated problem as Matrix Market files");
  add_problem_options(gen, gen_args);
  gen->add_option("--kappa", gen_kappa, "kappa(A)")->capture_default_str();
  gen->add_option("--seed", gen_args.seed, "Seed (default: RANK1_SEED or 1)");
  gen->add_option("--out", gen_args.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*trace) return cmd_trace(trace_args);
    if (*audit) return cmd_audit(audit_args);
    if (*gen) return cmd_gen(gen_args, gen_kappa);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
