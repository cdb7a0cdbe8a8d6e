#include "rank1/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "rank1/matrix_market.hpp"

namespace rank1 {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) { return format_double(v); }

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

bool uses_lu(Method m) { return m == Method::SmLu || m == Method::SmLuIr || m == Method::Bec; }

/// The SM trace whose diagnostics are reported for the trial.
const SmTrace* trial_trace(const std::vector<SolveReport>& reps) {
  for (Method want : {Method::SmLu, Method::SmLuIr, Method::SmQr})
    for (const auto& r : reps)
      if (r.method == want && r.sm) return &*r.sm;
  return nullptr;
}

}  // namespace

std::vector<double> default_kappas(CaseTag c) {
  switch (c) {
    case CaseTag::C1i:
    case CaseTag::C1ii: return {1e6, 1e8, 1e10, 1e12};
    case CaseTag::C3: return {1e7, 1e9, 1e11, 1e13};
    default: return {1e1, 1e2, 1e3, 1e4};
  }
}

ExperimentConfig default_config(CaseTag c) {
  ExperimentConfig cfg;
  cfg.case_tag = c;
  cfg.kappas = default_kappas(c);
  cfg.base = default_base_spec(c);
  cfg.methods = {Method::GeppOnB, Method::SmLu, Method::SmQr, Method::SmLuIr, Method::Bec};
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.kappas.empty()) throw ConfigError("kappa list is empty");
  for (double k : cfg.kappas)
    if (!(k >= 1.0) || !std::isfinite(k)) throw ConfigError("kappa must be finite and at least 1, got " + fmt(k));
  if (cfg.seeds < 1) throw ConfigError("seeds must be at least 1");
  if (cfg.n < 3) throw ConfigError("n must be at least 3");
  if (cfg.methods.empty()) throw ConfigError("no methods selected");
  if (cfg.base.structure != Structure::Sparse) {
    const int m = cfg.base.mode;
    if (m != 1 && m != 2 && m != 3 && m != 5) throw ConfigError("randsvd mode must be 1, 2, 3 or 5");
  } else if (!(cfg.base.density > 0.0 && cfg.base.density <= 1.0)) {
    throw ConfigError("density must lie in (0, 1]");
  }
  if (cfg.base.structure == Structure::Tridiagonal && cfg.case_tag == CaseTag::C3)
    throw ConfigError("case 3 needs a retained singular vector pair; use pentadiagonal or dense");
  if (!(cfg.ir.tol > 0.0)) throw ConfigError("tol must be positive");
}

TrialRecord run_trial(const ExperimentConfig& cfg, const GeneratedProblem& p) {
  TrialRecord rec;
  rec.case_tag = cfg.case_tag;
  rec.n = p.n();
  rec.structure = p.structure;
  rec.mode = p.mode;
  rec.kappa_a_target = p.kappa_a_target;
  rec.kappa_b_measured = p.kappa_b_measured;
  rec.seed = p.seed;
  rec.x_ref_reliable = p.x_ref_reliable;

  const RankOneSystem sys = p.system();

  std::unique_ptr<LinearSolver> lu, qr;
  double lu_seconds = 0.0, qr_seconds = 0.0;
  std::string lu_error, qr_error;
  auto need = [&](auto pred) { return std::any_of(cfg.methods.begin(), cfg.methods.end(), pred); };
  if (need(uses_lu)) {
    const auto t0 = Clock::now();
    try {
      lu = factor_lu(sys.a());
    } catch (const Error& e) {
      lu_error = e.what();
    }
    lu_seconds = seconds_since(t0);
  }
  if (need([](Method m) { return m == Method::SmQr; })) {
    const auto t0 = Clock::now();
    try {
      qr = factor_qr(sys.a());
    } catch (const Error& e) {
      qr_error = e.what();
    }
    qr_seconds = seconds_since(t0);
  }

  std::vector<SolveReport> reports;
  for (Method m : cfg.methods) {
    MethodResult mr;
    mr.method = m;
    try {
      SolveReport rep;
      switch (m) {
        case Method::GeppOnB: rep = gepp_on_b(sys); break;
        case Method::SmQr:
          if (!qr) throw ExactlySingular(qr_error);
          rep = sm_solve(sys, *qr);
          rep.timings.factor_seconds = qr_seconds;
          break;
        default:
          if (!lu) throw ExactlySingular(lu_error);
          rep = m == Method::SmLu ? sm_solve(sys, *lu) : m == Method::Bec ? bec_solve(sys, *lu) : sm_ir_solve(sys, *lu, cfg.ir);
          rep.timings.factor_seconds = lu_seconds;
          break;
      }
      const Vector r = residual(sys, rep.solution);
      mr.normwise_berr = normwise_berr(sys, rep.solution, r);
      mr.componentwise_berr = componentwise_berr(sys, rep.solution, r);
      const ForwardError fe = forward_err(rep.solution, p.x_ref);
      mr.forward_err = fe.value;
      mr.forward_absolute = fe.absolute;
      if (rep.ir) {
        mr.ir_steps = rep.ir->step_count();
        mr.converged = rep.ir->converged;
        mr.diverged = rep.ir->diverged;
        if (!rep.ir->steps.empty()) mr.thm46_ratio = thm46_ratio(sys, *rep.sm, *rep.ir);
      }
      mr.timings = rep.timings;
      mr.ok = std::isfinite(mr.normwise_berr);
      if (!mr.ok) mr.error = "non-finite solution";
      reports.push_back(std::move(rep));
    } catch (const SmBreakdown& e) {
      mr.breakdown = true;
      mr.error = e.what();
    } catch (const Error& e) {
      mr.error = e.what();
    }
    rec.methods.push_back(std::move(mr));
  }

  if (const SmTrace* t = trial_trace(reports)) rec.lemma31 = lemma31_check(*t, sys.v());
  return rec;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentResult out;
  CaseOptions copts;
  copts.measure_kappa_b = cfg.measure_kappa_b;
  for (double kappa : cfg.kappas) {
    for (std::size_t s = 0; s < cfg.seeds; ++s) {
      const std::uint64_t seed = cfg.base_seed + s;
      TrialRecord rec;
      try {
        const GeneratedProblem p = make_case(make_base(cfg.base, cfg.n, kappa, seed), cfg.case_tag, seed, copts);
        rec = run_trial(cfg, p);
      } catch (const Error& e) {
        rec.case_tag = cfg.case_tag;
        rec.n = cfg.n;
        rec.kappa_a_target = kappa;
        rec.seed = seed;
        rec.error = e.what();
        for (Method m : cfg.methods) {
          MethodResult mr;
          mr.method = m;
          mr.error = rec.error;
          rec.methods.push_back(std::move(mr));
        }
      }
      for (const auto& mr : rec.methods) out.failures += !mr.ok;
      out.trials.push_back(std::move(rec));
    }
  }
  return out;
}

// ----- reports ------------------------------------------------------------------

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

const char* flag(bool b) { return b ? "1" : "0"; }

}  // namespace

void write_trials_csv(const ExperimentResult& r, std::ostream& out) {
  out << "schema_version,case,n,structure,mode,kappa_a_target,kappa_b_measured,seed,method,status,"
         "normwise_berr,componentwise_berr,forward_err,forward_err_absolute,x_ref_reliable,ir_steps,"
         "converged,diverged,breakdown,lemma31_hypothesis,lemma31_c_check,lemma31_bound_holds,thm46_ratio,error\n";
  for (const auto& t : r.trials) {
    for (const auto& m : t.methods) {
      out << kTrialsSchemaVersion << ',' << to_string(t.case_tag) << ',' << t.n << ',' << csv_field(t.structure)
          << ',' << t.mode << ',' << fmt(t.kappa_a_target) << ',' << fmt(t.kappa_b_measured) << ',' << t.seed
          << ',' << to_string(m.method) << ',' << (m.ok ? "ok" : "failed") << ',';
      if (m.ok)
        out << fmt(m.normwise_berr) << ',' << fmt(m.componentwise_berr) << ',' << fmt(m.forward_err) << ','
            << flag(m.forward_absolute);
      else
        out << ",,,";
      out << ',' << flag(t.x_ref_reliable) << ',' << m.ir_steps << ',' << flag(m.converged) << ','
          << flag(m.diverged) << ',' << flag(m.breakdown) << ',';
      if (t.lemma31)
        out << flag(t.lemma31->hypothesis_holds) << ',' << fmt(t.lemma31->c_check) << ','
            << flag(t.lemma31->hypothesis_holds && t.lemma31->bound_holds);
      else
        out << ",,";
      out << ',' << (m.thm46_ratio ? fmt(*m.thm46_ratio) : std::string()) << ',' << csv_field(m.error) << '\n';
    }
  }
}

void write_timings_csv(const ExperimentResult& r, std::ostream& out) {
  out << "schema_version,case,n,kappa_a_target,seed,method,factor_seconds,solve_seconds,total_seconds,"
         "ratio_to_gepp\n";
  for (const auto& t : r.trials) {
    std::optional<double> gepp;
    for (const auto& m : t.methods)
      if (m.method == Method::GeppOnB && m.ok) gepp = m.timings.factor_seconds + m.timings.solve_seconds;
    for (const auto& m : t.methods) {
      if (!m.ok) continue;
      const double total = m.timings.factor_seconds + m.timings.solve_seconds;
      out << kTrialsSchemaVersion << ',' << to_string(t.case_tag) << ',' << t.n << ',' << fmt(t.kappa_a_target)
          << ',' << t.seed << ',' << to_string(m.method) << ',' << fmt(m.timings.factor_seconds) << ','
          << fmt(m.timings.solve_seconds) << ',' << fmt(total) << ','
          << (gepp && *gepp > 0.0 ? fmt(total / *gepp) : std::string()) << '\n';
    }
  }
}

namespace {

nlohmann::ordered_json stats(std::vector<double> v) {
  nlohmann::ordered_json j;
  if (v.empty()) {
    j["median"] = nullptr;
    j["min"] = nullptr;
    j["max"] = nullptr;
    return j;
  }
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  j["median"] = v.size() % 2 ? v[k] : (v[k - 1] + v[k]) / 2.0;
  j["min"] = v.front();
  j["max"] = v.back();
  return j;
}

}  // namespace

nlohmann::ordered_json summary_json(const ExperimentResult& r) {
  // groups in first-appearance order, which is the (kappa, method) run order
  std::vector<std::pair<double, Method>> keys;
  for (const auto& t : r.trials)
    for (const auto& m : t.methods)
      if (std::find(keys.begin(), keys.end(), std::pair{t.kappa_a_target, m.method}) == keys.end())
        keys.emplace_back(t.kappa_a_target, m.method);

  nlohmann::ordered_json out;
  out["schema_version"] = kTrialsSchemaVersion;
  if (!r.trials.empty()) {
    out["case"] = std::string(to_string(r.trials.front().case_tag));
    out["n"] = r.trials.front().n;
  }
  std::size_t hyp = 0, with_trace = 0;
  for (const auto& t : r.trials)
    if (t.lemma31) {
      ++with_trace;
      hyp += t.lemma31->hypothesis_holds;
    }
  out["lemma31_hypothesis_fraction"] = with_trace ? double(hyp) / double(with_trace) : 0.0;

  out["groups"] = nlohmann::ordered_json::array();
  for (const auto& [kappa, method] : keys) {
    std::vector<double> nw, cw, fe, steps;
    std::size_t trials = 0, failures = 0, converged = 0;
    for (const auto& t : r.trials) {
      if (t.kappa_a_target != kappa) continue;
      for (const auto& m : t.methods) {
        if (m.method != method) continue;
        ++trials;
        if (!m.ok) {
          ++failures;
          continue;
        }
        nw.push_back(m.normwise_berr);
        cw.push_back(m.componentwise_berr);
        fe.push_back(m.forward_err);
        steps.push_back(double(m.ir_steps));
        converged += m.converged;
      }
    }
    nlohmann::ordered_json g;
    g["kappa_a_target"] = kappa;
    g["method"] = std::string(to_string(method));
    g["trials"] = trials;
    g["failures"] = failures;
    g["normwise_berr"] = stats(nw);
    g["componentwise_berr"] = stats(cw);
    g["forward_err"] = stats(fe);
    if (method == Method::SmLuIr) {
      g["ir_steps"] = stats(steps);
      g["converged"] = converged;
    }
    out["groups"].push_back(std::move(g));
  }
  return out;
}

// ----- SVG ----------------------------------------------------------------------

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string num(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

}  // namespace

std::string svg_loglog(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<PlotSeries>& series, bool connect) {
  double xlo = kInf, xhi = -kInf, ylo = kInf, yhi = -kInf;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      if (!(x > 0.0 && y > 0.0 && std::isfinite(x) && std::isfinite(y))) continue;
      xlo = std::min(xlo, std::log10(x));
      xhi = std::max(xhi, std::log10(x));
      ylo = std::min(ylo, std::log10(y));
      yhi = std::max(yhi, std::log10(y));
    }
  if (xlo > xhi) xlo = 0, xhi = 1;
  if (ylo > yhi) ylo = 0, yhi = 1;
  xlo = std::floor(xlo), xhi = std::ceil(xhi), ylo = std::floor(ylo), yhi = std::ceil(yhi);
  if (xhi == xlo) xlo -= 1, xhi += 1;
  if (yhi == ylo) ylo -= 1, yhi += 1;

  const double W = 640, H = 440, L = 80, R = 150, T = 40, B = 60;
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](double x) { return L + (std::log10(x) - xlo) / (xhi - xlo) * pw; };
  auto py = [&](double y) { return T + ph - (std::log10(y) - ylo) / (yhi - ylo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
    << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  // one tick per decade; thin out labels when the range is wide
  const int xstep = int(std::ceil((xhi - xlo) / 10.0)), ystep = int(std::ceil((yhi - ylo) / 10.0));
  for (int e = int(xlo); e <= int(xhi); e += xstep) {
    const double x = L + (e - xlo) / (xhi - xlo) * pw;
    o << "<line x1=\"" << num(x) << "\" y1=\"" << T << "\" x2=\"" << num(x) << "\" y2=\"" << T + ph
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << num(x) << "\" y=\"" << T + ph + 16 << "\" text-anchor=\"middle\">1e" << e << "</text>\n";
  }
  for (int e = int(ylo); e <= int(yhi); e += ystep) {
    const double y = T + ph - (e - ylo) / (yhi - ylo) * ph;
    o << "<line x1=\"" << L << "\" y1=\"" << num(y) << "\" x2=\"" << L + pw << "\" y2=\"" << num(y)
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  o << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">" << xml_escape(xlabel)
    << "</text>\n";
  o << "<text transform=\"translate(18," << T + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << xml_escape(ylabel) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* col = kPalette[k % std::size(kPalette)];
    std::string path;
    for (auto [x, y] : series[k].points) {
      if (!(x > 0.0 && y > 0.0 && std::isfinite(x) && std::isfinite(y))) continue;
      o << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
      path += (path.empty() ? "M" : " L") + num(px(x)) + " " + num(py(y));
    }
    if (connect && !path.empty())
      o << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << col << "\"/>\n";
    const double ly = T + 14 + 18.0 * double(k);
    o << "<circle cx=\"" << L + pw + 16 << "\" cy=\"" << num(ly - 4) << "\" r=\"4\" fill=\"" << col << "\"/>\n";
    o << "<text x=\"" << L + pw + 26 << "\" y=\"" << num(ly) << "\">" << xml_escape(series[k].name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_experiment_outputs(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream trials, timings;
  write_trials_csv(r, trials);
  write_timings_csv(r, timings);
  write_file(dir / "trials.csv", trials.str());
  write_file(dir / "timings.csv", timings.str());
  write_file(dir / "summary.json", summary_json(r).dump(2) + "\n");

  const std::string tag = r.trials.empty() ? std::string() : "case " + std::string(to_string(r.trials[0].case_tag)) + ", ";
  struct Metric {
    const char* file;
    const char* label;
    double MethodResult::*field;
  };
  for (const Metric& m : {Metric{"normwise_berr.svg", "normwise backward error", &MethodResult::normwise_berr},
                          Metric{"componentwise_berr.svg", "componentwise backward error", &MethodResult::componentwise_berr},
                          Metric{"forward_err.svg", "forward error", &MethodResult::forward_err}}) {
    std::vector<PlotSeries> series;
    for (const auto& t : r.trials)
      for (const auto& mr : t.methods) {
        if (!mr.ok) continue;
        const std::string name(to_string(mr.method));
        auto it = std::find_if(series.begin(), series.end(), [&](const PlotSeries& s) { return s.name == name; });
        if (it == series.end()) it = series.insert(series.end(), PlotSeries{name, {}});
        it->points.emplace_back(t.kappa_a_target, mr.*m.field);
      }
    write_file(dir / m.file, svg_loglog(tag + m.label, "kappa(A)", m.label, series));
  }
}

// ----- IR traces ------------------------------------------------------------------

IrTraceResult ir_trace_report(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.methods = {Method::SmLuIr};
  validate(cfg);
  CaseOptions copts;
  copts.measure_kappa_b = false;

  IrTraceResult out;
  for (double kappa : cfg.kappas) {
    for (std::size_t s = 0; s < cfg.seeds; ++s) {
      const std::uint64_t seed = cfg.base_seed + s;
      try {
        const GeneratedProblem p = make_case(make_base(cfg.base, cfg.n, kappa, seed), cfg.case_tag, seed, copts);
        const RankOneSystem sys = p.system();
        const auto f = factor_lu(sys.a());
        const SolveReport rep = sm_ir_solve(sys, *f, cfg.ir);
        const IrTrace& ir = *rep.ir;
        out.rows.push_back({kappa, seed, 0, ir.initial_residual_norm, ir.initial_normwise_berr,
                            ir.initial_componentwise_berr});
        for (std::size_t k = 0; k < ir.steps.size(); ++k) {
          const IrStep& st = ir.steps[k];
          out.rows.push_back({kappa, seed, k + 1, st.residual_norm, st.normwise_berr, st.componentwise_berr});
        }
      } catch (const Error&) {
        ++out.failures;
      }
    }
  }
  return out;
}

void write_ir_trace_outputs(const IrTraceResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream csv;
  csv << "schema_version,kappa_a_target,seed,step,residual_norm,normwise_berr,componentwise_berr\n";
  for (const auto& row : r.rows)
    csv << kTrialsSchemaVersion << ',' << fmt(row.kappa) << ',' << row.seed << ',' << row.step << ','
        << fmt(row.residual_norm) << ',' << fmt(row.normwise_berr) << ',' << fmt(row.componentwise_berr) << '\n';
  write_file(dir / "ir_trace.csv", csv.str());

  // step k is drawn at x = k + 1 so that the SM iterate fits on a log axis
  for (std::size_t i = 0; i < r.rows.size();) {
    std::size_t j = i;
    PlotSeries res{"residual norm", {}}, nw{"normwise berr", {}}, cw{"componentwise berr", {}};
    while (j < r.rows.size() && r.rows[j].kappa == r.rows[i].kappa && r.rows[j].seed == r.rows[i].seed) {
      const double x = double(r.rows[j].step + 1);
      res.points.emplace_back(x, r.rows[j].residual_norm);
      nw.points.emplace_back(x, r.rows[j].normwise_berr);
      cw.points.emplace_back(x, r.rows[j].componentwise_berr);
      ++j;
    }
    const std::string stem = "trace_kappa" + fmt(r.rows[i].kappa) + "_seed" + std::to_string(r.rows[i].seed);
    write_file(dir / (stem + ".svg"),
               svg_loglog("SM-LU-IR, kappa(A) = " + fmt(r.rows[i].kappa) + ", seed " + std::to_string(r.rows[i].seed),
                          "IR step + 1", "value", {res, nw, cw}, true));
    i = j;
  }
}

// ----- audit ----------------------------------------------------------------------

namespace {

nlohmann::ordered_json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json audit_system(const RankOneSystem& sys, std::optional<Vector> x_hat,
                                    std::optional<Vector> x_ref, const AuditOptions& opts) {
  const Index n = sys.n();
  if (x_hat) require_dims(x_hat->size() == n, "audit: x_hat length differs from n");
  if (x_ref) require_dims(x_ref->size() == n, "audit: x_ref length differs from n");

  nlohmann::ordered_json j;
  j["schema_version"] = kTrialsSchemaVersion;
  j["n"] = n;

  const auto f = factor_lu(sys.a());
  const SmTrace sm = sm_steps(sys, *f);
  std::optional<SolveReport> ir_rep;
  if (!sm.breakdown) ir_rep = sm_ir_solve(sys, *f, opts.ir);

  if (!x_hat) {
    if (!ir_rep) throw SmBreakdown("audit: SM breakdown, no solution to audit (supply x_hat)");
    x_hat = ir_rep->solution;
    j["x_source"] = "sm-lu-ir";
  } else {
    j["x_source"] = "provided";
  }

  nlohmann::ordered_json solve;
  solve["sm_breakdown"] = sm.breakdown;
  solve["vz"] = sm.vz;
  solve["alpha"] = sm.alpha;
  solve["beta"] = sm.beta;
  solve["theta"] = finite_or_null(sm.theta);
  if (ir_rep) {
    solve["ir_steps"] = ir_rep->ir->step_count();
    solve["ir_converged"] = ir_rep->ir->converged;
    solve["ir_diverged"] = ir_rep->ir->diverged;
  }
  j["solve"] = solve;

  std::optional<std::span<const double>> ref;
  if (x_ref) ref = std::span<const double>(*x_ref);
  const ErrorReport er = error_report(sys, *x_hat, ref);
  nlohmann::ordered_json e;
  e["residual_norm"] = er.residual_norm;
  e["normwise_berr"] = finite_or_null(er.normwise_berr);
  e["componentwise_berr"] = finite_or_null(er.componentwise_berr);
  if (er.forward_err) {
    e["forward_err"] = er.forward_err->value;
    e["forward_err_absolute"] = er.forward_err->absolute;
  }
  j["errors"] = e;

  const RigalGachesCheck rg = rigal_gaches_check(sys, *x_hat);
  j["rigal_gaches"] = {{"eta", rg.eta},           {"defect", rg.defect},
                       {"defect_tol", rg.defect_tol}, {"rel_db_matrix", rg.rel_db_matrix},
                       {"rel_db_rhs", rg.rel_db_rhs}, {"passed", rg.passed}};

  // two-norm quantities for the a priori residual bound
  const SigmaExtremes sa = sigma_extremes(sys.a(), *f);
  const DenseMatrix bd = sys.b_dense();
  const PluFactorization fb(bd);
  const SigmaExtremes sb = sigma_extremes(Matrix(bd), fb);
  j["conditioning"] = {{"sigma_max_a", sa.sigma_max},
                       {"sigma_min_a", sa.sigma_min},
                       {"kappa_a", finite_or_null(sa.condition())},
                       {"sigma_max_b", sb.sigma_max},
                       {"sigma_min_b", sb.sigma_min},
                       {"kappa_b", finite_or_null(sb.condition())}};

  std::optional<Prop32Inputs> p32;
  if (sa.sigma_min > 0.0) {
    const double c1 = 8.0 * double(n);
    p32 = Prop32Inputs{1.0, sa.condition(), sa.sigma_max, sb.sigma_max, 1.0 / sa.sigma_min, norm_2(sys.b()), c1, c1};
  }
  const BoundReport br =
      bound_report(sys, sm, ir_rep ? &*ir_rep->ir : nullptr, p32, opts.constants);
  nlohmann::ordered_json b;
  const Lemma31Result& l = br.lemma31;
  b["lemma31"] = {{"hypothesis_holds", l.hypothesis_holds}, {"zeta", finite_or_null(l.zeta)},
                  {"cos_vy", l.cos_vy},                     {"cos_vz", l.cos_vz},
                  {"c_check", finite_or_null(l.c_check)},   {"lhs", l.lhs},
                  {"rhs", finite_or_null(l.rhs)},           {"bound_holds", l.bound_holds}};
  if (br.prop32_bound) {
    const double r2 = norm_2(residual(sys, sm.x_hat));
    b["prop32"] = {{"bound", *br.prop32_bound}, {"residual_2norm", r2}, {"holds", r2 <= *br.prop32_bound}};
  } else {
    b["prop32"] = nullptr;
  }
  b["thm43_ratio"] = br.thm43_ratio;
  b["residual_rounding_ratio"] = br.residual_rounding_ratio;
  b["thm46_ratio"] = br.thm46_ratio ? nlohmann::ordered_json(*br.thm46_ratio) : nlohmann::ordered_json(nullptr);
  b["constants"] = {{"c", opts.constants.c}, {"d", opts.constants.d}};
  b["g"] = br.g_vec;
  b["h"] = br.h_vec;
  b["t"] = br.t_vec;
  j["bounds"] = b;
  return j;
}

}  // namespace rank1
