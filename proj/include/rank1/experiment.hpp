#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rank1/gallery.hpp"
#include "rank1/smsolver.hpp"
#include "rank1/stability.hpp"

namespace rank1 {

inline constexpr int kTrialsSchemaVersion = 1;

struct ExperimentConfig {
  CaseTag case_tag = CaseTag::C1i;
  Index n = 500;
  std::vector<double> kappas;
  BaseSpec base;  // structure, randsvd mode, density
  std::size_t seeds = 10;
  std::uint64_t base_seed = 1;
  std::vector<Method> methods;
  IrOptions ir;
  std::filesystem::path output_dir;
  bool measure_kappa_b = true;
};

/// Defaults for a case: its structure and mode, the kappa grid used for that
/// case family and all five methods.
ExperimentConfig default_config(CaseTag c);
std::vector<double> default_kappas(CaseTag c);
/// Throws ConfigError on an unusable configuration.
void validate(const ExperimentConfig& cfg);

struct MethodResult {
  Method method = Method::SmLu;
  bool ok = false;
  std::string error;
  double normwise_berr = 0.0;
  double componentwise_berr = 0.0;
  double forward_err = 0.0;
  bool forward_absolute = false;
  std::size_t ir_steps = 0;
  bool converged = false;
  bool diverged = false;
  bool breakdown = false;
  std::optional<double> thm46_ratio;
  Timings timings;  // not part of the deterministic CSV
};

struct TrialRecord {
  CaseTag case_tag = CaseTag::C1i;
  Index n = 0;
  std::string structure;
  int mode = 0;
  double kappa_a_target = 0.0;
  double kappa_b_measured = 0.0;
  std::uint64_t seed = 0;
  bool x_ref_reliable = true;
  std::string error;  // generation failure, if any
  std::optional<Lemma31Result> lemma31;
  std::vector<MethodResult> methods;
};

struct ExperimentResult {
  std::vector<TrialRecord> trials;
  std::size_t failures = 0;  // failed trials plus failed method runs
};

/// Runs every (kappa, seed, method) combination in that order. Errors inside
/// a trial are recorded and never abort the sweep.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Runs the configured methods on one generated problem.
TrialRecord run_trial(const ExperimentConfig& cfg, const GeneratedProblem& p);

void write_trials_csv(const ExperimentResult& r, std::ostream& out);
/// Wall-clock times with the ratio of each method to GEPP on B in the same trial.
void write_timings_csv(const ExperimentResult& r, std::ostream& out);
/// Median, minimum and maximum of each metric per (kappa, method).
nlohmann::ordered_json summary_json(const ExperimentResult& r);

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};
/// Self-contained SVG scatter plot with log-log axes. Non-positive values
/// cannot be placed on a log axis and are left out.
std::string svg_loglog(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<PlotSeries>& series, bool connect = false);

/// trials.csv, timings.csv, summary.json and one SVG per error metric.
void write_experiment_outputs(const ExperimentResult& r, const std::filesystem::path& dir);

struct IrTraceRow {
  double kappa = 0.0;
  std::uint64_t seed = 0;
  std::size_t step = 0;  // 0 is the SM iterate
  double residual_norm = 0.0;
  double normwise_berr = 0.0;
  double componentwise_berr = 0.0;
};

struct IrTraceResult {
  std::vector<IrTraceRow> rows;
  std::size_t failures = 0;
};

/// SM-LU-IR convergence history for every (kappa, seed) of cfg.
IrTraceResult ir_trace_report(const ExperimentConfig& cfg);
/// ir_trace.csv plus one SVG per (kappa, seed).
void write_ir_trace_outputs(const IrTraceResult& r, const std::filesystem::path& dir);

struct AuditOptions {
  IrOptions ir;
  BoundConstants constants;
};

/// Error and bound report for a user system. Without x_hat, SM-LU-IR is run
/// and its solution audited.
nlohmann::ordered_json audit_system(const RankOneSystem& sys, std::optional<Vector> x_hat = std::nullopt,
                                    std::optional<Vector> x_ref = std::nullopt, const AuditOptions& opts = {});

}  // namespace rank1
