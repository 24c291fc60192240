#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gnp/csr.hpp"
#include "gnp/gnn.hpp"
#include "gnp/krylov.hpp"

namespace gnp {

// Area under the log10 relative-residual curve above log10(rtol), indexed by
// iteration: sum_{i=0}^{iters} (log10 r_i - log10 rtol). r_i = 0 is clamped
// to 1e-300 before the log.
double iter_auc(const ConvergenceHistory& history, double rtol);

// Same area indexed by wall-clock time, left sum over the recorded
// timestamps: sum_{i>=1} (log10 r_i - log10 rtol)(t_i - t_{i-1}).
double time_auc(const ConvergenceHistory& history, double rtol);

enum class StopMode { maxiters, timeout };

struct RunRecord {
  std::string matrix_id;
  std::string precond;
  std::string status;  // solve status or "construction_failure"
  ConvergenceHistory history;
  std::optional<double> iter_auc;
  std::optional<double> time_auc;
  std::optional<double> final_relres;
  double construct_secs = 0.0;
  double solve_secs = 0.0;
};

// Preconditioner selection. "gnp" uses params when given, otherwise trains
// per matrix with train_cfg (the construction phase, timed like the others).
struct PrecondSpec {
  std::string name;  // none | jacobi | gmres | ilu0 | gnp
  const GnnParams* gnn_params = nullptr;
  TrainConfig train_cfg;
};

// One (matrix, preconditioner) solve on an already prescaled matrix with
// b = A*1 (ground truth x = 1). Construction exceptions become
// construction_failure; nothing propagates.
RunRecord run_single(const CsrMatrix& a, const std::string& matrix_id,
                     const PrecondSpec& spec, const SolveConfig& cfg,
                     StopMode mode,
                     std::optional<double> timeout_budget = std::nullopt);

struct ManifestEntry {
  std::string id;
  std::string path;
};

// "id<TAB>path" per line; '#' starts a comment. ids must be unique.
std::vector<ManifestEntry> load_manifest(const std::string& path);

// Runs every (matrix, preconditioner) pair. In timeout mode each matrix is
// first run with maxiters to set the per-matrix budget (the maximum solve
// time among preconditioners), unless timeout_budget supplies one.
std::vector<RunRecord> run_suite(const std::vector<ManifestEntry>& manifest,
                                 const std::vector<PrecondSpec>& preconds,
                                 const SolveConfig& cfg, StopMode mode,
                                 std::optional<double> timeout_budget =
                                     std::nullopt,
                                 std::size_t jobs = 1);

struct AggregateReport {
  std::map<std::string, std::size_t> best_by_iter_auc;
  std::map<std::string, std::size_t> best_by_time_auc;
  std::map<std::string, std::map<std::string, std::size_t>> failures;
  std::size_t matrices_with_success = 0;
  // final-residual ratios (second best / gnp) where gnp is best, at
  // 25/50/75/100 percent, nearest-rank lower interpolation
  std::vector<double> gnp_margin_by_iter;
  std::vector<double> gnp_margin_by_time;
};

AggregateReport aggregate(const std::vector<RunRecord>& records);

std::string run_record_to_json(const RunRecord& r);
RunRecord run_record_from_json(const std::string& line);
std::string aggregate_to_json(const AggregateReport& report);

void write_records_jsonl(const std::string& path,
                         const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records_jsonl(const std::string& path);

// metrics.csv: one row per record
void write_metrics_csv(const std::string& path,
                       const std::vector<RunRecord>& records);
// per-run convergence curves: iteration,relres,time
void write_curve_csv(const std::string& path, const RunRecord& record);

}  // namespace gnp
