#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gnp/baselines.hpp"
#include "gnp/bench.hpp"
#include "gnp/gen.hpp"
#include "gnp/gnn.hpp"
#include "gnp/krylov.hpp"
#include "gnp/mmio.hpp"

namespace {

using namespace gnp;

int cmd_gen(const std::string& kind, std::size_t grid, double convection,
            std::size_t n, std::size_t offdiag, double dominance,
            std::uint64_t seed, const std::string& out) {
  CsrMatrix a;
  if (kind == "convdiff") {
    a = gen_convection_diffusion(grid, convection);
  } else if (kind == "randnsym") {
    a = gen_random_nonsymmetric(n, offdiag, dominance, seed);
  } else {
    std::cerr << "unknown kind: " << kind << " (convdiff|randnsym)\n";
    return 1;
  }
  write_matrix_market_file(out, a);
  std::cout << "wrote " << out << " (n=" << a.n << ", nnz=" << a.nnz() << ")\n";
  return 0;
}

int cmd_train(const std::string& matrix_path, const std::string& out,
              TrainConfig cfg) {
  CsrMatrix a = read_matrix_market_file(matrix_path);
  a = prescale(a, gershgorin_gamma(a));
  const TrainResult result = train_preconditioner(a, cfg);
  save_checkpoint_file(out, result.best, matrix_meta_of(a));
  std::cout << "initial monitoring loss: " << result.loss_history.front()
            << "\n";
  std::cout << "final monitoring loss:   " << result.loss_history.back()
            << "\n";
  std::cout << "best monitoring loss:    " << result.best_loss << "\n";
  std::cout << "checkpoint: " << out << "\n";
  return 0;
}

int cmd_solve(const std::string& matrix_path, const std::string& precond,
              const std::string& model, const std::string& history_out,
              const SolveConfig& cfg) {
  CsrMatrix a = read_matrix_market_file(matrix_path);
  a = prescale(a, gershgorin_gamma(a));

  PrecondSpec spec;
  spec.name = precond;
  GnnParams params;
  if (precond == "gnp") {
    const Checkpoint ckpt = load_checkpoint_file(model);
    const MatrixMeta meta = matrix_meta_of(a);
    if (ckpt.meta.hash != meta.hash || ckpt.meta.n != meta.n)
      std::cerr << "warning: checkpoint was trained on a different matrix\n";
    params = ckpt.params;
    spec.gnn_params = &params;
  }

  const RunRecord rec = run_single(a, matrix_path, spec, cfg,
                                   StopMode::maxiters);
  if (rec.status == "construction_failure") {
    std::cerr << "preconditioner construction failed (" << precond << ")\n";
    return 1;
  }
  std::cout << "status: " << rec.status << "\n";
  std::cout << "iterations: " << rec.history.back().iteration << "\n";
  std::cout << "final relres: " << *rec.final_relres << "\n";
  std::cout << "iter_auc: " << *rec.iter_auc << "\n";
  if (!history_out.empty()) {
    std::ofstream f(history_out);
    if (!f) {
      std::cerr << "cannot write " << history_out << "\n";
      return 1;
    }
    f << run_record_to_json(rec) << "\n";
  }
  return 0;
}

int cmd_bench(const std::string& manifest_path,
              const std::vector<std::string>& precond_names,
              const SolveConfig& cfg, const TrainConfig& train_cfg,
              const std::string& mode_name, double timeout_budget,
              std::size_t jobs, const std::string& out) {
  const auto manifest = load_manifest(manifest_path);
  std::vector<PrecondSpec> preconds;
  for (const auto& name : precond_names) {
    PrecondSpec spec;
    spec.name = name;
    spec.train_cfg = train_cfg;
    preconds.push_back(spec);
  }
  const StopMode mode =
      mode_name == "timeout" ? StopMode::timeout : StopMode::maxiters;
  std::optional<double> budget;
  if (timeout_budget > 0.0) budget = timeout_budget;
  const auto records = run_suite(manifest, preconds, cfg, mode, budget, jobs);
  write_records_jsonl(out, records);
  std::cout << "wrote " << records.size() << " run records to " << out << "\n";
  return 0;
}

int cmd_report(const std::string& records_path, const std::string& out_json,
               const std::string& out_csv, const std::string& curves_dir) {
  const auto records = read_records_jsonl(records_path);
  if (records.empty()) {
    std::cerr << "no records in " << records_path << "\n";
    return 1;
  }
  const AggregateReport rep = aggregate(records);
  {
    std::ofstream f(out_json);
    if (!f) {
      std::cerr << "cannot write " << out_json << "\n";
      return 1;
    }
    f << aggregate_to_json(rep) << "\n";
  }
  write_metrics_csv(out_csv, records);
  if (!curves_dir.empty()) {
    std::filesystem::create_directories(curves_dir);
    for (const auto& r : records) {
      if (r.history.empty()) continue;
      write_curve_csv(curves_dir + "/" + r.matrix_id + "__" + r.precond +
                          ".csv",
                      r);
    }
  }
  std::cout << "report: " << out_json << ", " << out_csv << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse linear solves with FGMRES and a trainable graph "
               "neural preconditioner"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a test matrix");
  std::string gen_kind = "convdiff", gen_out = "matrix.mtx";
  std::size_t gen_grid = 32, gen_n = 1024, gen_offdiag = 8;
  double gen_convection = 0.5, gen_dominance = 1.5;
  std::uint64_t gen_seed = 0;
  gen->add_option("--kind", gen_kind, "convdiff|randnsym");
  gen->add_option("--grid", gen_grid, "grid side for convdiff (n = grid^2)");
  gen->add_option("--convection", gen_convection,
                  "convection strength in [-1,1]");
  gen->add_option("--n", gen_n, "dimension for randnsym");
  gen->add_option("--offdiag", gen_offdiag, "off-diagonals per row (randnsym)");
  gen->add_option("--dominance", gen_dominance, "diagonal dominance factor");
  gen->add_option("--seed", gen_seed, "rng seed");
  gen->add_option("--out", gen_out, "output Matrix Market file")->required();

  // train
  auto* train = app.add_subcommand("train", "Train the neural preconditioner");
  std::string train_matrix, train_out = "model.ckpt";
  TrainConfig tc;
  train->add_option("--matrix", train_matrix, "Matrix Market file")->required();
  train->add_option("--out", train_out, "checkpoint path");
  train->add_option("--steps", tc.steps, "training steps");
  train->add_option("--batch", tc.batch, "batch size");
  train->add_option("--spectral", tc.spectral_count,
                    "spectral pairs per batch");
  train->add_option("--lr", tc.lr, "learning rate");
  train->add_option("--arnoldi", tc.arnoldi_m, "Arnoldi steps for sampling");
  train->add_option("--layers", tc.dims.layers, "Res-GCONV layer count");
  train->add_option("--dim", tc.dims.d, "layer width");
  train->add_option("--hidden", tc.dims.hidden, "MLP hidden width");
  train->add_option("--seed", tc.seed, "rng seed");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve A x = A*1 with FGMRES");
  std::string solve_matrix, solve_precond, solve_model, solve_history;
  SolveConfig sc;
  double solve_timeout = 0.0;
  solve->add_option("--matrix", solve_matrix, "Matrix Market file")->required();
  solve->add_option("--precond", solve_precond,
                    "none|jacobi|gmres|ilu0|gnp")->required();
  solve->add_option("--model", solve_model, "checkpoint (required for gnp)");
  solve->add_option("--rtol", sc.rtol, "relative residual tolerance");
  solve->add_option("--maxiters", sc.maxiters, "outer iteration cap");
  solve->add_option("--restart", sc.restart, "restart cycle length");
  solve->add_option("--timeout", solve_timeout, "wall clock budget (seconds)");
  solve->add_option("--history", solve_history, "write run record JSON here");

  // bench
  auto* bench = app.add_subcommand("bench", "Run a suite of solves");
  std::string bench_manifest, bench_out = "records.jsonl",
              bench_mode = "maxiters";
  std::vector<std::string> bench_preconds{"none", "jacobi", "gmres", "ilu0"};
  double bench_budget = 0.0;
  std::size_t bench_jobs = 1;
  SolveConfig bc;
  TrainConfig btc;
  bench->add_option("--manifest", bench_manifest, "id<TAB>path manifest")
      ->required();
  bench->add_option("--preconds", bench_preconds,
                    "preconditioners to compare");
  bench->add_option("--out", bench_out, "output JSONL path");
  bench->add_option("--mode", bench_mode, "maxiters|timeout");
  bench->add_option("--timeout-budget", bench_budget,
                    "fixed timeout budget in seconds (timeout mode)");
  bench->add_option("--jobs", bench_jobs, "parallel matrices");
  bench->add_option("--rtol", bc.rtol, "relative residual tolerance");
  bench->add_option("--maxiters", bc.maxiters, "outer iteration cap");
  bench->add_option("--restart", bc.restart, "restart cycle length");
  bench->add_option("--train-steps", btc.steps, "gnp training steps");
  bench->add_option("--seed", btc.seed, "gnp training seed");

  // report
  auto* report = app.add_subcommand("report", "Aggregate run records");
  std::string report_records, report_json = "report.json",
              report_csv = "metrics.csv", report_curves;
  report->add_option("--records", report_records, "records JSONL")->required();
  report->add_option("--out-json", report_json, "aggregate report path");
  report->add_option("--out-csv", report_csv, "per-run metrics CSV path");
  report->add_option("--curves-dir", report_curves,
                     "directory for per-run convergence CSVs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_gen(gen_kind, gen_grid, gen_convection, gen_n, gen_offdiag,
                     gen_dominance, gen_seed, gen_out);
    if (train->parsed()) return cmd_train(train_matrix, train_out, tc);
    if (solve->parsed()) {
      if (solve_precond == "gnp" && solve_model.empty()) {
        std::cerr << "--model is required with --precond gnp\n";
        return 2;
      }
      if (solve_timeout > 0.0) sc.timeout_secs = solve_timeout;
      return cmd_solve(solve_matrix, solve_precond, solve_model, solve_history,
                       sc);
    }
    if (bench->parsed())
      return cmd_bench(bench_manifest, bench_preconds, bc, btc, bench_mode,
                       bench_budget, bench_jobs, bench_out);
    if (report->parsed())
      return cmd_report(report_records, report_json, report_csv,
                        report_curves);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
