#include "gnp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "gnp/baselines.hpp"
#include "gnp/mmio.hpp"

namespace gnp {

namespace {

using nlohmann::json;

double log10_clamped(double r) {
  return std::log10(std::max(r, 1e-300));
}

double wall_seconds(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

double iter_auc(const ConvergenceHistory& history, double rtol) {
  if (history.empty()) throw std::invalid_argument("iter_auc: empty history");
  const double log_rtol = std::log10(rtol);
  double sum = 0.0;
  for (const auto& e : history) sum += log10_clamped(e.relres) - log_rtol;
  return sum;
}

double time_auc(const ConvergenceHistory& history, double rtol) {
  if (history.size() < 2) return 0.0;
  const double log_rtol = std::log10(rtol);
  double sum = 0.0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    sum += (log10_clamped(history[i].relres) - log_rtol) *
           (history[i].elapsed_secs - history[i - 1].elapsed_secs);
  }
  return sum;
}

RunRecord run_single(const CsrMatrix& a, const std::string& matrix_id,
                     const PrecondSpec& spec, const SolveConfig& cfg,
                     StopMode mode, std::optional<double> timeout_budget) {
  RunRecord rec;
  rec.matrix_id = matrix_id;
  rec.precond = spec.name;

  std::unique_ptr<FlexibleOperator> op;
  GnnParams trained;  // keeps gnp params alive for the operator
  const auto t_build = std::chrono::steady_clock::now();
  try {
    if (spec.name == "none") {
      // no operator
    } else if (spec.name == "jacobi") {
      op = jacobi_build(a);
    } else if (spec.name == "gmres") {
      op = inner_gmres_build(a);
    } else if (spec.name == "ilu0") {
      op = ilu0_build(ilu0_factor(a));
    } else if (spec.name == "gnp") {
      if (spec.gnn_params) {
        op = apply_preconditioner(*spec.gnn_params, a);
      } else {
        trained = train_preconditioner(a, spec.train_cfg).best;
        op = apply_preconditioner(trained, a);
      }
    } else {
      throw std::invalid_argument("unknown preconditioner: " + spec.name);
    }
  } catch (const std::exception&) {
    rec.status = "construction_failure";
    rec.construct_secs = wall_seconds(t_build);
    return rec;
  }
  rec.construct_secs = wall_seconds(t_build);

  const DenseVector b = spmv(a, DenseVector(a.n, 1.0));  // ground truth x = 1
  SolveConfig solve_cfg = cfg;
  if (mode == StopMode::timeout) {
    solve_cfg.maxiters = static_cast<std::size_t>(-1) / 2;
    solve_cfg.timeout_secs = timeout_budget.value_or(
        cfg.timeout_secs.value_or(1.0));
  }

  const auto t_solve = std::chrono::steady_clock::now();
  try {
    const SolveOutcome outcome =
        fgmres_solve(a, b, op.get(), DenseVector(a.n, 0.0), solve_cfg);
    rec.solve_secs = wall_seconds(t_solve);
    rec.status = to_string(outcome.status);
    rec.history = outcome.history;
    rec.iter_auc = iter_auc(outcome.history, solve_cfg.rtol);
    rec.time_auc = time_auc(outcome.history, solve_cfg.rtol);
    rec.final_relres = outcome.history.back().relres;
  } catch (const std::exception&) {
    rec.solve_secs = wall_seconds(t_solve);
    rec.status = "solution_failure";
  }
  return rec;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open manifest " + path);
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("manifest line missing tab: " + line);
    ManifestEntry e{line.substr(0, tab), line.substr(tab + 1)};
    for (const auto& prev : entries) {
      if (prev.id == e.id)
        throw std::runtime_error("duplicate manifest id: " + e.id);
    }
    std::ifstream probe(e.path);
    if (!probe) throw std::runtime_error("manifest path unreadable: " + e.path);
    entries.push_back(std::move(e));
  }
  return entries;
}

namespace {

std::vector<RunRecord> run_matrix(const ManifestEntry& entry,
                                  const std::vector<PrecondSpec>& preconds,
                                  const SolveConfig& cfg, StopMode mode,
                                  std::optional<double> timeout_budget) {
  std::vector<RunRecord> recs;
  CsrMatrix a;
  try {
    a = read_matrix_market_file(entry.path);
    a = prescale(a, gershgorin_gamma(a));
  } catch (const std::exception&) {
    for (const auto& spec : preconds) {
      RunRecord rec;
      rec.matrix_id = entry.id;
      rec.precond = spec.name;
      rec.status = "construction_failure";
      recs.push_back(std::move(rec));
    }
    return recs;
  }

  std::optional<double> budget = timeout_budget;
  if (mode == StopMode::timeout && !budget) {
    // budget = max solve time across preconditioners under the maxiters
    // stopping criterion
    double max_secs = 0.0;
    for (const auto& spec : preconds) {
      const RunRecord probe =
          run_single(a, entry.id, spec, cfg, StopMode::maxiters);
      max_secs = std::max(max_secs, probe.solve_secs);
    }
    budget = max_secs;
  }
  for (const auto& spec : preconds)
    recs.push_back(run_single(a, entry.id, spec, cfg, mode, budget));
  return recs;
}

}  // namespace

std::vector<RunRecord> run_suite(const std::vector<ManifestEntry>& manifest,
                                 const std::vector<PrecondSpec>& preconds,
                                 const SolveConfig& cfg, StopMode mode,
                                 std::optional<double> timeout_budget,
                                 std::size_t jobs) {
  if (manifest.empty()) throw std::invalid_argument("empty manifest");
  std::vector<std::vector<RunRecord>> per_matrix(manifest.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < manifest.size(); ++i)
      per_matrix[i] =
          run_matrix(manifest[i], preconds, cfg, mode, timeout_budget);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= manifest.size()) break;
        per_matrix[i] =
            run_matrix(manifest[i], preconds, cfg, mode, timeout_budget);
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(jobs, manifest.size()); ++t)
      pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<RunRecord> out;
  for (auto& recs : per_matrix)
    for (auto& r : recs) out.push_back(std::move(r));
  return out;
}

namespace {

std::vector<double> percentiles_lower(std::vector<double> values) {
  std::vector<double> out;
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  for (const double p : {0.25, 0.50, 0.75, 1.00}) {
    const auto rank = static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(values.size())));
    out.push_back(values[rank == 0 ? 0 : rank - 1]);
  }
  return out;
}

}  // namespace

AggregateReport aggregate(const std::vector<RunRecord>& records) {
  AggregateReport rep;
  std::map<std::string, std::vector<const RunRecord*>> by_matrix;
  for (const auto& r : records) {
    by_matrix[r.matrix_id].push_back(&r);
    if (r.status != "converged" && r.status != "maxiters" &&
        r.status != "timeout" && r.status != "breakdown_exact") {
      rep.failures[r.precond][r.status]++;
    }
  }

  std::vector<double> margins_iter, margins_time;
  for (const auto& [id, runs] : by_matrix) {
    std::vector<const RunRecord*> ok;
    for (const auto* r : runs) {
      if (r->iter_auc) ok.push_back(r);
    }
    if (ok.empty()) continue;
    rep.matrices_with_success++;

    auto rank_and_count = [&](auto metric,
                              std::map<std::string, std::size_t>& counts,
                              std::vector<double>& margins) {
      const RunRecord* best = ok.front();
      for (const auto* r : ok) {
        if (metric(r) < metric(best)) best = r;
      }
      counts[best->precond]++;
      if (best->precond == "gnp" && ok.size() > 1 && best->final_relres) {
        const RunRecord* second = nullptr;
        for (const auto* r : ok) {
          if (r == best) continue;
          if (!second || metric(r) < metric(second)) second = r;
        }
        if (second && second->final_relres && *best->final_relres > 0.0)
          margins.push_back(*second->final_relres / *best->final_relres);
      }
    };
    rank_and_count([](const RunRecord* r) { return *r->iter_auc; },
                   rep.best_by_iter_auc, margins_iter);
    rank_and_count([](const RunRecord* r) { return *r->time_auc; },
                   rep.best_by_time_auc, margins_time);
  }
  rep.gnp_margin_by_iter = percentiles_lower(std::move(margins_iter));
  rep.gnp_margin_by_time = percentiles_lower(std::move(margins_time));
  return rep;
}

std::string run_record_to_json(const RunRecord& r) {
  json j;
  j["matrix_id"] = r.matrix_id;
  j["precond"] = r.precond;
  j["status"] = r.status;
  json hist = json::array();
  for (const auto& e : r.history)
    hist.push_back({e.iteration, e.relres, e.elapsed_secs});
  j["history"] = hist;
  if (r.iter_auc) j["iter_auc"] = *r.iter_auc;
  if (r.time_auc) j["time_auc"] = *r.time_auc;
  if (r.final_relres) j["final_relres"] = *r.final_relres;
  j["construct_secs"] = r.construct_secs;
  j["solve_secs"] = r.solve_secs;
  return j.dump();
}

RunRecord run_record_from_json(const std::string& line) {
  const json j = json::parse(line);
  RunRecord r;
  r.matrix_id = j.at("matrix_id").get<std::string>();
  r.precond = j.at("precond").get<std::string>();
  r.status = j.at("status").get<std::string>();
  for (const auto& e : j.at("history"))
    r.history.push_back({e.at(0).get<std::size_t>(), e.at(1).get<double>(),
                         e.at(2).get<double>()});
  if (j.contains("iter_auc")) r.iter_auc = j["iter_auc"].get<double>();
  if (j.contains("time_auc")) r.time_auc = j["time_auc"].get<double>();
  if (j.contains("final_relres"))
    r.final_relres = j["final_relres"].get<double>();
  r.construct_secs = j.at("construct_secs").get<double>();
  r.solve_secs = j.at("solve_secs").get<double>();
  return r;
}

std::string aggregate_to_json(const AggregateReport& rep) {
  json j;
  j["best_by_iter_auc"] = rep.best_by_iter_auc;
  j["best_by_time_auc"] = rep.best_by_time_auc;
  j["failures"] = rep.failures;
  j["matrices_with_success"] = rep.matrices_with_success;
  j["gnp_margin_by_iter"] = rep.gnp_margin_by_iter;
  j["gnp_margin_by_time"] = rep.gnp_margin_by_time;
  j["margin_percentiles"] = {25, 50, 75, 100};
  return j.dump(2);
}

void write_records_jsonl(const std::string& path,
                         const std::vector<RunRecord>& records) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& r : records) f << run_record_to_json(r) << '\n';
}

std::vector<RunRecord> read_records_jsonl(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::vector<RunRecord> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    out.push_back(run_record_from_json(line));
  }
  return out;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<RunRecord>& records) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "matrix_id,precond,status,iter_auc,time_auc,final_relres,"
       "construct_secs,solve_secs\n";
  f.precision(17);
  for (const auto& r : records) {
    f << r.matrix_id << ',' << r.precond << ',' << r.status << ',';
    if (r.iter_auc) f << *r.iter_auc;
    f << ',';
    if (r.time_auc) f << *r.time_auc;
    f << ',';
    if (r.final_relres) f << *r.final_relres;
    f << ',' << r.construct_secs << ',' << r.solve_secs << '\n';
  }
}

void write_curve_csv(const std::string& path, const RunRecord& record) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "iteration,relres,time\n";
  f.precision(17);
  for (const auto& e : record.history)
    f << e.iteration << ',' << e.relres << ',' << e.elapsed_secs << '\n';
}

}  // namespace gnp
