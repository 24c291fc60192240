#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gnp/baselines.hpp"
#include "gnp/bench.hpp"
#include "gnp/gen.hpp"
#include "gnp/gnn.hpp"
#include "gnp/krylov.hpp"
#include "gnp/mmio.hpp"

namespace py = pybind11;
using namespace gnp;

namespace {

std::unique_ptr<FlexibleOperator> build_named(const CsrMatrix& a,
                                              const std::string& name,
                                              const GnnParams* params) {
  if (name == "none") return nullptr;
  if (name == "jacobi") return jacobi_build(a);
  if (name == "gmres") return inner_gmres_build(a);
  if (name == "ilu0") return ilu0_build(ilu0_factor(a));
  if (name == "gnp") {
    if (!params) throw std::invalid_argument("gnp requires trained params");
    return apply_preconditioner(*params, a);
  }
  throw std::invalid_argument("unknown preconditioner: " + name);
}

py::dict outcome_to_dict(const SolveOutcome& outcome) {
  py::dict d;
  d["status"] = to_string(outcome.status);
  d["x"] = outcome.x;
  py::list hist;
  for (const auto& e : outcome.history)
    hist.append(py::make_tuple(e.iteration, e.relres, e.elapsed_secs));
  d["history"] = hist;
  return d;
}

}  // namespace

PYBIND11_MODULE(_gnp, m) {
  m.doc() = "FGMRES with baseline and graph neural preconditioners";

  py::class_<CsrMatrix>(m, "CsrMatrix")
      .def_property_readonly("n", [](const CsrMatrix& a) { return a.n; })
      .def_property_readonly("nnz", &CsrMatrix::nnz)
      .def_readonly("row_ptr", &CsrMatrix::row_ptr)
      .def_readonly("col_idx", &CsrMatrix::col_idx)
      .def_readonly("values", &CsrMatrix::values);

  py::class_<GnnParams>(m, "GnnParams");

  m.def("read_matrix_market", &read_matrix_market_file, py::arg("path"));
  m.def("write_matrix_market", &write_matrix_market_file, py::arg("path"),
        py::arg("matrix"));
  m.def("gen_convection_diffusion", &gen_convection_diffusion, py::arg("grid"),
        py::arg("convection") = 0.5);
  m.def("gen_random_nonsymmetric", &gen_random_nonsymmetric, py::arg("n"),
        py::arg("offdiag_per_row") = 8, py::arg("dominance") = 1.5,
        py::arg("seed") = 0);
  m.def("gershgorin_gamma", &gershgorin_gamma);
  m.def("prescale", &prescale, py::arg("matrix"), py::arg("gamma"));
  m.def("spmv", &spmv, py::arg("matrix"), py::arg("x"));

  m.def(
      "solve",
      [](const CsrMatrix& a, const DenseVector& b, const std::string& precond,
         const GnnParams* params, double rtol, std::size_t maxiters,
         std::size_t restart) {
        SolveConfig cfg;
        cfg.rtol = rtol;
        cfg.maxiters = maxiters;
        cfg.restart = restart;
        const auto op = build_named(a, precond, params);
        return outcome_to_dict(
            fgmres_solve(a, b, op.get(), DenseVector(a.n, 0.0), cfg));
      },
      py::arg("matrix"), py::arg("b"), py::arg("precond") = "none",
      py::arg("params") = nullptr, py::arg("rtol") = 1e-8,
      py::arg("maxiters") = 100, py::arg("restart") = 10);

  m.def(
      "train",
      [](const CsrMatrix& a, std::size_t steps, std::size_t batch,
         std::size_t spectral, double lr, std::size_t arnoldi_m,
         std::uint64_t seed) {
        TrainConfig cfg;
        cfg.steps = steps;
        cfg.batch = batch;
        cfg.spectral_count = spectral;
        cfg.lr = lr;
        cfg.arnoldi_m = arnoldi_m;
        cfg.seed = seed;
        TrainResult res = train_preconditioner(a, cfg);
        return py::make_tuple(res.best, res.loss_history);
      },
      py::arg("matrix"), py::arg("steps") = 2000, py::arg("batch") = 16,
      py::arg("spectral") = 8, py::arg("lr") = 1e-3, py::arg("arnoldi_m") = 40,
      py::arg("seed") = 0);

  m.def("save_checkpoint",
        [](const std::string& path, const GnnParams& p, const CsrMatrix& a) {
          save_checkpoint_file(path, p, matrix_meta_of(a));
        });
  m.def("load_checkpoint", [](const std::string& path) {
    return load_checkpoint_file(path).params;
  });

  m.def(
      "iter_auc",
      [](const std::vector<std::tuple<std::size_t, double, double>>& history,
         double rtol) {
        ConvergenceHistory h;
        for (const auto& [i, r, t] : history) h.push_back({i, r, t});
        return iter_auc(h, rtol);
      },
      py::arg("history"), py::arg("rtol") = 1e-8);
  m.def(
      "time_auc",
      [](const std::vector<std::tuple<std::size_t, double, double>>& history,
         double rtol) {
        ConvergenceHistory h;
        for (const auto& [i, r, t] : history) h.push_back({i, r, t});
        return time_auc(h, rtol);
      },
      py::arg("history"), py::arg("rtol") = 1e-8);
}
