#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gnp/gen.hpp"
#include "gnp/gnn.hpp"
#include "test_support.hpp"

using namespace gnp;
using namespace gnp::test;

namespace {

GnnDims tiny_dims() { return GnnDims{1, 1, 1}; }

// hand-settable scalar network: d = hidden = layers = 1
GnnParams tiny_params(double enc1, double enc1_b, double enc2, double enc2_b,
                      double u, double w, double dec1, double dec1_b,
                      double dec2, double dec2_b) {
  Rng rng(0);
  GnnParams p = init_params(tiny_dims(), rng);
  p.enc1[0] = enc1;
  p.enc1_bias[0] = enc1_b;
  p.enc2(0, 0) = enc2;
  p.enc2_bias[0] = enc2_b;
  p.layers[0].u(0, 0) = u;
  p.layers[0].w(0, 0) = w;
  p.dec1(0, 0) = dec1;
  p.dec1_bias[0] = dec1_b;
  p.dec2[0] = dec2;
  p.dec2_bias = dec2_b;
  return p;
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

GnnParams small_random_params(std::uint64_t seed) {
  Rng rng(seed);
  return init_params(GnnDims{3, 4, 2}, rng);
}

// flattened copy of every parameter, checkpoint order
std::vector<double> flatten(const GnnParams& p) {
  std::vector<double> out;
  auto push_vec = [&](const DenseVector& v) {
    out.insert(out.end(), v.begin(), v.end());
  };
  auto push_mat = [&](const DenseMatrix& m) {
    out.insert(out.end(), m.data().begin(), m.data().end());
  };
  push_vec(p.enc1);
  push_vec(p.enc1_bias);
  push_mat(p.enc2);
  push_vec(p.enc2_bias);
  for (const auto& l : p.layers) {
    push_mat(l.u);
    push_mat(l.w);
  }
  push_mat(p.dec1);
  push_vec(p.dec1_bias);
  push_vec(p.dec2);
  out.push_back(p.dec2_bias);
  return out;
}

void unflatten(GnnParams& p, const std::vector<double>& flat) {
  std::size_t k = 0;
  auto pull_vec = [&](DenseVector& v) {
    for (double& x : v) x = flat[k++];
  };
  auto pull_mat = [&](DenseMatrix& m) {
    for (double& x : m.data()) x = flat[k++];
  };
  pull_vec(p.enc1);
  pull_vec(p.enc1_bias);
  pull_mat(p.enc2);
  pull_vec(p.enc2_bias);
  for (auto& l : p.layers) {
    pull_mat(l.u);
    pull_mat(l.w);
  }
  pull_mat(p.dec1);
  pull_vec(p.dec1_bias);
  pull_vec(p.dec2);
  p.dec2_bias = flat[k++];
  REQUIRE(k == flat.size());
}

}  // namespace

TEST_CASE("init_params: deterministic, Glorot bounds, zero biases") {
  const GnnDims dims{16, 32, 8};
  Rng r1(7), r2(7);
  const GnnParams p1 = init_params(dims, r1);
  const GnnParams p2 = init_params(dims, r2);
  CHECK(flatten(p1) == flatten(p2));

  auto within = [](const std::vector<double>& v, double bound) {
    for (double x : v)
      if (std::abs(x) > bound) return false;
    return true;
  };
  CHECK(within(p1.enc1, std::sqrt(6.0 / (1 + 32))));
  CHECK(within(p1.enc2.data(), std::sqrt(6.0 / (32 + 16))));
  CHECK(within(p1.layers[3].u.data(), std::sqrt(6.0 / (16 + 16))));
  CHECK(within(p1.dec2, std::sqrt(6.0 / (32 + 1))));
  for (double b : p1.enc1_bias) CHECK(b == 0.0);
  for (double b : p1.enc2_bias) CHECK(b == 0.0);
  for (double b : p1.dec1_bias) CHECK(b == 0.0);
  CHECK(p1.dec2_bias == 0.0);

  CHECK(p1.total_parameters() ==
        32 + 32 + 32 * 16 + 16 + 8 * 2 * 16 * 16 + 16 * 32 + 32 + 32 + 1);
}

TEST_CASE("forward maps zero input to zero output") {
  const CsrMatrix a = csr_identity(5);
  Rng rng(1);
  const GnnParams p = init_params(GnnDims{4, 4, 2}, rng);
  const DenseVector out = gnn_apply(p, a, DenseVector(5, 0.0));
  for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("forward with a zeroed decoder head is the zero map") {
  const CsrMatrix a = gen_random_nonsymmetric(6, 3, 1.5, 2);
  Rng rng(3);
  GnnParams p = init_params(GnnDims{4, 4, 2}, rng);
  p.dec2.assign(p.dec2.size(), 0.0);
  p.dec2_bias = 0.0;
  const DenseVector out = gnn_apply(p, a, rng.gaussian_vector(6));
  for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("tiny network matches a hand-computed forward pass") {
  // ahat = [[0.5, 0.25], [0, 0.5]]
  const CsrMatrix ahat =
      csr_from_triplets(2, {0, 0, 1}, {0, 1, 1}, {0.5, 0.25, 0.5});
  const GnnParams p =
      tiny_params(0.3, 0.1, 1.2, 0.05, 0.7, 0.4, 0.9, 0.02, 1.1, 0.03);
  const DenseVector b{1.0, 2.0};

  const double tau = std::sqrt(5.0);
  const double scale_in = std::sqrt(2.0) / tau;
  double v[2] = {scale_in * 1.0, scale_in * 2.0};
  double x1[2];
  for (int i = 0; i < 2; ++i)
    x1[i] = relu(v[i] * 0.3 + 0.1) * 1.2 + 0.05;
  double ax[2] = {0.5 * x1[0] + 0.25 * x1[1], 0.5 * x1[1]};
  double conv[2];
  for (int i = 0; i < 2; ++i) conv[i] = relu(x1[i] * 0.7 + ax[i] * 0.4);
  double want[2];
  for (int i = 0; i < 2; ++i) {
    const double post = relu(conv[i] * 0.9 + 0.02);
    want[i] = (post * 1.1 + 0.03) * (tau / std::sqrt(2.0));
  }

  const ForwardResult fr = gnn_forward(p, ahat, b);
  CHECK(std::abs(fr.out[0] - want[0]) <= 1e-14 * std::abs(want[0]));
  CHECK(std::abs(fr.out[1] - want[1]) <= 1e-14 * std::abs(want[1]));
  CHECK(std::abs(norm2(fr.cache.v) - std::sqrt(2.0)) <= 1e-14);
}

TEST_CASE("forward is positively homogeneous") {
  const CsrMatrix a = gen_random_nonsymmetric(10, 4, 1.4, 5);
  Rng rng(8);
  const GnnParams p = init_params(GnnDims{4, 6, 3}, rng);
  const DenseVector b = rng.gaussian_vector(10);
  const DenseVector base = gnn_apply(p, a, b);
  for (double alpha : {0.5, 10.0, 1e6}) {
    DenseVector scaled = b;
    scale(scaled, alpha);
    const DenseVector out = gnn_apply(p, a, scaled);
    for (std::size_t i = 0; i < 10; ++i)
      CHECK(std::abs(out[i] - alpha * base[i]) <=
            1e-12 * alpha * (1.0 + std::abs(base[i])));
  }
}

TEST_CASE("backward matches central finite differences") {
  const CsrMatrix ahat = gen_random_nonsymmetric(5, 3, 1.5, 11);
  GnnParams p = small_random_params(4);
  Rng rng(12);
  const DenseVector b = rng.gaussian_vector(5);
  const DenseVector gvec = rng.gaussian_vector(5);

  const ForwardResult fr = gnn_forward(p, ahat, b);
  const GnnParams grads = gnn_backward(p, ahat, fr.cache, gvec);
  const std::vector<double> analytic = flatten(grads);

  std::vector<double> theta = flatten(p);
  const double h = 1e-6;
  const double f0 = dot(fr.out, gvec);
  std::size_t checked = 0, skipped = 0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double orig = theta[k];
    theta[k] = orig + h;
    unflatten(p, theta);
    const double fp = dot(gnn_apply(p, ahat, b), gvec);
    theta[k] = orig - h;
    unflatten(p, theta);
    const double fm = dot(gnn_apply(p, ahat, b), gvec);
    theta[k] = orig;
    // a relu kink inside [-h, +h] makes the one-sided slopes disagree;
    // those coordinates have no classical derivative to compare against
    const double fwd = (fp - f0) / h;
    const double bwd = (f0 - fm) / h;
    if (std::abs(fwd - bwd) > 1e-3 * std::max({1.0, std::abs(fwd), std::abs(bwd)})) {
      ++skipped;
      continue;
    }
    const double fd = (fp - fm) / (2.0 * h);
    const double denom = std::max({1.0, std::abs(fd), std::abs(analytic[k])});
    CHECK(std::abs(fd - analytic[k]) / denom <= 1e-5);
    ++checked;
  }
  unflatten(p, theta);
  CHECK(checked >= theta.size() - 8);
  CHECK(skipped <= 8);
}

TEST_CASE("backward is linear in the output gradient") {
  const CsrMatrix ahat = gen_random_nonsymmetric(6, 3, 1.5, 13);
  const GnnParams p = small_random_params(14);
  Rng rng(15);
  const DenseVector b = rng.gaussian_vector(6);
  const DenseVector g1 = rng.gaussian_vector(6);
  const DenseVector g2 = rng.gaussian_vector(6);
  DenseVector gsum = g1;
  axpy(1.0, g2, gsum);

  const ForwardResult fr = gnn_forward(p, ahat, b);
  const std::vector<double> a1 = flatten(gnn_backward(p, ahat, fr.cache, g1));
  const std::vector<double> a2 = flatten(gnn_backward(p, ahat, fr.cache, g2));
  const std::vector<double> as =
      flatten(gnn_backward(p, ahat, fr.cache, gsum));
  for (std::size_t k = 0; k < as.size(); ++k)
    CHECK(std::abs(as[k] - (a1[k] + a2[k])) <=
          1e-12 * (1.0 + std::abs(as[k])));
}

TEST_CASE("l1 residual loss hand examples") {
  const CsrMatrix eye = csr_identity(2);
  {
    DenseMatrix out(2, 1), x(2, 1);
    out(0, 0) = 1.0;
    const L1LossResult r = l1_residual_loss(eye, out, x);
    CHECK(r.loss == 1.0);
    CHECK(r.grad(0, 0) == 1.0);
    CHECK(r.grad(1, 0) == 0.0);  // sign(0) = 0
  }
  {
    // batch of 2 averages: residuals [3, 0] and [0, -2]
    DenseMatrix out(2, 2), x(2, 2);
    out(0, 0) = 3.0;
    out(1, 1) = -2.0;
    const L1LossResult r = l1_residual_loss(eye, out, x);
    CHECK(r.loss == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(r.grad(0, 0) == 0.5);
    CHECK(r.grad(1, 1) == -0.5);
  }
  {
    // perfect prediction: zero loss and zero gradient
    const CsrMatrix a = gen_random_nonsymmetric(4, 2, 1.5, 6);
    Rng rng(7);
    DenseMatrix x(4, 3);
    for (double& v : x.data()) v = rng.gaussian();
    const L1LossResult r = l1_residual_loss(a, x, x);
    CHECK(r.loss == 0.0);
    for (double g : r.grad.data()) CHECK(g == 0.0);
  }
  {
    // grad carries A^T: single unit residual row picks out a row of A
    const CsrMatrix a =
        csr_from_triplets(2, {0, 0, 1}, {0, 1, 1}, {2.0, -3.0, 4.0});
    DenseMatrix out(2, 1), x(2, 1);
    out(0, 0) = 1.0;  // residual r = A e0 = [2, 0]
    const L1LossResult r = l1_residual_loss(a, out, x);
    CHECK(r.loss == 2.0);
    // A^T sign([2,0]) = A^T [1,0] = first row of A
    CHECK(r.grad(0, 0) == 2.0);
    CHECK(r.grad(1, 0) == -3.0);
  }
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  GnnParams p = small_random_params(20);
  const std::vector<double> before = flatten(p);
  GnnParams zero = p;
  std::vector<double> zeros(before.size(), 0.0);
  unflatten(zero, zeros);
  AdamState st = make_adam_state(p);
  for (int t = 0; t < 3; ++t) adam_step(p, zero, st, 1e-3);
  CHECK(flatten(p) == before);
  CHECK(st.t == 3);
}

TEST_CASE("adam: first step moves by ~lr against the gradient sign") {
  GnnParams p = small_random_params(21);
  const std::vector<double> before = flatten(p);
  GnnParams g = p;
  std::vector<double> gflat(before.size());
  Rng rng(22);
  for (double& x : gflat) x = rng.gaussian() * 10.0;
  unflatten(g, gflat);
  AdamState st = make_adam_state(p);
  const double lr = 1e-3;
  adam_step(p, g, st, lr);
  const std::vector<double> after = flatten(p);
  for (std::size_t k = 0; k < after.size(); ++k) {
    // bias-corrected first step: delta = -lr * g / (|g| + eps)
    const double want = before[k] - lr * gflat[k] / (std::abs(gflat[k]) + 1e-8);
    CHECK(std::abs(after[k] - want) <= 1e-15 + 1e-12 * std::abs(want));
  }
}

TEST_CASE("checkpoint round-trips bit exactly") {
  const CsrMatrix a = gen_random_nonsymmetric(12, 4, 1.4, 30);
  const GnnParams p = small_random_params(31);
  const MatrixMeta meta = matrix_meta_of(a);

  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  save_checkpoint(buf, p, meta);
  const Checkpoint loaded = load_checkpoint(buf);
  CHECK(flatten(loaded.params) == flatten(p));
  CHECK(loaded.params.dims.d == p.dims.d);
  CHECK(loaded.params.dims.hidden == p.dims.hidden);
  CHECK(loaded.params.dims.layers == p.dims.layers);
  CHECK(loaded.meta.n == meta.n);
  CHECK(loaded.meta.nnz == meta.nnz);
  CHECK(loaded.meta.hash == meta.hash);

  // a different matrix yields a different content hash
  const CsrMatrix a2 = gen_random_nonsymmetric(12, 4, 1.4, 32);
  CHECK(matrix_meta_of(a2).hash != meta.hash);
}

TEST_CASE("checkpoint rejects garbage and truncation") {
  {
    std::stringstream buf("not a checkpoint\n");
    CHECK_THROWS_AS(load_checkpoint(buf), std::runtime_error);
  }
  {
    const GnnParams p = small_random_params(33);
    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    save_checkpoint(buf, p, MatrixMeta{});
    std::string full = buf.str();
    std::stringstream cut(full.substr(0, full.size() / 2),
                          std::ios::in | std::ios::binary);
    CHECK_THROWS_AS(load_checkpoint(cut), std::runtime_error);
  }
}

TEST_CASE("training: steps=0 returns the initial snapshot") {
  const CsrMatrix a = prescale(gen_convection_diffusion(5, 0.3),
                               gershgorin_gamma(gen_convection_diffusion(5, 0.3)));
  TrainConfig cfg;
  cfg.steps = 0;
  cfg.arnoldi_m = 10;
  cfg.dims = GnnDims{3, 4, 2};
  cfg.seed = 40;
  const TrainResult r = train_preconditioner(a, cfg);
  CHECK(r.loss_history.size() == 1);
  CHECK(r.best_loss == r.loss_history[0]);

  Rng rng(40);
  const GnnParams init = init_params(cfg.dims, rng);
  CHECK(flatten(r.best) == flatten(init));
}

TEST_CASE("training is deterministic and reduces the monitoring loss") {
  const CsrMatrix raw = gen_convection_diffusion(6, 0.5);
  const CsrMatrix a = prescale(raw, gershgorin_gamma(raw));
  TrainConfig cfg;
  cfg.steps = 60;
  cfg.batch = 8;
  cfg.spectral_count = 4;
  cfg.arnoldi_m = 15;
  cfg.monitor_batch = 8;
  cfg.dims = GnnDims{4, 8, 2};
  cfg.seed = 41;

  const TrainResult r1 = train_preconditioner(a, cfg);
  const TrainResult r2 = train_preconditioner(a, cfg);
  CHECK(r1.loss_history == r2.loss_history);
  CHECK(flatten(r1.best) == flatten(r2.best));

  CHECK(r1.loss_history.size() == 61);
  CHECK(r1.best_loss < r1.loss_history[0]);
  for (double l : r1.loss_history) CHECK(r1.best_loss <= l);
}

TEST_CASE("trained operator plugs into flexible solves") {
  const CsrMatrix raw = gen_convection_diffusion(5, 0.2);
  const CsrMatrix a = prescale(raw, gershgorin_gamma(raw));
  TrainConfig cfg;
  cfg.steps = 30;
  cfg.batch = 8;
  cfg.spectral_count = 4;
  cfg.arnoldi_m = 12;
  cfg.dims = GnnDims{4, 8, 2};
  cfg.seed = 50;
  const TrainResult r = train_preconditioner(a, cfg);
  const auto op = apply_preconditioner(r.best, a);
  CHECK(op->name() == "gnp");

  const DenseVector b = spmv(a, DenseVector(a.n, 1.0));
  SolveConfig scfg;
  scfg.maxiters = 50;
  const SolveOutcome out =
      fgmres_solve(a, b, op.get(), DenseVector(a.n, 0.0), scfg);
  CHECK(out.status == SolveStatus::converged);
}
