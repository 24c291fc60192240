#include "gnp/gnn.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gnp/sampler.hpp"

namespace gnp {

namespace {

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void fill_uniform(DenseVector& v, Rng& rng, double bound) {
  for (double& x : v) x = rng.uniform_symmetric(bound);
}

void fill_uniform(DenseMatrix& m, Rng& rng, double bound) {
  for (double& x : m.data()) x = rng.uniform_symmetric(bound);
}

// Flattened views over the parameter arrays in checkpoint order:
// enc1, enc1_bias, enc2, enc2_bias, U_1, W_1, ..., dec1, dec1_bias,
// dec2, dec2_bias.
struct ParamView {
  const char* name;
  double* data;
  std::size_t size;
};

std::vector<ParamView> param_views(GnnParams& p) {
  std::vector<ParamView> v;
  v.push_back({"enc1", p.enc1.data(), p.enc1.size()});
  v.push_back({"enc1_bias", p.enc1_bias.data(), p.enc1_bias.size()});
  v.push_back({"enc2", p.enc2.data().data(), p.enc2.data().size()});
  v.push_back({"enc2_bias", p.enc2_bias.data(), p.enc2_bias.size()});
  for (auto& layer : p.layers) {
    v.push_back({"u", layer.u.data().data(), layer.u.data().size()});
    v.push_back({"w", layer.w.data().data(), layer.w.data().size()});
  }
  v.push_back({"dec1", p.dec1.data().data(), p.dec1.data().size()});
  v.push_back({"dec1_bias", p.dec1_bias.data(), p.dec1_bias.size()});
  v.push_back({"dec2", p.dec2.data(), p.dec2.size()});
  v.push_back({"dec2_bias", &p.dec2_bias, 1});
  return v;
}

GnnParams zero_like(const GnnParams& p) {
  GnnParams g;
  g.dims = p.dims;
  g.enc1.assign(p.enc1.size(), 0.0);
  g.enc1_bias.assign(p.enc1_bias.size(), 0.0);
  g.enc2 = DenseMatrix(p.enc2.rows(), p.enc2.cols());
  g.enc2_bias.assign(p.enc2_bias.size(), 0.0);
  g.layers.resize(p.layers.size());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    g.layers[l].u = DenseMatrix(p.layers[l].u.rows(), p.layers[l].u.cols());
    g.layers[l].w = DenseMatrix(p.layers[l].w.rows(), p.layers[l].w.cols());
  }
  g.dec1 = DenseMatrix(p.dec1.rows(), p.dec1.cols());
  g.dec1_bias.assign(p.dec1_bias.size(), 0.0);
  g.dec2.assign(p.dec2.size(), 0.0);
  g.dec2_bias = 0.0;
  return g;
}

void accumulate(GnnParams& acc, const GnnParams& g) {
  auto av = param_views(acc);
  auto gv = param_views(const_cast<GnnParams&>(g));
  for (std::size_t i = 0; i < av.size(); ++i)
    for (std::size_t k = 0; k < av[i].size; ++k) av[i].data[k] += gv[i].data[k];
}

}  // namespace

std::size_t GnnParams::total_parameters() const {
  auto views = param_views(const_cast<GnnParams&>(*this));
  std::size_t total = 0;
  for (const auto& v : views) total += v.size;
  return total;
}

GnnParams init_params(const GnnDims& dims, Rng& rng) {
  if (dims.d < 1 || dims.hidden < 1 || dims.layers < 1)
    throw std::invalid_argument("init_params: dims must be >= 1");
  GnnParams p;
  p.dims = dims;
  p.enc1.resize(dims.hidden);
  fill_uniform(p.enc1, rng, glorot_bound(1, dims.hidden));
  p.enc1_bias.assign(dims.hidden, 0.0);
  p.enc2 = DenseMatrix(dims.hidden, dims.d);
  fill_uniform(p.enc2, rng, glorot_bound(dims.hidden, dims.d));
  p.enc2_bias.assign(dims.d, 0.0);
  p.layers.resize(dims.layers);
  const double conv_bound = glorot_bound(dims.d, dims.d);
  for (auto& layer : p.layers) {
    layer.u = DenseMatrix(dims.d, dims.d);
    layer.w = DenseMatrix(dims.d, dims.d);
    fill_uniform(layer.u, rng, conv_bound);
    fill_uniform(layer.w, rng, conv_bound);
  }
  p.dec1 = DenseMatrix(dims.d, dims.hidden);
  fill_uniform(p.dec1, rng, glorot_bound(dims.d, dims.hidden));
  p.dec1_bias.assign(dims.hidden, 0.0);
  p.dec2.resize(dims.hidden);
  fill_uniform(p.dec2, rng, glorot_bound(dims.hidden, 1));
  p.dec2_bias = 0.0;
  return p;
}

ForwardResult gnn_forward(const GnnParams& p, const CsrMatrix& ahat,
                          const DenseVector& b) {
  if (b.size() != ahat.n)
    throw std::invalid_argument("gnn_forward: dimension mismatch");
  const std::size_t n = ahat.n;
  const std::size_t d = p.dims.d, hidden = p.dims.hidden;

  ForwardResult res;
  res.cache.tau = norm2(b);
  if (res.cache.tau == 0.0) {
    res.cache.zero_input = true;
    res.out.assign(n, 0.0);
    return res;
  }
  ForwardCache& c = res.cache;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double in_scale = sqrt_n / c.tau;

  c.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.v[i] = in_scale * b[i];

  // encoder: lift 1 -> hidden (relu) -> d (linear)
  c.pre0 = DenseMatrix(n, hidden);
  c.x0 = DenseMatrix(n, hidden);
  for (std::size_t h = 0; h < hidden; ++h) {
    const double wgt = p.enc1[h], bias = p.enc1_bias[h];
    for (std::size_t i = 0; i < n; ++i) {
      const double pre = c.v[i] * wgt + bias;
      c.pre0(i, h) = pre;
      c.x0(i, h) = pre > 0.0 ? pre : 0.0;
    }
  }
  c.x1 = gemm_nn(c.x0, p.enc2);
  for (std::size_t j = 0; j < d; ++j) {
    const double bias = p.enc2_bias[j];
    double* col = c.x1.col(j);
    for (std::size_t i = 0; i < n; ++i) col[i] += bias;
  }

  // Res-GCONV stack: X <- relu(X U + Ahat X W)
  const DenseMatrix* x = &c.x1;
  c.conv_ax.reserve(p.layers.size());
  c.conv_pre.reserve(p.layers.size());
  c.conv_out.reserve(p.layers.size());
  for (const auto& layer : p.layers) {
    c.conv_ax.push_back(spmm(ahat, *x));
    DenseMatrix pre = gemm_nn(*x, layer.u);
    const DenseMatrix axw = gemm_nn(c.conv_ax.back(), layer.w);
    for (std::size_t k = 0; k < pre.data().size(); ++k)
      pre.data()[k] += axw.data()[k];
    DenseMatrix post(n, d);
    for (std::size_t k = 0; k < pre.data().size(); ++k)
      post.data()[k] = pre.data()[k] > 0.0 ? pre.data()[k] : 0.0;
    c.conv_pre.push_back(std::move(pre));
    c.conv_out.push_back(std::move(post));
    x = &c.conv_out.back();
  }

  // decoder: project d -> hidden (relu) -> 1 (linear)
  c.dec_pre = gemm_nn(*x, p.dec1);
  c.dec_post = DenseMatrix(n, hidden);
  for (std::size_t h = 0; h < hidden; ++h) {
    const double bias = p.dec1_bias[h];
    double* pre = c.dec_pre.col(h);
    double* post = c.dec_post.col(h);
    for (std::size_t i = 0; i < n; ++i) {
      pre[i] += bias;
      post[i] = pre[i] > 0.0 ? pre[i] : 0.0;
    }
  }

  const double out_scale = c.tau / sqrt_n;
  res.out.assign(n, 0.0);
  for (std::size_t h = 0; h < hidden; ++h) {
    const double wgt = p.dec2[h];
    const double* post = c.dec_post.col(h);
    for (std::size_t i = 0; i < n; ++i) res.out[i] += post[i] * wgt;
  }
  for (std::size_t i = 0; i < n; ++i)
    res.out[i] = (res.out[i] + p.dec2_bias) * out_scale;
  return res;
}

DenseVector gnn_apply(const GnnParams& p, const CsrMatrix& ahat,
                      const DenseVector& b) {
  return gnn_forward(p, ahat, b).out;
}

GnnParams gnn_backward(const GnnParams& p, const CsrMatrix& ahat,
                       const ForwardCache& cache,
                       const DenseVector& grad_out) {
  GnnParams g = zero_like(p);
  if (cache.zero_input) return g;
  if (grad_out.size() != ahat.n)
    throw std::invalid_argument("gnn_backward: gradient length mismatch");
  const std::size_t n = ahat.n;
  const std::size_t d = p.dims.d, hidden = p.dims.hidden;
  const double out_scale = cache.tau / std::sqrt(static_cast<double>(n));

  // output scaling and decoder second (linear) layer
  DenseVector gy(n);
  for (std::size_t i = 0; i < n; ++i) gy[i] = grad_out[i] * out_scale;
  for (double v : gy) g.dec2_bias += v;
  DenseMatrix g_dec_pre(n, hidden);
  for (std::size_t h = 0; h < hidden; ++h) {
    const double wgt = p.dec2[h];
    const double* post = cache.dec_post.col(h);
    const double* pre = cache.dec_pre.col(h);
    double* gp = g_dec_pre.col(h);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += post[i] * gy[i];
      gp[i] = pre[i] > 0.0 ? gy[i] * wgt : 0.0;
    }
    g.dec2[h] = acc;
  }

  // decoder first layer: dec_pre = X_L * dec1 + bias
  const DenseMatrix& x_last =
      p.layers.empty() ? cache.x1 : cache.conv_out.back();
  g.dec1 = gemm_tn(x_last, g_dec_pre);
  for (std::size_t h = 0; h < hidden; ++h) {
    const double* gp = g_dec_pre.col(h);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += gp[i];
    g.dec1_bias[h] = acc;
  }
  // grad w.r.t. X_L: g_dec_pre * dec1^T
  DenseMatrix gx(n, d);
  for (std::size_t j = 0; j < d; ++j) {
    double* gxj = gx.col(j);
    for (std::size_t h = 0; h < hidden; ++h) {
      const double wgt = p.dec1(j, h);
      const double* gp = g_dec_pre.col(h);
      for (std::size_t i = 0; i < n; ++i) gxj[i] += gp[i] * wgt;
    }
  }

  // conv layers in reverse
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    const DenseMatrix& x_in = l == 0 ? cache.x1 : cache.conv_out[l - 1];
    const DenseMatrix& pre = cache.conv_pre[l];
    DenseMatrix gpre(n, d);
    for (std::size_t k = 0; k < gpre.data().size(); ++k)
      gpre.data()[k] = pre.data()[k] > 0.0 ? gx.data()[k] : 0.0;
    g.layers[l].u = gemm_tn(x_in, gpre);
    g.layers[l].w = gemm_tn(cache.conv_ax[l], gpre);
    // gx_in = gpre U^T + Ahat^T gpre W^T
    const DenseMatrix at_gpre = spmm_transpose(ahat, gpre);
    DenseMatrix gx_in(n, d);
    for (std::size_t j = 0; j < d; ++j) {
      double* out = gx_in.col(j);
      for (std::size_t k = 0; k < d; ++k) {
        const double uw = p.layers[l].u(j, k);
        const double ww = p.layers[l].w(j, k);
        const double* gp = gpre.col(k);
        const double* ag = at_gpre.col(k);
        for (std::size_t i = 0; i < n; ++i) out[i] += gp[i] * uw + ag[i] * ww;
      }
    }
    gx = std::move(gx_in);
  }

  // encoder second (linear) layer: x1 = x0 * enc2 + bias
  g.enc2 = gemm_tn(cache.x0, gx);
  for (std::size_t j = 0; j < d; ++j) {
    const double* gxj = gx.col(j);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += gxj[i];
    g.enc2_bias[j] = acc;
  }
  // grad w.r.t. x0, then through relu to enc1
  for (std::size_t h = 0; h < hidden; ++h) {
    const double* pre0 = cache.pre0.col(h);
    double gw = 0.0, gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double gx0 = 0.0;
      for (std::size_t j = 0; j < d; ++j) gx0 += gx(i, j) * p.enc2(h, j);
      if (pre0[i] > 0.0) {
        gw += cache.v[i] * gx0;
        gb += gx0;
      }
    }
    g.enc1[h] = gw;
    g.enc1_bias[h] = gb;
  }
  return g;
}

L1LossResult l1_residual_loss(const CsrMatrix& a, const DenseMatrix& out_batch,
                              const DenseMatrix& x_batch) {
  if (out_batch.rows() != a.n || x_batch.rows() != a.n ||
      out_batch.cols() != x_batch.cols())
    throw std::invalid_argument("l1_residual_loss: shape mismatch");
  const std::size_t batch = out_batch.cols();
  const double inv_batch = 1.0 / static_cast<double>(batch);

  L1LossResult res;
  res.grad = DenseMatrix(a.n, batch);
  for (std::size_t k = 0; k < batch; ++k) {
    DenseVector diff(a.n);
    for (std::size_t i = 0; i < a.n; ++i)
      diff[i] = out_batch(i, k) - x_batch(i, k);
    DenseVector r = spmv(a, diff);
    DenseVector sgn(a.n);
    for (std::size_t i = 0; i < a.n; ++i) {
      res.loss += std::abs(r[i]);
      sgn[i] = r[i] > 0.0 ? 1.0 : (r[i] < 0.0 ? -1.0 : 0.0);
    }
    const DenseVector at_sgn = spmv_transpose(a, sgn);
    for (std::size_t i = 0; i < a.n; ++i)
      res.grad(i, k) = inv_batch * at_sgn[i];
  }
  res.loss *= inv_batch;
  return res;
}

AdamState make_adam_state(const GnnParams& p) {
  AdamState st;
  const std::size_t total = p.total_parameters();
  st.m1.assign(total, 0.0);
  st.m2.assign(total, 0.0);
  return st;
}

void adam_step(GnnParams& p, const GnnParams& grads, AdamState& st, double lr) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  auto pv = param_views(p);
  auto gv = param_views(const_cast<GnnParams&>(grads));
  st.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.t));
  std::size_t offset = 0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    for (std::size_t k = 0; k < pv[i].size; ++k, ++offset) {
      const double g = gv[i].data[k];
      st.m1[offset] = beta1 * st.m1[offset] + (1.0 - beta1) * g;
      st.m2[offset] = beta2 * st.m2[offset] + (1.0 - beta2) * g * g;
      const double mhat = st.m1[offset] / bc1;
      const double vhat = st.m2[offset] / bc2;
      pv[i].data[k] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

namespace {

// Runs fn(k) for k in [0, count) across a small thread pool. Columns are
// independent, so results are identical to the serial loop.
void parallel_columns(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t hw = std::thread::hardware_concurrency();
  const std::size_t workers = std::min(count, hw == 0 ? std::size_t{1} : hw);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= count) break;
      fn(k);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(run);
  for (auto& t : pool) t.join();
}

double monitoring_loss(const GnnParams& p, const CsrMatrix& a,
                       const TrainingBatch& batch) {
  DenseMatrix out(a.n, batch.b.cols());
  parallel_columns(batch.b.cols(), [&](std::size_t k) {
    out.set_col(k, gnn_apply(p, a, batch.b.col_copy(k)));
  });
  return l1_residual_loss(a, out, batch.x).loss;
}

}  // namespace

TrainResult train_preconditioner(const CsrMatrix& a, const TrainConfig& cfg) {
  if (cfg.batch < cfg.spectral_count)
    throw std::invalid_argument("train: batch must be >= spectral_count");

  Rng init_rng(cfg.seed);
  GnnParams params = init_params(cfg.dims, init_rng);

  const SpectralSampler sampler =
      build_spectral_sampler(a, cfg.arnoldi_m, cfg.seed + 1);
  Rng monitor_rng(cfg.seed + 2);
  const TrainingBatch monitor = assemble_batch(
      sampler, a, cfg.monitor_batch,
      std::min(cfg.spectral_count, cfg.monitor_batch), monitor_rng);
  Rng train_rng(cfg.seed + 3);

  TrainResult res;
  res.best = params;
  res.best_loss = monitoring_loss(params, a, monitor);
  res.loss_history.push_back(res.best_loss);

  AdamState adam = make_adam_state(params);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const TrainingBatch batch = assemble_batch(
        sampler, a, cfg.batch, cfg.spectral_count, train_rng);

    std::vector<ForwardCache> caches(cfg.batch);
    DenseMatrix out(a.n, cfg.batch);
    parallel_columns(cfg.batch, [&](std::size_t k) {
      ForwardResult fr = gnn_forward(params, a, batch.b.col_copy(k));
      out.set_col(k, fr.out);
      caches[k] = std::move(fr.cache);
    });
    const L1LossResult loss = l1_residual_loss(a, out, batch.x);

    std::vector<GnnParams> per_column(cfg.batch);
    parallel_columns(cfg.batch, [&](std::size_t k) {
      per_column[k] = gnn_backward(params, a, caches[k], loss.grad.col_copy(k));
    });
    GnnParams grads = zero_like(params);
    for (const GnnParams& gk : per_column) accumulate(grads, gk);
    adam_step(params, grads, adam, cfg.lr);

    const double mloss = monitoring_loss(params, a, monitor);
    res.loss_history.push_back(mloss);
    if (mloss < res.best_loss) {
      res.best_loss = mloss;
      res.best = params;
    }
  }
  return res;
}

namespace {

class GnnOperator final : public FlexibleOperator {
 public:
  GnnOperator(GnnParams p, const CsrMatrix& ahat)
      : params_(std::move(p)), ahat_(ahat) {}
  DenseVector apply(const DenseVector& v) const override {
    return gnn_apply(params_, ahat_, v);
  }
  std::string name() const override { return "gnp"; }

 private:
  GnnParams params_;
  const CsrMatrix& ahat_;
};

}  // namespace

std::unique_ptr<FlexibleOperator> apply_preconditioner(const GnnParams& p,
                                                       const CsrMatrix& ahat) {
  return std::make_unique<GnnOperator>(p, ahat);
}

MatrixMeta matrix_meta_of(const CsrMatrix& a) {
  return MatrixMeta{a.n, a.nnz(), csr_content_hash(a)};
}

namespace {

constexpr const char* kCkptMagic = "GNPCKPT";
constexpr int kCkptVersion = 1;

void write_array(std::ostream& out, const char* name, const double* data,
                 std::size_t size) {
  out << "array " << name << ' ' << size << '\n';
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(size * sizeof(double)));
  out << '\n';
}

void read_array(std::istream& in, const char* expect_name, double* data,
                std::size_t size) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint truncated");
  std::istringstream ls(line);
  std::string tag, name;
  std::size_t count = 0;
  ls >> tag >> name >> count;
  if (tag != "array" || name != expect_name || count != size)
    throw std::runtime_error("checkpoint array mismatch: expected " +
                             std::string(expect_name));
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(size * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint truncated in array " +
                                    std::string(expect_name));
  in.get();  // trailing newline
}

}  // namespace

void save_checkpoint(std::ostream& out, const GnnParams& p,
                     const MatrixMeta& meta) {
  out << kCkptMagic << ' ' << kCkptVersion << '\n';
  out << "dims " << p.dims.d << ' ' << p.dims.hidden << ' ' << p.dims.layers
      << '\n';
  out << "matrix " << meta.n << ' ' << meta.nnz << ' ' << std::hex << meta.hash
      << std::dec << '\n';
  auto views = param_views(const_cast<GnnParams&>(p));
  for (const auto& v : views) write_array(out, v.name, v.data, v.size);
}

Checkpoint load_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty checkpoint");
  {
    std::istringstream ls(line);
    std::string magic;
    int version = 0;
    ls >> magic >> version;
    if (magic != kCkptMagic) throw std::runtime_error("not a checkpoint file");
    if (version != kCkptVersion)
      throw std::runtime_error("unsupported checkpoint version");
  }
  Checkpoint ckpt;
  GnnDims dims;
  {
    if (!std::getline(in, line)) throw std::runtime_error("checkpoint truncated");
    std::istringstream ls(line);
    std::string tag;
    ls >> tag >> dims.d >> dims.hidden >> dims.layers;
    if (tag != "dims" || !ls) throw std::runtime_error("bad dims line");
  }
  {
    if (!std::getline(in, line)) throw std::runtime_error("checkpoint truncated");
    std::istringstream ls(line);
    std::string tag;
    ls >> tag >> ckpt.meta.n >> ckpt.meta.nnz >> std::hex >> ckpt.meta.hash;
    if (tag != "matrix" || !ls) throw std::runtime_error("bad matrix line");
  }
  Rng dummy(0);
  ckpt.params = init_params(dims, dummy);  // allocate shapes
  auto views = param_views(ckpt.params);
  for (auto& v : views) read_array(in, v.name, v.data, v.size);
  return ckpt;
}

void save_checkpoint_file(const std::string& path, const GnnParams& p,
                          const MatrixMeta& meta) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  save_checkpoint(f, p, meta);
}

Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return load_checkpoint(f);
}

}  // namespace gnp
