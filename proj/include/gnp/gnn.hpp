#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "gnp/csr.hpp"
#include "gnp/dense.hpp"
#include "gnp/krylov.hpp"
#include "gnp/rng.hpp"

namespace gnp {

struct GnnDims {
  std::size_t d = 16;       // Res-GCONV layer width
  std::size_t hidden = 32;  // MLP hidden width
  std::size_t layers = 8;   // Res-GCONV layer count
};

// All learnable tensors of the preconditioner network: a 2-layer MLP encoder
// lifting 1 -> hidden -> d, L residual graph convolution layers
// relu(X U + Ahat X W), and a 2-layer MLP decoder projecting d -> hidden -> 1.
// Biases live in the MLPs only; the conv layers carry none.
struct GnnParams {
  GnnDims dims;

  DenseVector enc1;       // 1 x hidden
  DenseVector enc1_bias;  // hidden
  DenseMatrix enc2;       // hidden x d
  DenseVector enc2_bias;  // d

  struct ConvLayer {
    DenseMatrix u;  // d x d
    DenseMatrix w;  // d x d
  };
  std::vector<ConvLayer> layers;

  DenseMatrix dec1;       // d x hidden
  DenseVector dec1_bias;  // hidden
  DenseVector dec2;       // hidden x 1
  double dec2_bias = 0.0;

  std::size_t total_parameters() const;
};

GnnParams init_params(const GnnDims& dims, Rng& rng);

// Bookkeeping for reverse mode: every pre-activation and post-activation
// block the backward pass contracts against.
struct ForwardCache {
  bool zero_input = false;
  double tau = 0.0;          // ||b||_2
  DenseVector v;             // scaled input, norm sqrt(n)
  DenseMatrix pre0;          // n x hidden
  DenseMatrix x0;            // relu(pre0)
  DenseMatrix x1;            // encoder output, n x d
  std::vector<DenseMatrix> conv_ax;   // Ahat * X_in per layer
  std::vector<DenseMatrix> conv_pre;  // X_in U + Ahat X_in W
  std::vector<DenseMatrix> conv_out;  // relu(conv_pre)
  DenseMatrix dec_pre;       // n x hidden
  DenseMatrix dec_post;      // relu(dec_pre)
};

struct ForwardResult {
  DenseVector out;
  ForwardCache cache;
};

// Scale sandwich: the core network sees (sqrt(n)/tau) b on the sphere of
// radius sqrt(n) and the output is rescaled by tau/sqrt(n), which makes the
// whole operator positively homogeneous. Zero input maps to zero output.
ForwardResult gnn_forward(const GnnParams& p, const CsrMatrix& ahat,
                          const DenseVector& b);
DenseVector gnn_apply(const GnnParams& p, const CsrMatrix& ahat,
                      const DenseVector& b);

// Gradients of <out, grad_out> with respect to every parameter. tau is held
// constant (it depends on b, not on the parameters).
GnnParams gnn_backward(const GnnParams& p, const CsrMatrix& ahat,
                       const ForwardCache& cache, const DenseVector& grad_out);

// loss = (1/batch) sum_k ||A out_k - A x_k||_1; grad is w.r.t. out and
// carries the A^T sign(.) chain. sign(0) = 0.
struct L1LossResult {
  double loss = 0.0;
  DenseMatrix grad;
};
L1LossResult l1_residual_loss(const CsrMatrix& a, const DenseMatrix& out_batch,
                              const DenseMatrix& x_batch);

struct AdamState {
  DenseVector m1;  // first moments, flattened parameter order
  DenseVector m2;  // second moments
  std::size_t t = 0;
};

AdamState make_adam_state(const GnnParams& p);
// Bias-corrected Adam with beta1=0.9, beta2=0.999, eps=1e-8.
void adam_step(GnnParams& p, const GnnParams& grads, AdamState& st, double lr);

struct TrainConfig {
  double lr = 1e-3;
  std::size_t steps = 2000;
  std::size_t batch = 16;
  std::size_t spectral_count = 8;
  std::size_t arnoldi_m = 40;
  std::uint64_t seed = 0;
  std::size_t monitor_batch = 16;
  GnnDims dims;
};

struct TrainResult {
  GnnParams best;
  std::vector<double> loss_history;  // monitoring loss; entry 0 is pre-training
  double best_loss = 0.0;
};

// Expects A already prescaled by its Gershgorin bound. Samples a fixed
// monitoring batch up front and returns the snapshot with the lowest
// monitoring loss.
TrainResult train_preconditioner(const CsrMatrix& a, const TrainConfig& cfg);

std::unique_ptr<FlexibleOperator> apply_preconditioner(const GnnParams& p,
                                                       const CsrMatrix& ahat);

struct MatrixMeta {
  std::size_t n = 0;
  std::size_t nnz = 0;
  std::uint64_t hash = 0;
};

struct Checkpoint {
  GnnParams params;
  MatrixMeta meta;
};

void save_checkpoint(std::ostream& out, const GnnParams& p,
                     const MatrixMeta& meta);
Checkpoint load_checkpoint(std::istream& in);
void save_checkpoint_file(const std::string& path, const GnnParams& p,
                          const MatrixMeta& meta);
Checkpoint load_checkpoint_file(const std::string& path);

MatrixMeta matrix_meta_of(const CsrMatrix& a);

}  // namespace gnp
