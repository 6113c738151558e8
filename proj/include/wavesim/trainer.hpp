#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wavesim/ir.hpp"

namespace wavesim::ref {

// Dense 64-bit tensor, NCHW. The reference trainer runs in doubles on
// purpose: the claim under test is algorithmic equivalence of serialized
// training, not quantization behavior.
struct Tensor4 {
  int64_t n = 0, c = 0, h = 0, w = 0;
  std::vector<double> v;
  Tensor4() = default;
  Tensor4(int64_t n_, int64_t c_, int64_t h_, int64_t w_)
      : n(n_), c(c_), h(h_), w(w_), v(static_cast<size_t>(n_ * c_ * h_ * w_), 0.0) {}
  int64_t elems() const { return n * c * h * w; }
  double& at(int64_t ni, int64_t ci, int64_t hi, int64_t wi) {
    return v[static_cast<size_t>(((ni * c + ci) * h + hi) * w + wi)];
  }
  double at(int64_t ni, int64_t ci, int64_t hi, int64_t wi) const {
    return v[static_cast<size_t>(((ni * c + ci) * h + hi) * w + wi)];
  }
  Tensor4 slice_n(int64_t from, int64_t count) const;
};

enum class RefKind { Conv, GroupNorm, BatchNorm, ReLU, MaxPool, Fc, Residual };

struct RefLayer {
  RefKind kind{};
  // Conv / Fc
  int64_t c_in = 0, c_out = 0, r = 1, s = 1, stride = 1, pad = 0;
  bool bias = false;
  std::vector<double> w, b;
  std::vector<double> gw, gb;
  // Norm
  int64_t groups = 1;
  double eps = 1e-5;
  std::vector<double> gamma, beta;
  std::vector<double> ggamma, gbeta;
  // Pool
  int64_t pk = 2, pstride = 2;
  // Residual body
  std::vector<RefLayer> body;
};

struct TinyNet {
  std::vector<RefLayer> layers;
  int64_t classes = 0;

  void zero_grads();
  // Flat parameter views for the finite-difference oracle.
  std::vector<double*> param_ptrs();
  std::vector<double*> grad_ptrs();
};

struct StepResult {
  double loss = 0.0;
};

// Mini-batch gradient step: forward, softmax cross-entropy, backward.
// Gradients accumulate into the net's grad arrays (call zero_grads first).
StepResult train_step_full(TinyNet& net, const Tensor4& batch, const std::vector<int>& labels);

// Same mini-batch processed in ceil(B / sub_batch) sequential sub-batches,
// parameter gradients accumulated across them. The loss is the mini-batch
// mean either way.
StepResult train_step_serialized(TinyNet& net, const Tensor4& batch,
                                 const std::vector<int>& labels, int64_t sub_batch);

// Loss without touching gradients (finite-difference probe).
double loss_only(const TinyNet& net, const Tensor4& batch, const std::vector<int>& labels);

// Deterministic xorshift generator used for all reference-trainer inits.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
  uint64_t next();
  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);  // inclusive
};

// Small randomized net: conv/GN/ReLU stages, optional residual block and
// max-pool, FC head. norm_groups <= 0 builds batch-norm layers instead
// (the equivalence counterexample).
TinyNet make_random_net(uint64_t seed, int64_t in_channels, int64_t hw, int64_t classes,
                        int64_t norm_groups);
Tensor4 make_random_batch(uint64_t seed, int64_t n, int64_t c, int64_t hw);
std::vector<int> make_random_labels(uint64_t seed, int64_t n, int64_t classes);

// Largest relative L2 gap between two gradient sets, array by array.
double max_relative_grad_gap(TinyNet& a, TinyNet& b);

}  // namespace wavesim::ref
