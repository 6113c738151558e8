#include "wavesim/trainer.hpp"

#include <algorithm>
#include <cmath>

namespace wavesim::ref {

Tensor4 Tensor4::slice_n(int64_t from, int64_t count) const {
  Tensor4 out(count, c, h, w);
  std::copy(v.begin() + static_cast<std::ptrdiff_t>(from * c * h * w),
            v.begin() + static_cast<std::ptrdiff_t>((from + count) * c * h * w), out.v.begin());
  return out;
}

uint64_t Rng::next() {
  state ^= state << 13;
  state ^= state >> 7;
  state ^= state << 17;
  return state;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(next() >> 11) / 9007199254740992.0);
}

int Rng::uniform_int(int lo, int hi) {
  return lo + static_cast<int>(next() % static_cast<uint64_t>(hi - lo + 1));
}

namespace {

struct Cache {
  Tensor4 input;
  Tensor4 output;
  // Norm internals
  std::vector<double> xhat;    // normalized input, same layout as input
  std::vector<double> invstd;  // one per (sample, group) or (channel) for BN
  std::vector<double> mean;
  // Pool argmax (flat input index per output element)
  std::vector<int64_t> argmax;
  std::vector<Cache> body;
};

Tensor4 conv_forward(const RefLayer& l, const Tensor4& x) {
  int64_t ho = (x.h + 2 * l.pad - l.r) / l.stride + 1;
  int64_t wo = (x.w + 2 * l.pad - l.s) / l.stride + 1;
  Tensor4 y(x.n, l.c_out, ho, wo);
  for (int64_t n = 0; n < x.n; ++n)
    for (int64_t co = 0; co < l.c_out; ++co)
      for (int64_t oh = 0; oh < ho; ++oh)
        for (int64_t ow = 0; ow < wo; ++ow) {
          double acc = l.bias ? l.b[static_cast<size_t>(co)] : 0.0;
          for (int64_t ci = 0; ci < l.c_in; ++ci)
            for (int64_t rr = 0; rr < l.r; ++rr)
              for (int64_t ss = 0; ss < l.s; ++ss) {
                int64_t ih = oh * l.stride + rr - l.pad;
                int64_t iw = ow * l.stride + ss - l.pad;
                if (ih < 0 || ih >= x.h || iw < 0 || iw >= x.w) continue;
                acc += x.at(n, ci, ih, iw) *
                       l.w[static_cast<size_t>(((co * l.c_in + ci) * l.r + rr) * l.s + ss)];
              }
          y.at(n, co, oh, ow) = acc;
        }
  return y;
}

Tensor4 conv_backward(RefLayer& l, const Cache& cc, const Tensor4& dy) {
  const Tensor4& x = cc.input;
  Tensor4 dx(x.n, x.c, x.h, x.w);
  for (int64_t n = 0; n < x.n; ++n)
    for (int64_t co = 0; co < l.c_out; ++co)
      for (int64_t oh = 0; oh < dy.h; ++oh)
        for (int64_t ow = 0; ow < dy.w; ++ow) {
          double g = dy.at(n, co, oh, ow);
          if (l.bias) l.gb[static_cast<size_t>(co)] += g;
          for (int64_t ci = 0; ci < l.c_in; ++ci)
            for (int64_t rr = 0; rr < l.r; ++rr)
              for (int64_t ss = 0; ss < l.s; ++ss) {
                int64_t ih = oh * l.stride + rr - l.pad;
                int64_t iw = ow * l.stride + ss - l.pad;
                if (ih < 0 || ih >= x.h || iw < 0 || iw >= x.w) continue;
                size_t wi = static_cast<size_t>(((co * l.c_in + ci) * l.r + rr) * l.s + ss);
                l.gw[wi] += g * x.at(n, ci, ih, iw);
                dx.at(n, ci, ih, iw) += g * l.w[wi];
              }
        }
  return dx;
}

Tensor4 norm_forward(const RefLayer& l, const Tensor4& x, Cache& cc, bool batch_norm) {
  Tensor4 y(x.n, x.c, x.h, x.w);
  cc.xhat.assign(static_cast<size_t>(x.elems()), 0.0);
  if (!batch_norm) {
    // Group norm: statistics over C/G x H x W within one sample.
    int64_t cg = x.c / l.groups;
    cc.invstd.assign(static_cast<size_t>(x.n * l.groups), 0.0);
    cc.mean.assign(static_cast<size_t>(x.n * l.groups), 0.0);
    for (int64_t n = 0; n < x.n; ++n)
      for (int64_t g = 0; g < l.groups; ++g) {
        double sum = 0.0, sq = 0.0;
        int64_t cnt = cg * x.h * x.w;
        for (int64_t c = g * cg; c < (g + 1) * cg; ++c)
          for (int64_t hh = 0; hh < x.h; ++hh)
            for (int64_t ww = 0; ww < x.w; ++ww) {
              double v = x.at(n, c, hh, ww);
              sum += v;
              sq += v * v;
            }
        double mu = sum / static_cast<double>(cnt);
        double var = sq / static_cast<double>(cnt) - mu * mu;
        double inv = 1.0 / std::sqrt(var + l.eps);
        cc.mean[static_cast<size_t>(n * l.groups + g)] = mu;
        cc.invstd[static_cast<size_t>(n * l.groups + g)] = inv;
        for (int64_t c = g * cg; c < (g + 1) * cg; ++c)
          for (int64_t hh = 0; hh < x.h; ++hh)
            for (int64_t ww = 0; ww < x.w; ++ww) {
              size_t idx = static_cast<size_t>(((n * x.c + c) * x.h + hh) * x.w + ww);
              double xh = (x.v[idx] - mu) * inv;
              cc.xhat[idx] = xh;
              y.v[idx] = l.gamma[static_cast<size_t>(c)] * xh + l.beta[static_cast<size_t>(c)];
            }
      }
  } else {
    // Batch norm: statistics over N x H x W per channel (the serialization
    // counterexample).
    cc.invstd.assign(static_cast<size_t>(x.c), 0.0);
    cc.mean.assign(static_cast<size_t>(x.c), 0.0);
    int64_t cnt = x.n * x.h * x.w;
    for (int64_t c = 0; c < x.c; ++c) {
      double sum = 0.0, sq = 0.0;
      for (int64_t n = 0; n < x.n; ++n)
        for (int64_t hh = 0; hh < x.h; ++hh)
          for (int64_t ww = 0; ww < x.w; ++ww) {
            double v = x.at(n, c, hh, ww);
            sum += v;
            sq += v * v;
          }
      double mu = sum / static_cast<double>(cnt);
      double var = sq / static_cast<double>(cnt) - mu * mu;
      double inv = 1.0 / std::sqrt(var + l.eps);
      cc.mean[static_cast<size_t>(c)] = mu;
      cc.invstd[static_cast<size_t>(c)] = inv;
      for (int64_t n = 0; n < x.n; ++n)
        for (int64_t hh = 0; hh < x.h; ++hh)
          for (int64_t ww = 0; ww < x.w; ++ww) {
            size_t idx = static_cast<size_t>(((n * x.c + c) * x.h + hh) * x.w + ww);
            double xh = (x.v[idx] - mu) * inv;
            cc.xhat[idx] = xh;
            y.v[idx] = l.gamma[static_cast<size_t>(c)] * xh + l.beta[static_cast<size_t>(c)];
          }
    }
  }
  return y;
}

Tensor4 norm_backward(RefLayer& l, const Cache& cc, const Tensor4& dy, bool batch_norm) {
  const Tensor4& x = cc.input;
  Tensor4 dx(x.n, x.c, x.h, x.w);
  for (int64_t c = 0; c < x.c; ++c) {
    double dg = 0.0, db = 0.0;
    for (int64_t n = 0; n < x.n; ++n)
      for (int64_t hh = 0; hh < x.h; ++hh)
        for (int64_t ww = 0; ww < x.w; ++ww) {
          size_t idx = static_cast<size_t>(((n * x.c + c) * x.h + hh) * x.w + ww);
          dg += dy.v[idx] * cc.xhat[idx];
          db += dy.v[idx];
        }
    l.ggamma[static_cast<size_t>(c)] += dg;
    l.gbeta[static_cast<size_t>(c)] += db;
  }
  if (!batch_norm) {
    int64_t cg = x.c / l.groups;
    double cnt = static_cast<double>(cg * x.h * x.w);
    for (int64_t n = 0; n < x.n; ++n)
      for (int64_t g = 0; g < l.groups; ++g) {
        double m1 = 0.0, m2 = 0.0;
        for (int64_t c = g * cg; c < (g + 1) * cg; ++c)
          for (int64_t hh = 0; hh < x.h; ++hh)
            for (int64_t ww = 0; ww < x.w; ++ww) {
              size_t idx = static_cast<size_t>(((n * x.c + c) * x.h + hh) * x.w + ww);
              double dxh = dy.v[idx] * l.gamma[static_cast<size_t>(c)];
              m1 += dxh;
              m2 += dxh * cc.xhat[idx];
            }
        m1 /= cnt;
        m2 /= cnt;
        double inv = cc.invstd[static_cast<size_t>(n * l.groups + g)];
        for (int64_t c = g * cg; c < (g + 1) * cg; ++c)
          for (int64_t hh = 0; hh < x.h; ++hh)
            for (int64_t ww = 0; ww < x.w; ++ww) {
              size_t idx = static_cast<size_t>(((n * x.c + c) * x.h + hh) * x.w + ww);
              double dxh = dy.v[idx] * l.gamma[static_cast<size_t>(c)];
              dx.v[idx] = inv * (dxh - m1 - cc.xhat[idx] * m2);
            }
      }
  } else {
    double cnt = static_cast<double>(x.n * x.h * x.w);
    for (int64_t c = 0; c < x.c; ++c) {
      double m1 = 0.0, m2 = 0.0;
      for (int64_t n = 0; n < x.n; ++n)
        for (int64_t hh = 0; hh < x.h; ++hh)
          for (int64_t ww = 0; ww < x.w; ++ww) {
            size_t idx = static_cast<size_t>(((n * x.c + c) * x.h + hh) * x.w + ww);
            double dxh = dy.v[idx] * l.gamma[static_cast<size_t>(c)];
            m1 += dxh;
            m2 += dxh * cc.xhat[idx];
          }
      m1 /= cnt;
      m2 /= cnt;
      double inv = cc.invstd[static_cast<size_t>(c)];
      for (int64_t n = 0; n < x.n; ++n)
        for (int64_t hh = 0; hh < x.h; ++hh)
          for (int64_t ww = 0; ww < x.w; ++ww) {
            size_t idx = static_cast<size_t>(((n * x.c + c) * x.h + hh) * x.w + ww);
            double dxh = dy.v[idx] * l.gamma[static_cast<size_t>(c)];
            dx.v[idx] = inv * (dxh - m1 - cc.xhat[idx] * m2);
          }
    }
  }
  return dx;
}

Tensor4 relu_forward(const Tensor4& x) {
  Tensor4 y = x;
  for (double& v : y.v) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor4 relu_backward(const Cache& cc, const Tensor4& dy) {
  Tensor4 dx = dy;
  for (size_t i = 0; i < dx.v.size(); ++i)
    dx.v[i] = cc.input.v[i] > 0.0 ? dy.v[i] : 0.0;  // gradient is exactly 0 or 1
  return dx;
}

Tensor4 pool_forward(const RefLayer& l, const Tensor4& x, Cache& cc) {
  int64_t ho = (x.h - l.pk) / l.pstride + 1;
  int64_t wo = (x.w - l.pk) / l.pstride + 1;
  Tensor4 y(x.n, x.c, ho, wo);
  cc.argmax.assign(static_cast<size_t>(y.elems()), 0);
  for (int64_t n = 0; n < x.n; ++n)
    for (int64_t c = 0; c < x.c; ++c)
      for (int64_t oh = 0; oh < ho; ++oh)
        for (int64_t ow = 0; ow < wo; ++ow) {
          double best = -1e300;
          int64_t best_idx = -1;
          for (int64_t rr = 0; rr < l.pk; ++rr)
            for (int64_t ss = 0; ss < l.pk; ++ss) {
              int64_t ih = oh * l.pstride + rr, iw = ow * l.pstride + ss;
              double v = x.at(n, c, ih, iw);
              if (v > best) {
                best = v;
                best_idx = ((n * x.c + c) * x.h + ih) * x.w + iw;
              }
            }
          y.at(n, c, oh, ow) = best;
          cc.argmax[static_cast<size_t>(((n * y.c + c) * y.h + oh) * y.w + ow)] = best_idx;
        }
  return y;
}

Tensor4 pool_backward(const Cache& cc, const Tensor4& dy) {
  const Tensor4& x = cc.input;
  Tensor4 dx(x.n, x.c, x.h, x.w);
  for (size_t i = 0; i < dy.v.size(); ++i) dx.v[static_cast<size_t>(cc.argmax[i])] += dy.v[i];
  return dx;
}

Tensor4 fc_forward(const RefLayer& l, const Tensor4& x) {
  int64_t feats = x.c * x.h * x.w;
  Tensor4 y(x.n, l.c_out, 1, 1);
  for (int64_t n = 0; n < x.n; ++n)
    for (int64_t o = 0; o < l.c_out; ++o) {
      double acc = l.bias ? l.b[static_cast<size_t>(o)] : 0.0;
      for (int64_t i = 0; i < feats; ++i)
        acc += l.w[static_cast<size_t>(o * feats + i)] * x.v[static_cast<size_t>(n * feats + i)];
      y.at(n, o, 0, 0) = acc;
    }
  return y;
}

Tensor4 fc_backward(RefLayer& l, const Cache& cc, const Tensor4& dy) {
  const Tensor4& x = cc.input;
  int64_t feats = x.c * x.h * x.w;
  Tensor4 dx(x.n, x.c, x.h, x.w);
  for (int64_t n = 0; n < x.n; ++n)
    for (int64_t o = 0; o < l.c_out; ++o) {
      double g = dy.at(n, o, 0, 0);
      if (l.bias) l.gb[static_cast<size_t>(o)] += g;
      for (int64_t i = 0; i < feats; ++i) {
        l.gw[static_cast<size_t>(o * feats + i)] += g * x.v[static_cast<size_t>(n * feats + i)];
        dx.v[static_cast<size_t>(n * feats + i)] += g * l.w[static_cast<size_t>(o * feats + i)];
      }
    }
  return dx;
}

Tensor4 layer_forward(const RefLayer& l, const Tensor4& x, Cache& cc);
Tensor4 layer_backward(RefLayer& l, Cache& cc, const Tensor4& dy);

Tensor4 residual_forward(const RefLayer& l, const Tensor4& x, Cache& cc) {
  cc.body.resize(l.body.size());
  Tensor4 cur = x;
  for (size_t i = 0; i < l.body.size(); ++i) cur = layer_forward(l.body[i], cur, cc.body[i]);
  if (cur.elems() != x.elems())
    throw Error("residual body must preserve the shape");
  for (size_t i = 0; i < cur.v.size(); ++i) cur.v[i] += x.v[i];
  return cur;
}

Tensor4 residual_backward(RefLayer& l, Cache& cc, const Tensor4& dy) {
  Tensor4 cur = dy;
  for (size_t i = l.body.size(); i-- > 0;)
    cur = layer_backward(l.body[i], cc.body[i], cur);
  for (size_t i = 0; i < cur.v.size(); ++i) cur.v[i] += dy.v[i];  // identity skip
  return cur;
}

Tensor4 layer_forward(const RefLayer& l, const Tensor4& x, Cache& cc) {
  cc.input = x;
  switch (l.kind) {
    case RefKind::Conv: cc.output = conv_forward(l, x); break;
    case RefKind::GroupNorm: cc.output = norm_forward(l, x, cc, false); break;
    case RefKind::BatchNorm: cc.output = norm_forward(l, x, cc, true); break;
    case RefKind::ReLU: cc.output = relu_forward(x); break;
    case RefKind::MaxPool: cc.output = pool_forward(l, x, cc); break;
    case RefKind::Fc: cc.output = fc_forward(l, x); break;
    case RefKind::Residual: cc.output = residual_forward(l, x, cc); break;
  }
  return cc.output;
}

Tensor4 layer_backward(RefLayer& l, Cache& cc, const Tensor4& dy) {
  switch (l.kind) {
    case RefKind::Conv: return conv_backward(l, cc, dy);
    case RefKind::GroupNorm: return norm_backward(l, cc, dy, false);
    case RefKind::BatchNorm: return norm_backward(l, cc, dy, true);
    case RefKind::ReLU: return relu_backward(cc, dy);
    case RefKind::MaxPool: return pool_backward(cc, dy);
    case RefKind::Fc: return fc_backward(l, cc, dy);
    case RefKind::Residual: return residual_backward(l, cc, dy);
  }
  throw Error("bad layer kind");
}

// Softmax cross-entropy over the batch; sample weight 1/total keeps the
// serialized accumulation order identical to the full pass.
double ce_loss_and_grad(const Tensor4& logits, const std::vector<int>& labels, int64_t label_base,
                        int64_t total_batch, Tensor4* dlogits) {
  double loss = 0.0;
  for (int64_t n = 0; n < logits.n; ++n) {
    double mx = -1e300;
    for (int64_t c = 0; c < logits.c; ++c) mx = std::max(mx, logits.at(n, c, 0, 0));
    double sum = 0.0;
    for (int64_t c = 0; c < logits.c; ++c) sum += std::exp(logits.at(n, c, 0, 0) - mx);
    int lab = labels[static_cast<size_t>(label_base + n)];
    double logp = logits.at(n, lab, 0, 0) - mx - std::log(sum);
    loss += -logp / static_cast<double>(total_batch);
    if (dlogits) {
      for (int64_t c = 0; c < logits.c; ++c) {
        double p = std::exp(logits.at(n, c, 0, 0) - mx) / sum;
        dlogits->at(n, c, 0, 0) =
            (p - (c == lab ? 1.0 : 0.0)) / static_cast<double>(total_batch);
      }
    }
  }
  return loss;
}

double run_slice(TinyNet& net, const Tensor4& x, const std::vector<int>& labels,
                 int64_t label_base, int64_t total_batch, bool backward) {
  std::vector<Cache> caches(net.layers.size());
  Tensor4 cur = x;
  for (size_t i = 0; i < net.layers.size(); ++i) cur = layer_forward(net.layers[i], cur, caches[i]);
  if (cur.c != net.classes || cur.h != 1 || cur.w != 1)
    throw Error("network head must emit 1x1 logits");
  Tensor4 dlogits(cur.n, cur.c, 1, 1);
  double loss = ce_loss_and_grad(cur, labels, label_base, total_batch, backward ? &dlogits : nullptr);
  if (backward) {
    Tensor4 g = dlogits;
    for (size_t i = net.layers.size(); i-- > 0;) g = layer_backward(net.layers[i], caches[i], g);
  }
  return loss;
}

void collect_ptrs(std::vector<RefLayer>& layers, bool grads, std::vector<double*>& out) {
  for (RefLayer& l : layers) {
    auto push = [&](std::vector<double>& v) {
      for (double& x : v) out.push_back(&x);
    };
    push(grads ? l.gw : l.w);
    push(grads ? l.gb : l.b);
    push(grads ? l.ggamma : l.gamma);
    push(grads ? l.gbeta : l.beta);
    collect_ptrs(l.body, grads, out);
  }
}

void zero_layer_grads(std::vector<RefLayer>& layers) {
  for (RefLayer& l : layers) {
    std::fill(l.gw.begin(), l.gw.end(), 0.0);
    std::fill(l.gb.begin(), l.gb.end(), 0.0);
    std::fill(l.ggamma.begin(), l.ggamma.end(), 0.0);
    std::fill(l.gbeta.begin(), l.gbeta.end(), 0.0);
    zero_layer_grads(l.body);
  }
}

}  // namespace

void TinyNet::zero_grads() { zero_layer_grads(layers); }

std::vector<double*> TinyNet::param_ptrs() {
  std::vector<double*> out;
  collect_ptrs(layers, false, out);
  return out;
}

std::vector<double*> TinyNet::grad_ptrs() {
  std::vector<double*> out;
  collect_ptrs(layers, true, out);
  return out;
}

StepResult train_step_full(TinyNet& net, const Tensor4& batch, const std::vector<int>& labels) {
  if (batch.n < 1) throw Error("batch must have at least one sample");
  for (double v : batch.v)
    if (!std::isfinite(v)) throw Error("non-finite value in the input batch");
  StepResult r;
  r.loss = run_slice(net, batch, labels, 0, batch.n, true);
  if (!std::isfinite(r.loss)) throw Error("non-finite loss");
  return r;
}

StepResult train_step_serialized(TinyNet& net, const Tensor4& batch,
                                 const std::vector<int>& labels, int64_t sub_batch) {
  if (sub_batch < 1 || sub_batch > batch.n) throw Error("sub_batch must be in [1, batch]");
  StepResult r;
  for (int64_t from = 0; from < batch.n; from += sub_batch) {
    int64_t count = std::min(sub_batch, batch.n - from);
    Tensor4 slice = batch.slice_n(from, count);
    r.loss += run_slice(net, slice, labels, from, batch.n, true);
  }
  if (!std::isfinite(r.loss)) throw Error("non-finite loss");
  return r;
}

double loss_only(const TinyNet& net, const Tensor4& batch, const std::vector<int>& labels) {
  TinyNet copy = net;
  return run_slice(copy, batch, labels, 0, batch.n, false);
}

TinyNet make_random_net(uint64_t seed, int64_t in_channels, int64_t hw, int64_t classes,
                        int64_t norm_groups) {
  Rng rng(seed);
  TinyNet net;
  net.classes = classes;
  bool use_bn = norm_groups <= 0;

  auto make_conv = [&](int64_t ci, int64_t co, int64_t k, int64_t pad) {
    RefLayer l;
    l.kind = RefKind::Conv;
    l.c_in = ci;
    l.c_out = co;
    l.r = l.s = k;
    l.stride = 1;
    l.pad = pad;
    l.bias = true;
    l.w.resize(static_cast<size_t>(ci * co * k * k));
    l.b.resize(static_cast<size_t>(co));
    double scale = 1.0 / std::sqrt(static_cast<double>(ci * k * k));
    for (double& v : l.w) v = rng.uniform(-scale, scale);
    for (double& v : l.b) v = rng.uniform(-0.1, 0.1);
    l.gw.assign(l.w.size(), 0.0);
    l.gb.assign(l.b.size(), 0.0);
    return l;
  };
  auto make_norm = [&](int64_t c) {
    RefLayer l;
    l.kind = use_bn ? RefKind::BatchNorm : RefKind::GroupNorm;
    l.groups = use_bn ? 1 : norm_groups;
    if (!use_bn && c % l.groups != 0) l.groups = 1;
    l.gamma.resize(static_cast<size_t>(c));
    l.beta.resize(static_cast<size_t>(c));
    for (double& v : l.gamma) v = rng.uniform(0.5, 1.5);
    for (double& v : l.beta) v = rng.uniform(-0.2, 0.2);
    l.ggamma.assign(l.gamma.size(), 0.0);
    l.gbeta.assign(l.beta.size(), 0.0);
    return l;
  };
  auto relu = [] {
    RefLayer l;
    l.kind = RefKind::ReLU;
    return l;
  };

  int64_t c1 = 4 + rng.uniform_int(0, 4);
  int64_t c2 = 4 + rng.uniform_int(0, 4);
  net.layers.push_back(make_conv(in_channels, c1, 3, 1));
  net.layers.push_back(make_norm(c1));
  net.layers.push_back(relu());

  // Residual stage: two convs that preserve the shape, identity skip.
  RefLayer res;
  res.kind = RefKind::Residual;
  res.body.push_back(make_conv(c1, c1, 3, 1));
  res.body.push_back(make_norm(c1));
  res.body.push_back(relu());
  res.body.push_back(make_conv(c1, c1, 3, 1));
  res.body.push_back(make_norm(c1));
  net.layers.push_back(std::move(res));
  net.layers.push_back(relu());

  net.layers.push_back(make_conv(c1, c2, 3, 1));
  net.layers.push_back(make_norm(c2));
  net.layers.push_back(relu());

  RefLayer pool;
  pool.kind = RefKind::MaxPool;
  pool.pk = 2;
  pool.pstride = 2;
  net.layers.push_back(pool);

  RefLayer fc;
  fc.kind = RefKind::Fc;
  fc.c_out = classes;
  fc.bias = true;
  int64_t feats = c2 * (hw / 2) * (hw / 2);
  fc.w.resize(static_cast<size_t>(classes * feats));
  fc.b.resize(static_cast<size_t>(classes));
  double scale = 1.0 / std::sqrt(static_cast<double>(feats));
  for (double& v : fc.w) v = rng.uniform(-scale, scale);
  for (double& v : fc.b) v = rng.uniform(-0.1, 0.1);
  fc.gw.assign(fc.w.size(), 0.0);
  fc.gb.assign(fc.b.size(), 0.0);
  net.layers.push_back(std::move(fc));
  return net;
}

Tensor4 make_random_batch(uint64_t seed, int64_t n, int64_t c, int64_t hw) {
  Rng rng(seed * 977 + 13);
  Tensor4 t(n, c, hw, hw);
  for (double& v : t.v) v = rng.uniform(-1.0, 1.0);
  return t;
}

std::vector<int> make_random_labels(uint64_t seed, int64_t n, int64_t classes) {
  Rng rng(seed * 31 + 7);
  std::vector<int> out(static_cast<size_t>(n));
  for (int& v : out) v = rng.uniform_int(0, static_cast<int>(classes) - 1);
  return out;
}

double max_relative_grad_gap(TinyNet& a, TinyNet& b) {
  auto ga = a.grad_ptrs();
  auto gb = b.grad_ptrs();
  if (ga.size() != gb.size()) throw Error("gradient layouts differ");
  double num = 0.0, den = 0.0;
  double worst = 0.0;
  // Compare via whole-net relative L2 and track it as the reported gap.
  for (size_t i = 0; i < ga.size(); ++i) {
    double d = *ga[i] - *gb[i];
    num += d * d;
    den += (*ga[i]) * (*ga[i]);
  }
  worst = std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
  return worst;
}

}  // namespace wavesim::ref
