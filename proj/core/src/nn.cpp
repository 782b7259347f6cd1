#include "frp/nn.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "frp/error.hpp"

namespace frp::nn {

LayerParam make_conv(int in_c, int out_c, int k, Rng& rng) {
  LayerParam p;
  p.spec = {LayerKind::conv, k, 1, in_c, out_c};
  const std::size_t n = static_cast<std::size_t>(out_c) * in_c * k * k;
  p.w.resize(n);
  const double scale = std::sqrt(2.0 / (static_cast<double>(in_c) * k * k));
  for (auto& v : p.w) v = rng.normal(0.0, scale);
  p.b.assign(static_cast<std::size_t>(out_c), 0.0);
  return p;
}

LayerParam make_pool() {
  LayerParam p;
  p.spec = {LayerKind::pool, 2, 2, 0, 0};
  return p;
}

LayerParam make_fc(int in_dim, int out_dim, Rng& rng) {
  LayerParam p;
  p.spec = {LayerKind::fc, 1, 1, in_dim, out_dim};
  p.w.resize(static_cast<std::size_t>(out_dim) * in_dim);
  const double scale = std::sqrt(2.0 / static_cast<double>(in_dim));
  for (auto& v : p.w) v = rng.normal(0.0, scale);
  p.b.assign(static_cast<std::size_t>(out_dim), 0.0);
  return p;
}

LayerGrad zero_grad_like(const LayerParam& p) {
  return LayerGrad{std::vector<double>(p.w.size(), 0.0), std::vector<double>(p.b.size(), 0.0)};
}

std::size_t param_count(const LayerParam& p) { return p.w.size() + p.b.size(); }

namespace {

// out += conv3x3(in, w) for one plane pair, zero padding 1. w is a 3x3
// kernel in row-major order. Interior rows use a fused 3-tap loop.
void conv3_accum_plane(const double* __restrict__ ip, double* __restrict__ op, int H,
                       int W, const double* __restrict__ wk) {
  for (int ky = 0; ky < 3; ++ky) {
    const int dy = ky - 1;
    const double w0 = wk[ky * 3 + 0], w1 = wk[ky * 3 + 1], w2 = wk[ky * 3 + 2];
    const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
    for (int y = y0; y < y1; ++y) {
      const double* __restrict__ irow = ip + (y + dy) * W;
      double* __restrict__ orow = op + y * W;
      orow[0] += w1 * irow[0] + w2 * irow[1];
      for (int x = 1; x < W - 1; ++x) {
        orow[x] += w0 * irow[x - 1] + w1 * irow[x] + w2 * irow[x + 1];
      }
      orow[W - 1] += w0 * irow[W - 2] + w1 * irow[W - 1];
    }
  }
}

// Four-lane dot product; independent accumulators keep the FMA chains off
// the latency path, and the summation order stays fixed run to run.
double dot_rows(const double* __restrict__ a, const double* __restrict__ b, int n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  int x = 0;
  for (; x + 4 <= n; x += 4) {
    s0 += a[x] * b[x];
    s1 += a[x + 1] * b[x + 1];
    s2 += a[x + 2] * b[x + 2];
    s3 += a[x + 3] * b[x + 3];
  }
  for (; x < n; ++x) s0 += a[x] * b[x];
  return (s0 + s1) + (s2 + s3);
}

// gw[0..8] += per-tap dot products of grad_out against the shifted input.
void conv3_weight_grad_plane(const double* __restrict__ ip, const double* __restrict__ gp,
                             int H, int W, double* __restrict__ gw) {
  for (int ky = 0; ky < 3; ++ky) {
    const int dy = ky - 1;
    const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
    for (int kx = 0; kx < 3; ++kx) {
      const int dx = kx - 1;
      const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
      double acc = 0.0;
      for (int y = y0; y < y1; ++y) {
        acc += dot_rows(gp + y * W + x0, ip + (y + dy) * W + dx + x0, x1 - x0);
      }
      gw[ky * 3 + kx] += acc;
    }
  }
}

}  // namespace

Tensor conv_forward(const LayerParam& p, const Tensor& in) {
  const int k = p.spec.filter_size;
  const int in_c = p.spec.in_channels;
  const int out_c = p.spec.out_channels;
  if (in.c != in_c) throw ConfigError("conv_forward: channel mismatch");
  const int H = in.h, W = in.w;
  Tensor out(out_c, H, W);
  for (int oc = 0; oc < out_c; ++oc) {
    double* op = out.plane(oc);
    const double bias = p.b[oc];
    for (int i = 0; i < H * W; ++i) op[i] = bias;
    for (int ic = 0; ic < in_c; ++ic) {
      const double* ip = in.plane(ic);
      const double* wp = &p.w[(static_cast<std::size_t>(oc) * in_c + ic) * k * k];
      if (k == 3) {
        conv3_accum_plane(ip, op, H, W, wp);
      } else if (k == 1) {
        const double wv = wp[0];
        for (int i = 0; i < H * W; ++i) op[i] += wv * ip[i];
      } else {
        throw ConfigError("conv_forward: unsupported filter size");
      }
    }
  }
  return out;
}

Tensor conv_backward(const LayerParam& p, const Tensor& in, const Tensor& grad_out,
                     LayerGrad& g) {
  const int k = p.spec.filter_size;
  const int in_c = p.spec.in_channels;
  const int out_c = p.spec.out_channels;
  const int H = in.h, W = in.w;
  Tensor grad_in(in_c, H, W);
  for (int oc = 0; oc < out_c; ++oc) {
    const double* gp = grad_out.plane(oc);
    double bsum = 0.0;
    for (int i = 0; i < H * W; ++i) bsum += gp[i];
    g.b[oc] += bsum;
    for (int ic = 0; ic < in_c; ++ic) {
      const double* ip = in.plane(ic);
      double* gip = grad_in.plane(ic);
      double* gwp = &g.w[(static_cast<std::size_t>(oc) * in_c + ic) * k * k];
      const double* wp = &p.w[(static_cast<std::size_t>(oc) * in_c + ic) * k * k];
      if (k == 3) {
        conv3_weight_grad_plane(ip, gp, H, W, gwp);
        // grad wrt input = conv of grad_out with the flipped kernel
        const double flipped[9] = {wp[8], wp[7], wp[6], wp[5], wp[4],
                                   wp[3], wp[2], wp[1], wp[0]};
        conv3_accum_plane(gp, gip, H, W, flipped);
      } else if (k == 1) {
        const double wv = wp[0];
        double acc = 0.0;
        for (int i = 0; i < H * W; ++i) {
          acc += gp[i] * ip[i];
          gip[i] += wv * gp[i];
        }
        gwp[0] += acc;
      } else {
        throw ConfigError("conv_backward: unsupported filter size");
      }
    }
  }
  return grad_in;
}

Tensor pool_forward(const Tensor& in, std::vector<int>* argmax) {
  const int oh = in.h / 2, ow = in.w / 2;
  Tensor out(in.c, oh, ow);
  if (argmax) argmax->assign(out.size(), 0);
  for (int c = 0; c < in.c; ++c) {
    const double* ip = in.plane(c);
    double* op = out.plane(c);
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        const int base = (2 * y) * in.w + 2 * x;
        int best = base;
        double bv = ip[base];
        const int cands[3] = {base + 1, base + in.w, base + in.w + 1};
        for (int ci = 0; ci < 3; ++ci) {
          if (ip[cands[ci]] > bv) {
            bv = ip[cands[ci]];
            best = cands[ci];
          }
        }
        op[y * ow + x] = bv;
        if (argmax) {
          (*argmax)[(static_cast<std::size_t>(c) * oh + y) * ow + x] =
              c * in.h * in.w + best;
        }
      }
    }
  }
  return out;
}

Tensor pool_backward(const Tensor& in, const std::vector<int>& argmax,
                     const Tensor& grad_out) {
  Tensor grad_in(in.c, in.h, in.w);
  for (std::size_t i = 0; i < grad_out.size(); ++i) {
    grad_in.data[argmax[i]] += grad_out.data[i];
  }
  return grad_in;
}

void relu_inplace(Tensor& t) {
  for (auto& v : t.data) v = v > 0.0 ? v : 0.0;
}

Tensor relu_backward(const Tensor& pre, const Tensor& grad_out) {
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    if (pre.data[i] <= 0.0) g.data[i] = 0.0;
  }
  return g;
}

std::vector<double> fc_forward(const LayerParam& p, const std::vector<double>& in) {
  const int in_dim = p.spec.in_channels;
  const int out_dim = p.spec.out_channels;
  if (static_cast<int>(in.size()) != in_dim) throw ConfigError("fc_forward: dim mismatch");
  std::vector<double> out(static_cast<std::size_t>(out_dim));
  for (int o = 0; o < out_dim; ++o) {
    const double* row = &p.w[static_cast<std::size_t>(o) * in_dim];
    double acc = p.b[o];
    for (int i = 0; i < in_dim; ++i) acc += row[i] * in[i];
    out[o] = acc;
  }
  return out;
}

std::vector<double> fc_backward(const LayerParam& p, const std::vector<double>& in,
                                const std::vector<double>& grad_out, LayerGrad& g) {
  const int in_dim = p.spec.in_channels;
  const int out_dim = p.spec.out_channels;
  std::vector<double> grad_in(static_cast<std::size_t>(in_dim), 0.0);
  for (int o = 0; o < out_dim; ++o) {
    const double go = grad_out[o];
    g.b[o] += go;
    double* gw = &g.w[static_cast<std::size_t>(o) * in_dim];
    const double* row = &p.w[static_cast<std::size_t>(o) * in_dim];
    for (int i = 0; i < in_dim; ++i) {
      gw[i] += go * in[i];
      grad_in[i] += go * row[i];
    }
  }
  return grad_in;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_with_logit(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

double smooth_l1(double x) {
  const double a = std::abs(x);
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

double smooth_l1_grad(double x) {
  if (x > 1.0) return 1.0;
  if (x < -1.0) return -1.0;
  return x;
}

Tensor stack_forward(std::span<const LayerParam> layers, const Tensor& in) {
  Tensor cur = in;
  for (const auto& layer : layers) {
    switch (layer.spec.kind) {
      case LayerKind::conv: {
        cur = conv_forward(layer, cur);
        relu_inplace(cur);
        break;
      }
      case LayerKind::pool:
        cur = pool_forward(cur);
        break;
      case LayerKind::fc:
        throw ConfigError("stack_forward: fc layer in conv stack");
    }
  }
  return cur;
}

StackTrace stack_forward_trace(std::span<const LayerParam> layers, const Tensor& in) {
  StackTrace t;
  t.inputs.reserve(layers.size());
  t.pre_relu.resize(layers.size());
  t.argmax.resize(layers.size());
  Tensor cur = in;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    t.inputs.push_back(cur);
    switch (layers[i].spec.kind) {
      case LayerKind::conv: {
        Tensor z = conv_forward(layers[i], cur);
        t.pre_relu[i] = z;
        relu_inplace(z);
        cur = std::move(z);
        break;
      }
      case LayerKind::pool:
        cur = pool_forward(cur, &t.argmax[i]);
        break;
      case LayerKind::fc:
        throw ConfigError("stack_forward_trace: fc layer in conv stack");
    }
  }
  t.output = cur;
  return t;
}

Tensor stack_backward(std::span<const LayerParam> layers, const StackTrace& trace,
                      const Tensor& grad_out, std::vector<LayerGrad>& g) {
  Tensor grad = grad_out;
  for (std::size_t ri = layers.size(); ri-- > 0;) {
    switch (layers[ri].spec.kind) {
      case LayerKind::conv: {
        Tensor gz = relu_backward(trace.pre_relu[ri], grad);
        grad = conv_backward(layers[ri], trace.inputs[ri], gz, g[ri]);
        break;
      }
      case LayerKind::pool:
        grad = pool_backward(trace.inputs[ri], trace.argmax[ri], grad);
        break;
      case LayerKind::fc:
        throw ConfigError("stack_backward: fc layer in conv stack");
    }
  }
  return grad;
}

void sgd_step(LayerParam& p, const LayerGrad& g, LayerGrad& velocity, double lr,
              double momentum) {
  for (std::size_t i = 0; i < p.w.size(); ++i) {
    velocity.w[i] = momentum * velocity.w[i] - lr * g.w[i];
    p.w[i] += velocity.w[i];
  }
  for (std::size_t i = 0; i < p.b.size(); ++i) {
    velocity.b[i] = momentum * velocity.b[i] - lr * g.b[i];
    p.b[i] += velocity.b[i];
  }
}

double grad_norm(std::span<const LayerGrad> grads) {
  double s = 0.0;
  for (const auto& g : grads) {
    for (double v : g.w) s += v * v;
    for (double v : g.b) s += v * v;
  }
  return std::sqrt(s);
}

void clip_grads(std::span<LayerGrad> grads, double max_norm) {
  const double n = grad_norm(grads);
  if (n <= max_norm || n == 0.0) return;
  const double scale = max_norm / n;
  for (auto& g : grads) {
    for (auto& v : g.w) v *= scale;
    for (auto& v : g.b) v *= scale;
  }
}

}  // namespace frp::nn
