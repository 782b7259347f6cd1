#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "frp/rng.hpp"
#include "frp/tensor.hpp"

namespace frp::nn {

enum class LayerKind : std::uint32_t { conv = 0, pool = 1, fc = 2 };

struct LayerSpec {
  LayerKind kind = LayerKind::conv;
  int filter_size = 0;
  int stride = 1;
  int in_channels = 0;
  int out_channels = 0;
};

// One layer's parameters. conv: w[out][in][k][k], fc: w[out][in]; pooling
// layers carry no parameters but keep a spec for serialization and
// receptive-field bookkeeping.
struct LayerParam {
  LayerSpec spec;
  std::vector<double> w;
  std::vector<double> b;
};

struct LayerGrad {
  std::vector<double> w;
  std::vector<double> b;
};

LayerParam make_conv(int in_c, int out_c, int k, Rng& rng);
LayerParam make_pool();
LayerParam make_fc(int in_dim, int out_dim, Rng& rng);
LayerGrad zero_grad_like(const LayerParam& p);
std::size_t param_count(const LayerParam& p);

// Convolution with stride 1 and zero padding k/2, so spatial dims are
// preserved (k=3 -> pad 1, k=1 -> pad 0).
Tensor conv_forward(const LayerParam& p, const Tensor& in);
// Returns grad wrt input; accumulates into g.
Tensor conv_backward(const LayerParam& p, const Tensor& in, const Tensor& grad_out,
                     LayerGrad& g);

// 2x2 max pool, stride 2, floor semantics on odd dims. argmax (flat input
// indices) is filled when non-null and consumed by the backward pass.
Tensor pool_forward(const Tensor& in, std::vector<int>* argmax = nullptr);
Tensor pool_backward(const Tensor& in, const std::vector<int>& argmax,
                     const Tensor& grad_out);

void relu_inplace(Tensor& t);
// Mask grad_out by pre > 0.
Tensor relu_backward(const Tensor& pre, const Tensor& grad_out);

std::vector<double> fc_forward(const LayerParam& p, const std::vector<double>& in);
std::vector<double> fc_backward(const LayerParam& p, const std::vector<double>& in,
                                const std::vector<double>& grad_out, LayerGrad& g);

double sigmoid(double z);
// Numerically stable binary cross-entropy on a logit; d/dz = sigmoid(z) - y.
double bce_with_logit(double z, double y);

double smooth_l1(double x);
double smooth_l1_grad(double x);

// Forward through a conv/pool stack with relu after every conv — the shared
// trunk pattern of the patch classifier and the detector backbone.
Tensor stack_forward(std::span<const LayerParam> layers, const Tensor& in);

struct StackTrace {
  std::vector<Tensor> inputs;             // input seen by each layer
  std::vector<Tensor> pre_relu;           // conv layers: output before relu
  std::vector<std::vector<int>> argmax;   // pool layers: max locations
  Tensor output;
};

StackTrace stack_forward_trace(std::span<const LayerParam> layers, const Tensor& in);
// Returns grad wrt the stack input; accumulates per-layer grads into g
// (g must be index-aligned with layers).
Tensor stack_backward(std::span<const LayerParam> layers, const StackTrace& trace,
                      const Tensor& grad_out, std::vector<LayerGrad>& g);

// SGD step with optional momentum; velocity has the same shape as grads.
void sgd_step(LayerParam& p, const LayerGrad& g, LayerGrad& velocity, double lr,
              double momentum);
// Global L2 norm over a set of grads, and in-place rescale to max_norm.
double grad_norm(std::span<const LayerGrad> grads);
void clip_grads(std::span<LayerGrad> grads, double max_norm);

}  // namespace frp::nn
