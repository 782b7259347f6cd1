#include "frp/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <utility>

#include "wire.hpp"

namespace frp {

using nn::LayerKind;
using nn::LayerParam;
using nn::LayerSpec;

std::vector<LayerSpec> default_classifier_spec(int in_channels) {
  std::vector<LayerSpec> s;
  const int widths[4] = {16, 32, 64, 128};
  int c = in_channels;
  for (int i = 0; i < 4; ++i) {
    s.push_back({LayerKind::conv, 3, 1, c, widths[i]});
    s.push_back({LayerKind::pool, 2, 2, 0, 0});
    c = widths[i];
  }
  // 64 -> 4 spatial after four pools; single confidence output.
  s.push_back({LayerKind::fc, 1, 1, 128 * 4 * 4, 1});
  return s;
}

ClassifierWeights make_classifier(const std::vector<LayerSpec>& specs, int input_size,
                                  int in_channels, Rng& rng) {
  ClassifierWeights w;
  w.input_size = input_size;
  w.in_channels = in_channels;
  for (const auto& spec : specs) {
    switch (spec.kind) {
      case LayerKind::conv:
        w.layers.push_back(nn::make_conv(spec.in_channels, spec.out_channels,
                                         spec.filter_size, rng));
        break;
      case LayerKind::pool:
        w.layers.push_back(nn::make_pool());
        break;
      case LayerKind::fc:
        w.layers.push_back(nn::make_fc(spec.in_channels, spec.out_channels, rng));
        break;
    }
  }
  validate_classifier(w);
  return w;
}

ClassifierWeights default_pedestrian_classifier(int in_channels, Rng& rng) {
  return make_classifier(default_classifier_spec(in_channels), 64, in_channels, rng);
}

void validate_classifier(const ClassifierWeights& w) {
  if (w.layers.empty()) throw ConfigError("classifier: no layers");
  int c = w.in_channels, h = w.input_size, wd = w.input_size;
  bool in_fc = false;
  int dim = 0;
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    const auto& spec = w.layers[i].spec;
    switch (spec.kind) {
      case LayerKind::conv:
        if (in_fc) throw ConfigError("classifier: conv after fc");
        if (spec.filter_size != 3) throw ConfigError("classifier: conv filter must be 3");
        if (spec.in_channels != c) throw ConfigError("classifier: conv channel mismatch");
        c = spec.out_channels;
        break;
      case LayerKind::pool:
        if (in_fc) throw ConfigError("classifier: pool after fc");
        if (spec.filter_size != 2 || spec.stride != 2) {
          throw ConfigError("classifier: pool must be 2x2 stride 2");
        }
        if (h < 2 || wd < 2) throw ConfigError("classifier: pooling below 1x1");
        h /= 2;
        wd /= 2;
        break;
      case LayerKind::fc: {
        const int expect = in_fc ? dim : c * h * wd;
        if (spec.in_channels != expect) {
          throw ConfigError("classifier: fc input dim mismatch");
        }
        in_fc = true;
        dim = spec.out_channels;
        break;
      }
    }
  }
  if (!in_fc || dim != 1) throw ConfigError("classifier: final layer must be fc -> 1");
  for (const auto& layer : w.layers) {
    for (double v : layer.w) {
      if (!std::isfinite(v)) throw ConfigError("classifier: non-finite parameter");
    }
    for (double v : layer.b) {
      if (!std::isfinite(v)) throw ConfigError("classifier: non-finite parameter");
    }
  }
}

std::size_t classifier_param_count(const ClassifierWeights& w) {
  std::size_t n = 0;
  for (const auto& layer : w.layers) n += nn::param_count(layer);
  return n;
}

namespace {

std::size_t first_fc_index(const ClassifierWeights& w) {
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    if (w.layers[i].spec.kind == LayerKind::fc) return i;
  }
  throw ConfigError("classifier: missing fc output layer");
}

struct ClsTrace {
  nn::StackTrace spatial;
  std::vector<std::vector<double>> fc_inputs;
  std::vector<std::vector<double>> fc_pre;
  double logit = 0.0;
};

double forward_impl(const ClassifierWeights& w, const Tensor& patch, ClsTrace* trace) {
  if (patch.c != w.in_channels || patch.h != w.input_size || patch.w != w.input_size) {
    throw ConfigError("classifier forward: patch shape mismatch");
  }
  const std::size_t fc0 = first_fc_index(w);
  const std::span<const LayerParam> trunk(w.layers.data(), fc0);

  Tensor feat;
  if (trace) {
    trace->spatial = nn::stack_forward_trace(trunk, patch);
    feat = trace->spatial.output;
  } else {
    feat = nn::stack_forward(trunk, patch);
  }

  std::vector<double> v = std::move(feat.data);
  for (std::size_t i = fc0; i < w.layers.size(); ++i) {
    if (trace) trace->fc_inputs.push_back(v);
    v = nn::fc_forward(w.layers[i], v);
    const bool last = (i + 1 == w.layers.size());
    if (trace) trace->fc_pre.push_back(v);
    if (!last) {
      for (auto& x : v) x = x > 0.0 ? x : 0.0;
    }
  }
  if (trace) trace->logit = v[0];
  return v[0];
}

}  // namespace

double forward(const ClassifierWeights& w, const Tensor& patch) {
  return nn::sigmoid(forward_impl(w, patch, nullptr));
}

std::vector<int> receptive_field(const std::vector<LayerSpec>& specs) {
  if (specs.empty()) throw ConfigError("receptive_field: empty spec list");
  std::vector<int> rf;
  rf.reserve(specs.size());
  long long r = 1, stride_prod = 1;
  for (const auto& s : specs) {
    if (s.kind != LayerKind::fc) {
      r += static_cast<long long>(s.filter_size - 1) * stride_prod;
      stride_prod *= s.stride;
    }
    rf.push_back(static_cast<int>(r));
  }
  return rf;
}

namespace {

GradientResult gradient_over(const ClassifierWeights& w,
                             const std::vector<const LabeledPatch*>& batch) {
  if (batch.empty()) throw DataError("gradient: empty batch");
  GradientResult res;
  res.grads.reserve(w.layers.size());
  for (const auto& layer : w.layers) res.grads.push_back(nn::zero_grad_like(layer));

  const std::size_t fc0 = first_fc_index(w);
  const std::span<const LayerParam> trunk(w.layers.data(), fc0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  for (const LabeledPatch* item : batch) {
    ClsTrace trace;
    const double logit = forward_impl(w, item->patch, &trace);
    const double y = item->label ? 1.0 : 0.0;
    res.loss += nn::bce_with_logit(logit, y) * inv_n;

    std::vector<double> grad{(nn::sigmoid(logit) - y) * inv_n};
    for (std::size_t i = w.layers.size(); i-- > fc0;) {
      const bool last = (i + 1 == w.layers.size());
      if (!last) {
        const auto& pre = trace.fc_pre[i - fc0];
        for (std::size_t j = 0; j < grad.size(); ++j) {
          if (pre[j] <= 0.0) grad[j] = 0.0;
        }
      }
      grad = nn::fc_backward(w.layers[i], trace.fc_inputs[i - fc0], grad, res.grads[i]);
    }

    Tensor tgrad(trace.spatial.output.c, trace.spatial.output.h, trace.spatial.output.w);
    tgrad.data = std::move(grad);
    std::vector<nn::LayerGrad> trunk_grads(res.grads.begin(), res.grads.begin() + fc0);
    nn::stack_backward(trunk, trace.spatial, tgrad, trunk_grads);
    for (std::size_t i = 0; i < fc0; ++i) res.grads[i] = std::move(trunk_grads[i]);
  }
  return res;
}

}  // namespace

GradientResult gradient(const ClassifierWeights& w, const std::vector<LabeledPatch>& batch) {
  std::vector<const LabeledPatch*> ptrs;
  ptrs.reserve(batch.size());
  for (const auto& p : batch) ptrs.push_back(&p);
  return gradient_over(w, ptrs);
}

ClassifierWeights train_classifier(const std::vector<LabeledPatch>& patches,
                                   const ClassifierHyper& hyper, std::uint64_t seed) {
  if (patches.empty()) throw DataError("train_classifier: no patches");
  int n_pos = 0, n_neg = 0;
  for (const auto& p : patches) (p.label ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) {
    throw DataError("train_classifier: need at least one patch of each class");
  }
  const Tensor& p0 = patches.front().patch;
  if (p0.h != p0.w) throw DataError("train_classifier: patches must be square");
  for (const auto& p : patches) {
    if (!p.patch.same_shape(p0)) throw DataError("train_classifier: mixed patch shapes");
  }

  Rng rng(seed);
  ClassifierWeights w = make_classifier(default_classifier_spec(p0.c), p0.h, p0.c, rng);

  std::vector<int> order(patches.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<const LabeledPatch*> batch;

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(hyper.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(hyper.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(&patches[order[i]]);
      GradientResult res = gradient_over(w, batch);
      if (!std::isfinite(res.loss)) {
        throw TrainingError("train_classifier: non-finite loss at epoch " +
                            std::to_string(epoch));
      }
      for (std::size_t li = 0; li < w.layers.size(); ++li) {
        auto& layer = w.layers[li];
        const auto& g = res.grads[li];
        for (std::size_t j = 0; j < layer.w.size(); ++j) {
          layer.w[j] -= hyper.learning_rate * g.w[j];
        }
        for (std::size_t j = 0; j < layer.b.size(); ++j) {
          layer.b[j] -= hyper.learning_rate * g.b[j];
        }
      }
    }
  }
  return w;
}

Tensor extract_patch(const Tensor& image, const BoundingBox& box, int out_size) {
  const auto clipped = clip_to_image(box, image.w, image.h);
  if (!clipped) throw GeometryError("extract_patch: box outside image");
  const double bx = clipped->x1, by = clipped->y1;
  const double bw = clipped->width(), bh = clipped->height();

  // Samples at pixel centers; out-of-range taps collapse onto the border
  // row/column, which makes aligned unit-scale crops exact copies.
  Tensor out(image.c, out_size, out_size);
  for (int c = 0; c < image.c; ++c) {
    const double* src = image.plane(c);
    double* dst = out.plane(c);
    for (int oy = 0; oy < out_size; ++oy) {
      const double sy = by + (oy + 0.5) / out_size * bh - 0.5;
      const int fy = static_cast<int>(std::floor(sy));
      const int y0 = std::clamp(fy, 0, image.h - 1);
      const int y1 = std::clamp(fy + 1, 0, image.h - 1);
      const double ty = sy - fy;
      for (int ox = 0; ox < out_size; ++ox) {
        const double sx = bx + (ox + 0.5) / out_size * bw - 0.5;
        const int fx = static_cast<int>(std::floor(sx));
        const int x0 = std::clamp(fx, 0, image.w - 1);
        const int x1 = std::clamp(fx + 1, 0, image.w - 1);
        const double tx = sx - fx;
        const double top = src[y0 * image.w + x0] * (1.0 - tx) + src[y0 * image.w + x1] * tx;
        const double bot = src[y1 * image.w + x0] * (1.0 - tx) + src[y1 * image.w + x1] * tx;
        dst[oy * out_size + ox] = std::clamp(top * (1.0 - ty) + bot * ty, 0.0, 1.0);
      }
    }
  }
  return out;
}

namespace {
constexpr char kClassifierMagic[] = "FRPC";
constexpr std::uint32_t kFormatVersion = 1;
}  // namespace

void save_weights(const ClassifierWeights& w, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("save_weights: cannot open " + path);
  os.write(kClassifierMagic, 4);
  wire::put_u32(os, kFormatVersion);
  wire::put_u32(os, static_cast<std::uint32_t>(w.input_size));
  wire::put_u32(os, static_cast<std::uint32_t>(w.in_channels));
  wire::put_u32(os, static_cast<std::uint32_t>(w.layers.size()));
  for (const auto& layer : w.layers) wire::put_layer(os, layer);
  if (!os) throw DataError("save_weights: write failed for " + path);
}

ClassifierWeights load_weights(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("load_weights: cannot open " + path);
  wire::expect_magic(is, kClassifierMagic);
  const std::uint32_t version = wire::get_u32(is, "version");
  if (version != kFormatVersion) {
    throw DataError("load_weights: unsupported format version " + std::to_string(version));
  }
  ClassifierWeights w;
  w.version = version;
  w.input_size = static_cast<int>(wire::get_u32(is, "input size"));
  w.in_channels = static_cast<int>(wire::get_u32(is, "in channels"));
  const std::uint32_t count = wire::get_u32(is, "layer count");
  if (count > 4096) throw DataError("load_weights: implausible layer count");
  for (std::uint32_t i = 0; i < count; ++i) w.layers.push_back(wire::get_layer(is));
  validate_classifier(w);
  return w;
}

ProposalScorer make_patch_scorer(ClassifierWeights w) {
  return [w = std::move(w)](const Tensor& image,
                            const BoundingBox& box) -> std::optional<double> {
    if (!clip_to_image(box, image.w, image.h)) return std::nullopt;
    return forward(w, extract_patch(image, box, w.input_size));
  };
}

}  // namespace frp
