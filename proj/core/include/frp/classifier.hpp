#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frp/geometry.hpp"
#include "frp/nn.hpp"
#include "frp/scorer.hpp"
#include "frp/tensor.hpp"

namespace frp {

// Small CNN patch classifier: stacked 3x3 conv + 2x2 pool pairs feeding a
// fully connected sigmoid output. The shipped pedestrian configuration is
// 9 layers on a 64x64 input; smaller instances of the same shape family
// are used as test instruments.
struct ClassifierWeights {
  std::uint32_t version = 1;
  int input_size = 64;
  int in_channels = 1;
  std::vector<nn::LayerParam> layers;
};

struct ClassifierHyper {
  double learning_rate = 0.05;
  int epochs = 10;
  int batch_size = 16;
};

struct LabeledPatch {
  Tensor patch;
  int label = 0;  // 1 pedestrian, 0 background
  BoundingBox source_box{0, 0, 1, 1};
  int image_index = -1;
};

// The 9-layer layout: (conv3, pool2) x 4 with channels 16/32/64/128,
// then one fully connected layer to a single confidence output.
std::vector<nn::LayerSpec> default_classifier_spec(int in_channels = 1);

ClassifierWeights make_classifier(const std::vector<nn::LayerSpec>& specs, int input_size,
                                  int in_channels, Rng& rng);
ClassifierWeights default_pedestrian_classifier(int in_channels, Rng& rng);

// Shape-checks the layer chain from the declared input; throws ConfigError.
void validate_classifier(const ClassifierWeights& w);
std::size_t classifier_param_count(const ClassifierWeights& w);

// Pedestrian confidence in (0,1) for a normalized patch.
double forward(const ClassifierWeights& w, const Tensor& patch);

// Receptive field per layer via r_n = r_{n-1} + (f_n - 1) * prod(s_i).
// Fully connected layers are position-free and repeat the incoming value.
std::vector<int> receptive_field(const std::vector<nn::LayerSpec>& specs);

struct GradientResult {
  double loss = 0.0;
  std::vector<nn::LayerGrad> grads;
};

// Mean binary cross-entropy over the batch and its gradients.
GradientResult gradient(const ClassifierWeights& w, const std::vector<LabeledPatch>& batch);

// Plain SGD, deterministic batch order derived from the seed. Requires at
// least one patch of each class; throws TrainingError on divergence.
ClassifierWeights train_classifier(const std::vector<LabeledPatch>& patches,
                                   const ClassifierHyper& hyper, std::uint64_t seed);

// Crop box (clipped to the image), bilinear-resize to out_size, clamp to
// [0,1]. Throws GeometryError when the box misses the image entirely.
Tensor extract_patch(const Tensor& image, const BoundingBox& box, int out_size = 64);

void save_weights(const ClassifierWeights& w, const std::string& path);
ClassifierWeights load_weights(const std::string& path);

// Adapter used by the TFRP/CFRP rules: crop, resize, classify.
ProposalScorer make_patch_scorer(ClassifierWeights w);

}  // namespace frp
