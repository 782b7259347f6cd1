#pragma once

#include <cstddef>
#include <vector>

#include "frp/error.hpp"

namespace frp {

// Dense CHW tensor of doubles. Images are Tensor{c=channels, h, w} with
// values in [0,1]; feature grids and patches use the same container.
struct Tensor {
  int c = 0, h = 0, w = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int c_, int h_, int w_, double fill = 0.0)
      : c(c_), h(h_), w(w_), data(static_cast<std::size_t>(c_) * h_ * w_, fill) {}

  double& at(int ch, int y, int x) {
    return data[(static_cast<std::size_t>(ch) * h + y) * w + x];
  }
  double at(int ch, int y, int x) const {
    return data[(static_cast<std::size_t>(ch) * h + y) * w + x];
  }

  // Start of one channel plane; rows are contiguous.
  double* plane(int ch) { return data.data() + static_cast<std::size_t>(ch) * h * w; }
  const double* plane(int ch) const {
    return data.data() + static_cast<std::size_t>(ch) * h * w;
  }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }
};

}  // namespace frp
