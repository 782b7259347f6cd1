#pragma once

#include <functional>
#include <optional>

#include "frp/geometry.hpp"
#include "frp/tensor.hpp"

namespace frp {

// Pedestrian-confidence score for an image region, in [0,1]. Returns
// nullopt when the region cannot be scored (box fully outside the image).
// The refinement rules are written against this interface so they can be
// tested with tabulated scorers instead of a trained network.
using ProposalScorer =
    std::function<std::optional<double>(const Tensor& image, const BoundingBox& box)>;

}  // namespace frp
