#pragma once

#include <optional>
#include <utility>

#include "frp/error.hpp"

namespace frp {

// Axis-aligned box in continuous pixel coordinates, (x1,y1) top-left,
// (x2,y2) bottom-right. Zero-area and non-finite boxes are rejected at
// construction, so every live BoundingBox has strictly positive extent.
struct BoundingBox {
  double x1, y1, x2, y2;

  BoundingBox(double x1, double y1, double x2, double y2);

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }

  friend bool operator==(const BoundingBox& a, const BoundingBox& b) {
    return a.x1 == b.x1 && a.y1 == b.y1 && a.x2 == b.x2 && a.y2 == b.y2;
  }
};

double area(const BoundingBox& b);

// |a n b| / |a u b|. Boxes touching only along an edge have IoU 0.
double iou(const BoundingBox& a, const BoundingBox& b);

// Splits at the horizontal center: left and right halves share the full
// height and tile the input exactly. Throws GeometryError if the box is
// too narrow for the center to be representable.
std::pair<BoundingBox, BoundingBox> split_vertical(const BoundingBox& b);

// Intersection with the image rectangle (0,0,w,h); nullopt when disjoint.
std::optional<BoundingBox> clip_to_image(const BoundingBox& b, double w, double h);

}  // namespace frp
