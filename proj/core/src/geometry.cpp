#include "frp/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace frp {

BoundingBox::BoundingBox(double x1_, double y1_, double x2_, double y2_)
    : x1(x1_), y1(y1_), x2(x2_), y2(y2_) {
  if (!(std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2))) {
    throw GeometryError("BoundingBox: non-finite coordinate");
  }
  if (!(x1 < x2 && y1 < y2)) {
    throw GeometryError("BoundingBox: empty extent");
  }
}

double area(const BoundingBox& b) {
  return b.width() * b.height();
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (area(a) + area(b) - inter);
}

std::pair<BoundingBox, BoundingBox> split_vertical(const BoundingBox& b) {
  const double x_cen = b.x1 + (b.x2 - b.x1) / 2.0;
  if (!(b.x1 < x_cen && x_cen < b.x2)) {
    throw GeometryError("split_vertical: box too narrow to split");
  }
  return {BoundingBox(b.x1, b.y1, x_cen, b.y2), BoundingBox(x_cen, b.y1, b.x2, b.y2)};
}

std::optional<BoundingBox> clip_to_image(const BoundingBox& b, double w, double h) {
  if (!(w > 0.0 && h > 0.0)) throw GeometryError("clip_to_image: empty image");
  const double cx1 = std::max(b.x1, 0.0);
  const double cy1 = std::max(b.y1, 0.0);
  const double cx2 = std::min(b.x2, w);
  const double cy2 = std::min(b.y2, h);
  if (cx1 >= cx2 || cy1 >= cy2) return std::nullopt;
  return BoundingBox(cx1, cy1, cx2, cy2);
}

}  // namespace frp
