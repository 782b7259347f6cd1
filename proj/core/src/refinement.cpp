#include "frp/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace frp {

Proposal::Proposal(const BoundingBox& b, double score) : box(b), objectness(score) {
  if (!(std::isfinite(score) && score >= 0.0 && score <= 1.0)) {
    throw DataError("Proposal: objectness outside [0,1]");
  }
}

void validate_thresholds(const FrpThresholds& t) {
  const struct {
    const char* name;
    double value;
  } fields[] = {{"eps_iou", t.eps_iou},
                {"eps_t", t.eps_t},
                {"eps_c", t.eps_c},
                {"eps", t.eps},
                {"eps_s", t.eps_s}};
  for (const auto& f : fields) {
    if (!(std::isfinite(f.value) && f.value >= 0.0 && f.value <= 1.0)) {
      throw ConfigError(std::string(f.name) + ": threshold outside [0,1]");
    }
  }
}

AssignmentResult assign_by_iou(const std::vector<Proposal>& proposals,
                               const std::vector<BoundingBox>& gts, double eps_iou) {
  if (!(eps_iou > 0.0 && eps_iou < 1.0)) {
    throw ConfigError("assign_by_iou: eps_iou must lie in (0,1)");
  }
  AssignmentResult res;
  res.best_iou.reserve(proposals.size());
  for (const auto& p : proposals) {
    double best = 0.0;
    for (const auto& gt : gts) best = std::max(best, iou(p.box, gt));
    res.best_iou.push_back(best);
    (best >= eps_iou ? res.positives : res.negatives).push_back(p);
  }
  return res;
}

std::vector<Proposal> tfrp_refine(const std::vector<Proposal>& negatives,
                                  const ProposalScorer& scorer, const Tensor& image,
                                  double eps_t, int* unscorable) {
  std::vector<Proposal> kept;
  kept.reserve(negatives.size());
  for (const auto& p : negatives) {
    const auto score = scorer(image, p.box);
    if (!score) {
      if (unscorable) ++*unscorable;
      kept.push_back(p);
      continue;
    }
    if (*score < eps_t) kept.push_back(p);
  }
  return kept;
}

std::vector<TrainingSample> tfrp_training_set(const std::vector<Proposal>& positives,
                                              const std::vector<Proposal>& refined_negatives) {
  for (const auto& pos : positives) {
    for (const auto& neg : refined_negatives) {
      if (pos.box == neg.box) {
        throw std::logic_error("tfrp_training_set: positive/negative sets overlap");
      }
    }
  }
  std::vector<TrainingSample> out;
  out.reserve(positives.size() + refined_negatives.size());
  for (const auto& p : positives) out.push_back({p, true});
  for (const auto& p : refined_negatives) out.push_back({p, false});
  return out;
}

std::vector<Proposal> cfrp_filter(const std::vector<Proposal>& proposals,
                                  const ProposalScorer& scorer, const Tensor& image,
                                  double eps_c, int* unscorable) {
  std::vector<Proposal> kept;
  kept.reserve(proposals.size());
  for (const auto& p : proposals) {
    const auto score = scorer(image, p.box);
    if (!score) {
      if (unscorable) ++*unscorable;
      kept.push_back(p);
      continue;
    }
    if (*score >= eps_c) kept.push_back(p);
  }
  return kept;
}

bool sfrp_decide(const SfrpScores& s, double eps, double eps_s) {
  return s.whole >= eps && s.left >= eps_s && s.right >= eps_s;
}

std::vector<std::size_t> nms_indices(const std::vector<BoundingBox>& boxes,
                                     const std::vector<double>& scores, double iou_thresh) {
  if (boxes.size() != scores.size()) {
    throw DataError("nms: box/score length mismatch");
  }
  if (!(iou_thresh > 0.0 && iou_thresh < 1.0)) {
    throw ConfigError("nms: iou threshold must lie in (0,1)");
  }
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    const double aa = area(boxes[a]), ab = area(boxes[b]);
    if (aa != ab) return aa < ab;
    return a < b;
  });

  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    bool suppressed = false;
    for (std::size_t k : kept) {
      if (iou(boxes[idx], boxes[k]) >= iou_thresh) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(idx);
  }
  return kept;
}

}  // namespace frp
