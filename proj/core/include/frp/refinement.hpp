#pragma once

#include <cstddef>
#include <vector>

#include "frp/geometry.hpp"
#include "frp/scorer.hpp"

namespace frp {

struct Proposal {
  BoundingBox box;
  double objectness;  // proposal-layer score in [0,1]

  Proposal(const BoundingBox& b, double score);
};

// IoU assignment output: positives and negatives partition the input;
// best_iou is indexed by input order.
struct AssignmentResult {
  std::vector<Proposal> positives;
  std::vector<Proposal> negatives;
  std::vector<double> best_iou;
};

struct SfrpScores {
  double whole = 0.0;
  double left = 0.0;
  double right = 0.0;
};

struct FrpThresholds {
  double eps_iou = 0.5;  // positive/negative assignment
  double eps_t = 0.5;    // training-time negative reselection
  double eps_c = 0.3;    // inference-time proposal filtering
  double eps = 0.5;      // whole-detection confidence
  double eps_s = 0.1;    // split-half confidence
};

void validate_thresholds(const FrpThresholds& t);

// A proposal is positive iff its best IoU against any gt reaches eps_iou;
// with no gts everything is negative.
AssignmentResult assign_by_iou(const std::vector<Proposal>& proposals,
                               const std::vector<BoundingBox>& gts, double eps_iou);

// Keeps negatives the scorer rates below eps_t; pedestrian-like negatives
// are dropped from training entirely. Unscorable proposals are kept
// conservatively and counted into *unscorable when provided.
std::vector<Proposal> tfrp_refine(const std::vector<Proposal>& negatives,
                                  const ProposalScorer& scorer, const Tensor& image,
                                  double eps_t, int* unscorable = nullptr);

struct TrainingSample {
  Proposal proposal;
  bool positive = false;
};

// Disjoint union of positives and refined negatives with labels attached.
std::vector<TrainingSample> tfrp_training_set(const std::vector<Proposal>& positives,
                                              const std::vector<Proposal>& refined_negatives);

// Keeps proposals the scorer rates at least eps_c, preserving input order.
std::vector<Proposal> cfrp_filter(const std::vector<Proposal>& proposals,
                                  const ProposalScorer& scorer, const Tensor& image,
                                  double eps_c, int* unscorable = nullptr);

// Keep iff whole >= eps and both halves >= eps_s.
bool sfrp_decide(const SfrpScores& s, double eps, double eps_s);

// Greedy NMS. Visit order: score descending, ties by smaller area, then
// input index; returns kept input indices in visit order.
std::vector<std::size_t> nms_indices(const std::vector<BoundingBox>& boxes,
                                     const std::vector<double>& scores, double iou_thresh);

}  // namespace frp
