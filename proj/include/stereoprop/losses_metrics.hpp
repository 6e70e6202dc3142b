#pragma once

#include <array>
#include <optional>

#include "stereoprop/maps.hpp"

namespace stereoprop {

/// 0.5 x^2 for |x| < 1, |x| - 0.5 otherwise.
double smooth_l1(double x);

/// Mean SmoothL1(gt - pred) over valid pixels. Throws EmptyValidSet.
double disparity_loss(const DisparityMap& gt, const DisparityMap& pred,
                      const Mask& valid);

/// Mean SmoothL1 over all pixels and the three channels.
double normal_loss(const NormalMap& gt, const NormalMap& pred);

/// Mean over valid pixels of max(1 - c, 0) where |gt - pred| < c1 plus
/// max(c, 0) where |gt - pred| > c2. Errors in [c1, c2] contribute nothing.
double confidence_loss(const ConfidenceMap& c, const DisparityMap& gt,
                       const DisparityMap& pred, const Mask& valid,
                       double c1 = 0.5, double c2 = 1.5);

struct LossWeights {
  std::array<double, 4> scale{1.0, 0.8, 0.8, 0.6};
  double disparity = 5.0;
  double normal = 50.0;
  double confidence = 1.0;
  double c1 = 0.5;
  double c2 = 1.5;

  /// Throws InvalidArgument unless every weight is >= 0 and c1 < c2.
  void validate() const;
};

struct ScaleTerms {
  double disparity = 0.0;
  double normal = 0.0;
  double confidence = 0.0;
};

/// sum_s scale[s] * (disparity * L_d + normal * L_n + confidence * L_c).
double total_loss(const std::array<ScaleTerms, 4>& terms,
                  const LossWeights& weights = {});

struct RegionMetrics {
  std::size_t count = 0;
  double epe = 0.0;
  double p1 = 0.0;
  double p3 = 0.0;
  double d1 = 0.0;
  double bad2 = 0.0;
  double bad4 = 0.0;
  double rmse = 0.0;
  double avg_err = 0.0;
};

/// Regions with no valid pixel are left empty.
struct MetricReport {
  std::optional<RegionMetrics> all;
  std::optional<RegionMetrics> occluded;
  std::optional<RegionMetrics> non_occluded;
};

/// Metrics over a pixel set. D1 is the KITTI outlier rule: error > 3 px and
/// > 5% of the ground truth. Throws EmptyValidSet when `region` is empty.
RegionMetrics evaluate_region(const DisparityMap& gt, const DisparityMap& pred,
                              const Mask& region);

/// `occlusion` splits the valid set; pass std::nullopt to report `all` only.
MetricReport evaluate(const DisparityMap& gt, const DisparityMap& pred,
                      const Mask& valid,
                      const std::optional<Mask>& occlusion = std::nullopt);

}  // namespace stereoprop
