#include "stereoprop/losses_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stereoprop/error.hpp"

namespace stereoprop {
namespace {

void require_same_plane(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_plane(b)) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": shape mismatch");
  }
}

}  // namespace

double smooth_l1(double x) {
  const double ax = std::abs(x);
  return ax < 1.0 ? 0.5 * x * x : ax - 0.5;
}

double disparity_loss(const DisparityMap& gt, const DisparityMap& pred,
                      const Mask& valid) {
  require_same_plane(gt.grid(), pred.grid(), "disparity_loss");
  require_same_plane(gt.grid(), valid.grid(), "disparity_loss");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.grid().size(); ++i) {
    if (valid.grid().data()[i] == 0.0) continue;
    sum += smooth_l1(gt.grid().data()[i] - pred.grid().data()[i]);
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::EmptyValidSet, "disparity_loss: no valid pixels");
  return sum / static_cast<double>(n);
}

double normal_loss(const NormalMap& gt, const NormalMap& pred) {
  require_same_plane(gt.grid(), pred.grid(), "normal_loss");
  const auto a = gt.grid().data();
  const auto b = pred.grid().data();
  if (a.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += smooth_l1(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

double confidence_loss(const ConfidenceMap& c, const DisparityMap& gt,
                       const DisparityMap& pred, const Mask& valid, double c1,
                       double c2) {
  if (!(c1 < c2)) {
    throw Error(ErrorCode::InvalidArgument, "confidence_loss needs c1 < c2");
  }
  require_same_plane(gt.grid(), pred.grid(), "confidence_loss");
  require_same_plane(gt.grid(), valid.grid(), "confidence_loss");
  require_same_plane(gt.grid(), c.grid(), "confidence_loss");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.grid().size(); ++i) {
    if (valid.grid().data()[i] == 0.0) continue;
    const double err = std::abs(gt.grid().data()[i] - pred.grid().data()[i]);
    const double conf = c.grid().data()[i];
    if (err < c1) sum += std::max(1.0 - conf, 0.0);
    if (err > c2) sum += std::max(conf, 0.0);
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::EmptyValidSet, "confidence_loss: no valid pixels");
  return sum / static_cast<double>(n);
}

void LossWeights::validate() const {
  const bool non_negative =
      std::all_of(scale.begin(), scale.end(), [](double v) { return v >= 0.0; }) &&
      disparity >= 0.0 && normal >= 0.0 && confidence >= 0.0 && c1 >= 0.0;
  if (!non_negative) {
    throw Error(ErrorCode::InvalidArgument, "loss weights must be >= 0");
  }
  if (!(c1 < c2)) {
    throw Error(ErrorCode::InvalidArgument, "loss weights need c1 < c2");
  }
}

double total_loss(const std::array<ScaleTerms, 4>& terms,
                  const LossWeights& weights) {
  weights.validate();
  double total = 0.0;
  for (std::size_t s = 0; s < terms.size(); ++s) {
    total += weights.scale[s] * (weights.disparity * terms[s].disparity +
                                 weights.normal * terms[s].normal +
                                 weights.confidence * terms[s].confidence);
  }
  return total;
}

RegionMetrics evaluate_region(const DisparityMap& gt, const DisparityMap& pred,
                              const Mask& region) {
  require_same_plane(gt.grid(), pred.grid(), "evaluate");
  require_same_plane(gt.grid(), region.grid(), "evaluate");
  RegionMetrics m;
  double abs_sum = 0.0, sq_sum = 0.0;
  std::size_t p1 = 0, p3 = 0, d1 = 0, bad2 = 0, bad4 = 0;
  for (std::size_t i = 0; i < gt.grid().size(); ++i) {
    if (region.grid().data()[i] == 0.0) continue;
    const double g = gt.grid().data()[i];
    const double err = std::abs(g - pred.grid().data()[i]);
    abs_sum += err;
    sq_sum += err * err;
    p1 += err > 1.0;
    p3 += err > 3.0;
    bad2 += err > 2.0;
    bad4 += err > 4.0;
    d1 += err > 3.0 && err > 0.05 * g;
    ++m.count;
  }
  if (m.count == 0) throw Error(ErrorCode::EmptyValidSet, "evaluate: empty region");
  const double n = static_cast<double>(m.count);
  m.epe = abs_sum / n;
  m.avg_err = m.epe;
  m.rmse = std::sqrt(sq_sum / n);
  m.p1 = p1 / n;
  m.p3 = p3 / n;
  m.d1 = d1 / n;
  m.bad2 = bad2 / n;
  m.bad4 = bad4 / n;
  return m;
}

MetricReport evaluate(const DisparityMap& gt, const DisparityMap& pred,
                      const Mask& valid, const std::optional<Mask>& occlusion) {
  MetricReport report;
  auto try_region = [&](const Mask& region) -> std::optional<RegionMetrics> {
    if (region.count() == 0) return std::nullopt;
    return evaluate_region(gt, pred, region);
  };
  report.all = try_region(valid);
  if (occlusion) {
    report.occluded = try_region(valid & *occlusion);
    report.non_occluded = try_region(valid & occlusion->complement());
  }
  return report;
}

}  // namespace stereoprop
