#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "stereoprop/grid.hpp"
#include "stereoprop/maps.hpp"

namespace stereoprop {

/// D x H x W correlation scores. Candidates whose source column x - d falls
/// left of the image hold kInvalid and are skipped by every reduction.
class CostVolume {
 public:
  static constexpr double kInvalid = -std::numeric_limits<double>::infinity();

  CostVolume(std::size_t max_disparity, std::size_t height, std::size_t width);

  std::size_t max_disparity() const noexcept { return max_disparity_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }

  double& operator()(std::size_t d, std::size_t y, std::size_t x) {
    return scores_[(d * height_ + y) * width_ + x];
  }
  double operator()(std::size_t d, std::size_t y, std::size_t x) const {
    return scores_[(d * height_ + y) * width_ + x];
  }
  static bool is_valid(double score) { return score != kInvalid; }

 private:
  std::size_t max_disparity_;
  std::size_t height_;
  std::size_t width_;
  std::vector<double> scores_;
};

/// score(d, y, x) = <left(y, x - d), right(y, x)> / C for d in [0, D).
CostVolume build_correlation_volume(const Grid& left, const Grid& right,
                                    std::size_t max_disparity);

/// Expected disparity under softmax(score / temperature) over valid
/// candidates. Throws AllInvalidColumn when a pixel has none.
DisparityMap soft_argmin_disparity(const CostVolume& volume,
                                   double temperature = 1.0);

struct WarpResult {
  Grid image;
  Mask valid;  // x - d(x, y) inside [0, W - 1]
};

/// out(y, x) = right sampled at (y, x - d(y, x)), clamped bilinear.
WarpResult warp_right_to_left(const Grid& right, const DisparityMap& d);

struct WarpedError {
  Grid error;
  Mask valid;
};

/// Channel-mean |left - warped right|. Pixels whose warp source leaves the
/// image get the largest error seen on valid pixels.
WarpedError warped_error(const Grid& left, const Grid& right,
                         const DisparityMap& d);

}  // namespace stereoprop
