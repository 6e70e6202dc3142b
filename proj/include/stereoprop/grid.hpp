#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stereoprop {

/// Dense row-major H x W x C array of doubles. Element (y, x, c) lives at
/// index (y * W + x) * C + c.
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t height, std::size_t width, std::size_t channels = 1,
       double fill = 0.0);
  Grid(std::size_t height, std::size_t width, std::size_t channels,
       std::vector<double> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t pixel_count() const noexcept { return height_ * width_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t y, std::size_t x, std::size_t c = 0) {
    return data_[(y * width_ + x) * channels_ + c];
  }
  double operator()(std::size_t y, std::size_t x, std::size_t c = 0) const {
    return data_[(y * width_ + x) * channels_ + c];
  }

  /// Value at integer coordinates after clamping them into the grid.
  double clamped(long y, long x, std::size_t c = 0) const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const Grid& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }
  bool same_plane(const Grid& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }
  bool all_finite() const noexcept;

  /// Copies one channel out as a 1-channel grid.
  Grid channel(std::size_t c) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

/// Bilinear interpolation of one channel. Coordinates are clamped to
/// [0, H-1] x [0, W-1] before interpolation, so every real input is valid.
double bilinear_sample(const Grid& grid, double y, double x,
                       std::size_t channel = 0);

/// Corner indices and weights of a clamped bilinear lookup. The derivative
/// fields are zero along an axis whose coordinate was clamped.
struct BilinearStencil {
  std::size_t y0, y1, x0, x1;
  double wy, wx;    // fractional parts, weight of y1 / x1
  bool clamped_y;
  bool clamped_x;

  double interpolate(const Grid& g, std::size_t c = 0) const {
    const double top = (1.0 - wx) * g(y0, x0, c) + wx * g(y0, x1, c);
    const double bottom = (1.0 - wx) * g(y1, x0, c) + wx * g(y1, x1, c);
    return (1.0 - wy) * top + wy * bottom;
  }
  double d_dy(const Grid& g, std::size_t c = 0) const;
  double d_dx(const Grid& g, std::size_t c = 0) const;
  /// Adds `value` into `g` distributed with the interpolation weights.
  void scatter(Grid& g, double value, std::size_t c = 0) const;
};

BilinearStencil make_stencil(std::size_t height, std::size_t width, double y,
                             double x);

/// 2x2 average pooling to ceil(H/2) x ceil(W/2). Blocks cut by an odd edge
/// average the pixels they contain. Disparity values are also halved.
Grid downsample(const Grid& map, bool is_disparity);

/// Bilinear resize with half-pixel centers. Disparity values are scaled by
/// target_w / source_w.
Grid upsample(const Grid& map, std::size_t target_h, std::size_t target_w,
              bool is_disparity);

/// Levels 0..levels-1, level s being ceil(H/2^s) x ceil(W/2^s).
class Pyramid {
 public:
  Pyramid(const Grid& full, bool is_disparity, std::size_t levels = 4);

  std::size_t size() const noexcept { return levels_.size(); }
  const Grid& operator[](std::size_t s) const { return levels_.at(s); }

 private:
  std::vector<Grid> levels_;
};

}  // namespace stereoprop
