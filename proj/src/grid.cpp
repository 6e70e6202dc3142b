#include "stereoprop/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stereoprop/error.hpp"
#include "stereoprop/parallel.hpp"

namespace stereoprop {

Grid::Grid(std::size_t height, std::size_t width, std::size_t channels,
           double fill)
    : height_(height),
      width_(width),
      channels_(channels),
      data_(height * width * channels, fill) {}

Grid::Grid(std::size_t height, std::size_t width, std::size_t channels,
           std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (data_.size() != height * width * channels) {
    throw Error(ErrorCode::ShapeMismatch,
                "grid data length " + std::to_string(data_.size()) +
                    " does not match " + std::to_string(height) + "x" +
                    std::to_string(width) + "x" + std::to_string(channels));
  }
}

double Grid::clamped(long y, long x, std::size_t c) const {
  const long yy = std::clamp(y, 0L, static_cast<long>(height_) - 1);
  const long xx = std::clamp(x, 0L, static_cast<long>(width_) - 1);
  return (*this)(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx), c);
}

bool Grid::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Grid Grid::channel(std::size_t c) const {
  if (c >= channels_) {
    throw Error(ErrorCode::InvalidArgument, "channel index out of range");
  }
  Grid out(height_, width_, 1);
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    out.data_[i] = data_[i * channels_ + c];
  }
  return out;
}

BilinearStencil make_stencil(std::size_t height, std::size_t width, double y,
                             double x) {
  const double ymax = static_cast<double>(height - 1);
  const double xmax = static_cast<double>(width - 1);
  BilinearStencil s{};
  s.clamped_y = !(y > 0.0 && y < ymax);
  s.clamped_x = !(x > 0.0 && x < xmax);
  const double cy = std::clamp(y, 0.0, ymax);
  const double cx = std::clamp(x, 0.0, xmax);
  s.y0 = static_cast<std::size_t>(std::floor(cy));
  s.x0 = static_cast<std::size_t>(std::floor(cx));
  s.y1 = std::min(s.y0 + 1, height - 1);
  s.x1 = std::min(s.x0 + 1, width - 1);
  s.wy = cy - static_cast<double>(s.y0);
  s.wx = cx - static_cast<double>(s.x0);
  // Interior coordinates that land exactly on 0 still move with y.
  if (y == 0.0 && height > 1) s.clamped_y = false;
  if (x == 0.0 && width > 1) s.clamped_x = false;
  return s;
}

double BilinearStencil::d_dy(const Grid& g, std::size_t c) const {
  if (clamped_y || y0 == y1) return 0.0;
  const double top = (1.0 - wx) * g(y0, x0, c) + wx * g(y0, x1, c);
  const double bottom = (1.0 - wx) * g(y1, x0, c) + wx * g(y1, x1, c);
  return bottom - top;
}

double BilinearStencil::d_dx(const Grid& g, std::size_t c) const {
  if (clamped_x || x0 == x1) return 0.0;
  const double left = (1.0 - wy) * g(y0, x0, c) + wy * g(y1, x0, c);
  const double right = (1.0 - wy) * g(y0, x1, c) + wy * g(y1, x1, c);
  return right - left;
}

void BilinearStencil::scatter(Grid& g, double value, std::size_t c) const {
  g(y0, x0, c) += value * (1.0 - wy) * (1.0 - wx);
  g(y0, x1, c) += value * (1.0 - wy) * wx;
  g(y1, x0, c) += value * wy * (1.0 - wx);
  g(y1, x1, c) += value * wy * wx;
}

double bilinear_sample(const Grid& grid, double y, double x,
                       std::size_t channel) {
  if (grid.empty()) {
    throw Error(ErrorCode::InvalidArgument, "bilinear_sample on empty grid");
  }
  return make_stencil(grid.height(), grid.width(), y, x)
      .interpolate(grid, channel);
}

Grid downsample(const Grid& map, bool is_disparity) {
  const std::size_t h = (map.height() + 1) / 2;
  const std::size_t w = (map.width() + 1) / 2;
  const std::size_t ch = map.channels();
  Grid out(h, w, ch);
  const double scale = is_disparity ? 0.5 : 1.0;
  parallel_rows(h, [&](std::size_t y) {
    const std::size_t ya = 2 * y;
    const std::size_t yb = std::min(ya + 1, map.height() - 1);
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t xa = 2 * x;
      const std::size_t xb = std::min(xa + 1, map.width() - 1);
      const double n = static_cast<double>((yb - ya + 1) * (xb - xa + 1));
      for (std::size_t c = 0; c < ch; ++c) {
        double sum = map(ya, xa, c);
        if (xb != xa) sum += map(ya, xb, c);
        if (yb != ya) {
          sum += map(yb, xa, c);
          if (xb != xa) sum += map(yb, xb, c);
        }
        out(y, x, c) = scale * sum / n;
      }
    }
  });
  return out;
}

Grid upsample(const Grid& map, std::size_t target_h, std::size_t target_w,
              bool is_disparity) {
  if (target_h < map.height() || target_w < map.width()) {
    throw Error(ErrorCode::InvalidArgument,
                "upsample target smaller than source");
  }
  const std::size_t ch = map.channels();
  Grid out(target_h, target_w, ch);
  const double ry = static_cast<double>(map.height()) / target_h;
  const double rx = static_cast<double>(map.width()) / target_w;
  const double scale =
      is_disparity ? static_cast<double>(target_w) / map.width() : 1.0;
  parallel_rows(target_h, [&](std::size_t y) {
    const double sy = (y + 0.5) * ry - 0.5;
    for (std::size_t x = 0; x < target_w; ++x) {
      const double sx = (x + 0.5) * rx - 0.5;
      const auto s = make_stencil(map.height(), map.width(), sy, sx);
      for (std::size_t c = 0; c < ch; ++c) {
        out(y, x, c) = scale * s.interpolate(map, c);
      }
    }
  });
  return out;
}

Pyramid::Pyramid(const Grid& full, bool is_disparity, std::size_t levels) {
  if (levels == 0) {
    throw Error(ErrorCode::InvalidArgument, "pyramid needs at least one level");
  }
  levels_.push_back(full);
  for (std::size_t s = 1; s < levels; ++s) {
    levels_.push_back(downsample(levels_.back(), is_disparity));
  }
}

}  // namespace stereoprop
