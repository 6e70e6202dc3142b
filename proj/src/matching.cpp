#include "stereoprop/matching.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stereoprop/error.hpp"
#include "stereoprop/parallel.hpp"

namespace stereoprop {

CostVolume::CostVolume(std::size_t max_disparity, std::size_t height,
                       std::size_t width)
    : max_disparity_(max_disparity),
      height_(height),
      width_(width),
      scores_(max_disparity * height * width, kInvalid) {}

CostVolume build_correlation_volume(const Grid& left, const Grid& right,
                                    std::size_t max_disparity) {
  if (!left.same_shape(right) || left.channels() == 0) {
    throw Error(ErrorCode::ShapeMismatch,
                "correlation needs equally shaped features with C >= 1");
  }
  if (max_disparity == 0) {
    throw Error(ErrorCode::InvalidArgument, "max_disparity must be >= 1");
  }
  const std::size_t ch = left.channels();
  CostVolume vol(max_disparity, left.height(), left.width());
  parallel_rows(left.height(), [&](std::size_t y) {
    for (std::size_t d = 0; d < max_disparity; ++d) {
      for (std::size_t x = d; x < left.width(); ++x) {
        double dot = 0.0;
        for (std::size_t c = 0; c < ch; ++c) {
          dot += left(y, x - d, c) * right(y, x, c);
        }
        vol(d, y, x) = dot / static_cast<double>(ch);
      }
    }
  });
  return vol;
}

DisparityMap soft_argmin_disparity(const CostVolume& volume,
                                   double temperature) {
  if (!(temperature > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "temperature must be > 0");
  }
  const std::size_t h = volume.height(), w = volume.width();
  const std::size_t depth = volume.max_disparity();
  Grid out(h, w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double peak = CostVolume::kInvalid;
      for (std::size_t d = 0; d < depth; ++d) {
        peak = std::max(peak, volume(d, y, x));
      }
      if (!CostVolume::is_valid(peak)) {
        throw Error(ErrorCode::AllInvalidColumn,
                    "no valid disparity at (" + std::to_string(y) + ", " +
                        std::to_string(x) + ")");
      }
      double z = 0.0, expect = 0.0;
      for (std::size_t d = 0; d < depth; ++d) {
        const double s = volume(d, y, x);
        if (!CostVolume::is_valid(s)) continue;
        const double p = std::exp((s - peak) / temperature);
        z += p;
        expect += p * static_cast<double>(d);
      }
      out(y, x) = expect / z;
    }
  }
  return DisparityMap(std::move(out));
}

WarpResult warp_right_to_left(const Grid& right, const DisparityMap& d) {
  if (!right.same_plane(d.grid())) {
    throw Error(ErrorCode::ShapeMismatch, "warp: image and disparity differ");
  }
  const std::size_t h = right.height(), w = right.width(), ch = right.channels();
  WarpResult r{Grid(h, w, ch), Mask::filled(h, w, false)};
  Grid valid(h, w);
  const double xmax = static_cast<double>(w) - 1.0;
  parallel_rows(h, [&](std::size_t y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double sx = static_cast<double>(x) - d(y, x);
      const auto s = make_stencil(h, w, static_cast<double>(y), sx);
      for (std::size_t c = 0; c < ch; ++c) r.image(y, x, c) = s.interpolate(right, c);
      valid(y, x) = (sx >= 0.0 && sx <= xmax) ? 1.0 : 0.0;
    }
  });
  r.valid = Mask(std::move(valid));
  return r;
}

WarpedError warped_error(const Grid& left, const Grid& right,
                         const DisparityMap& d) {
  if (!left.same_shape(right)) {
    throw Error(ErrorCode::ShapeMismatch, "warped_error: image shapes differ");
  }
  WarpResult warp = warp_right_to_left(right, d);
  const std::size_t h = left.height(), w = left.width(), ch = left.channels();
  Grid err(h, w);
  double worst = 0.0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!warp.valid(y, x)) continue;
      double e = 0.0;
      for (std::size_t c = 0; c < ch; ++c) {
        e += std::abs(left(y, x, c) - warp.image(y, x, c));
      }
      err(y, x) = e / static_cast<double>(ch);
      worst = std::max(worst, err(y, x));
    }
  }
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!warp.valid(y, x)) err(y, x) = worst;
    }
  }
  return {std::move(err), std::move(warp.valid)};
}

}  // namespace stereoprop
