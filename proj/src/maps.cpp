#include "stereoprop/maps.hpp"

#include <cmath>
#include <string>

#include "stereoprop/error.hpp"

namespace stereoprop {
namespace {

void require_channels(const Grid& g, std::size_t c, const char* what) {
  if (g.channels() != c) {
    throw Error(ErrorCode::BadChannelCount,
                std::string(what) + " expects " + std::to_string(c) +
                    " channel(s), got " + std::to_string(g.channels()));
  }
  if (!g.all_finite()) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " contains non-finite values");
  }
}

}  // namespace

DisparityMap::DisparityMap(Grid grid) : grid_(std::move(grid)) {
  require_channels(grid_, 1, "DisparityMap");
  for (double v : grid_.data()) {
    if (v < 0.0) {
      throw Error(ErrorCode::NegativeDisparity,
                  "DisparityMap value " + std::to_string(v) + " < 0");
    }
  }
}

DisparityMap DisparityMap::constant(std::size_t h, std::size_t w, double value) {
  return DisparityMap(Grid(h, w, 1, value));
}

Mask::Mask(Grid grid) : grid_(std::move(grid)) {
  require_channels(grid_, 1, "Mask");
  for (double v : grid_.data()) {
    if (v != 0.0 && v != 1.0) {
      throw Error(ErrorCode::InvalidArgument, "Mask values must be 0 or 1");
    }
  }
}

Mask Mask::filled(std::size_t h, std::size_t w, bool value) {
  return Mask(Grid(h, w, 1, value ? 1.0 : 0.0));
}

std::size_t Mask::count() const noexcept {
  std::size_t n = 0;
  for (double v : grid_.data()) n += v != 0.0 ? 1 : 0;
  return n;
}

Mask Mask::complement() const {
  Grid g = grid_;
  for (double& v : g.data()) v = 1.0 - v;
  return Mask(std::move(g));
}

Mask Mask::operator&(const Mask& other) const {
  if (!grid_.same_shape(other.grid_)) {
    throw Error(ErrorCode::ShapeMismatch, "mask intersection shape mismatch");
  }
  Grid g = grid_;
  auto o = other.grid_.data();
  auto d = g.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] *= o[i];
  return Mask(std::move(g));
}

ConfidenceMap::ConfidenceMap(Grid grid) : grid_(std::move(grid)) {
  require_channels(grid_, 1, "ConfidenceMap");
  for (double v : grid_.data()) {
    if (v < 0.0 || v > 1.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "confidence " + std::to_string(v) + " outside [0, 1]");
    }
  }
}

ConfidenceMap ConfidenceMap::constant(std::size_t h, std::size_t w,
                                      double value) {
  return ConfidenceMap(Grid(h, w, 1, value));
}

NormalMap::NormalMap(Grid grid) : grid_(std::move(grid)) {
  require_channels(grid_, 3, "NormalMap");
  for (std::size_t y = 0; y < grid_.height(); ++y) {
    for (std::size_t x = 0; x < grid_.width(); ++x) {
      const double n = std::sqrt(grid_(y, x, 0) * grid_(y, x, 0) +
                                 grid_(y, x, 1) * grid_(y, x, 1) +
                                 grid_(y, x, 2) * grid_(y, x, 2));
      if (std::abs(n - 1.0) > kUnitTolerance) {
        throw Error(ErrorCode::InvalidArgument,
                    "normal at (" + std::to_string(y) + ", " +
                        std::to_string(x) + ") has norm " + std::to_string(n));
      }
    }
  }
}

NormalMap NormalMap::constant(std::size_t h, std::size_t w, Vec3 n) {
  n = normalized(n);
  Grid g(h, w, 3);
  for (std::size_t i = 0; i < g.pixel_count(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) g.data()[3 * i + c] = n[c];
  }
  return NormalMap(std::move(g));
}

Vec3 normalized(const Vec3& v, double min_norm) {
  const double n = std::sqrt(dot(v, v));
  if (!(n > min_norm)) {
    throw Error(ErrorCode::DegenerateSum, "vector norm below " +
                                              std::to_string(min_norm));
  }
  return {v[0] / n, v[1] / n, v[2] / n};
}

}  // namespace stereoprop
