#pragma once

#include <array>
#include <cstddef>

#include "stereoprop/grid.hpp"

namespace stereoprop {

/// Single-channel horizontal shift in pixels. Values are finite and >= 0.
class DisparityMap {
 public:
  DisparityMap() = default;
  explicit DisparityMap(Grid grid);
  static DisparityMap constant(std::size_t h, std::size_t w, double value);

  std::size_t height() const noexcept { return grid_.height(); }
  std::size_t width() const noexcept { return grid_.width(); }
  double operator()(std::size_t y, std::size_t x) const { return grid_(y, x); }
  const Grid& grid() const noexcept { return grid_; }

 private:
  Grid grid_;
};

/// Binary single-channel map; every value is exactly 0 or 1.
class Mask {
 public:
  Mask() = default;
  explicit Mask(Grid grid);
  static Mask filled(std::size_t h, std::size_t w, bool value);

  std::size_t height() const noexcept { return grid_.height(); }
  std::size_t width() const noexcept { return grid_.width(); }
  bool operator()(std::size_t y, std::size_t x) const {
    return grid_(y, x) != 0.0;
  }
  void set(std::size_t y, std::size_t x, bool v) { grid_(y, x) = v ? 1.0 : 0.0; }
  std::size_t count() const noexcept;
  const Grid& grid() const noexcept { return grid_; }

  Mask complement() const;
  Mask operator&(const Mask& other) const;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  Grid grid_;
};

/// Per-pixel reliability in [0, 1].
class ConfidenceMap {
 public:
  ConfidenceMap() = default;
  explicit ConfidenceMap(Grid grid);
  static ConfidenceMap constant(std::size_t h, std::size_t w, double value);

  std::size_t height() const noexcept { return grid_.height(); }
  std::size_t width() const noexcept { return grid_.width(); }
  double operator()(std::size_t y, std::size_t x) const { return grid_(y, x); }
  const Grid& grid() const noexcept { return grid_; }

 private:
  Grid grid_;
};

using Vec3 = std::array<double, 3>;

/// Three-channel field of unit vectors (n_x, n_y, n_z). Construction checks
/// ||n|| = 1 within kUnitTolerance at every pixel.
class NormalMap {
 public:
  static constexpr double kUnitTolerance = 1e-9;

  NormalMap() = default;
  explicit NormalMap(Grid grid);
  static NormalMap constant(std::size_t h, std::size_t w, Vec3 n);

  std::size_t height() const noexcept { return grid_.height(); }
  std::size_t width() const noexcept { return grid_.width(); }
  Vec3 operator()(std::size_t y, std::size_t x) const {
    return {grid_(y, x, 0), grid_(y, x, 1), grid_(y, x, 2)};
  }
  const Grid& grid() const noexcept { return grid_; }

 private:
  Grid grid_;
};

/// Divides v by its Euclidean norm. Throws DegenerateSum below min_norm.
Vec3 normalized(const Vec3& v, double min_norm = 1e-12);

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

}  // namespace stereoprop
