#pragma once

#include <cstdint>
#include <vector>

#include "stereoprop/grid.hpp"
#include "stereoprop/maps.hpp"

namespace stereoprop {

/// Half-open pixel rectangle [y0, y1) x [x0, x1) in left-image coordinates.
struct Rect {
  long y0 = 0;
  long x0 = 0;
  long y1 = 0;
  long x1 = 0;

  bool contains(double y, double x) const {
    return y >= y0 && y < y1 && x >= x0 && x < x1;
  }
};

/// d(x, y) = a*x + b*y + c over `region`. The first plane of a scene is the
/// background: its equation extends over the whole image and its region is
/// only validated for bounds.
struct PlaneSpec {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  Rect region;
  std::uint64_t texture_seed = 0;

  double disparity(double x, double y) const { return a * x + b * y + c; }
};

struct SceneBundle {
  Grid left;
  Grid right;
  DisparityMap disparity_gt;        // left view
  DisparityMap disparity_right_gt;  // right view, same convention
  NormalMap normal_gt;
  Mask occlusion;                   // left pixels not visible in the right view
  std::vector<int> plane_label;     // index of the visible plane, row-major
};

/// Renders a stereo pair of textured planes. Later planes occlude earlier
/// ones. Textures are band-limited Fourier mixtures attached to the left-view
/// coordinates of each plane, so right(x - d, y) reproduces left(x, y) up to
/// interpolation error. Gaussian noise of `noise_sigma` is added to both
/// images. Deterministic in (specs, seed).
SceneBundle gen_planar_scene(const std::vector<PlaneSpec>& specs,
                             std::size_t height, std::size_t width,
                             double noise_sigma, std::uint64_t seed);

/// Left-right consistency: occluded iff
/// |d_left(y, x) - d_right(y, x - d_left(y, x))| > tol, with d_right sampled
/// bilinearly (clamped).
Mask occlusion_from_disparity(const DisparityMap& d_left,
                              const DisparityMap& d_right, double tol = 1.0);

}  // namespace stereoprop
