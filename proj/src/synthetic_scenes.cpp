#include "stereoprop/synthetic_scenes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "stereoprop/error.hpp"
#include "stereoprop/normals.hpp"

namespace stereoprop {
namespace {

constexpr std::size_t kTextureTerms = 6;

// Sum of low-frequency sinusoids around mid-gray.
class Texture {
 public:
  explicit Texture(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> freq(0.06, 0.22);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& t : terms_) {
      const double angle = 2.0 * std::numbers::pi * unit(rng);
      const double f = freq(rng);
      t.wx = f * std::cos(angle);
      t.wy = f * std::sin(angle);
      t.phase = 2.0 * std::numbers::pi * unit(rng);
      t.amplitude = 0.03 + 0.04 * unit(rng);
    }
  }

  double operator()(double x, double y) const {
    double v = 0.5;
    for (const auto& t : terms_) {
      v += t.amplitude * std::sin(t.wx * x + t.wy * y + t.phase);
    }
    return v;
  }

 private:
  struct Term {
    double wx, wy, phase, amplitude;
  };
  std::array<Term, kTextureTerms> terms_{};
};

void validate(const std::vector<PlaneSpec>& specs, std::size_t h,
              std::size_t w) {
  if (specs.empty()) {
    throw Error(ErrorCode::InvalidArgument, "scene needs at least one plane");
  }
  if (h == 0 || w == 0) {
    throw Error(ErrorCode::InvalidArgument, "scene dimensions must be positive");
  }
  const long H = static_cast<long>(h), W = static_cast<long>(w);
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const PlaneSpec& p = specs[k];
    const Rect r = k == 0 ? Rect{0, 0, H, W} : p.region;
    if (k != 0 && !(r.y0 >= 0 && r.x0 >= 0 && r.y1 <= H && r.x1 <= W &&
                    r.y0 < r.y1 && r.x0 < r.x1)) {
      throw Error(ErrorCode::InvalidArgument,
                  "plane " + std::to_string(k) + " region outside the image");
    }
    if (!(p.a < 1.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "plane " + std::to_string(k) + " needs a < 1 to be visible");
    }
    // A linear function is minimal at a corner of the rectangle.
    const double corners[4] = {
        p.disparity(r.x0, r.y0), p.disparity(r.x1 - 1, r.y0),
        p.disparity(r.x0, r.y1 - 1), p.disparity(r.x1 - 1, r.y1 - 1)};
    if (*std::min_element(corners, corners + 4) < 0.0) {
      throw Error(ErrorCode::NegativeDisparity,
                  "plane " + std::to_string(k) + " has negative disparity");
    }
  }
}

// Plane hit by the right-view ray through (y, xr), and the left-view column
// of that surface point.
int visible_in_right(const std::vector<PlaneSpec>& specs, double y, double xr,
                     double& x_left) {
  for (std::size_t k = specs.size(); k-- > 1;) {
    const PlaneSpec& p = specs[k];
    const double x = (xr + p.b * y + p.c) / (1.0 - p.a);
    if (p.region.contains(y, x)) {
      x_left = x;
      return static_cast<int>(k);
    }
  }
  const PlaneSpec& bg = specs.front();
  x_left = (xr + bg.b * y + bg.c) / (1.0 - bg.a);
  return 0;
}

int visible_in_left(const std::vector<PlaneSpec>& specs, double y, double x) {
  for (std::size_t k = specs.size(); k-- > 1;) {
    if (specs[k].region.contains(y, x)) return static_cast<int>(k);
  }
  return 0;
}

}  // namespace

SceneBundle gen_planar_scene(const std::vector<PlaneSpec>& specs,
                             std::size_t height, std::size_t width,
                             double noise_sigma, std::uint64_t seed) {
  validate(specs, height, width);
  std::vector<Texture> textures;
  textures.reserve(specs.size());
  for (const auto& p : specs) textures.emplace_back(p.texture_seed);

  const std::size_t h = height, w = width;
  Grid left(h, w), right(h, w), disp(h, w), disp_right(h, w), normal(h, w, 3),
      occl(h, w);
  std::vector<int> labels(h * w);
  for (std::size_t y = 0; y < h; ++y) {
    const double fy = static_cast<double>(y);
    for (std::size_t x = 0; x < w; ++x) {
      const double fx = static_cast<double>(x);
      const int k = visible_in_left(specs, fy, fx);
      const PlaneSpec& p = specs[k];
      labels[y * w + x] = k;
      left(y, x) = textures[k](fx, fy);
      disp(y, x) = p.disparity(fx, fy);
      const Vec3 n = plane_normal(p.a, p.b);
      for (std::size_t c = 0; c < 3; ++c) normal(y, x, c) = n[c];
      double unused = 0.0;
      if (visible_in_right(specs, fy, fx - disp(y, x), unused) != k) {
        occl(y, x) = 1.0;
      }

      double x_left = 0.0;
      const int kr = visible_in_right(specs, fy, fx, x_left);
      right(y, x) = textures[kr](x_left, fy);
      disp_right(y, x) = std::max(0.0, x_left - fx);
    }
  }

  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (double& v : left.data()) v += noise(rng);
    for (double& v : right.data()) v += noise(rng);
  }

  return SceneBundle{std::move(left),
                     std::move(right),
                     DisparityMap(std::move(disp)),
                     DisparityMap(std::move(disp_right)),
                     NormalMap(std::move(normal)),
                     Mask(std::move(occl)),
                     std::move(labels)};
}

Mask occlusion_from_disparity(const DisparityMap& d_left,
                              const DisparityMap& d_right, double tol) {
  if (!d_left.grid().same_shape(d_right.grid())) {
    throw Error(ErrorCode::ShapeMismatch, "occlusion: disparity shapes differ");
  }
  Grid out(d_left.height(), d_left.width());
  for (std::size_t y = 0; y < out.height(); ++y) {
    for (std::size_t x = 0; x < out.width(); ++x) {
      const double dl = d_left(y, x);
      const double dr = bilinear_sample(d_right.grid(), static_cast<double>(y),
                                        static_cast<double>(x) - dl);
      if (std::abs(dl - dr) > tol) out(y, x) = 1.0;
    }
  }
  return Mask(std::move(out));
}

}  // namespace stereoprop
