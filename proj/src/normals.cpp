#include "stereoprop/normals.hpp"

#include <cmath>
#include <string>

#include "stereoprop/error.hpp"
#include "stereoprop/losses_metrics.hpp"
#include "stereoprop/parallel.hpp"

namespace stereoprop {
namespace {

void require_same_plane(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_plane(b)) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": shape mismatch");
  }
}

// Sobel response at an interior or replicated-border pixel.
void sobel_at(const Grid& d, long y, long x, double& gx, double& gy) {
  const double tl = d.clamped(y - 1, x - 1), tc = d.clamped(y - 1, x),
               tr = d.clamped(y - 1, x + 1);
  const double ml = d.clamped(y, x - 1), mr = d.clamped(y, x + 1);
  const double bl = d.clamped(y + 1, x - 1), bc = d.clamped(y + 1, x),
               br = d.clamped(y + 1, x + 1);
  gx = ((tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl)) / 8.0;
  gy = ((bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr)) / 8.0;
}

void store(Grid& g, std::size_t y, std::size_t x, const Vec3& n) {
  g(y, x, 0) = n[0];
  g(y, x, 1) = n[1];
  g(y, x, 2) = n[2];
}

}  // namespace

Gradients sobel_gradients(const Grid& d) {
  if (d.channels() != 1) {
    throw Error(ErrorCode::BadChannelCount, "sobel_gradients needs 1 channel");
  }
  if (d.height() < 3 || d.width() < 3) {
    throw Error(ErrorCode::TooSmall, "sobel_gradients needs at least 3x3");
  }
  Gradients g{Grid(d.height(), d.width()), Grid(d.height(), d.width())};
  parallel_rows(d.height(), [&](std::size_t y) {
    for (std::size_t x = 0; x < d.width(); ++x) {
      sobel_at(d, static_cast<long>(y), static_cast<long>(x), g.gx(y, x),
               g.gy(y, x));
    }
  });
  return g;
}

Vec3 plane_normal(double a, double b) { return normalized({-a, -b, 1.0}); }

NormalMap normal_from_disparity(const DisparityMap& d) {
  const Gradients g = sobel_gradients(d.grid());
  Grid out(d.height(), d.width(), 3);
  for (std::size_t y = 0; y < d.height(); ++y) {
    for (std::size_t x = 0; x < d.width(); ++x) {
      store(out, y, x, plane_normal(g.gx(y, x), g.gy(y, x)));
    }
  }
  return NormalMap(std::move(out));
}

SparseNormals sparse_normal_from_disparity(const DisparityMap& d,
                                           const Mask& valid) {
  require_same_plane(d.grid(), valid.grid(), "sparse_normal_from_disparity");
  const std::size_t h = d.height(), w = d.width();
  Grid out(h, w, 3);
  Grid mask(h, w, 1);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      bool full = y >= 1 && x >= 1 && y + 1 < h && x + 1 < w;
      for (long dy = -1; full && dy <= 1; ++dy) {
        for (long dx = -1; full && dx <= 1; ++dx) {
          full = valid(y + dy, x + dx);
        }
      }
      if (!full) {
        store(out, y, x, {0.0, 0.0, 1.0});
        continue;
      }
      double gx = 0.0, gy = 0.0;
      sobel_at(d.grid(), static_cast<long>(y), static_cast<long>(x), gx, gy);
      store(out, y, x, plane_normal(gx, gy));
      mask(y, x) = 1.0;
    }
  }
  return {NormalMap(std::move(out)), Mask(std::move(mask))};
}

NormalMap fuse_normal_gt(const NormalMap& pseudo, const NormalMap& sparse,
                         const Mask& sparse_mask) {
  require_same_plane(pseudo.grid(), sparse.grid(), "fuse_normal_gt");
  require_same_plane(pseudo.grid(), sparse_mask.grid(), "fuse_normal_gt");
  Grid out(pseudo.height(), pseudo.width(), 3);
  for (std::size_t y = 0; y < out.height(); ++y) {
    for (std::size_t x = 0; x < out.width(); ++x) {
      const double m = sparse_mask.grid()(y, x);
      const Vec3 p = pseudo(y, x), s = sparse(y, x);
      // A binary mask makes the mix an exact selection of a unit vector,
      // so no renormalization is needed and sparse normals pass through
      // bit-exact.
      store(out, y, x,
            {p[0] * (1.0 - m) + s[0] * m, p[1] * (1.0 - m) + s[1] * m,
             p[2] * (1.0 - m) + s[2] * m});
    }
  }
  return NormalMap(std::move(out));
}

Mask epe_index(const DisparityMap& pseudo, const DisparityMap& sparse,
               const Mask& valid, double threshold) {
  require_same_plane(pseudo.grid(), sparse.grid(), "epe_index");
  require_same_plane(pseudo.grid(), valid.grid(), "epe_index");
  Grid out(pseudo.height(), pseudo.width(), 1);
  for (std::size_t y = 0; y < out.height(); ++y) {
    for (std::size_t x = 0; x < out.width(); ++x) {
      if (valid(y, x) && std::abs(pseudo(y, x) - sparse(y, x)) > threshold) {
        out(y, x) = 1.0;
      }
    }
  }
  return Mask(std::move(out));
}

double weighted_normal_loss(const NormalMap& gt, const NormalMap& pred,
                            const Mask& sparse_mask, const Mask& e_index,
                            const NormalLossWeights& weights) {
  require_same_plane(gt.grid(), pred.grid(), "weighted_normal_loss");
  require_same_plane(gt.grid(), sparse_mask.grid(), "weighted_normal_loss");
  require_same_plane(gt.grid(), e_index.grid(), "weighted_normal_loss");
  double total = 0.0;
  for (std::size_t y = 0; y < gt.height(); ++y) {
    for (std::size_t x = 0; x < gt.width(); ++x) {
      const double w = sparse_mask(y, x) ? weights.sparse
                       : e_index(y, x)   ? weights.pseudo_unreliable
                                         : weights.pseudo_reliable;
      const Vec3 a = gt(y, x), b = pred(y, x);
      for (std::size_t c = 0; c < 3; ++c) total += w * smooth_l1(a[c] - b[c]);
    }
  }
  return total / static_cast<double>(gt.grid().size());
}

NormalMap residual_normal_update(const NormalMap& coarse, const Grid& delta) {
  if (delta.channels() != 3 || !coarse.grid().same_plane(delta)) {
    throw Error(ErrorCode::ShapeMismatch,
                "residual_normal_update: delta must match the normal map");
  }
  Grid out(coarse.height(), coarse.width(), 3);
  for (std::size_t y = 0; y < out.height(); ++y) {
    for (std::size_t x = 0; x < out.width(); ++x) {
      const Vec3 n = coarse(y, x);
      store(out, y, x,
            normalized({n[0] + delta(y, x, 0), n[1] + delta(y, x, 1),
                        n[2] + delta(y, x, 2)}));
    }
  }
  return NormalMap(std::move(out));
}

}  // namespace stereoprop
