#pragma once

#include "stereoprop/grid.hpp"
#include "stereoprop/maps.hpp"

namespace stereoprop {

struct Gradients {
  Grid gx;
  Grid gy;
};

/// 3x3 Sobel derivatives scaled by 1/8, exact on linear ramps. Borders
/// replicate the edge pixel. Needs H, W >= 3.
Gradients sobel_gradients(const Grid& d);

/// n = normalize(-gx, -gy, 1), so fronto-parallel surfaces give (0, 0, 1).
NormalMap normal_from_disparity(const DisparityMap& d);

/// Analytic normal of the plane d = a*x + b*y + c under the same convention.
Vec3 plane_normal(double a, double b);

struct SparseNormals {
  NormalMap normals;
  Mask mask;
};

/// Normals only where the center and all 8 neighbors are valid (so never on
/// the image border). Elsewhere the normal is (0, 0, 1) and the mask is 0.
SparseNormals sparse_normal_from_disparity(const DisparityMap& d,
                                           const Mask& valid);

/// pseudo * (1 - mask) + sparse * mask.
NormalMap fuse_normal_gt(const NormalMap& pseudo, const NormalMap& sparse,
                         const Mask& sparse_mask);

/// Valid pixels where |pseudo - sparse| exceeds `threshold` pixels.
Mask epe_index(const DisparityMap& pseudo, const DisparityMap& sparse,
               const Mask& valid, double threshold = 1.0);

/// Region weights of the pseudo/sparse normal supervision.
struct NormalLossWeights {
  double sparse = 1.5;
  double pseudo_unreliable = 1.0;  // off the sparse mask, pseudo EPE > 1
  double pseudo_reliable = 0.5;    // off the sparse mask, pseudo EPE <= 1
};

/// Mean over pixels and channels of the region-weighted SmoothL1 error.
double weighted_normal_loss(const NormalMap& gt, const NormalMap& pred,
                            const Mask& sparse_mask, const Mask& e_index,
                            const NormalLossWeights& weights = {});

/// normalize(coarse + delta) per pixel. Throws DegenerateSum where the sum
/// has norm <= 1e-12.
NormalMap residual_normal_update(const NormalMap& coarse, const Grid& delta);

}  // namespace stereoprop
