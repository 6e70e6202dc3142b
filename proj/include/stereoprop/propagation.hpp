#pragma once

#include <array>
#include <cstddef>

#include "stereoprop/grid.hpp"
#include "stereoprop/maps.hpp"

namespace stereoprop {

inline constexpr std::size_t kNeighbors = 8;

/// Canonical 8-neighborhood as (dy, dx), in channel order.
inline constexpr std::array<std::array<int, 2>, kNeighbors> kNeighborSteps{{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};

/// Raw per-pixel affinities, H x W x 8. Any finite values.
class AffinityField {
 public:
  AffinityField() = default;
  explicit AffinityField(Grid grid);
  static AffinityField constant(std::size_t h, std::size_t w, double value);

  double operator()(std::size_t y, std::size_t x, std::size_t i) const {
    return grid_(y, x, i);
  }
  const Grid& grid() const noexcept { return grid_; }

 private:
  Grid grid_;
};

/// Fractional displacement of each neighbor from its canonical position,
/// H x W x 16 laid out as (dy_0, dx_0, dy_1, dx_1, ...).
class OffsetField {
 public:
  OffsetField() = default;
  explicit OffsetField(Grid grid);
  static OffsetField zeros(std::size_t h, std::size_t w);

  double dy(std::size_t y, std::size_t x, std::size_t i) const {
    return grid_(y, x, 2 * i);
  }
  double dx(std::size_t y, std::size_t x, std::size_t i) const {
    return grid_(y, x, 2 * i + 1);
  }
  const Grid& grid() const noexcept { return grid_; }

 private:
  Grid grid_;
};

/// Affinities after confidence weighting and absolute-sum normalization,
/// H x W x 8. Per pixel sum |a| is 1, or every entry is 0.
class NormalizedAffinity {
 public:
  explicit NormalizedAffinity(Grid grid) : grid_(std::move(grid)) {}
  double operator()(std::size_t y, std::size_t x, std::size_t i) const {
    return grid_(y, x, i);
  }
  const Grid& grid() const noexcept { return grid_; }

 private:
  Grid grid_;
};

inline constexpr double kAffinityEpsilon = 1e-12;

struct PropagationOptions {
  /// Use a_i * c_i directly, skipping the absolute-sum normalization.
  bool unnormalized = false;
};

/// Sampling position of neighbor i of (y, x): canonical step plus offset.
inline std::array<double, 2> neighbor_position(const OffsetField& offsets,
                                               std::size_t y, std::size_t x,
                                               std::size_t i) {
  return {static_cast<double>(y) + kNeighborSteps[i][0] + offsets.dy(y, x, i),
          static_cast<double>(x) + kNeighborSteps[i][1] + offsets.dx(y, x, i)};
}

/// a_i c_i / max(sum_j |a_j c_j|, eps) with c_i read at the canonical
/// (clamped) neighbor position.
NormalizedAffinity normalize_affinities(const AffinityField& a,
                                        const ConfidenceMap& c);

/// Same, with c_i sampled bilinearly at the offset neighbor position.
NormalizedAffinity normalize_affinities(const AffinityField& a,
                                        const ConfidenceMap& c,
                                        const OffsetField& offsets);

/// d'_p = sum_n w_n d_n + (1 - sum_n w_n) d_p over the fixed 3x3 window,
/// border neighbors clamped.
///
/// `d` is any single-channel field. With signed affinities the result can
/// leave the input range, so plain grids are used here instead of
/// DisparityMap.
Grid propagate_local(const Grid& d, const AffinityField& a,
                     const ConfidenceMap& c,
                     const PropagationOptions& options = {});

/// Non-local form: neighbor disparities and confidences are read bilinearly
/// at canonical position + offset, clamped to the image.
Grid propagate_nonlocal(const Grid& d, const OffsetField& offsets,
                        const AffinityField& a, const ConfidenceMap& c,
                        const PropagationOptions& options = {});

/// `steps` applications of propagate_nonlocal with fixed guidance.
Grid iterate_propagation(const Grid& d, const OffsetField& offsets,
                         const AffinityField& a, const ConfidenceMap& c,
                         std::size_t steps,
                         const PropagationOptions& options = {});

struct PropagationGradients {
  Grid d;        // H x W
  Grid a;        // H x W x 8
  Grid c;        // H x W
  Grid offsets;  // H x W x 16
};

/// Vector-Jacobian product of propagate_nonlocal. |x| has derivative
/// sign(x) with sign(0) = 0; a pixel whose weighted affinities are all zero
/// passes its input through and contributes no affinity gradient. Bilinear
/// reads differentiate piecewise; clamped coordinates have zero derivative.
PropagationGradients propagate_nonlocal_backward(
    const Grid& grad_out, const Grid& d, const OffsetField& offsets,
    const AffinityField& a, const ConfidenceMap& c,
    const PropagationOptions& options = {});

struct HeuristicGuidance {
  OffsetField offsets;
  AffinityField affinities;
};

struct HeuristicOptions {
  std::size_t radius = 4;
  /// Minimum normal dot product for two pixels to count as one surface.
  double cos_threshold = 0.995;
  /// Half-width of the window whose median error gates sample positions.
  /// 0 means `radius`.
  std::size_t median_half_window = 0;
};

/// Stand-in for the learned offset predictor. Along each canonical
/// direction, walk up to `radius` steps while normals agree with the
/// center; the neighbor moves to the farthest step whose warped error is at
/// most the local median. Affinity is the normal agreement there, or 0 when
/// no step qualifies (offset stays 0).
HeuristicGuidance heuristic_offsets_from_normal(const NormalMap& normals,
                                                const Grid& warped_error,
                                                const HeuristicOptions& options);

}  // namespace stereoprop
