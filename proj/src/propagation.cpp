#include "stereoprop/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "stereoprop/error.hpp"
#include "stereoprop/parallel.hpp"

namespace stereoprop {
namespace {

using Weights = std::array<double, kNeighbors>;

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_grid(const Grid& g, std::size_t channels, const char* what) {
  if (g.channels() != channels) {
    throw Error(ErrorCode::BadChannelCount,
                std::string(what) + " expects " + std::to_string(channels) +
                    " channels, got " + std::to_string(g.channels()));
  }
  if (!g.all_finite()) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " contains non-finite values");
  }
}

void require_plane(const Grid& ref, const Grid& g, const char* what) {
  if (!ref.same_plane(g)) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(what) + " does not match the disparity size");
  }
}

// Normalized weights are snapped to multiples of 2^-48. With |w_i| <= 1 the
// sum of eight of them and 1 - sum are then exact in double, so the self
// weight and the neighbor weights partition 1 with no rounding. The snap
// moves each weight by at most 2^-49.
constexpr int kWeightBits = 48;

double snap(double v) {
  return std::ldexp(std::nearbyint(std::ldexp(v, kWeightBits)), -kWeightBits);
}

// Turns weighted affinities w_i = a_i c_i into propagation weights. Returns
// the normalizer (sum |w|, or 0 for the unnormalized variant).
double normalize_in_place(Weights& w, bool unnormalized) {
  if (unnormalized) return 0.0;
  double sum = 0.0;
  for (double v : w) sum += std::abs(v);
  const double denom = std::max(sum, kAffinityEpsilon);
  for (double& v : w) v = snap(v / denom);
  return sum;
}

// Combination of sampled neighbor values with the residual self weight.
double combine(const Weights& w, const Weights& values, double self_value) {
  double weight_sum = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < kNeighbors; ++i) {
    weight_sum += w[i];
    acc += w[i] * values[i];
  }
  return acc + (1.0 - weight_sum) * self_value;
}

void check_inputs(const Grid& d, const AffinityField& a,
                  const ConfidenceMap& c) {
  require_grid(d, 1, "disparity");
  require_plane(d, a.grid(), "affinity field");
  require_plane(d, c.grid(), "confidence map");
}

}  // namespace

AffinityField::AffinityField(Grid grid) : grid_(std::move(grid)) {
  require_grid(grid_, kNeighbors, "AffinityField");
}

AffinityField AffinityField::constant(std::size_t h, std::size_t w,
                                      double value) {
  return AffinityField(Grid(h, w, kNeighbors, value));
}

OffsetField::OffsetField(Grid grid) : grid_(std::move(grid)) {
  require_grid(grid_, 2 * kNeighbors, "OffsetField");
}

OffsetField OffsetField::zeros(std::size_t h, std::size_t w) {
  return OffsetField(Grid(h, w, 2 * kNeighbors));
}

NormalizedAffinity normalize_affinities(const AffinityField& a,
                                        const ConfidenceMap& c) {
  return normalize_affinities(a, c, OffsetField::zeros(c.height(), c.width()));
}

NormalizedAffinity normalize_affinities(const AffinityField& a,
                                        const ConfidenceMap& c,
                                        const OffsetField& offsets) {
  require_plane(c.grid(), a.grid(), "affinity field");
  require_plane(c.grid(), offsets.grid(), "offset field");
  const std::size_t h = c.height(), w = c.width();
  Grid out(h, w, kNeighbors);
  parallel_rows(h, [&](std::size_t y) {
    for (std::size_t x = 0; x < w; ++x) {
      Weights wts{};
      for (std::size_t i = 0; i < kNeighbors; ++i) {
        const auto pos = neighbor_position(offsets, y, x, i);
        wts[i] = a(y, x, i) * bilinear_sample(c.grid(), pos[0], pos[1]);
      }
      normalize_in_place(wts, false);
      for (std::size_t i = 0; i < kNeighbors; ++i) out(y, x, i) = wts[i];
    }
  });
  return NormalizedAffinity(std::move(out));
}

Grid propagate_local(const Grid& d, const AffinityField& a,
                     const ConfidenceMap& c, const PropagationOptions& options) {
  check_inputs(d, a, c);
  const std::size_t h = d.height(), w = d.width();
  Grid out(h, w);
  parallel_rows(h, [&](std::size_t y) {
    for (std::size_t x = 0; x < w; ++x) {
      Weights wts{}, values{};
      for (std::size_t i = 0; i < kNeighbors; ++i) {
        const long ny = static_cast<long>(y) + kNeighborSteps[i][0];
        const long nx = static_cast<long>(x) + kNeighborSteps[i][1];
        values[i] = d.clamped(ny, nx);
        wts[i] = a(y, x, i) * c.grid().clamped(ny, nx);
      }
      normalize_in_place(wts, options.unnormalized);
      out(y, x) = combine(wts, values, d(y, x));
    }
  });
  return out;
}

Grid propagate_nonlocal(const Grid& d, const OffsetField& offsets,
                        const AffinityField& a, const ConfidenceMap& c,
                        const PropagationOptions& options) {
  check_inputs(d, a, c);
  require_plane(d, offsets.grid(), "offset field");
  const std::size_t h = d.height(), w = d.width();
  Grid out(h, w);
  parallel_rows(h, [&](std::size_t y) {
    for (std::size_t x = 0; x < w; ++x) {
      Weights wts{}, values{};
      for (std::size_t i = 0; i < kNeighbors; ++i) {
        const auto pos = neighbor_position(offsets, y, x, i);
        const auto s = make_stencil(h, w, pos[0], pos[1]);
        values[i] = s.interpolate(d);
        wts[i] = a(y, x, i) * s.interpolate(c.grid());
      }
      normalize_in_place(wts, options.unnormalized);
      out(y, x) = combine(wts, values, d(y, x));
    }
  });
  return out;
}

Grid iterate_propagation(const Grid& d, const OffsetField& offsets,
                         const AffinityField& a, const ConfidenceMap& c,
                         std::size_t steps, const PropagationOptions& options) {
  if (steps == 0) {
    throw Error(ErrorCode::InvalidArgument, "propagation needs steps >= 1");
  }
  Grid cur = propagate_nonlocal(d, offsets, a, c, options);
  for (std::size_t s = 1; s < steps; ++s) {
    cur = propagate_nonlocal(cur, offsets, a, c, options);
  }
  return cur;
}

PropagationGradients propagate_nonlocal_backward(
    const Grid& grad_out, const Grid& d, const OffsetField& offsets,
    const AffinityField& a, const ConfidenceMap& c,
    const PropagationOptions& options) {
  check_inputs(d, a, c);
  require_plane(d, offsets.grid(), "offset field");
  require_grid(grad_out, 1, "grad_out");
  require_plane(d, grad_out, "grad_out");
  const std::size_t h = d.height(), w = d.width();
  PropagationGradients grads{Grid(h, w), Grid(h, w, kNeighbors), Grid(h, w),
                             Grid(h, w, 2 * kNeighbors)};

  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double g = grad_out(y, x);
      std::array<BilinearStencil, kNeighbors> stencils{};
      Weights raw{}, conf{}, values{}, wts{};
      for (std::size_t i = 0; i < kNeighbors; ++i) {
        const auto pos = neighbor_position(offsets, y, x, i);
        stencils[i] = make_stencil(h, w, pos[0], pos[1]);
        values[i] = stencils[i].interpolate(d);
        conf[i] = stencils[i].interpolate(c.grid());
        raw[i] = a(y, x, i) * conf[i];
      }
      wts = raw;
      const double abs_sum = normalize_in_place(wts, options.unnormalized);
      const double self = d(y, x);

      double weight_sum = 0.0;
      for (double v : wts) weight_sum += v;
      grads.d(y, x) += g * (1.0 - weight_sum);

      // dL/d(normalized weight i).
      Weights g_norm{};
      for (std::size_t i = 0; i < kNeighbors; ++i) {
        g_norm[i] = g * (values[i] - self);
      }

      // dL/d(a_i c_i) through the absolute-sum normalization.
      Weights g_raw{};
      if (options.unnormalized) {
        g_raw = g_norm;
      } else if (abs_sum > kAffinityEpsilon) {
        double dot = 0.0;
        for (std::size_t i = 0; i < kNeighbors; ++i) dot += g_norm[i] * raw[i];
        for (std::size_t j = 0; j < kNeighbors; ++j) {
          g_raw[j] = g_norm[j] / abs_sum - sign(raw[j]) * dot / (abs_sum * abs_sum);
        }
      } else if (abs_sum > 0.0) {
        for (std::size_t j = 0; j < kNeighbors; ++j) {
          g_raw[j] = g_norm[j] / kAffinityEpsilon;
        }
      }

      for (std::size_t i = 0; i < kNeighbors; ++i) {
        const BilinearStencil& s = stencils[i];
        const double g_value = g * wts[i];
        const double g_conf = g_raw[i] * a(y, x, i);
        grads.a(y, x, i) = g_raw[i] * conf[i];
        s.scatter(grads.d, g_value);
        s.scatter(grads.c, g_conf);
        grads.offsets(y, x, 2 * i) =
            g_value * s.d_dy(d) + g_conf * s.d_dy(c.grid());
        grads.offsets(y, x, 2 * i + 1) =
            g_value * s.d_dx(d) + g_conf * s.d_dx(c.grid());
      }
    }
  }
  return grads;
}

HeuristicGuidance heuristic_offsets_from_normal(const NormalMap& normals,
                                                const Grid& warped_error,
                                                const HeuristicOptions& options) {
  if (options.radius < 1) {
    throw Error(ErrorCode::InvalidArgument, "heuristic offsets need radius >= 1");
  }
  require_grid(warped_error, 1, "warped error");
  require_plane(normals.grid(), warped_error, "warped error");
  const long h = static_cast<long>(normals.height());
  const long w = static_cast<long>(normals.width());
  const long half = static_cast<long>(
      options.median_half_window ? options.median_half_window : options.radius);

  Grid median(normals.height(), normals.width());
  parallel_rows(normals.height(), [&](std::size_t y) {
    std::vector<double> window;
    for (long x = 0; x < w; ++x) {
      window.clear();
      for (long yy = std::max(0L, long(y) - half);
           yy <= std::min(h - 1, long(y) + half); ++yy) {
        for (long xx = std::max(0L, x - half); xx <= std::min(w - 1, x + half);
             ++xx) {
          window.push_back(warped_error(yy, xx));
        }
      }
      auto mid = window.begin() + static_cast<long>(window.size() / 2);
      std::nth_element(window.begin(), mid, window.end());
      median(y, x) = *mid;
    }
  });

  Grid offsets(normals.height(), normals.width(), 2 * kNeighbors);
  Grid affinity(normals.height(), normals.width(), kNeighbors);
  const long radius = static_cast<long>(options.radius);
  parallel_rows(normals.height(), [&](std::size_t uy) {
    const long y = static_cast<long>(uy);
    for (long x = 0; x < w; ++x) {
      const Vec3 center = normals(uy, x);
      const double gate = median(uy, x);
      for (std::size_t i = 0; i < kNeighbors; ++i) {
        const long sy = kNeighborSteps[i][0], sx = kNeighborSteps[i][1];
        long best = 0;
        double best_agreement = 0.0;
        for (long k = 1; k <= radius; ++k) {
          const long py = y + k * sy, px = x + k * sx;
          if (py < 0 || px < 0 || py >= h || px >= w) break;
          const double agreement = dot(center, normals(py, px));
          if (agreement < options.cos_threshold) break;
          if (warped_error(py, px) <= gate) {
            best = k;
            best_agreement = agreement;
          }
        }
        if (best == 0) continue;
        offsets(uy, x, 2 * i) = static_cast<double>((best - 1) * sy);
        offsets(uy, x, 2 * i + 1) = static_cast<double>((best - 1) * sx);
        affinity(uy, x, i) = std::clamp(best_agreement, 0.0, 1.0);
      }
    }
  });
  return {OffsetField(std::move(offsets)), AffinityField(std::move(affinity))};
}

}  // namespace stereoprop
