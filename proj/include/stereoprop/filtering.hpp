#pragma once

#include <cstddef>

#include "stereoprop/grid.hpp"

namespace stereoprop {

/// Per-pixel k x k window weights, H x W x (k*k). Channel (a + r) * k + (b + r)
/// holds the weight of offset (a, b) with r = (k - 1) / 2, a along rows.
class LocalAffinity {
 public:
  LocalAffinity(Grid grid, std::size_t k);

  std::size_t k() const noexcept { return k_; }
  std::size_t radius() const noexcept { return k_ / 2; }
  double operator()(std::size_t y, std::size_t x, long a, long b) const {
    return grid_(y, x, index(a, b));
  }
  std::size_t index(long a, long b) const {
    const long r = static_cast<long>(radius());
    return static_cast<std::size_t>((a + r) * static_cast<long>(k_) + (b + r));
  }
  const Grid& grid() const noexcept { return grid_; }

 private:
  Grid grid_;
  std::size_t k_;
};

/// Window size inferred from a k*k channel count; throws BadChannelCount
/// unless the count is the square of an odd number.
std::size_t window_size_from_channels(std::size_t channels);

double sigmoid(double v);

/// f * sigmoid(f_e). A one-channel f_e is broadcast over f's channels.
Grid attention_reweight(const Grid& f, const Grid& f_e);

enum class AffinityNormalization { AbsoluteSum, Softmax };

/// AbsoluteSum: a / max(sum |a|, 1e-12) per pixel. Softmax: exp-normalized.
LocalAffinity normalize_local_affinity(
    const Grid& raw, AffinityNormalization mode = AffinityNormalization::AbsoluteSum);

/// out(y, x, c) = sum_{a,b} f(y + a, x + b, c) * A(y, x, a, b), one weight
/// per window offset shared by all channels, out-of-image reads clamped.
Grid local_affinity_filter(const Grid& f, const LocalAffinity& a);

struct FilterGradients {
  Grid f;         // like the filtered features
  Grid affinity;  // H x W x (k*k)
};

FilterGradients filter_backward(const Grid& grad_out, const Grid& f,
                                const LocalAffinity& a);

struct AttentionGradients {
  Grid f;
  Grid f_e;  // same channel count as the f_e passed forward
};

AttentionGradients attention_backward(const Grid& grad_out, const Grid& f,
                                      const Grid& f_e);

}  // namespace stereoprop
