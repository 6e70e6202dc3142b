#include "stereoprop/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stereoprop/error.hpp"
#include "stereoprop/parallel.hpp"

namespace stereoprop {
namespace {

void check_attention_shapes(const Grid& f, const Grid& f_e) {
  if (!f.same_plane(f_e) ||
      (f_e.channels() != 1 && f_e.channels() != f.channels())) {
    throw Error(ErrorCode::ShapeMismatch,
                "attention needs f_e with 1 or C channels on the same grid");
  }
}

void check_filter_shapes(const Grid& f, const LocalAffinity& a) {
  if (!f.same_plane(a.grid())) {
    throw Error(ErrorCode::ShapeMismatch,
                "local affinity does not match the feature map size");
  }
}

}  // namespace

std::size_t window_size_from_channels(std::size_t channels) {
  const auto k = static_cast<std::size_t>(std::lround(std::sqrt(double(channels))));
  if (k * k != channels || k % 2 == 0) {
    throw Error(ErrorCode::BadChannelCount,
                std::to_string(channels) + " channels is not an odd k*k window");
  }
  return k;
}

LocalAffinity::LocalAffinity(Grid grid, std::size_t k)
    : grid_(std::move(grid)), k_(k) {
  if (k % 2 == 0 || grid_.channels() != k * k) {
    throw Error(ErrorCode::BadChannelCount,
                "local affinity needs k*k channels with odd k");
  }
}

double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

Grid attention_reweight(const Grid& f, const Grid& f_e) {
  check_attention_shapes(f, f_e);
  Grid out(f.height(), f.width(), f.channels());
  const bool broadcast = f_e.channels() == 1;
  for (std::size_t y = 0; y < f.height(); ++y) {
    for (std::size_t x = 0; x < f.width(); ++x) {
      for (std::size_t c = 0; c < f.channels(); ++c) {
        out(y, x, c) = f(y, x, c) * sigmoid(f_e(y, x, broadcast ? 0 : c));
      }
    }
  }
  return out;
}

LocalAffinity normalize_local_affinity(const Grid& raw,
                                       AffinityNormalization mode) {
  const std::size_t k = window_size_from_channels(raw.channels());
  const std::size_t n = raw.channels();
  Grid out(raw.height(), raw.width(), n);
  for (std::size_t p = 0; p < raw.pixel_count(); ++p) {
    auto in = raw.data().subspan(p * n, n);
    auto dst = out.data().subspan(p * n, n);
    if (mode == AffinityNormalization::AbsoluteSum) {
      double sum = 0.0;
      for (double v : in) sum += std::abs(v);
      const double denom = std::max(sum, 1e-12);
      for (std::size_t i = 0; i < n; ++i) dst[i] = in[i] / denom;
    } else {
      const double peak = *std::max_element(in.begin(), in.end());
      double z = 0.0;
      for (std::size_t i = 0; i < n; ++i) z += dst[i] = std::exp(in[i] - peak);
      for (double& v : dst) v /= z;
    }
  }
  return LocalAffinity(std::move(out), k);
}

Grid local_affinity_filter(const Grid& f, const LocalAffinity& a) {
  check_filter_shapes(f, a);
  const long r = static_cast<long>(a.radius());
  Grid out(f.height(), f.width(), f.channels());
  parallel_rows(f.height(), [&](std::size_t y) {
    for (std::size_t x = 0; x < f.width(); ++x) {
      for (long da = -r; da <= r; ++da) {
        for (long db = -r; db <= r; ++db) {
          const double wt = a(y, x, da, db);
          const long sy = static_cast<long>(y) + da;
          const long sx = static_cast<long>(x) + db;
          for (std::size_t c = 0; c < f.channels(); ++c) {
            out(y, x, c) += wt * f.clamped(sy, sx, c);
          }
        }
      }
    }
  });
  return out;
}

FilterGradients filter_backward(const Grid& grad_out, const Grid& f,
                                const LocalAffinity& a) {
  check_filter_shapes(f, a);
  if (!grad_out.same_shape(f)) {
    throw Error(ErrorCode::ShapeMismatch, "grad_out must match the features");
  }
  const long r = static_cast<long>(a.radius());
  const long h = static_cast<long>(f.height()), w = static_cast<long>(f.width());
  FilterGradients g{Grid(f.height(), f.width(), f.channels()),
                    Grid(f.height(), f.width(), a.grid().channels())};
  for (std::size_t y = 0; y < f.height(); ++y) {
    for (std::size_t x = 0; x < f.width(); ++x) {
      for (long da = -r; da <= r; ++da) {
        for (long db = -r; db <= r; ++db) {
          const auto sy = static_cast<std::size_t>(
              std::clamp(static_cast<long>(y) + da, 0L, h - 1));
          const auto sx = static_cast<std::size_t>(
              std::clamp(static_cast<long>(x) + db, 0L, w - 1));
          const double wt = a(y, x, da, db);
          double acc = 0.0;
          for (std::size_t c = 0; c < f.channels(); ++c) {
            acc += grad_out(y, x, c) * f(sy, sx, c);
            g.f(sy, sx, c) += wt * grad_out(y, x, c);
          }
          g.affinity(y, x, a.index(da, db)) = acc;
        }
      }
    }
  }
  return g;
}

AttentionGradients attention_backward(const Grid& grad_out, const Grid& f,
                                      const Grid& f_e) {
  check_attention_shapes(f, f_e);
  if (!grad_out.same_shape(f)) {
    throw Error(ErrorCode::ShapeMismatch, "grad_out must match the features");
  }
  AttentionGradients g{Grid(f.height(), f.width(), f.channels()),
                       Grid(f_e.height(), f_e.width(), f_e.channels())};
  const bool broadcast = f_e.channels() == 1;
  for (std::size_t y = 0; y < f.height(); ++y) {
    for (std::size_t x = 0; x < f.width(); ++x) {
      for (std::size_t c = 0; c < f.channels(); ++c) {
        const std::size_t ce = broadcast ? 0 : c;
        const double s = sigmoid(f_e(y, x, ce));
        g.f(y, x, c) = grad_out(y, x, c) * s;
        g.f_e(y, x, ce) += grad_out(y, x, c) * f(y, x, c) * s * (1.0 - s);
      }
    }
  }
  return g;
}

}  // namespace stereoprop
