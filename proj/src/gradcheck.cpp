#include "stereoprop/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "stereoprop/error.hpp"
#include "stereoprop/filtering.hpp"
#include "stereoprop/propagation.hpp"

namespace stereoprop {
namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Grid random_grid(Rng& rng, std::size_t h, std::size_t w, std::size_t c,
                 double lo, double hi) {
  Grid g(h, w, c);
  for (double& v : g.data()) v = uniform(rng, lo, hi);
  return g;
}

// Magnitude in [lo, hi] with a random sign, so |x| is never near its kink.
Grid signed_grid(Rng& rng, std::size_t h, std::size_t w, std::size_t c,
                 double lo, double hi) {
  Grid g(h, w, c);
  for (double& v : g.data()) {
    v = uniform(rng, lo, hi) * (uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0);
  }
  return g;
}

// A coordinate in [0, n - 1] whose fractional part stays in [0.1, 0.9].
double interior_coordinate(Rng& rng, std::size_t n) {
  return static_cast<double>(pick(rng, 0, n - 2)) + uniform(rng, 0.1, 0.9);
}

OffsetField random_offsets(Rng& rng, std::size_t h, std::size_t w) {
  Grid g(h, w, 2 * kNeighbors);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t i = 0; i < kNeighbors; ++i) {
        g(y, x, 2 * i) = interior_coordinate(rng, h) -
                         (static_cast<double>(y) + kNeighborSteps[i][0]);
        g(y, x, 2 * i + 1) = interior_coordinate(rng, w) -
                             (static_cast<double>(x) + kNeighborSteps[i][1]);
      }
    }
  }
  return OffsetField(std::move(g));
}

double weighted_sum(const Grid& weights, const Grid& values) {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s += weights.data()[i] * values.data()[i];
  }
  return s;
}

// Central differences of `loss` w.r.t. every element of `input`, compared
// with `analytic`. `input` is perturbed in place and restored.
void compare(GradientCheck& check, Grid& input, const Grid& analytic,
             const std::function<double()>& loss, double step) {
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double saved = input.data()[i];
    input.data()[i] = saved + step;
    const double up = loss();
    input.data()[i] = saved - step;
    const double down = loss();
    input.data()[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    check.max_rel_error =
        std::max(check.max_rel_error,
                 gradient_relative_error(analytic.data()[i], numeric));
    ++check.entries;
  }
}

std::vector<GradientCheck> check_propagation(std::size_t trials, Rng& rng,
                                             double step, bool unnormalized) {
  const std::string prefix =
      unnormalized ? "propagation-unnormalized." : "propagation.";
  std::vector<GradientCheck> out{{prefix + "d"}, {prefix + "a"},
                                 {prefix + "c"}, {prefix + "offsets"}};
  const PropagationOptions opts{unnormalized};
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t h = pick(rng, 4, 8), w = pick(rng, 4, 8);
    Grid d = random_grid(rng, h, w, 1, 0.0, 10.0);
    Grid a = signed_grid(rng, h, w, kNeighbors, 0.1, 1.0);
    Grid c = random_grid(rng, h, w, 1, 0.1, 0.9);
    Grid off = random_offsets(rng, h, w).grid();
    const Grid g = random_grid(rng, h, w, 1, -1.0, 1.0);

    const auto grads = propagate_nonlocal_backward(
        g, d, OffsetField(off), AffinityField(a), ConfidenceMap(c), opts);
    const auto loss = [&] {
      return weighted_sum(g, propagate_nonlocal(d, OffsetField(off),
                                                AffinityField(a),
                                                ConfidenceMap(c), opts));
    };
    compare(out[0], d, grads.d, loss, step);
    compare(out[1], a, grads.a, loss, step);
    compare(out[2], c, grads.c, loss, step);
    compare(out[3], off, grads.offsets, loss, step);
  }
  for (auto& r : out) r.trials = trials;
  return out;
}

std::vector<GradientCheck> check_filtering(std::size_t trials, Rng& rng,
                                           double step) {
  std::vector<GradientCheck> out{{"filtering.features"}, {"filtering.affinity"}};
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t h = pick(rng, 4, 8), w = pick(rng, 4, 8);
    const std::size_t ch = pick(rng, 1, 4);
    const std::size_t k = pick(rng, 0, 1) ? 3 : 5;
    Grid f = random_grid(rng, h, w, ch, -2.0, 2.0);
    Grid a = normalize_local_affinity(signed_grid(rng, h, w, k * k, 0.1, 1.0))
                 .grid();
    const Grid g = random_grid(rng, h, w, ch, -1.0, 1.0);
    const auto grads = filter_backward(g, f, LocalAffinity(a, k));
    const auto loss = [&] {
      return weighted_sum(g, local_affinity_filter(f, LocalAffinity(a, k)));
    };
    compare(out[0], f, grads.f, loss, step);
    compare(out[1], a, grads.affinity, loss, step);
  }
  for (auto& r : out) r.trials = trials;
  return out;
}

std::vector<GradientCheck> check_attention(std::size_t trials, Rng& rng,
                                           double step) {
  std::vector<GradientCheck> out{{"attention.f"}, {"attention.f_e"}};
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t h = pick(rng, 4, 8), w = pick(rng, 4, 8);
    const std::size_t ch = pick(rng, 1, 4);
    const std::size_t ech = pick(rng, 0, 1) ? 1 : ch;
    Grid f = random_grid(rng, h, w, ch, -2.0, 2.0);
    Grid fe = random_grid(rng, h, w, ech, -3.0, 3.0);
    const Grid g = random_grid(rng, h, w, ch, -1.0, 1.0);
    const auto grads = attention_backward(g, f, fe);
    const auto loss = [&] { return weighted_sum(g, attention_reweight(f, fe)); };
    compare(out[0], f, grads.f, loss, step);
    compare(out[1], fe, grads.f_e, loss, step);
  }
  for (auto& r : out) r.trials = trials;
  return out;
}

}  // namespace

double gradient_relative_error(double analytic, double numeric) {
  const double scale =
      std::max({std::abs(analytic), std::abs(numeric), 1e-5});
  return std::abs(analytic - numeric) / scale;
}

std::vector<std::string> gradcheck_modules() {
  return {"propagation", "propagation-unnormalized", "filtering", "attention"};
}

std::vector<GradientCheck> gradcheck(std::string_view module,
                                     std::size_t trials, std::uint64_t seed,
                                     double step) {
  if (trials == 0) {
    throw Error(ErrorCode::InvalidArgument, "gradcheck needs trials >= 1");
  }
  if (!(step > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "gradcheck step must be > 0");
  }
  Rng rng(seed);
  if (module == "propagation") return check_propagation(trials, rng, step, false);
  if (module == "propagation-unnormalized") {
    return check_propagation(trials, rng, step, true);
  }
  if (module == "filtering") return check_filtering(trials, rng, step);
  if (module == "attention") return check_attention(trials, rng, step);
  throw Error(ErrorCode::InvalidArgument,
              "unknown gradcheck module: " + std::string(module));
}

}  // namespace stereoprop
