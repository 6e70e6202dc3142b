#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stereoprop {

struct GradientCheck {
  std::string name;      // e.g. "propagation.offsets"
  double max_rel_error = 0.0;
  std::size_t trials = 0;
  std::size_t entries = 0;  // input elements compared across all trials
};

/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-5).
double gradient_relative_error(double analytic, double numeric);

/// Compares the analytic backward passes of one module against central
/// finite differences on `trials` random instances (4x4 to 8x8, up to 4
/// channels) drawn away from bilinear cell edges, clamping and |x| kinks.
///
/// Modules: "propagation" (d, a, c, offsets), "propagation-unnormalized",
/// "filtering" (features, affinity), "attention" (f, f_e).
std::vector<GradientCheck> gradcheck(std::string_view module,
                                     std::size_t trials, std::uint64_t seed,
                                     double step = 1e-5);

std::vector<std::string> gradcheck_modules();

}  // namespace stereoprop
