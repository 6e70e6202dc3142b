#pragma once

#include <cstddef>
#include <functional>

namespace stereoprop {

/// Worker count used by row-parallel kernels. 1 (the default) runs inline.
void set_num_threads(std::size_t n);
std::size_t num_threads();

/// Calls fn(y) for y in [0, rows). Each row must write only its own outputs,
/// so results do not depend on the thread count.
void parallel_rows(std::size_t rows, const std::function<void(std::size_t)>& fn);

}  // namespace stereoprop
