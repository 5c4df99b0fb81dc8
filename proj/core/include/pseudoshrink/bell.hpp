#pragma once

#include <span>

namespace pseudoshrink {

/// Partial exponential Bell polynomial B_{m,k}(x_1, ..., x_{m-k+1}).
///
/// Sums m!/(j_1! ... j_{m-k+1}!) * prod (x_l/l!)^{j_l} over all nonnegative
/// integer sequences with sum j_l = k and sum l*j_l = m. Each term's combined
/// coefficient m!/(prod j_l! (l!)^{j_l}) is an integer (a set-partition count)
/// and is accumulated in 128-bit integer arithmetic, so results are exact for
/// integer arguments as long as they fit a double.
///
/// Requires m >= k >= 1 and x.size() == m - k + 1.
double bell_partial(int m, int k, std::span<const double> x);

}  // namespace pseudoshrink
