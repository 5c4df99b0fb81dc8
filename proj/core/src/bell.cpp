#include "pseudoshrink/bell.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pseudoshrink {

namespace {

std::uint64_t factorial_u64(int n) {
    std::uint64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
    return f;
}

}  // namespace

double bell_partial(int m, int k, std::span<const double> x) {
    if (m < 1 || k < 1 || k > m) {
        throw std::invalid_argument("bell_partial: need m >= k >= 1");
    }
    if (m > 20) {
        throw std::invalid_argument("bell_partial: m > 20 overflows the exact coefficient arithmetic");
    }
    const int len = m - k + 1;
    if (static_cast<int>(x.size()) != len) {
        throw std::invalid_argument("bell_partial: argument sequence must have length m - k + 1");
    }

    std::vector<std::uint64_t> fact(static_cast<std::size_t>(m) + 1);
    for (int i = 0; i <= m; ++i) fact[static_cast<std::size_t>(i)] = factorial_u64(i);

    double total = 0.0;
    std::vector<int> j(static_cast<std::size_t>(len), 0);

    // Depth-first enumeration of j_1..j_len with sum j = k and sum l*j = m.
    // rem_k / rem_m are the unassigned parts of the two constraints.
    auto recurse = [&](auto&& self, int l, int rem_k, int rem_m) -> void {
        if (l == len) {
            if (rem_k != 0 || rem_m != 0) return;
            // The combined coefficient m!/(prod j_l! (l!)^{j_l}) is a positive
            // integer, so its denominator divides m! and fits 128 bits.
            __int128 denom = 1;
            double xpow = 1.0;
            for (int i = 0; i < len; ++i) {
                const int ji = j[static_cast<std::size_t>(i)];
                if (ji == 0) continue;
                denom *= static_cast<__int128>(fact[static_cast<std::size_t>(ji)]);
                const __int128 lfact = fact[static_cast<std::size_t>(i + 1)];
                for (int q = 0; q < ji; ++q) {
                    denom *= lfact;
                    xpow *= x[static_cast<std::size_t>(i)];
                }
            }
            const __int128 coeff = static_cast<__int128>(fact[static_cast<std::size_t>(m)]) / denom;
            total += static_cast<double>(coeff) * xpow;
            return;
        }
        const int weight = l + 1;
        const int max_j = std::min(rem_k, rem_m / weight);
        for (int ji = 0; ji <= max_j; ++ji) {
            j[static_cast<std::size_t>(l)] = ji;
            self(self, l + 1, rem_k - ji, rem_m - weight * ji);
        }
        j[static_cast<std::size_t>(l)] = 0;
    };
    recurse(recurse, 0, k, m);
    return total;
}

}  // namespace pseudoshrink
