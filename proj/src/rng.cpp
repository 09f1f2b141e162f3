#include "qokt/rng.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace qokt {

std::vector<std::size_t> sample_distinct_sorted(Rng& rng, std::size_t n, std::size_t m) {
    if (m > n) throw std::invalid_argument("cannot sample more distinct values than exist");
    std::vector<std::size_t> out;
    out.reserve(m);
    if (m * 2 >= n) {
        // Dense case: partial Fisher-Yates.
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t j = k + static_cast<std::size_t>(rng.below(n - k));
            std::swap(idx[k], idx[j]);
            out.push_back(idx[k]);
        }
    } else {
        // Sparse case: rejection against the values drawn so far.
        while (out.size() < m) {
            const std::size_t v = static_cast<std::size_t>(rng.below(n));
            if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace qokt
