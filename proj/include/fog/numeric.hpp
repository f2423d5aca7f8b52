#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace fog {

// Neumaier-compensated sum: error stays at one rounding of the result
// instead of growing with length.
inline double compensated_sum(const double* x, std::size_t n) {
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double t = sum + x[i];
        if (std::abs(sum) >= std::abs(x[i])) {
            comp += (sum - t) + x[i];
        } else {
            comp += (x[i] - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

inline double compensated_sum(const std::vector<double>& x) {
    return compensated_sum(x.data(), x.size());
}

inline double mean(const std::vector<double>& x) {
    return x.empty() ? 0.0 : compensated_sum(x) / static_cast<double>(x.size());
}

}  // namespace fog
