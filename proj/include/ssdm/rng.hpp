#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ssdm/common.hpp"

namespace ssdm {

// All randomness goes through these helpers rather than std:: distributions,
// whose draw sequences are implementation-defined. Keeping the mapping from
// engine output to samples in-repo makes seeded runs byte-reproducible.
using Rng = std::mt19937_64;

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [lo, hi], both ends inclusive.
inline long uniform_int(Rng& rng, long lo, long hi) {
    require(lo <= hi, Errc::invalid_argument,
            strfmt("uniform_int: empty range [%ld, %ld]", lo, hi));
    const auto span = static_cast<unsigned long>(hi - lo) + 1ul;
    // Multiply-shift keeps the map engine-output -> index fixed and portable.
    const auto r = static_cast<unsigned __int128>(rng()) * span;
    return lo + static_cast<long>(r >> 64);
}

// One standard normal draw via Box-Muller. The spare cosine branch is
// discarded so every call consumes exactly two engine outputs.
inline double normal(Rng& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline Mat normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

inline Vec normal_vector(Rng& rng, Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
}

// Fisher-Yates shuffle driven by uniform_int, for reproducible epoch orders.
template <typename T>
void shuffle(Rng& rng, std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<size_t>(uniform_int(rng, 0, static_cast<long>(i) - 1));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace ssdm
