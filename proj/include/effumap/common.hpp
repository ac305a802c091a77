#ifndef EFFUMAP_COMMON_HPP
#define EFFUMAP_COMMON_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * @file common.hpp
 *
 * @brief Dense row-major matrix, seeded random streams and small numeric helpers
 * shared by every module.
 */

namespace effumap {

/**
 * Raised when an optimizer state or loss becomes non-finite.
 * The CLI maps this to exit code 2.
 */
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Row-major dense matrix of doubles.
 * Used both for input points (n x D) and embeddings (n x d).
 */
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) :
        nrow(rows), ncol(cols), values(rows * cols, fill) {}

    std::size_t rows() const { return nrow; }
    std::size_t cols() const { return ncol; }

    double& operator()(std::size_t i, std::size_t j) { return values[i * ncol + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * ncol + j]; }

    std::span<double> row(std::size_t i) { return {values.data() + i * ncol, ncol}; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * ncol, ncol}; }

    std::vector<double>& data() { return values; }
    const std::vector<double>& data() const { return values; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t nrow = 0;
    std::size_t ncol = 0;
    std::vector<double> values;
};

inline double squared_distance(std::span<const double> x, std::span<const double> y) {
    double out = 0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        const double delta = x[d] - y[d];
        out += delta * delta;
    }
    return out;
}

inline bool all_finite(const Matrix& m) {
    for (double v : m.data()) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

/**
 * @cond
 */
namespace stream {
// Fixed stream ids so that generators, perturbation, initialization,
// the optimizer and the batch simulator never share a random sequence.
inline constexpr std::uint64_t datagen = 1;
inline constexpr std::uint64_t perturb = 2;
inline constexpr std::uint64_t init = 3;
inline constexpr std::uint64_t optimizer = 4;
inline constexpr std::uint64_t pumap = 5;
}
/**
 * @endcond
 */

using Rng = std::mt19937_64;

/**
 * @param seed User-facing seed.
 * @param stream_id One of the `stream::` constants, or any other label.
 * @return A generator whose sequence depends only on `(seed, stream_id)`.
 */
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)
    };
    return Rng(seq);
}

/**
 * Uniform draw on [0, 1) from the top 53 bits.
 * Written out rather than using `std::uniform_real_distribution`, whose output is
 * implementation-defined, so that seeded runs are identical across standard libraries.
 */
template<class Engine_>
double uniform01(Engine_& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/**
 * Unbiased draw from {0, ..., n - 1} (Lemire's multiply-and-reject).
 */
template<class Engine_>
std::size_t uniform_index(Engine_& rng, std::size_t n) {
    const std::uint64_t range = n;
    std::uint64_t x = rng();
    __uint128_t m = static_cast<__uint128_t>(x) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
        const std::uint64_t threshold = (0 - range) % range;
        while (low < threshold) {
            x = rng();
            m = static_cast<__uint128_t>(x) * range;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::size_t>(m >> 64);
}

template<class Engine_, typename T_>
void shuffle(Engine_& rng, std::vector<T_>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = uniform_index(rng, i);
        std::swap(values[i - 1], values[j]);
    }
}

/**
 * Neumaier-compensated accumulator, used for the O(n^2) loss sums.
 */
class CompensatedSum {
public:
    void add(double x) {
        const double t = total + x;
        if (std::abs(total) >= std::abs(x)) {
            correction += (total - t) + x;
        } else {
            correction += (x - t) + total;
        }
        total = t;
    }

    double value() const { return total + correction; }

private:
    double total = 0;
    double correction = 0;
};

/**
 * Welford running mean/variance for Monte-Carlo estimates.
 */
class RunningStats {
public:
    void add(double x) {
        ++count;
        const double delta = x - running_mean;
        running_mean += delta / static_cast<double>(count);
        m2 += delta * (x - running_mean);
    }

    std::size_t size() const { return count; }
    double mean() const { return running_mean; }

    double variance() const {
        return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
    }

    /// Standard error of the mean.
    double standard_error() const {
        return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
    }

private:
    std::size_t count = 0;
    double running_mean = 0;
    double m2 = 0;
};

}

#endif
