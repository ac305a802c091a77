#ifndef EFFUMAP_DATAGEN_HPP
#define EFFUMAP_DATAGEN_HPP

#include "common.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

/**
 * @file datagen.hpp
 *
 * @brief Toy datasets (ring, unit square) and CSV input/output of point sets.
 */

namespace effumap {

/**
 * A set of n >= 2 pairwise-distinct points in R^D, one per row.
 * The row index is the point id.
 */
struct Dataset {
    Matrix points;

    std::size_t size() const { return points.rows(); }
    std::size_t dim() const { return points.cols(); }
};

/**
 * @cond
 */
namespace detail {

/// Returns two row indices holding equal points, or `{rows(), rows()}` if all rows are distinct.
inline std::pair<std::size_t, std::size_t> find_duplicate_rows(const Matrix& x) {
    std::vector<std::size_t> order(x.rows());
    std::iota(order.begin(), order.end(), 0);
    auto row_less = [&](std::size_t l, std::size_t r) {
        auto a = x.row(l), b = x.row(r);
        if (std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end())) {
            return true;
        }
        if (std::equal(a.begin(), a.end(), b.begin())) {
            return l < r;
        }
        return false;
    };
    std::sort(order.begin(), order.end(), row_less);
    for (std::size_t o = 1; o < order.size(); ++o) {
        auto a = x.row(order[o - 1]), b = x.row(order[o]);
        if (std::equal(a.begin(), a.end(), b.begin())) {
            return { order[o - 1], order[o] };
        }
    }
    return { x.rows(), x.rows() };
}

}
/**
 * @endcond
 */

/**
 * Checks the dataset invariants (n >= 2, D >= 1, distinct rows, finite values).
 * Throws `std::invalid_argument` naming the offending rows otherwise.
 */
inline void validate(const Dataset& data) {
    if (data.size() < 2) {
        throw std::invalid_argument("dataset needs at least 2 points, got " + std::to_string(data.size()));
    }
    if (data.dim() < 1) {
        throw std::invalid_argument("dataset needs at least 1 dimension");
    }
    if (!all_finite(data.points)) {
        throw std::invalid_argument("dataset contains non-finite values");
    }
    auto dup = detail::find_duplicate_rows(data.points);
    if (dup.first != data.size()) {
        throw std::invalid_argument("duplicate points at rows " + std::to_string(dup.first) + " and " + std::to_string(dup.second));
    }
}

/**
 * Samples `n` points uniformly by area from the annulus `radius +/- half_width` around the origin.
 * The radius is drawn through the inverse CDF of the area measure, r = sqrt(U(r_in^2, r_out^2)).
 */
inline Dataset gen_ring(std::size_t n, double radius = 4.0, double half_width = 0.25, std::uint64_t seed = 0) {
    if (n < 2) {
        throw std::invalid_argument("gen_ring: n must be at least 2");
    }
    if (!(half_width >= 0) || !(radius > half_width)) {
        throw std::invalid_argument("gen_ring: need radius > half_width >= 0");
    }

    auto rng = make_rng(seed, stream::datagen);
    const double inner2 = (radius - half_width) * (radius - half_width);
    const double outer2 = (radius + half_width) * (radius + half_width);

    Dataset out{ Matrix(n, 2) };
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::sqrt(inner2 + (outer2 - inner2) * uniform01(rng));
        const double theta = 2 * std::numbers::pi * uniform01(rng);
        out.points(i, 0) = r * std::cos(theta);
        out.points(i, 1) = r * std::sin(theta);
    }
    validate(out);
    return out;
}

/**
 * Samples `n` points i.i.d. uniform on the unit square [0,1]^2.
 */
inline Dataset gen_uniform_square(std::size_t n, std::uint64_t seed = 0) {
    if (n < 2) {
        throw std::invalid_argument("gen_uniform_square: n must be at least 2");
    }
    auto rng = make_rng(seed, stream::datagen);
    Dataset out{ Matrix(n, 2) };
    for (auto& v : out.points.data()) {
        v = uniform01(rng);
    }
    validate(out);
    return out;
}

/**
 * Formats a double with 17 significant digits, enough to round-trip exactly.
 */
inline std::string format_double(double x) {
    char buffer[64];
    auto res = std::to_chars(buffer, buffer + sizeof(buffer), x, std::chars_format::general, 17);
    return std::string(buffer, res.ptr);
}

/**
 * @cond
 */
namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    if (s.empty()) {
        return false;
    }
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}
/**
 * @endcond
 */

/**
 * Parses a rectangular numeric CSV from a stream.
 * A first row that does not parse as numbers is treated as a header.
 * Errors name the 1-based line of the problem.
 */
inline Dataset read_csv(std::istream& input) {
    std::vector<double> values;
    std::size_t ncol = 0, nrow = 0, lineno = 0;
    std::string line;
    bool first = true;

    while (std::getline(input, line)) {
        ++lineno;
        std::string_view view = detail::trim(line);
        if (view.empty()) {
            continue;
        }
        auto cells = detail::split_commas(view);

        std::vector<double> parsed(cells.size());
        bool numeric = true;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!detail::parse_double(cells[c], parsed[c])) {
                numeric = false;
                break;
            }
        }

        if (first) {
            first = false;
            if (!numeric) {
                ncol = cells.size();
                continue;
            }
        }
        if (!numeric) {
            throw std::invalid_argument("CSV line " + std::to_string(lineno) + ": non-numeric cell");
        }
        if (ncol == 0) {
            ncol = cells.size();
        }
        if (cells.size() != ncol) {
            throw std::invalid_argument("CSV line " + std::to_string(lineno) + ": expected " + std::to_string(ncol) +
                " columns, found " + std::to_string(cells.size()));
        }
        values.insert(values.end(), parsed.begin(), parsed.end());
        ++nrow;
    }

    Dataset out{ Matrix(nrow, ncol) };
    out.points.data() = std::move(values);
    if (nrow < 2) {
        throw std::invalid_argument("CSV has " + std::to_string(nrow) + " data row(s), need at least 2");
    }
    auto dup = detail::find_duplicate_rows(out.points);
    if (dup.first != nrow) {
        throw std::invalid_argument("CSV data rows " + std::to_string(dup.first + 1) + " and " +
            std::to_string(dup.second + 1) + " are duplicate points");
    }
    validate(out);
    return out;
}

inline Dataset load_csv(const std::string& path) {
    std::ifstream input(path);
    if (!input) {
        throw std::runtime_error("cannot open '" + path + "' for reading");
    }
    try {
        return read_csv(input);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

/**
 * Writes one point per row, no header, 17 significant digits, LF line endings.
 */
inline void write_csv(const Matrix& points, std::ostream& output) {
    for (std::size_t i = 0; i < points.rows(); ++i) {
        auto row = points.row(i);
        for (std::size_t d = 0; d < row.size(); ++d) {
            if (d) {
                output << ',';
            }
            output << format_double(row[d]);
        }
        output << '\n';
    }
}

inline void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream output(path, std::ios::binary);
    if (!output) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    write_csv(data.points, output);
}

/**
 * Radial spread of a planar point cloud about its centroid. `sector_std` averages the
 * radial std within equal angular sectors, which tracks the local width of a ring even
 * when its overall shape deforms.
 */
struct RadialStats {
    double center_x = 0;
    double center_y = 0;
    double mean_radius = 0;
    double radial_std = 0;
    double sector_std = 0;
};

inline RadialStats radial_stats(const Matrix& points, std::size_t sectors = 36) {
    if (points.cols() < 2 || points.rows() < 2) {
        throw std::invalid_argument("radial_stats: need at least two planar points");
    }
    const std::size_t n = points.rows();
    RadialStats out;
    for (std::size_t i = 0; i < n; ++i) {
        out.center_x += points(i, 0);
        out.center_y += points(i, 1);
    }
    out.center_x /= static_cast<double>(n);
    out.center_y /= static_cast<double>(n);

    std::vector<double> radius(n);
    std::vector<std::vector<double> > by_sector(sectors);
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = points(i, 0) - out.center_x, dy = points(i, 1) - out.center_y;
        radius[i] = std::hypot(dx, dy);
        const double unit = (std::atan2(dy, dx) + std::numbers::pi) / (2 * std::numbers::pi);
        by_sector[std::min(static_cast<std::size_t>(unit * static_cast<double>(sectors)), sectors - 1)].push_back(radius[i]);
    }

    auto mean_std = [](const std::vector<double>& v) {
        double mean = 0, ss = 0;
        for (double x : v) {
            mean += x;
        }
        mean /= static_cast<double>(v.size());
        for (double x : v) {
            ss += (x - mean) * (x - mean);
        }
        return std::pair{ mean, std::sqrt(ss / static_cast<double>(v.size())) };
    };
    std::tie(out.mean_radius, out.radial_std) = mean_std(radius);

    double total = 0;
    std::size_t used = 0;
    for (const auto& v : by_sector) {
        if (v.size() >= 2) {
            total += mean_std(v).second;
            ++used;
        }
    }
    out.sector_std = used ? total / static_cast<double>(used) : 0.0;
    return out;
}

}

#endif
