#include "catch_amalgamated.hpp"

#include "effumap/common.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <numeric>

using namespace effumap;

TEST_CASE("Matrix stores rows contiguously") {
    Matrix m(2, 3);
    m(1, 2) = 5;
    REQUIRE(m.data()[5] == 5);
    REQUIRE(m.row(1)[2] == 5);
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 3);
}

TEST_CASE("make_rng depends on both seed and stream") {
    auto a = make_rng(1, stream::optimizer), b = make_rng(1, stream::optimizer);
    auto c = make_rng(1, stream::datagen), d = make_rng(2, stream::optimizer);
    const auto va = a(), vb = b(), vc = c(), vd = d();
    REQUIRE(va == vb);
    REQUIRE(va != vc);
    REQUIRE(va != vd);
}

TEST_CASE("uniform01 stays in [0, 1) with mean 1/2") {
    auto rng = make_rng(0, 99);
    RunningStats stats;
    for (int i = 0; i < 100000; ++i) {
        const double u = uniform01(rng);
        REQUIRE(u >= 0);
        REQUIRE(u < 1);
        stats.add(u);
    }
    // Var(U) = 1/12, so the SE of the mean is about 9e-4.
    REQUIRE(std::abs(stats.mean() - 0.5) < 4 * std::sqrt(1.0 / 12 / 100000));
}

TEST_CASE("uniform_index covers the range evenly") {
    auto rng = make_rng(3, 99);
    std::vector<int> counts(7, 0);
    const int draws = 70000;
    for (int i = 0; i < draws; ++i) {
        const auto k = uniform_index(rng, 7);
        REQUIRE(k < 7);
        ++counts[k];
    }
    // Binomial(70000, 1/7): SD ~ 92.6.
    for (int c : counts) {
        REQUIRE(std::abs(c - 10000) < 4 * 92.6);
    }
    REQUIRE(uniform_index(rng, 1) == 0);
}

TEST_CASE("shuffle returns a permutation and reaches every arrangement of 3") {
    auto rng = make_rng(5, 99);
    std::vector<std::vector<int> > seen;
    for (int t = 0; t < 600; ++t) {
        std::vector<int> v{ 0, 1, 2 };
        shuffle(rng, v);
        auto sorted = v;
        std::sort(sorted.begin(), sorted.end());
        REQUIRE(sorted == std::vector<int>{ 0, 1, 2 });
        if (std::find(seen.begin(), seen.end(), v) == seen.end()) {
            seen.push_back(v);
        }
    }
    REQUIRE(seen.size() == 6);
}

TEST_CASE("CompensatedSum keeps the small terms of a large sum") {
    CompensatedSum s;
    s.add(1e16);
    for (int i = 0; i < 1000; ++i) {
        s.add(1.0);
    }
    s.add(-1e16);
    REQUIRE(s.value() == 1000.0);
}

TEST_CASE("RunningStats matches a two-pass computation") {
    oracle::Gen gen(11);
    std::vector<double> xs;
    RunningStats stats;
    for (int i = 0; i < 500; ++i) {
        xs.push_back(gen.real(-5, 20));
        stats.add(xs.back());
    }
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double ss = 0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    REQUIRE(stats.mean() == Catch::Approx(mean).epsilon(1e-12));
    REQUIRE(stats.variance() == Catch::Approx(ss / (xs.size() - 1)).epsilon(1e-10));
    REQUIRE(stats.standard_error() == Catch::Approx(std::sqrt(ss / (xs.size() - 1) / xs.size())).epsilon(1e-10));
}
