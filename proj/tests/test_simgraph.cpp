#include "catch_amalgamated.hpp"

#include "effumap/simgraph.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

using namespace effumap;

namespace {

Dataset random_dataset(oracle::Gen& gen, std::size_t n, std::size_t d) {
    Dataset data{ gen.points(n, d) };
    validate(data);
    return data;
}

double sigma_sum(std::span<const double> offsets, double sigma) {
    double s = 0;
    for (double o : offsets) {
        s += std::exp(-o / sigma);
    }
    return s;
}

}

TEST_CASE("knn on three collinear points") {
    Dataset data{ Matrix(3, 1) };
    data.points.data() = { 0, 1, 3 };
    auto nn = knn_brute(data, 1);
    REQUIRE(nn.neighbors(0)[0] == 1);
    REQUIRE(nn.neighbors(1)[0] == 0);
    REQUIRE(nn.neighbors(2)[0] == 1);
}

TEST_CASE("knn with k = n - 1 lists every other point") {
    oracle::Gen gen(5);
    auto data = random_dataset(gen, 12, 3);
    auto nn = knn_brute(data, 11);
    for (std::size_t i = 0; i < 12; ++i) {
        std::set<std::size_t> ids(nn.neighbors(i).begin(), nn.neighbors(i).end());
        REQUIRE(ids.size() == 11);
        REQUIRE(ids.count(i) == 0);
    }
}

TEST_CASE("knn matches a sort-based oracle") {
    oracle::Gen gen(50);
    auto data = random_dataset(gen, 50, 5);
    auto nn = knn_brute(data, 7);
    auto want = oracle::knn(data.points, 7);
    for (std::size_t i = 0; i < 50; ++i) {
        REQUIRE(std::vector<std::size_t>(nn.neighbors(i).begin(), nn.neighbors(i).end()) == want[i]);
        auto d = nn.dists(i);
        REQUIRE(std::is_sorted(d.begin(), d.end()));
    }
}

TEST_CASE("knn breaks ties by smaller id") {
    Dataset data{ Matrix(4, 1) };
    data.points.data() = { 0, -1, 1, 5 };
    auto nn = knn_brute(data, 2);
    REQUIRE(nn.neighbors(0)[0] == 1);
    REQUIRE(nn.neighbors(0)[1] == 2);
}

TEST_CASE("cosine distance") {
    Dataset data{ Matrix(3, 2) };
    data.points.data() = { 1, 0, 0, 1, 1, 1 };
    auto nn = knn_brute(data, 2, Metric::cosine);
    REQUIRE(nn.neighbors(0)[0] == 2);
    REQUIRE(nn.dists(0)[0] == Catch::Approx(1 - 1 / std::sqrt(2.0)));
    REQUIRE(nn.dists(0)[1] == Catch::Approx(1.0));

    Dataset zero{ Matrix(2, 2) };
    zero.points.data() = { 0, 0, 1, 1 };
    REQUIRE_THROWS_AS(knn_brute(zero, 1, Metric::cosine), std::invalid_argument);
}

TEST_CASE("sigma for offsets [0, 1, 1, 1] is 1 / ln 3") {
    std::vector<double> offsets{ 0, 1, 1, 1 };
    auto res = smooth_knn_sigma(offsets);
    REQUIRE_FALSE(res.degenerate);
    REQUIRE(res.sigma == Catch::Approx(0.9102392266268373).epsilon(1e-5));
}

TEST_CASE("all-zero offsets are flagged and clamped") {
    std::vector<double> offsets(6, 0.0);
    auto res = smooth_knn_sigma(offsets);
    REQUIRE(res.degenerate);
    REQUIRE(res.sigma == SigmaSearch{}.sigma_max);
}

TEST_CASE("sigma reproduces log2 k for random offsets") {
    oracle::Gen gen(77);
    for (int t = 0; t < 200; ++t) {
        const std::size_t k = gen.index(2, 40);
        std::vector<double> offsets(k, 0.0);
        for (std::size_t c = 1; c < k; ++c) {
            offsets[c] = offsets[c - 1] + gen.real(0, 2);
        }
        if (offsets.back() == 0) {
            continue;
        }
        auto res = smooth_knn_sigma(offsets);
        if (res.degenerate) {
            continue;
        }
        REQUIRE(std::abs(sigma_sum(offsets, res.sigma) - std::log2(static_cast<double>(k))) <= 1e-5);
    }
}

TEST_CASE("directed similarities") {
    NeighborLists nn;
    nn.n = 2;
    nn.k = 2;
    nn.ids = { 1, 0, 0, 1 };
    nn.distances = { 0.5, 1.5, 0.5, 0.9 };
    std::vector<double> sigmas{ 1.0, 0.4 };
    auto dir = directed_similarities(nn, sigmas);
    REQUIRE(dir.row(0)[0] == 1.0);
    REQUIRE(dir.row(0)[1] == Catch::Approx(std::exp(-1.0)));
    REQUIRE(dir.row(1)[1] == Catch::Approx(std::exp(-1.0)));
}

TEST_CASE("fuzzy union arithmetic") {
    DirectedSimilarities dir;
    dir.n = 4;
    dir.k = 1;
    // 0 -> 1 with 1, 1 -> 2 with 0.5, 2 -> 1 with 0.5, 3 -> 2 with 0.
    dir.ids = { 1, 2, 1, 2 };
    dir.weights = { 1.0, 0.5, 0.5, 0.0 };
    auto g = symmetrize(dir);
    REQUIRE(g.weight(0, 1) == 1.0);
    REQUIRE(g.weight(1, 2) == 0.75);
    REQUIRE(g.weight(2, 3) == 0.0);
    REQUIRE(g.num_edges() == 2);
}

TEST_CASE("built graphs satisfy the structural invariants") {
    oracle::Gen gen(91);
    for (int t = 0; t < 10; ++t) {
        const std::size_t n = gen.index(20, 80), k = gen.index(2, 15);
        auto data = random_dataset(gen, n, gen.index(1, 4));
        auto built = build_graph(data, k);
        const auto& g = built.graph;
        const double target = std::log2(static_cast<double>(k));

        double degree_sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0;
            for (const auto& entry : g.row(i)) {
                const double w = g.weight(entry.edge);
                REQUIRE(w > 0);
                REQUIRE(w <= 1);
                REQUIRE(entry.node != i);
                REQUIRE(g.weight(entry.node, i) == w);
                row += w;
            }
            REQUIRE(std::abs(row - g.degree(i)) <= 1e-12);
            degree_sum += g.degree(i);
            REQUIRE(g.degree(i) >= built.directed.row_sum(i) - 1e-12);
            if (!built.sigmas[i].degenerate) {
                REQUIRE(std::abs(built.directed.row_sum(i) - target) <= 1e-5);
                REQUIRE(g.degree(i) >= target - 1e-5);
            }
            REQUIRE(built.directed.row(i)[0] == 1.0);
        }
        REQUIRE(std::abs(g.total_weight() - degree_sum / 2) <= 1e-12 * degree_sum);
    }
}

TEST_CASE("dense similarities use phi on all pairs") {
    Dataset data{ Matrix(3, 1) };
    data.points.data() = { 0, 1, 3 };
    auto g = dense_similarities(data, Kernel{ 1, 1 });
    REQUIRE(g.num_edges() == 3);
    REQUIRE(g.weight(0, 1) == 0.5);
    REQUIRE(g.weight(0, 2) == Catch::Approx(0.1));
}

TEST_CASE("dense ring similarities give repulsive weights near 1/2") {
    auto data = gen_ring(1000, 4.0, 0.25, 0);
    auto g = dense_similarities(data, default_kernel());
    const double mean_degree = 2 * g.total_weight() / 1000;
    // Average degree of roughly 100 gives (d_i + d_j) m / (2n) of roughly 0.5 for m = 5.
    REQUIRE(mean_degree > 70);
    REQUIRE(mean_degree < 150);
    const double w = 2 * mean_degree * 5 / 2000;
    REQUIRE(w > 0.35);
    REQUIRE(w < 0.75);
}

TEST_CASE("epoch filter thresholds at max / n_epochs") {
    SimilarityGraph g(4, { { 0, 1, 1.0 }, { 1, 2, 0.01 }, { 2, 3, 0.002 } });
    auto f = epoch_filter(g, 200);
    REQUIRE(f.num_edges() == 2);
    REQUIRE(f.weight(2, 3) == 0);
    REQUIRE(f.degree(3) == 0);
    REQUIRE(epoch_filter(g, 1).num_edges() == 1);
    REQUIRE(epoch_filter(g, 1e300).num_edges() == 3);
}

TEST_CASE("perturbations keep the edge set") {
    oracle::Gen gen(13);
    auto data = random_dataset(gen, 60, 2);
    auto g = build_graph(data, 8).graph;
    auto filtered = epoch_filter(g, 500);

    auto same_pattern = [](const SimilarityGraph& a, const SimilarityGraph& b) {
        if (a.num_edges() != b.num_edges()) {
            return false;
        }
        for (std::size_t e = 0; e < a.num_edges(); ++e) {
            if (a.edges()[e].i != b.edges()[e].i || a.edges()[e].j != b.edges()[e].j) {
                return false;
            }
        }
        return true;
    };

    SECTION("binarize") {
        auto b = perturb(g, PerturbMode::binarize);
        REQUIRE(same_pattern(g, b));
        for (std::size_t i = 0; i < b.size(); ++i) {
            REQUIRE(b.degree(i) == static_cast<double>(b.row(i).size()));
            REQUIRE(b.degree(i) >= 7);
        }
    }
    SECTION("invert") {
        auto inv = perturb(g, PerturbMode::invert, 0, 500);
        REQUIRE(same_pattern(filtered, inv));
        double lo = 1, hi = 0;
        std::size_t arg_lo = 0, arg_hi = 0;
        for (std::size_t e = 0; e < filtered.num_edges(); ++e) {
            if (filtered.edges()[e].weight < lo) {
                lo = filtered.edges()[e].weight;
                arg_lo = e;
            }
            if (filtered.edges()[e].weight > hi) {
                hi = filtered.edges()[e].weight;
                arg_hi = e;
            }
        }
        REQUIRE(inv.edges()[arg_lo].weight == 1.0);
        REQUIRE(inv.edges()[arg_hi].weight == Catch::Approx(lo / hi));
    }
    SECTION("permute") {
        auto p = perturb(g, PerturbMode::permute, 4);
        REQUIRE(same_pattern(g, p));
        std::vector<double> a, b;
        for (const auto& e : g.edges()) a.push_back(e.weight);
        for (const auto& e : p.edges()) b.push_back(e.weight);
        REQUIRE(a != b);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        REQUIRE(a == b);
    }
    SECTION("uniform_random") {
        auto u = perturb(g, PerturbMode::uniform_random, 4);
        REQUIRE(same_pattern(g, u));
        for (const auto& e : u.edges()) {
            REQUIRE(e.weight > 0);
            REQUIRE(e.weight <= 1);
        }
    }
}

TEST_CASE("degree histogram reference lines") {
    auto data = gen_ring(300, 4.0, 0.25, 1);
    auto g = build_graph(data, 15).graph;
    auto h = degree_histogram(g, 20);
    REQUIRE(h.log2k_line == Catch::Approx(std::log2(15.0)));
    REQUIRE(h.log2k_line == Catch::Approx(3.9).margin(0.01));
    REQUIRE(h.knn_line == 14);
    REQUIRE(h.min_degree >= std::log2(15.0) - 1e-4);
    REQUIRE(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{ 0 }) == 300);

    auto hb = degree_histogram(perturb(g, PerturbMode::binarize), 20);
    REQUIRE(hb.min_degree >= 14);
}

TEST_CASE("graph edge lists round trip") {
    oracle::Gen gen(21);
    auto data = random_dataset(gen, 30, 2);
    auto g = build_graph(data, 5).graph;
    std::stringstream buffer;
    write_graph_edges(g, buffer);
    auto back = read_graph_edges(buffer);
    REQUIRE(back.size() == g.size());
    REQUIRE(back.info().k == 5);
    REQUIRE(back.num_edges() == g.num_edges());
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        REQUIRE(back.edges()[e].weight == g.edges()[e].weight);
    }
}

TEST_CASE("graph construction rejects invalid edges") {
    REQUIRE_THROWS_AS(SimilarityGraph(3, { { 0, 0, 0.5 } }), std::invalid_argument);
    REQUIRE_THROWS_AS(SimilarityGraph(3, { { 0, 1, 1.5 } }), std::invalid_argument);
    REQUIRE_THROWS_AS(SimilarityGraph(3, { { 0, 1, 0.5 }, { 1, 0, 0.5 } }), std::invalid_argument);
    REQUIRE_THROWS_AS(SimilarityGraph(3, { { 0, 3, 0.5 } }), std::invalid_argument);
}
