#include "catch_amalgamated.hpp"

#include "effumap/pumap_oracle.hpp"
#include "oracles.hpp"

#include <cmath>
#include <map>

using namespace effumap;

TEST_CASE("batch of a single-edge graph") {
    SimilarityGraph g(3, { { 0, 2, 0.4 } });
    EdgeSampler sampler(g);
    auto rng = make_rng(1, stream::pumap);
    std::size_t forward = 0;
    const std::size_t b = 2000;
    auto batch = assemble_batch(sampler, b, rng);
    for (std::size_t beta = 0; beta < b; ++beta) {
        const bool fwd = batch.heads[beta] == 0 && batch.tails[beta] == 2;
        const bool bwd = batch.heads[beta] == 2 && batch.tails[beta] == 0;
        REQUIRE((fwd || bwd));
        forward += fwd;
    }
    // Both orientations have probability 1/2.
    REQUIRE(std::abs(static_cast<double>(forward) / b - 0.5) < 4 * std::sqrt(0.25 / b));
}

TEST_CASE("sampler frequencies follow mu / (2 mu(E))") {
    oracle::Gen gen(3);
    const std::size_t n = 8;
    auto w = gen.weights(n, 0.4);
    auto g = oracle::to_graph(w);
    EdgeSampler sampler(g);
    auto rng = make_rng(2, stream::pumap);
    const std::size_t draws = 100000;
    std::vector<std::size_t> counts(n * n, 0);
    for (std::size_t t = 0; t < draws; ++t) {
        auto e = sampler(rng);
        ++counts[e.head * n + e.tail];
    }
    double total = 0;
    for (auto& row : w) for (double v : row) total += v;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double p = w[i][j] / total;
            const double se = std::sqrt(p * (1 - p) / draws);
            REQUIRE(std::abs(static_cast<double>(counts[i * n + j]) / draws - p) <= 4.5 * se + 1e-12);
        }
    }
}

TEST_CASE("negative pairs with a single batch entry") {
    auto rng = make_rng(0, stream::pumap);
    auto pairs = negative_pairs({ 4 }, { 7 }, 5, rng);
    REQUIRE(pairs.size() == 5);
    for (const auto& p : pairs) {
        REQUIRE(p.head == 4);
        REQUIRE(p.tail == 7);
    }
}

TEST_CASE("negative pairs conserve heads and tails") {
    oracle::Gen gen(9);
    auto rng = make_rng(4, stream::pumap);
    for (int t = 0; t < 50; ++t) {
        const std::size_t b = gen.index(1, 20), m = gen.index(1, 6);
        std::vector<std::size_t> heads(b), tails(b);
        for (std::size_t beta = 0; beta < b; ++beta) {
            heads[beta] = gen.index(0, 9);
            tails[beta] = gen.index(0, 9);
        }
        auto pairs = negative_pairs(heads, tails, m, rng);
        REQUIRE(pairs.size() == m * b);
        std::map<std::size_t, int> head_count, tail_count;
        for (std::size_t beta = 0; beta < b; ++beta) {
            head_count[heads[beta]] += static_cast<int>(m);
            tail_count[tails[beta]] += static_cast<int>(m);
        }
        for (const auto& p : pairs) {
            --head_count[p.head];
            --tail_count[p.tail];
        }
        for (auto& [k, v] : head_count) REQUIRE(v == 0);
        for (auto& [k, v] : tail_count) REQUIRE(v == 0);
    }
}

TEST_CASE("negative pair counts for a fixed batch are hypergeometric") {
    // Heads {0, 0, 1}, tails {2, 3, 2}, m = 2: H_0 = 4, H_1 = 2, T_2 = 4, T_3 = 2, mb = 6.
    const std::vector<std::size_t> heads{ 0, 0, 1 }, tails{ 2, 3, 2 };
    const std::size_t m = 2, trials = 40000;
    auto rng = make_rng(6, stream::pumap);
    RunningStats n02, n13;
    for (std::size_t t = 0; t < trials; ++t) {
        auto pairs = negative_pairs(heads, tails, m, rng);
        double a = 0, c = 0;
        for (const auto& p : pairs) {
            a += p.head == 0 && p.tail == 2;
            c += p.head == 1 && p.tail == 3;
        }
        n02.add(a);
        n13.add(c);
    }
    REQUIRE(std::abs(n02.mean() - 4.0 * 4.0 / 6.0) <= 4 * n02.standard_error());
    REQUIRE(std::abs(n13.mean() - 2.0 * 2.0 / 6.0) <= 4 * n13.standard_error());
}

TEST_CASE("closed-form edge counts") {
    SimilarityGraph g(4, { { 0, 1, 0.5 }, { 1, 2, 1.0 }, { 2, 3, 0.25 } });
    // mu(E) = 1.75.
    REQUIRE(g.total_weight() == 1.75);
    REQUIRE(expected_edge_count(g, 4, 0, 1) == Catch::Approx(4 * 0.5 / 3.5));
    REQUIRE(expected_edge_count(g, 4, 2, 1) == Catch::Approx(4 * 1.0 / 3.5));
    REQUIRE(expected_edge_count(g, 4, 0, 3) == 0);

    // Sum over ordered pairs of E(P) is b; of the exact E(N) is m b.
    double sum_p = 0, sum_n = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            sum_p += expected_edge_count(g, 4, i, j);
            sum_n += expected_negative_count(g, 3, 4, i, j);
        }
    }
    REQUIRE(sum_p == Catch::Approx(4));
    REQUIRE(sum_n == Catch::Approx(12));
}

TEST_CASE("Monte-Carlo pair counts match the exact expectations") {
    auto data = gen_ring(12, 4.0, 0.25, 2);
    auto g = build_graph(data, 4).graph;
    BatchSimConfig config;
    config.batch_size = 8;
    config.m = 3;
    config.trials = 20000;
    auto est = mc_expectations(g, config);
    REQUIRE(est.conservation_violations == 0);
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t p = i * n + j;
            const double ep = i == j ? 0 : expected_edge_count(g, 8, i, j);
            const double en = expected_negative_count(g, 3, 8, i, j);
            REQUIRE(std::abs(est.mean_P[p] - ep) <= 4.5 * est.se_P[p] + 1e-12);
            REQUIRE(std::abs(est.mean_N[p] - en) <= 4.5 * est.se_N[p] + 1e-12);
        }
    }
}

TEST_CASE("b = 1 exposes the same-slot term of E(N)") {
    // With one edge per batch, every negative pair is (head, tail) of that edge,
    // so E(N_ij) = m mu_ij / (2 mu(E)); the product term alone would predict 0.
    SimilarityGraph g(3, { { 0, 1, 0.6 }, { 1, 2, 0.3 } });
    REQUIRE(expected_negative_count_cross(g, 4, 1, 0, 1) == 0);
    REQUIRE(expected_negative_count(g, 4, 1, 0, 1) == Catch::Approx(4 * 0.6 / 1.8));

    const std::size_t trials = 20000;
    auto rng = make_rng(8, stream::pumap);
    EdgeSampler sampler(g);
    RunningStats n01;
    for (std::size_t t = 0; t < trials; ++t) {
        auto batch = assemble_batch(sampler, 1, rng);
        auto pairs = negative_pairs(batch.heads, batch.tails, 4, rng);
        double c = 0;
        for (const auto& p : pairs) c += p.head == 0 && p.tail == 1;
        n01.add(c);
    }
    REQUIRE(std::abs(n01.mean() - 4 * 0.6 / 1.8) <= 4 * n01.standard_error());
}

TEST_CASE("batch loss prefactor and perfect case") {
    Matrix x(3, 2);
    x.data() = { 0, 0, 0, 0, 1e6, 0 };
    Embedding e{ x };
    Kernel k{ 1, 1 };
    Batch batch{ { 0 }, { 1 } };
    std::vector<EdgeEvent> negatives{ { 0, 2 }, { 1, 2 } };
    const double perfect = batch_loss(batch, negatives, e, k, 2, 1);
    REQUIRE(perfect >= 0);
    REQUIRE(perfect < 3 * 1e-4);

    Matrix y(2, 2);
    y.data() = { 0, 0, 1, 0 };
    Embedding f{ y };
    Batch single{ { 0 }, { 1 } };
    std::vector<EdgeEvent> neg{ { 0, 1 } };
    const double base = batch_loss(single, neg, f, k, 1, 1);
    Batch doubled{ { 0, 0 }, { 1, 1 } };
    std::vector<EdgeEvent> neg2{ { 0, 1 }, { 0, 1 } };
    REQUIRE(batch_loss(doubled, neg2, f, k, 1, 1) == Catch::Approx(2 * base));
    REQUIRE(base == Catch::Approx(-(clamped_log(0.5) + clamped_log(0.5)) / 2));
}

TEST_CASE("parametric repulsive prefactor at b = 2") {
    // m (b - 1) / b = m / 2: total repulsive weight is m mu(E).
    oracle::Gen gen(61);
    auto g = oracle::to_graph(gen.weights(10, 0.4));
    REQUIRE(pumap_total_repulsive_weight(g, 6, 2) == Catch::Approx(6 * g.total_weight()).epsilon(1e-12));
    REQUIRE(pumap_total_repulsive_weight(g, 5, 32) == Catch::Approx(2 * 5 * g.total_weight() * 31 / 32).epsilon(1e-12));
}

TEST_CASE("expected batch loss agrees with Monte Carlo") {
    auto data = gen_ring(10, 4.0, 0.25, 5);
    auto g = build_graph(data, 4).graph;
    Embedding e{ data.points };
    Kernel k = default_kernel();
    BatchSimConfig config;
    config.batch_size = 6;
    config.m = 2;
    config.trials = 20000;
    auto est = mc_expectations(g, config, &e, k);
    const double exact = pumap_expected_batch_loss(g, e, k, config.m, config.batch_size);
    REQUIRE(std::abs(est.mean_loss - exact) <= 4 * est.se_loss);
}

TEST_CASE("edge-count covariance is negative for distinct pairs") {
    SimilarityGraph g(3, { { 0, 1, 0.8 }, { 1, 2, 0.6 } });
    BatchSimConfig config;
    config.batch_size = 16;
    config.trials = 40000;
    auto cov = mc_edge_count_covariance(g, config, { 0, 1 }, { 1, 2 });
    const double me = g.total_weight();
    const double want = -16.0 * 0.8 * 0.6 / (4 * me * me);
    REQUIRE(cov.covariance < 0);
    REQUIRE(std::abs(cov.covariance - want) <= 4 * cov.standard_error);
}
