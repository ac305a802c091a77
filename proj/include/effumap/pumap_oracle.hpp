#ifndef EFFUMAP_PUMAP_ORACLE_HPP
#define EFFUMAP_PUMAP_ORACLE_HPP

#include "common.hpp"
#include "kernel.hpp"
#include "losses.hpp"
#include "optimizer.hpp"
#include "simgraph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

/**
 * @file pumap_oracle.hpp
 *
 * @brief Monte-Carlo simulation of batch assembly with permutation-based negative
 * sampling over a fixed embedding, and the closed-form expectations it is checked against.
 *
 * One trial draws b ordered edges (i, j) with probability mu_ij / (2 mu(E)), repeats
 * heads and tails m times each, and pairs the repeated heads with a random permutation
 * of the repeated tails. P_ij counts edge (i, j) in the batch and N_ij counts (i, j)
 * among the m b negative pairs.
 *
 * For pairs, E(P_ij) = b mu_ij / (2 mu(E)) and
 * E(N_ij) = m (b - 1) d_i d_j / (4 mu(E)^2) + m mu_ij / (2 mu(E)).
 * The second term comes from a head and tail drawn in the same batch slot.
 */

namespace effumap {

struct BatchSimConfig {
    std::size_t batch_size = 32;
    std::size_t m = 5;
    std::size_t trials = 20000;
    std::uint64_t seed = 0;
};

inline void validate(const BatchSimConfig& c) {
    if (c.batch_size < 2) {
        throw std::invalid_argument("batch simulation: batch size must be at least 2");
    }
    if (c.m < 1) {
        throw std::invalid_argument("batch simulation: m must be at least 1");
    }
    if (c.trials < 1) {
        throw std::invalid_argument("batch simulation: trials must be at least 1");
    }
}

/**
 * Categorical sampler over the ordered edges of a graph, with probability proportional to mu.
 */
class EdgeSampler {
public:
    explicit EdgeSampler(const SimilarityGraph& graph) {
        const std::size_t n = graph.size();
        double running = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& entry : graph.row(i)) {
                running += graph.weight(entry.edge);
                cumulative.push_back(running);
                pairs.push_back({ i, entry.node });
            }
        }
        if (!(running > 0)) {
            throw std::invalid_argument("edge sampler: graph has no positive weight");
        }
    }

    template<class Engine_>
    EdgeEvent operator()(Engine_& rng) const {
        const double u = uniform01(rng) * cumulative.back();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative.begin(), cumulative.size() - 1));
        return pairs[idx];
    }

private:
    std::vector<double> cumulative;
    std::vector<EdgeEvent> pairs;
};

struct Batch {
    std::vector<std::size_t> heads;
    std::vector<std::size_t> tails;
};

template<class Engine_>
Batch assemble_batch(const EdgeSampler& sampler, std::size_t batch_size, Engine_& rng) {
    Batch out;
    out.heads.reserve(batch_size);
    out.tails.reserve(batch_size);
    for (std::size_t b = 0; b < batch_size; ++b) {
        auto e = sampler(rng);
        out.heads.push_back(e.head);
        out.tails.push_back(e.tail);
    }
    return out;
}

template<class Engine_>
Batch assemble_batch(const SimilarityGraph& graph, const BatchSimConfig& config, Engine_& rng) {
    return assemble_batch(EdgeSampler(graph), config.batch_size, rng);
}

/**
 * Repeats each head and tail m times (element-wise) and pairs the repeated heads
 * with a uniformly permuted copy of the repeated tails.
 */
template<class Engine_>
std::vector<EdgeEvent> negative_pairs(const std::vector<std::size_t>& heads, const std::vector<std::size_t>& tails, std::size_t m, Engine_& rng) {
    if (heads.size() != tails.size()) {
        throw std::invalid_argument("negative_pairs: heads and tails differ in length");
    }
    std::vector<std::size_t> rep_tails;
    rep_tails.reserve(tails.size() * m);
    for (std::size_t t : tails) {
        rep_tails.insert(rep_tails.end(), m, t);
    }
    shuffle(rng, rep_tails);

    std::vector<EdgeEvent> out;
    out.reserve(rep_tails.size());
    std::size_t beta = 0;
    for (std::size_t h : heads) {
        for (std::size_t r = 0; r < m; ++r, ++beta) {
            out.push_back(EdgeEvent{ h, rep_tails[beta] });
        }
    }
    return out;
}

/**
 * E(P_ij) for the ordered pair (i, j).
 */
inline double expected_edge_count(const SimilarityGraph& graph, std::size_t batch_size, std::size_t i, std::size_t j) {
    return static_cast<double>(batch_size) * graph.weight(i, j) / (2 * graph.total_weight());
}

/**
 * The product term m (b - 1) d_i d_j / (4 mu(E)^2) of E(N_ij) alone, without the same-slot term.
 */
inline double expected_negative_count_cross(const SimilarityGraph& graph, std::size_t m, std::size_t batch_size, std::size_t i, std::size_t j) {
    const double me = graph.total_weight();
    return static_cast<double>(m) * static_cast<double>(batch_size - 1) * graph.degree(i) * graph.degree(j) / (4 * me * me);
}

/**
 * Exact E(N_ij), including the same-slot term m mu_ij / (2 mu(E)).
 */
inline double expected_negative_count(const SimilarityGraph& graph, std::size_t m, std::size_t batch_size, std::size_t i, std::size_t j) {
    return expected_negative_count_cross(graph, m, batch_size, i, j) +
        static_cast<double>(m) * graph.weight(i, j) / (2 * graph.total_weight());
}

/**
 * Monte-Carlo estimates over all n^2 ordered pairs (row-major, pair (i, j) at i * n + j).
 */
struct PairCountEstimates {
    std::size_t n = 0;
    std::size_t trials = 0;
    std::vector<double> mean_P, se_P, mean_N, se_N;
    /// Mean and standard error of the per-trial batch loss, when an embedding was supplied.
    double mean_loss = 0, se_loss = 0;
    /// Trials where sum P != b or sum N != m b; always 0.
    std::size_t conservation_violations = 0;
};

/**
 * Normalized batch loss 1/((m+1) b) [sum_batch L^a + sum_negatives L^r].
 * Negative pairs with i == j are included (their repulsive term is the clamp floor).
 */
inline double batch_loss(const Batch& batch, const std::vector<EdgeEvent>& negatives, const Embedding& embedding, const Kernel& kernel,
    std::size_t m, std::size_t batch_size, LogMode mode = LogMode::clamped)
{
    CompensatedSum sum;
    for (std::size_t beta = 0; beta < batch.heads.size(); ++beta) {
        sum.add(attr_loss(embedding_similarity(kernel, squared_distance(embedding.point(batch.heads[beta]), embedding.point(batch.tails[beta]))), mode));
    }
    for (const auto& neg : negatives) {
        sum.add(rep_loss(embedding_similarity(kernel, squared_distance(embedding.point(neg.head), embedding.point(neg.tail))), mode));
    }
    return sum.value() / (static_cast<double>(m + 1) * static_cast<double>(batch_size));
}

/**
 * Runs `config.trials` independent (batch, permutation) draws. If `embedding` is given,
 * the batch loss of each trial is also averaged.
 */
inline PairCountEstimates mc_expectations(const SimilarityGraph& graph, const BatchSimConfig& config,
    const Embedding* embedding = nullptr, const Kernel& kernel = {}, LogMode mode = LogMode::clamped)
{
    validate(config);
    const std::size_t n = graph.size(), n2 = n * n;
    const EdgeSampler sampler(graph);
    auto rng = make_rng(config.seed, stream::pumap);

    // Counts are small integers, so the sums below are exact.
    std::vector<double> sum_P(n2), sumsq_P(n2), sum_N(n2), sumsq_N(n2);
    std::vector<std::size_t> count_P(n2), count_N(n2);
    std::vector<std::size_t> touched;
    RunningStats loss;
    PairCountEstimates out;
    out.n = n;
    out.trials = config.trials;

    for (std::size_t t = 0; t < config.trials; ++t) {
        auto batch = assemble_batch(sampler, config.batch_size, rng);
        auto negatives = negative_pairs(batch.heads, batch.tails, config.m, rng);

        touched.clear();
        for (std::size_t beta = 0; beta < batch.heads.size(); ++beta) {
            const std::size_t p = batch.heads[beta] * n + batch.tails[beta];
            if (count_P[p] == 0 && count_N[p] == 0) {
                touched.push_back(p);
            }
            ++count_P[p];
        }
        for (const auto& neg : negatives) {
            const std::size_t p = neg.head * n + neg.tail;
            if (count_P[p] == 0 && count_N[p] == 0) {
                touched.push_back(p);
            }
            ++count_N[p];
        }

        std::size_t total_P = 0, total_N = 0;
        for (std::size_t p : touched) {
            const auto cp = static_cast<double>(count_P[p]), cn = static_cast<double>(count_N[p]);
            total_P += count_P[p];
            total_N += count_N[p];
            sum_P[p] += cp;
            sumsq_P[p] += cp * cp;
            sum_N[p] += cn;
            sumsq_N[p] += cn * cn;
            count_P[p] = 0;
            count_N[p] = 0;
        }
        if (total_P != config.batch_size || total_N != config.batch_size * config.m) {
            ++out.conservation_violations;
        }

        if (embedding) {
            loss.add(batch_loss(batch, negatives, *embedding, kernel, config.m, config.batch_size, mode));
        }
    }

    const auto T = static_cast<double>(config.trials);
    auto finish = [&](const std::vector<double>& s, const std::vector<double>& ss, std::vector<double>& mean, std::vector<double>& se) {
        mean.resize(n2);
        se.resize(n2);
        for (std::size_t p = 0; p < n2; ++p) {
            mean[p] = s[p] / T;
            const double var = config.trials > 1 ? std::max(0.0, (ss[p] - T * mean[p] * mean[p]) / (T - 1)) : 0.0;
            se[p] = std::sqrt(var / T);
        }
    };
    finish(sum_P, sumsq_P, out.mean_P, out.se_P);
    finish(sum_N, sumsq_N, out.mean_N, out.se_N);
    out.mean_loss = loss.mean();
    out.se_loss = loss.standard_error();
    return out;
}

/**
 * Sample covariance of P_a and P_b (ordered pairs given as i * n + j) over `trials` batches,
 * with a delta-method standard error of the estimate.
 */
struct CovarianceEstimate {
    double covariance = 0;
    double standard_error = 0;
};

inline CovarianceEstimate mc_edge_count_covariance(const SimilarityGraph& graph, const BatchSimConfig& config,
    std::pair<std::size_t, std::size_t> first, std::pair<std::size_t, std::size_t> second)
{
    validate(config);
    const EdgeSampler sampler(graph);
    auto rng = make_rng(config.seed, stream::pumap);

    std::vector<double> xs, ys;
    xs.reserve(config.trials);
    ys.reserve(config.trials);
    for (std::size_t t = 0; t < config.trials; ++t) {
        auto batch = assemble_batch(sampler, config.batch_size, rng);
        double x = 0, y = 0;
        for (std::size_t beta = 0; beta < batch.heads.size(); ++beta) {
            const std::pair<std::size_t, std::size_t> e{ batch.heads[beta], batch.tails[beta] };
            x += (e == first);
            y += (e == second);
        }
        xs.push_back(x);
        ys.push_back(y);
    }

    const auto T = static_cast<double>(config.trials);
    double mx = 0, my = 0;
    for (std::size_t t = 0; t < config.trials; ++t) {
        mx += xs[t];
        my += ys[t];
    }
    mx /= T;
    my /= T;
    RunningStats products;
    for (std::size_t t = 0; t < config.trials; ++t) {
        products.add((xs[t] - mx) * (ys[t] - my));
    }
    CovarianceEstimate out;
    out.covariance = products.mean() * T / (T - 1);
    out.standard_error = products.standard_error();
    return out;
}

/**
 * Expected batch loss as written in the closed form of the parametric effective loss:
 * 1/(2 (m+1) mu(E)) sum_{i,j} [mu_ij L^a_ij + m ((b-1)/b) d_i d_j / (2 mu(E)) L^r_ij],
 * summed over all ordered pairs including i == j. It omits the same-slot term of E(N_ij);
 * see `pumap_expected_batch_loss` for the exact expectation.
 */
inline double pumap_effective_loss(const SimilarityGraph& graph, const Embedding& embedding, const Kernel& kernel, std::size_t m,
    std::size_t batch_size, LogMode mode = LogMode::clamped)
{
    const std::size_t n = graph.size();
    const double me = graph.total_weight();
    const double rep_scale = static_cast<double>(m) * static_cast<double>(batch_size - 1) / static_cast<double>(batch_size) / (2 * me);
    CompensatedSum sum;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto s = embedding_similarity(kernel, squared_distance(embedding.point(i), embedding.point(j)));
            const double mu = i == j ? 0.0 : graph.weight(i, j);
            if (mu > 0) {
                sum.add(mu * attr_loss(s, mode));
            }
            sum.add(rep_scale * graph.degree(i) * graph.degree(j) * rep_loss(s, mode));
        }
    }
    return sum.value() / (2 * static_cast<double>(m + 1) * me);
}

/**
 * Exact E(batch loss) = 1/((m+1) b) sum_{i,j} [E(P_ij) L^a_ij + E(N_ij) L^r_ij].
 */
inline double pumap_expected_batch_loss(const SimilarityGraph& graph, const Embedding& embedding, const Kernel& kernel, std::size_t m,
    std::size_t batch_size, LogMode mode = LogMode::clamped)
{
    const std::size_t n = graph.size();
    CompensatedSum sum;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto s = embedding_similarity(kernel, squared_distance(embedding.point(i), embedding.point(j)));
            const double ep = i == j ? 0.0 : expected_edge_count(graph, batch_size, i, j);
            if (ep > 0) {
                sum.add(ep * attr_loss(s, mode));
            }
            sum.add(expected_negative_count(graph, m, batch_size, i, j) * rep_loss(s, mode));
        }
    }
    return sum.value() / (static_cast<double>(m + 1) * static_cast<double>(batch_size));
}

/**
 * sum over all ordered pairs of m ((b-1)/b) d_i d_j / (2 mu(E)), which equals 2 m mu(E) (b-1)/b.
 */
inline double pumap_total_repulsive_weight(const SimilarityGraph& graph, std::size_t m, std::size_t batch_size) {
    const std::size_t n = graph.size();
    const double me = graph.total_weight();
    const double scale = static_cast<double>(m) * static_cast<double>(batch_size - 1) / static_cast<double>(batch_size) / (2 * me);
    CompensatedSum sum;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            sum.add(scale * graph.degree(i) * graph.degree(j));
        }
    }
    return sum.value();
}

}

#endif
