#ifndef EFFUMAP_LOSSES_HPP
#define EFFUMAP_LOSSES_HPP

#include "common.hpp"
#include "kernel.hpp"
#include "optimizer.hpp"
#include "simgraph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * @file losses.hpp
 *
 * @brief Loss functionals over a similarity graph and an embedding, and the
 * diagnostics built on them.
 *
 * Losses are reported as positive numbers: L^a = -log(nu) and L^r = -log(1 - nu).
 * Three objectives are provided:
 *
 * - purported: 2 sum_{i<j} mu_ij L^a_ij + (1 - mu_ij) L^r_ij
 * - effective: 2 sum_{i<j} mu_ij L^a_ij + w_ij L^r_ij, with w_ij = (d_i + d_j) m / (2n)
 * - actual: L^a over the fired edges of one epoch plus L^r over its negative samples
 *
 * The expectation of the actual loss over epochs is the effective loss.
 */

namespace effumap {

/**
 * `clamped` evaluates log(min(x + 1e-4, 1)), as all reported losses do.
 * `exact` evaluates log(x); finite-difference gradient checks need it, since
 * the clamp offset is not small relative to their tolerance.
 */
enum class LogMode { clamped, exact };

inline constexpr double log_clamp_offset = 1e-4;

inline double clamped_log(double x) {
    return std::log(std::min(x + log_clamp_offset, 1.0));
}

inline double loss_log(double x, LogMode mode) {
    return mode == LogMode::clamped ? clamped_log(x) : std::log(x);
}

/**
 * A similarity nu together with 1 - nu, kept separately so that 1 - nu does not
 * lose precision when nu is close to 1.
 */
struct Similarity {
    double nu;
    double complement;

    static Similarity of(double nu) { return { nu, 1.0 - nu }; }
};

/// phi and 1 - phi = a d^(2b) / (1 + a d^(2b)) from a squared distance.
inline Similarity embedding_similarity(const Kernel& k, double dist2) {
    const double t = k.a * std::pow(dist2, k.b);
    return { 1.0 / (1.0 + t), t / (1.0 + t) };
}

inline double attr_loss(const Similarity& s, LogMode mode) {
    return -loss_log(s.nu, mode);
}

inline double rep_loss(const Similarity& s, LogMode mode) {
    return -loss_log(s.complement, mode);
}

struct LossParts {
    double attr = 0;
    double rep = 0;
    double total = 0;
};

/**
 * @cond
 */
namespace detail {

inline LossParts finish(const CompensatedSum& attr, const CompensatedSum& rep) {
    LossParts out;
    out.attr = attr.value();
    out.rep = rep.value();
    out.total = out.attr + out.rep;
    return out;
}

/**
 * Calls `fun(i, j, mu_ij)` for every unordered pair i < j, in row-major order.
 */
template<class Function_>
void for_each_pair(const SimilarityGraph& graph, Function_ fun) {
    const std::size_t n = graph.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto row = graph.row(i);
        auto it = std::upper_bound(row.begin(), row.end(), i, [](std::size_t v, const SimilarityGraph::Entry& e) { return v < e.node; });
        for (std::size_t j = i + 1; j < n; ++j) {
            double mu = 0;
            if (it != row.end() && it->node == j) {
                mu = graph.weight(it->edge);
                ++it;
            }
            fun(i, j, mu);
        }
    }
}

inline void check_sizes(const SimilarityGraph& graph, const Embedding& embedding) {
    if (graph.size() != embedding.size()) {
        throw std::invalid_argument("graph has " + std::to_string(graph.size()) + " nodes but embedding has " +
            std::to_string(embedding.size()) + " points");
    }
}

}
/**
 * @endcond
 */

/**
 * Purported loss for an arbitrary similarity assignment.
 * `nu(i, j)` returns the `Similarity` of the pair i < j.
 */
template<class Nu_>
LossParts purported_loss_from(const SimilarityGraph& graph, Nu_ nu, LogMode mode = LogMode::clamped) {
    CompensatedSum attr, rep;
    detail::for_each_pair(graph, [&](std::size_t i, std::size_t j, double mu) {
        const Similarity s = nu(i, j);
        if (mu > 0) {
            attr.add(2.0 * mu * attr_loss(s, mode));
        }
        if (mu < 1) {
            rep.add(2.0 * (1.0 - mu) * rep_loss(s, mode));
        }
    });
    return detail::finish(attr, rep);
}

inline LossParts purported_loss(const SimilarityGraph& graph, const Embedding& embedding, const Kernel& kernel,
    LogMode mode = LogMode::clamped)
{
    detail::check_sizes(graph, embedding);
    return purported_loss_from(graph, [&](std::size_t i, std::size_t j) {
        return embedding_similarity(kernel, squared_distance(embedding.point(i), embedding.point(j)));
    }, mode);
}

/**
 * Purported losses of one input similarity graph against four embedding similarities:
 * nu = mu itself, the diverged layout (nu = 0 off the diagonal), phi of the final
 * embedding, and phi of the original data.
 */
struct LossTableRow {
    double nu_equals_mu = 0;
    double diverged = 0;
    double phi_final = 0;
    double phi_original = 0;
};

inline LossTableRow purported_loss_row(const SimilarityGraph& graph, const Embedding& final_embedding, const Embedding& original,
    const Kernel& kernel, LogMode mode = LogMode::clamped)
{
    LossTableRow out;
    out.nu_equals_mu = purported_loss_from(graph, [&](std::size_t i, std::size_t j) { return Similarity::of(graph.weight(i, j)); }, mode).total;
    out.diverged = purported_loss_from(graph, [](std::size_t, std::size_t) { return Similarity::of(0.0); }, mode).total;
    out.phi_final = purported_loss(graph, final_embedding, kernel, mode).total;
    out.phi_original = purported_loss(graph, original, kernel, mode).total;
    return out;
}

/**
 * Repulsive weight (d_i + d_j) m / (2n) of the pair (i, j) in the effective loss.
 */
inline double repulsive_weight(const SimilarityGraph& graph, std::size_t m, std::size_t i, std::size_t j) {
    return (graph.degree(i) + graph.degree(j)) * static_cast<double>(m) / (2.0 * static_cast<double>(graph.size()));
}

inline LossParts effective_loss(const SimilarityGraph& graph, const Embedding& embedding, const Kernel& kernel, std::size_t m,
    LogMode mode = LogMode::clamped)
{
    detail::check_sizes(graph, embedding);
    CompensatedSum attr, rep;
    detail::for_each_pair(graph, [&](std::size_t i, std::size_t j, double mu) {
        const auto s = embedding_similarity(kernel, squared_distance(embedding.point(i), embedding.point(j)));
        if (mu > 0) {
            attr.add(2.0 * mu * attr_loss(s, mode));
        }
        if (m > 0) {
            rep.add(2.0 * repulsive_weight(graph, m, i, j) * rep_loss(s, mode));
        }
    });
    return detail::finish(attr, rep);
}

/**
 * Loss realized by one epoch's events, evaluated on `snapshot`.
 * Negative samples that hit their own head (s == i) carry no gradient and are skipped.
 */
inline LossParts actual_epoch_loss(const EpochSampleLog& log, const Embedding& snapshot, const Kernel& kernel,
    LogMode mode = LogMode::clamped)
{
    CompensatedSum attr, rep;
    for (std::size_t ev = 0; ev < log.edges.size(); ++ev) {
        const auto [i, j] = log.edges[ev];
        attr.add(attr_loss(embedding_similarity(kernel, squared_distance(snapshot.point(i), snapshot.point(j))), mode));
        for (std::size_t s : log.negatives_of(ev)) {
            if (s != i) {
                rep.add(rep_loss(embedding_similarity(kernel, squared_distance(snapshot.point(i), snapshot.point(s))), mode));
            }
        }
    }
    return detail::finish(attr, rep);
}

/**
 * nu* = mu / (mu + w), the minimizer over nu of -(mu log nu + w log(1 - nu)).
 */
inline double target_similarity(double mu, double weight) {
    if (mu == 0) {
        return 0;
    }
    return mu / (mu + weight);
}

/**
 * Targets nu*_ij for the effective loss. Zero off the graph's edges, so only the
 * edge values are stored, aligned with `graph.edges()`.
 */
struct TargetSimilarities {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<double> edge_values;

    /// Value for any pair; zero on the diagonal and off the edge set.
    double at(const SimilarityGraph& graph, std::size_t i, std::size_t j) const {
        if (i == j) {
            return 0;
        }
        for (const auto& entry : graph.row(i)) {
            if (entry.node == j) {
                return edge_values[entry.edge];
            }
        }
        return 0;
    }

    Matrix dense(const SimilarityGraph& graph) const {
        Matrix out(n, n);
        const auto& edges = graph.edges();
        for (std::size_t e = 0; e < edges.size(); ++e) {
            out(edges[e].i, edges[e].j) = edge_values[e];
            out(edges[e].j, edges[e].i) = edge_values[e];
        }
        return out;
    }
};

/**
 * With m = 0 every positive pair gets target exactly 1.
 */
inline TargetSimilarities target_similarities(const SimilarityGraph& graph, std::size_t m) {
    TargetSimilarities out;
    out.n = graph.size();
    out.m = m;
    const auto& edges = graph.edges();
    out.edge_values.resize(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        out.edge_values[e] = target_similarity(edges[e].weight, repulsive_weight(graph, m, edges[e].i, edges[e].j));
    }
    return out;
}

/**
 * The effective loss rewritten as sum_{i<j} 2 (mu_ij + w_ij) BCE(nu*_ij, nu_ij).
 * Pairs are listed in row-major order of i < j.
 */
struct BceDecomposition {
    std::vector<double> pair_weights;
    std::vector<double> bce;
    double total = 0;
};

inline BceDecomposition weighted_bce_decomposition(const SimilarityGraph& graph, const Embedding& embedding, const Kernel& kernel,
    std::size_t m, LogMode mode = LogMode::clamped)
{
    detail::check_sizes(graph, embedding);
    BceDecomposition out;
    const std::size_t n = graph.size();
    out.pair_weights.reserve(n * (n - 1) / 2);
    out.bce.reserve(n * (n - 1) / 2);

    CompensatedSum total;
    detail::for_each_pair(graph, [&](std::size_t i, std::size_t j, double mu) {
        const double w = repulsive_weight(graph, m, i, j);
        const double weight = mu + w;
        const auto s = embedding_similarity(kernel, squared_distance(embedding.point(i), embedding.point(j)));
        double bce = 0;
        if (weight > 0) {
            const double target = mu / weight;
            if (target > 0) {
                bce += target * attr_loss(s, mode);
            }
            if (target < 1) {
                bce += (w / weight) * rep_loss(s, mode);
            }
        }
        out.pair_weights.push_back(weight);
        out.bce.push_back(bce);
        total.add(2.0 * weight * bce);
    });
    out.total = total.value();
    return out;
}

struct RepulsionWeightStats {
    /// Mean of 1 - mu_ij over unordered pairs i < j.
    double mean_complement = 0;
    /// Max and mean of (d_i + d_j) m / (2n) over unordered pairs i < j.
    double max_weight = 0;
    double mean_weight = 0;
    /// sum_{i,j} mu_ij over ordered pairs, equal to 2 mu(E).
    double total_attractive = 0;
    /// sum_{i,j} (d_i + d_j) m / (2n) over all ordered pairs including i == j, equal to 2 m mu(E).
    double total_repulsive = 0;
    /// total_attractive / total_repulsive = 1 / m.
    double ratio = 0;
};

inline RepulsionWeightStats repulsion_weight_stats(const SimilarityGraph& graph, std::size_t m) {
    RepulsionWeightStats out;
    const std::size_t n = graph.size();
    CompensatedSum complement, weight, total_rep;
    detail::for_each_pair(graph, [&](std::size_t i, std::size_t j, double mu) {
        complement.add(1.0 - mu);
        const double w = repulsive_weight(graph, m, i, j);
        weight.add(w);
        out.max_weight = std::max(out.max_weight, w);
    });
    const double npairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    out.mean_complement = complement.value() / npairs;
    out.mean_weight = weight.value() / npairs;

    CompensatedSum attr;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& entry : graph.row(i)) {
            attr.add(graph.weight(entry.edge));
        }
        for (std::size_t j = 0; j < n; ++j) {
            total_rep.add(repulsive_weight(graph, m, i, j));
        }
    }
    out.total_attractive = attr.value();
    out.total_repulsive = total_rep.value();
    out.ratio = out.total_repulsive > 0 ? out.total_attractive / out.total_repulsive : std::numeric_limits<double>::infinity();
    return out;
}

/**
 * Max-norm of H_ij - H_ji^T, where H_ij = d E(g_i) / d e_j is obtained by central
 * differences (step `h`) of `expected_gradient` with guards removed from `kernel`.
 * Zero up to discretization error iff the expected gradient field is conservative near (i, j).
 */
inline double cross_partial_asymmetry(const SimilarityGraph& graph, const Embedding& embedding, const Kernel& kernel, std::size_t m,
    bool push_tail, std::size_t i, std::size_t j, double h = 1e-5)
{
    detail::check_sizes(graph, embedding);
    if (i == j || i >= graph.size() || j >= graph.size()) {
        throw std::invalid_argument("cross_partial_asymmetry needs two distinct valid nodes");
    }
    for (std::size_t a = 0; a < embedding.size(); ++a) {
        for (std::size_t b = a + 1; b < embedding.size(); ++b) {
            if (squared_distance(embedding.point(a), embedding.point(b)) == 0) {
                throw std::invalid_argument("cross_partial_asymmetry: points " + std::to_string(a) + " and " +
                    std::to_string(b) + " coincide");
            }
        }
    }

    const Kernel exact = kernel.exact();
    const std::size_t d = embedding.dim();

    // block(u, v)(a, c) = d E(g_u)_a / d (e_v)_c
    auto block = [&](std::size_t u, std::size_t v) {
        Matrix out(d, d);
        Embedding work = embedding;
        for (std::size_t c = 0; c < d; ++c) {
            const double orig = work.coords(v, c);
            work.coords(v, c) = orig + h;
            auto plus = expected_gradient(graph, work, exact, m, push_tail, u);
            work.coords(v, c) = orig - h;
            auto minus = expected_gradient(graph, work, exact, m, push_tail, u);
            work.coords(v, c) = orig;
            for (std::size_t a = 0; a < d; ++a) {
                out(a, c) = (plus[a] - minus[a]) / (2 * h);
            }
        }
        return out;
    };

    const Matrix hij = block(i, j), hji = block(j, i);
    double out = 0;
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t c = 0; c < d; ++c) {
            out = std::max(out, std::abs(hij(a, c) - hji(c, a)));
        }
    }
    return out;
}

enum class PairSubset { all, positive_mu, zero_mu };

inline PairSubset parse_pair_subset(const std::string& s) {
    if (s == "all") return PairSubset::all;
    if (s == "positive" || s == "positive_mu") return PairSubset::positive_mu;
    if (s == "zero" || s == "zero_mu") return PairSubset::zero_mu;
    throw std::invalid_argument("unknown pair subset '" + s + "'");
}

inline const char* to_string(PairSubset s) {
    switch (s) {
        case PairSubset::all: return "all";
        case PairSubset::positive_mu: return "positive_mu";
        case PairSubset::zero_mu: return "zero_mu";
    }
    return "?";
}

/**
 * Aligned histograms of mu, nu* and nu over unordered pairs, on equal-width bins of [0, 1].
 * Values equal to 1 fall in the last bin. `log_counts` is a display hint for the all-pairs view.
 */
struct SimilarityHistograms {
    std::vector<double> bin_lo, bin_hi;
    std::vector<std::size_t> count_mu, count_target, count_nu;
    PairSubset subset = PairSubset::all;
    bool log_counts = false;
};

inline SimilarityHistograms similarity_histograms(const SimilarityGraph& graph, const TargetSimilarities& targets,
    const Embedding& embedding, const Kernel& kernel, std::size_t bins, PairSubset subset)
{
    detail::check_sizes(graph, embedding);
    if (bins < 1) {
        throw std::invalid_argument("similarity_histograms: need at least one bin");
    }
    if (targets.edge_values.size() != graph.num_edges()) {
        throw std::invalid_argument("similarity_histograms: targets do not belong to this graph");
    }

    SimilarityHistograms out;
    out.subset = subset;
    out.log_counts = subset == PairSubset::all;
    out.count_mu.assign(bins, 0);
    out.count_target.assign(bins, 0);
    out.count_nu.assign(bins, 0);
    for (std::size_t b = 0; b < bins; ++b) {
        out.bin_lo.push_back(static_cast<double>(b) / static_cast<double>(bins));
        out.bin_hi.push_back(static_cast<double>(b + 1) / static_cast<double>(bins));
    }

    auto bin_of = [&](double v) {
        auto b = static_cast<std::size_t>(v * static_cast<double>(bins));
        return std::min(b, bins - 1);
    };

    // Walk rows with a cursor so both mu and the edge index (for nu*) are at hand.
    const std::size_t n = graph.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto row = graph.row(i);
        auto it = std::upper_bound(row.begin(), row.end(), i, [](std::size_t v, const SimilarityGraph::Entry& e) { return v < e.node; });
        for (std::size_t j = i + 1; j < n; ++j) {
            double mu = 0, target = 0;
            if (it != row.end() && it->node == j) {
                mu = graph.weight(it->edge);
                target = targets.edge_values[it->edge];
                ++it;
            }
            if ((subset == PairSubset::positive_mu && mu == 0) || (subset == PairSubset::zero_mu && mu > 0)) {
                continue;
            }
            const double nu = phi_sq(kernel, squared_distance(embedding.point(i), embedding.point(j)));
            ++out.count_mu[bin_of(mu)];
            ++out.count_target[bin_of(target)];
            ++out.count_nu[bin_of(nu)];
        }
    }
    return out;
}

/**
 * Total-variation distance between two count histograms over the same bins.
 */
inline double total_variation(const std::vector<std::size_t>& p, const std::vector<std::size_t>& q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("total_variation: histograms have different bin counts");
    }
    double sp = 0, sq = 0;
    for (std::size_t b = 0; b < p.size(); ++b) {
        sp += static_cast<double>(p[b]);
        sq += static_cast<double>(q[b]);
    }
    if (sp == 0 || sq == 0) {
        throw std::invalid_argument("total_variation: empty histogram");
    }
    double out = 0;
    for (std::size_t b = 0; b < p.size(); ++b) {
        out += std::abs(static_cast<double>(p[b]) / sp - static_cast<double>(q[b]) / sq);
    }
    return out / 2;
}

inline void write_histograms(const SimilarityHistograms& h, std::ostream& out) {
    out << "bin_lo,bin_hi,count_mu,count_target,count_nu\n";
    for (std::size_t b = 0; b < h.bin_lo.size(); ++b) {
        out << format_double(h.bin_lo[b]) << ',' << format_double(h.bin_hi[b]) << ',' << h.count_mu[b] << ','
            << h.count_target[b] << ',' << h.count_nu[b] << '\n';
    }
}

/**
 * Losses after one epoch. `epoch` 0 is the initial embedding, for which the actual loss is zero.
 */
struct LossRecord {
    std::size_t epoch = 0;
    LossParts purported;
    LossParts effective;
    LossParts actual;
};

inline void write_loss_records(const std::vector<LossRecord>& records, std::ostream& out) {
    out << "epoch,purported_attr,purported_rep,purported_total,effective_attr,effective_rep,effective_total,"
           "actual_attr,actual_rep,actual_total\n";
    for (const auto& r : records) {
        out << r.epoch;
        for (const LossParts* p : { &r.purported, &r.effective, &r.actual }) {
            out << ',' << format_double(p->attr) << ',' << format_double(p->rep) << ',' << format_double(p->total);
        }
        out << '\n';
    }
}

}

#endif
