#ifndef EFFUMAP_SIMGRAPH_HPP
#define EFFUMAP_SIMGRAPH_HPP

#include "common.hpp"
#include "datagen.hpp"
#include "kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

/**
 * @file simgraph.hpp
 *
 * @brief High-dimensional similarity graph: exact kNN search, per-point bandwidth
 * calibration, directed and fuzzy-union symmetric similarities, and the dense or
 * perturbed variants used for the toy experiments.
 */

namespace effumap {

enum class Metric { euclidean, cosine };

inline const char* to_string(Metric m) {
    return m == Metric::euclidean ? "euclidean" : "cosine";
}

inline Metric parse_metric(const std::string& s) {
    if (s == "euclidean") {
        return Metric::euclidean;
    }
    if (s == "cosine") {
        return Metric::cosine;
    }
    throw std::invalid_argument("unknown metric '" + s + "'");
}

/**
 * Exactly k neighbors per point, excluding the point itself, sorted by
 * nondecreasing distance with ties broken by smaller id.
 */
struct NeighborLists {
    std::size_t n = 0;
    std::size_t k = 0;
    Metric metric = Metric::euclidean;
    std::vector<std::size_t> ids;
    std::vector<double> distances;

    std::span<const std::size_t> neighbors(std::size_t i) const { return { ids.data() + i * k, k }; }
    std::span<const double> dists(std::size_t i) const { return { distances.data() + i * k, k }; }
};

/**
 * Exhaustive kNN search. Cosine distance is 1 - x.y / (|x| |y|) and rejects zero vectors.
 */
inline NeighborLists knn_brute(const Dataset& data, std::size_t k, Metric metric = Metric::euclidean) {
    const std::size_t n = data.size();
    if (k < 1 || k >= n) {
        throw std::invalid_argument("knn_brute: need 1 <= k <= n - 1 (k = " + std::to_string(k) + ", n = " + std::to_string(n) + ")");
    }

    std::vector<double> norms;
    if (metric == Metric::cosine) {
        norms.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto x = data.points.row(i);
            norms[i] = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
            if (norms[i] == 0) {
                throw std::invalid_argument("knn_brute: zero vector at row " + std::to_string(i) + " under cosine metric");
            }
        }
    }

    auto distance = [&](std::size_t i, std::size_t j) {
        auto x = data.points.row(i), y = data.points.row(j);
        if (metric == Metric::euclidean) {
            return std::sqrt(squared_distance(x, y));
        }
        const double dot = std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
        return 1.0 - dot / (norms[i] * norms[j]);
    };

    NeighborLists out;
    out.n = n;
    out.k = k;
    out.metric = metric;
    out.ids.resize(n * k);
    out.distances.resize(n * k);

    std::vector<std::pair<double, std::size_t> > candidates;
    candidates.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        candidates.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                candidates.emplace_back(distance(i, j), j);
            }
        }
        std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end());
        for (std::size_t c = 0; c < k; ++c) {
            out.distances[i * k + c] = candidates[c].first;
            out.ids[i * k + c] = candidates[c].second;
        }
    }
    return out;
}

/**
 * Bracket and stopping rule for the bandwidth search.
 */
struct SigmaSearch {
    double sigma_min = 1e-8;
    double sigma_max = 1e6;
    double tol = 1e-5;
    int max_iter = 64;
};

struct SigmaResult {
    double sigma = 1;
    /// The target sum was unreachable inside the bracket and `sigma` is a clamped boundary.
    bool degenerate = false;
    /// sum_j exp(-offset_j / sigma) - log2(k) at the returned sigma.
    double residual = 0;
};

/**
 * Finds sigma such that sum_j exp(-offsets[j] / sigma) = log2(k), k = offsets.size().
 *
 * `offsets` are distances minus the nearest-neighbor distance, so offsets[0] == 0.
 * The sum is increasing in sigma, which makes bisection (on log sigma) safe.
 * All-zero offsets give a sum of k for any sigma; that case returns `sigma_max` flagged.
 */
inline SigmaResult smooth_knn_sigma(std::span<const double> offsets, const SigmaSearch& search = {}) {
    const std::size_t k = offsets.size();
    if (k < 2) {
        throw std::invalid_argument("smooth_knn_sigma: need at least 2 neighbors");
    }
    const double target = std::log2(static_cast<double>(k));

    auto total = [&](double sigma) {
        double s = 0;
        for (double o : offsets) {
            s += std::exp(-o / sigma);
        }
        return s;
    };

    SigmaResult out;
    if (std::all_of(offsets.begin(), offsets.end(), [](double o) { return o == 0; })) {
        out.sigma = search.sigma_max;
        out.degenerate = true;
        out.residual = static_cast<double>(k) - target;
        return out;
    }

    double lo = search.sigma_min, hi = search.sigma_max;
    const double at_lo = total(lo) - target, at_hi = total(hi) - target;
    if (at_lo > 0) {
        // Too many neighbors tied with the nearest one.
        out.sigma = lo;
        out.degenerate = std::abs(at_lo) > search.tol;
        out.residual = at_lo;
        return out;
    }
    if (at_hi < 0) {
        out.sigma = hi;
        out.degenerate = std::abs(at_hi) > search.tol;
        out.residual = at_hi;
        return out;
    }

    double mid = std::sqrt(lo * hi);
    double residual = total(mid) - target;
    for (int iter = 0; iter < search.max_iter && std::abs(residual) > search.tol; ++iter) {
        if (residual > 0) {
            hi = mid;
        } else {
            lo = mid;
        }
        mid = std::sqrt(lo * hi);
        residual = total(mid) - target;
    }

    out.sigma = mid;
    out.residual = residual;
    out.degenerate = std::abs(residual) > search.tol;
    return out;
}

/**
 * Directed similarities mu_{i->j} for the k neighbors of each point, in neighbor order.
 */
struct DirectedSimilarities {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<std::size_t> ids;
    std::vector<double> weights;

    std::span<const double> row(std::size_t i) const { return { weights.data() + i * k, k }; }

    double row_sum(std::size_t i) const {
        auto r = row(i);
        return std::accumulate(r.begin(), r.end(), 0.0);
    }
};

/**
 * mu_{i->i_j} = exp(-(d(x_i, x_{i_j}) - d(x_i, x_{i_1})) / sigma_i).
 */
inline DirectedSimilarities directed_similarities(const NeighborLists& neighbors, std::span<const double> sigmas) {
    if (sigmas.size() != neighbors.n) {
        throw std::invalid_argument("directed_similarities: one sigma per point required");
    }
    DirectedSimilarities out;
    out.n = neighbors.n;
    out.k = neighbors.k;
    out.ids = neighbors.ids;
    out.weights.resize(neighbors.ids.size());
    for (std::size_t i = 0; i < neighbors.n; ++i) {
        if (!(sigmas[i] > 0)) {
            throw std::invalid_argument("directed_similarities: sigma must be positive");
        }
        auto d = neighbors.dists(i);
        for (std::size_t c = 0; c < neighbors.k; ++c) {
            out.weights[i * neighbors.k + c] = std::exp(-(d[c] - d[0]) / sigmas[i]);
        }
    }
    return out;
}

/**
 * Undirected edge with i < j and weight in (0, 1].
 */
struct Edge {
    std::size_t i;
    std::size_t j;
    double weight;
};

/**
 * Metadata carried along from graph construction. Empty vectors when not applicable
 * (dense graphs have no kNN bandwidths).
 */
struct GraphInfo {
    std::size_t k = 0;
    Metric metric = Metric::euclidean;
    std::vector<double> sigma;
    std::vector<double> rho;
    std::vector<bool> degenerate;
};

/**
 * Sparse symmetric similarity graph.
 *
 * Each unordered pair is stored once in `edges()` (sorted by (i, j), i < j); the
 * adjacency view lists, for every node, its neighbors in ascending order together
 * with the index of the shared edge, so mu_ij and mu_ji are the same stored value.
 * mu_ii is never stored.
 */
class SimilarityGraph {
public:
    struct Entry {
        std::size_t node;
        std::size_t edge;
    };

    SimilarityGraph() = default;

    /**
     * @param n Number of nodes.
     * @param edges Unordered edges; zero weights are dropped, i > j is normalized,
     * duplicates and self-loops are rejected.
     * @param info Metadata to carry along.
     */
    SimilarityGraph(std::size_t n, std::vector<Edge> edges, GraphInfo info = {}) : num_nodes(n), meta(std::move(info)) {
        for (auto& e : edges) {
            if (e.i > e.j) {
                std::swap(e.i, e.j);
            }
            if (e.i == e.j || e.j >= n) {
                throw std::invalid_argument("SimilarityGraph: invalid edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ")");
            }
            if (!(e.weight >= 0 && e.weight <= 1)) {
                throw std::invalid_argument("SimilarityGraph: weight outside [0, 1]");
            }
        }
        std::erase_if(edges, [](const Edge& e) { return e.weight == 0; });
        std::sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) {
            return l.i < r.i || (l.i == r.i && l.j < r.j);
        });
        for (std::size_t e = 1; e < edges.size(); ++e) {
            if (edges[e].i == edges[e - 1].i && edges[e].j == edges[e - 1].j) {
                throw std::invalid_argument("SimilarityGraph: duplicate edge");
            }
        }
        edge_list = std::move(edges);
        rebuild();
    }

    std::size_t size() const { return num_nodes; }
    const std::vector<Edge>& edges() const { return edge_list; }
    std::size_t num_edges() const { return edge_list.size(); }

    /// Neighbors of `i` in ascending id order.
    std::span<const Entry> row(std::size_t i) const {
        return { adjacency.data() + offsets[i], offsets[i + 1] - offsets[i] };
    }

    double weight(std::size_t edge) const { return edge_list[edge].weight; }

    /// mu_ij by lookup; 0 for absent pairs and for i == j.
    double weight(std::size_t i, std::size_t j) const {
        auto r = row(i);
        auto it = std::lower_bound(r.begin(), r.end(), j, [](const Entry& e, std::size_t v) { return e.node < v; });
        if (it != r.end() && it->node == j) {
            return edge_list[it->edge].weight;
        }
        return 0;
    }

    double degree(std::size_t i) const { return degrees[i]; }
    const std::vector<double>& degree_vector() const { return degrees; }

    /// mu(E), half the sum of degrees.
    double total_weight() const { return half_total; }

    const GraphInfo& info() const { return meta; }

    /// Same sparsity pattern with new edge weights (aligned with `edges()`); zeros are dropped.
    SimilarityGraph with_weights(std::span<const double> weights) const {
        if (weights.size() != edge_list.size()) {
            throw std::invalid_argument("with_weights: one weight per edge required");
        }
        std::vector<Edge> updated = edge_list;
        for (std::size_t e = 0; e < updated.size(); ++e) {
            updated[e].weight = weights[e];
        }
        return SimilarityGraph(num_nodes, std::move(updated), meta);
    }

private:
    void rebuild() {
        std::vector<std::size_t> counts(num_nodes + 1, 0);
        for (const auto& e : edge_list) {
            ++counts[e.i + 1];
            ++counts[e.j + 1];
        }
        std::partial_sum(counts.begin(), counts.end(), counts.begin());
        offsets = counts;

        adjacency.resize(2 * edge_list.size());
        std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
        // Edges are sorted by (i, j), so each row receives its smaller neighbors in
        // increasing order before its larger ones: rows come out sorted.
        for (std::size_t e = 0; e < edge_list.size(); ++e) {
            adjacency[fill[edge_list[e].i]++] = Entry{ edge_list[e].j, e };
            adjacency[fill[edge_list[e].j]++] = Entry{ edge_list[e].i, e };
        }

        degrees.assign(num_nodes, 0);
        for (std::size_t i = 0; i < num_nodes; ++i) {
            double d = 0;
            for (const auto& entry : row(i)) {
                d += edge_list[entry.edge].weight;
            }
            degrees[i] = d;
        }
        half_total = 0.5 * std::accumulate(degrees.begin(), degrees.end(), 0.0);
    }

    std::size_t num_nodes = 0;
    std::vector<Edge> edge_list;
    std::vector<std::size_t> offsets;
    std::vector<Entry> adjacency;
    std::vector<double> degrees;
    double half_total = 0;
    GraphInfo meta;
};

/**
 * Fuzzy union mu_ij = mu_{i->j} + mu_{j->i} - mu_{i->j} mu_{j->i}.
 */
inline SimilarityGraph symmetrize(const DirectedSimilarities& directed, GraphInfo info = {}) {
    struct Half {
        std::size_t lo, hi;
        double weight;
    };
    std::vector<Half> halves;
    halves.reserve(directed.weights.size());
    for (std::size_t i = 0; i < directed.n; ++i) {
        for (std::size_t c = 0; c < directed.k; ++c) {
            const std::size_t j = directed.ids[i * directed.k + c];
            const double w = directed.weights[i * directed.k + c];
            if (!(w >= 0 && w <= 1)) {
                throw std::invalid_argument("symmetrize: directed weight outside [0, 1]");
            }
            if (j == i) {
                throw std::invalid_argument("symmetrize: self-neighbor in directed similarities");
            }
            halves.push_back(Half{ std::min(i, j), std::max(i, j), w });
        }
    }
    std::sort(halves.begin(), halves.end(), [](const Half& l, const Half& r) {
        return l.lo < r.lo || (l.lo == r.lo && l.hi < r.hi);
    });

    std::vector<Edge> edges;
    for (std::size_t h = 0; h < halves.size();) {
        if (h + 1 < halves.size() && halves[h + 1].lo == halves[h].lo && halves[h + 1].hi == halves[h].hi) {
            const double p = halves[h].weight, q = halves[h + 1].weight;
            edges.push_back(Edge{ halves[h].lo, halves[h].hi, p + q - p * q });
            h += 2;
        } else {
            edges.push_back(Edge{ halves[h].lo, halves[h].hi, halves[h].weight });
            h += 1;
        }
    }
    return SimilarityGraph(directed.n, std::move(edges), std::move(info));
}

/**
 * Every intermediate of the standard graph construction.
 */
struct GraphBuild {
    NeighborLists neighbors;
    std::vector<SigmaResult> sigmas;
    DirectedSimilarities directed;
    SimilarityGraph graph;
};

/**
 * kNN search, bandwidth calibration, directed similarities and symmetrization.
 */
inline GraphBuild build_graph(const Dataset& data, std::size_t k, Metric metric = Metric::euclidean, const SigmaSearch& search = {}) {
    if (k < 2) {
        throw std::invalid_argument("build_graph: k must be at least 2");
    }
    GraphBuild out;
    out.neighbors = knn_brute(data, k, metric);

    const std::size_t n = data.size();
    GraphInfo info;
    info.k = k;
    info.metric = metric;
    info.sigma.resize(n);
    info.rho.resize(n);
    info.degenerate.resize(n);
    out.sigmas.resize(n);

    std::vector<double> offsets(k);
    for (std::size_t i = 0; i < n; ++i) {
        auto d = out.neighbors.dists(i);
        for (std::size_t c = 0; c < k; ++c) {
            offsets[c] = d[c] - d[0];
        }
        out.sigmas[i] = smooth_knn_sigma(offsets, search);
        info.sigma[i] = out.sigmas[i].sigma;
        info.rho[i] = d[0];
        info.degenerate[i] = out.sigmas[i].degenerate;
    }

    out.directed = directed_similarities(out.neighbors, info.sigma);
    out.graph = symmetrize(out.directed, std::move(info));
    return out;
}

/**
 * mu_ij = phi(|x_i - x_j|) for every pair; all pairs are stored.
 */
inline SimilarityGraph dense_similarities(const Dataset& data, const Kernel& kernel) {
    const std::size_t n = data.size();
    std::vector<Edge> edges;
    edges.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            edges.push_back(Edge{ i, j, phi_sq(kernel, squared_distance(data.points.row(i), data.points.row(j))) });
        }
    }
    return SimilarityGraph(n, std::move(edges));
}

/**
 * Removes weights below max(mu) / n_epochs, the level under which an edge would be
 * sampled less than once over the run.
 */
inline SimilarityGraph epoch_filter(const SimilarityGraph& graph, double n_epochs) {
    if (!(n_epochs >= 1)) {
        throw std::invalid_argument("epoch_filter: n_epochs must be at least 1");
    }
    double max_weight = 0;
    for (const auto& e : graph.edges()) {
        max_weight = std::max(max_weight, e.weight);
    }
    const double threshold = max_weight / n_epochs;
    std::vector<Edge> kept;
    for (const auto& e : graph.edges()) {
        if (e.weight >= threshold) {
            kept.push_back(e);
        }
    }
    return SimilarityGraph(graph.size(), std::move(kept), graph.info());
}

enum class PerturbMode { binarize, invert, permute, uniform_random };

inline PerturbMode parse_perturb_mode(const std::string& s) {
    if (s == "binarize") return PerturbMode::binarize;
    if (s == "invert") return PerturbMode::invert;
    if (s == "permute") return PerturbMode::permute;
    if (s == "uniform_random" || s == "uniform") return PerturbMode::uniform_random;
    throw std::invalid_argument("unknown perturbation mode '" + s + "'");
}

inline const char* to_string(PerturbMode m) {
    switch (m) {
        case PerturbMode::binarize: return "binarize";
        case PerturbMode::invert: return "invert";
        case PerturbMode::permute: return "permute";
        case PerturbMode::uniform_random: return "uniform_random";
    }
    return "?";
}

/**
 * Rewrites the positive weights while keeping the edge set:
 * - binarize: every weight becomes 1.
 * - invert: `epoch_filter(graph, n_epochs)` first, then mu -> min(mu) / mu.
 * - permute: weights are shuffled across edges.
 * - uniform_random: weights are redrawn from (0, 1].
 * Each unordered pair gets one value, so symmetry is kept.
 */
inline SimilarityGraph perturb(const SimilarityGraph& graph, PerturbMode mode, std::uint64_t seed = 0, double n_epochs = 500) {
    if (mode == PerturbMode::invert) {
        auto filtered = epoch_filter(graph, n_epochs);
        double min_weight = std::numeric_limits<double>::infinity();
        for (const auto& e : filtered.edges()) {
            min_weight = std::min(min_weight, e.weight);
        }
        std::vector<double> w;
        w.reserve(filtered.num_edges());
        for (const auto& e : filtered.edges()) {
            w.push_back(min_weight / e.weight);
        }
        return filtered.with_weights(w);
    }

    std::vector<double> w;
    w.reserve(graph.num_edges());
    for (const auto& e : graph.edges()) {
        w.push_back(e.weight);
    }
    auto rng = make_rng(seed, stream::perturb);
    switch (mode) {
        case PerturbMode::binarize:
            std::fill(w.begin(), w.end(), 1.0);
            break;
        case PerturbMode::permute:
            shuffle(rng, w);
            break;
        case PerturbMode::uniform_random:
            for (auto& x : w) {
                x = 1.0 - uniform01(rng);
            }
            break;
        default:
            break;
    }
    return graph.with_weights(w);
}

/**
 * Degree distribution summary with the two reference bounds.
 */
struct DegreeHistogram {
    std::vector<double> bin_lo;
    std::vector<double> bin_hi;
    std::vector<std::size_t> counts;
    double min_degree = 0;
    double max_degree = 0;
    /// Lower bound of the calibrated graph's degrees.
    double log2k_line = 0;
    /// Reference line drawn for the binarized shared-kNN graph.
    double knn_line = 0;
};

inline DegreeHistogram degree_histogram(const SimilarityGraph& graph, std::size_t bins = 30) {
    if (bins == 0) {
        throw std::invalid_argument("degree_histogram: need at least one bin");
    }
    DegreeHistogram out;
    const auto& d = graph.degree_vector();
    out.min_degree = *std::min_element(d.begin(), d.end());
    out.max_degree = *std::max_element(d.begin(), d.end());
    const std::size_t k = graph.info().k;
    if (k > 0) {
        out.log2k_line = std::log2(static_cast<double>(k));
        out.knn_line = static_cast<double>(k) - 1;
    }

    double lo = out.min_degree, hi = out.max_degree;
    if (hi <= lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    out.counts.assign(bins, 0);
    for (std::size_t b = 0; b < bins; ++b) {
        out.bin_lo.push_back(lo + width * static_cast<double>(b));
        out.bin_hi.push_back(b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1));
    }
    for (double x : d) {
        auto b = static_cast<std::size_t>((x - lo) / width);
        ++out.counts[std::min(b, bins - 1)];
    }
    return out;
}

/**
 * Writes `i,j,mu` (i < j) preceded by a `# metric=... k=...` comment line.
 */
inline void write_graph_edges(const SimilarityGraph& graph, std::ostream& out) {
    out << "# metric=" << to_string(graph.info().metric) << " k=" << graph.info().k << " n=" << graph.size() << '\n';
    out << "i,j,mu\n";
    for (const auto& e : graph.edges()) {
        out << e.i << ',' << e.j << ',' << format_double(e.weight) << '\n';
    }
}

/**
 * Writes `i,sigma,rho,degree`; sigma and rho are empty for graphs without kNN calibration.
 */
inline void write_graph_nodes(const SimilarityGraph& graph, std::ostream& out) {
    out << "# metric=" << to_string(graph.info().metric) << " k=" << graph.info().k << " n=" << graph.size() << '\n';
    out << "i,sigma,rho,degree\n";
    const auto& info = graph.info();
    for (std::size_t i = 0; i < graph.size(); ++i) {
        out << i << ',';
        if (!info.sigma.empty()) {
            out << format_double(info.sigma[i]);
        }
        out << ',';
        if (!info.rho.empty()) {
            out << format_double(info.rho[i]);
        }
        out << ',' << format_double(graph.degree(i)) << '\n';
    }
}

inline void save_graph(const SimilarityGraph& graph, const std::string& edges_path, const std::string& nodes_path) {
    std::ofstream e(edges_path, std::ios::binary), v(nodes_path, std::ios::binary);
    if (!e || !v) {
        throw std::runtime_error("cannot write graph files '" + edges_path + "', '" + nodes_path + "'");
    }
    write_graph_edges(graph, e);
    write_graph_nodes(graph, v);
}

/**
 * Reads an edge list written by `write_graph_edges`.
 * Bandwidths are not restored; degrees are recomputed from the weights.
 */
inline SimilarityGraph read_graph_edges(std::istream& in) {
    std::string line;
    GraphInfo info;
    std::size_t n = 0;
    std::vector<Edge> edges;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto view = detail::trim(line);
        if (view.empty()) {
            continue;
        }
        if (view.front() == '#') {
            std::string meta(view.substr(1));
            std::istringstream tokens(meta);
            std::string tok;
            while (tokens >> tok) {
                auto eq = tok.find('=');
                if (eq == std::string::npos) {
                    continue;
                }
                auto key = tok.substr(0, eq), value = tok.substr(eq + 1);
                if (key == "metric") {
                    info.metric = parse_metric(value);
                } else if (key == "k") {
                    info.k = std::stoul(value);
                } else if (key == "n") {
                    n = std::stoul(value);
                }
            }
            continue;
        }
        if (view == "i,j,mu") {
            continue;
        }
        auto cells = detail::split_commas(view);
        double i = 0, j = 0, w = 0;
        if (cells.size() != 3 || !detail::parse_double(cells[0], i) || !detail::parse_double(cells[1], j) || !detail::parse_double(cells[2], w)) {
            throw std::invalid_argument("graph edge list line " + std::to_string(lineno) + ": expected i,j,mu");
        }
        edges.push_back(Edge{ static_cast<std::size_t>(i), static_cast<std::size_t>(j), w });
        n = std::max(n, static_cast<std::size_t>(std::max(i, j)) + 1);
    }
    return SimilarityGraph(n, std::move(edges), std::move(info));
}

inline SimilarityGraph load_graph_edges(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "' for reading");
    }
    return read_graph_edges(in);
}

}

#endif
