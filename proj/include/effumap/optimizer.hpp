#ifndef EFFUMAP_OPTIMIZER_HPP
#define EFFUMAP_OPTIMIZER_HPP

#include "common.hpp"
#include "datagen.hpp"
#include "kernel.hpp"
#include "simgraph.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * @file optimizer.hpp
 *
 * @brief Negative-sampling SGD over the similarity graph, plus the closed-form
 * expected gradient of one epoch.
 *
 * Every epoch visits each ordered pair (i, j) with mu_ij > 0 once. The pair fires
 * with probability mu_ij; on firing, e_i and e_j are pulled together and e_i is
 * pushed away from m uniformly drawn points s. With `push_tail`, each e_s is also
 * pushed away from e_i. Updates are applied immediately, in order.
 */

namespace effumap {

/**
 * The optimizer state: one row of coordinates per point.
 */
struct Embedding {
    Matrix coords;

    std::size_t size() const { return coords.rows(); }
    std::size_t dim() const { return coords.cols(); }
    std::span<double> point(std::size_t i) { return coords.row(i); }
    std::span<const double> point(std::size_t i) const { return coords.row(i); }

    bool operator==(const Embedding&) const = default;
};

enum class InitMode { data, pca, random };
enum class EdgeOrder { fixed, shuffled };

inline InitMode parse_init_mode(const std::string& s) {
    if (s == "data") return InitMode::data;
    if (s == "pca") return InitMode::pca;
    if (s == "random") return InitMode::random;
    throw std::invalid_argument("unknown init mode '" + s + "'");
}

inline const char* to_string(InitMode m) {
    switch (m) {
        case InitMode::data: return "data";
        case InitMode::pca: return "pca";
        case InitMode::random: return "random";
    }
    return "?";
}

inline EdgeOrder parse_edge_order(const std::string& s) {
    if (s == "fixed") return EdgeOrder::fixed;
    if (s == "shuffled") return EdgeOrder::shuffled;
    throw std::invalid_argument("unknown edge order '" + s + "'");
}

inline const char* to_string(EdgeOrder o) {
    return o == EdgeOrder::fixed ? "fixed" : "shuffled";
}

struct OptimizerConfig {
    /// Embedding dimension d.
    std::size_t dim = 2;
    /// Negative samples per fired edge.
    std::size_t m = 5;
    std::size_t n_epochs = 500;
    double alpha0 = 1.0;
    /// Linear decay alpha0 * (1 - t / T).
    bool lr_decay = true;
    bool push_tail = false;
    std::uint64_t seed = 0;
    InitMode init = InitMode::data;
    EdgeOrder edge_order = EdgeOrder::fixed;
};

inline void validate(const OptimizerConfig& c) {
    if (c.dim < 1) {
        throw std::invalid_argument("optimizer: dim must be at least 1");
    }
    if (c.n_epochs < 1) {
        throw std::invalid_argument("optimizer: n_epochs must be at least 1");
    }
    if (!(c.alpha0 > 0)) {
        throw std::invalid_argument("optimizer: alpha0 must be positive");
    }
}

inline double learning_rate(const OptimizerConfig& c, std::size_t epoch) {
    if (!c.lr_decay) {
        return c.alpha0;
    }
    return c.alpha0 * (1.0 - static_cast<double>(epoch) / static_cast<double>(c.n_epochs));
}

/**
 * data: copy of the input (requires D == d).
 * pca: scores on the top-d principal axes, each axis signed so its largest-|loading| coordinate is positive.
 * random: i.i.d. uniform on [-10, 10]^d.
 */
inline Embedding init_embedding(const Dataset& data, const OptimizerConfig& config) {
    const std::size_t n = data.size(), D = data.dim(), d = config.dim;
    Embedding out{ Matrix(n, d) };

    switch (config.init) {
        case InitMode::data:
            if (D != d) {
                throw std::invalid_argument("data initialization needs D == d (D = " + std::to_string(D) + ", d = " + std::to_string(d) + ")");
            }
            out.coords = data.points;
            break;

        case InitMode::pca: {
            if (d > D) {
                throw std::invalid_argument("pca initialization needs d <= D");
            }
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> > x(data.points.data().data(), n, D);
            Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
            Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
            if (eig.info() != Eigen::Success) {
                throw NumericalError("pca initialization: eigendecomposition failed");
            }
            // Eigenvalues come in increasing order.
            for (std::size_t c = 0; c < d; ++c) {
                Eigen::VectorXd axis = eig.eigenvectors().col(static_cast<Eigen::Index>(D - 1 - c));
                Eigen::Index largest = 0;
                axis.cwiseAbs().maxCoeff(&largest);
                if (axis(largest) < 0) {
                    axis = -axis;
                }
                Eigen::VectorXd scores = centered * axis;
                for (std::size_t i = 0; i < n; ++i) {
                    out.coords(i, c) = scores(static_cast<Eigen::Index>(i));
                }
            }
            break;
        }

        case InitMode::random: {
            auto rng = make_rng(config.seed, stream::init);
            for (auto& v : out.coords.data()) {
                v = -10.0 + 20.0 * uniform01(rng);
            }
            break;
        }
    }
    return out;
}

struct EdgeEvent {
    std::size_t head;
    std::size_t tail;
};

/**
 * Realized random events of one epoch: the fired ordered edges, and for each of
 * them, the m negative samples drawn (stored contiguously, m per edge event).
 */
struct EpochSampleLog {
    std::size_t m = 0;
    std::vector<EdgeEvent> edges;
    std::vector<std::size_t> negatives;

    std::span<const std::size_t> negatives_of(std::size_t event) const {
        return { negatives.data() + event * m, m };
    }
};

/**
 * Draws the random events of one epoch. The draws do not depend on the embedding,
 * so sampling first and replaying with `apply_epoch` is identical to interleaving.
 */
template<class Engine_>
EpochSampleLog sample_epoch(const SimilarityGraph& graph, std::size_t m, EdgeOrder order, Engine_& rng) {
    EpochSampleLog log;
    log.m = m;
    const std::size_t n = graph.size();

    auto visit = [&](std::size_t i, const SimilarityGraph::Entry& entry) {
        if (uniform01(rng) < graph.weight(entry.edge)) {
            log.edges.push_back(EdgeEvent{ i, entry.node });
            for (std::size_t l = 0; l < m; ++l) {
                log.negatives.push_back(uniform_index(rng, n));
            }
        }
    };

    if (order == EdgeOrder::fixed) {
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& entry : graph.row(i)) {
                visit(i, entry);
            }
        }
    } else {
        std::vector<std::pair<std::size_t, SimilarityGraph::Entry> > pairs;
        pairs.reserve(2 * graph.num_edges());
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& entry : graph.row(i)) {
                pairs.emplace_back(i, entry);
            }
        }
        shuffle(rng, pairs);
        for (const auto& p : pairs) {
            visit(p.first, p.second);
        }
    }
    return log;
}

/**
 * Applies the sampled events in order with step size `alpha`, using the kernel's clipped gradients.
 */
inline void apply_epoch(const EpochSampleLog& log, Embedding& embedding, const Kernel& kernel, double alpha, bool push_tail) {
    const std::size_t d = embedding.dim();
    std::vector<double> grad(d);

    auto step = [&](std::span<double> target) {
        for (std::size_t c = 0; c < d; ++c) {
            target[c] -= alpha * grad[c];
        }
    };

    for (std::size_t ev = 0; ev < log.edges.size(); ++ev) {
        const auto [i, j] = log.edges[ev];
        auto ei = embedding.point(i);
        auto ej = embedding.point(j);

        grad_attr(kernel, ei, ej, grad);
        step(ei);
        grad_attr(kernel, ej, ei, grad);
        step(ej);

        for (std::size_t s : log.negatives_of(ev)) {
            auto es = embedding.point(s);
            grad_rep(kernel, ei, es, grad);
            step(ei);
            if (push_tail) {
                grad_rep(kernel, es, ei, grad);
                step(es);
            }
        }
    }
}

/**
 * One epoch of sampling and in-place updates at epoch index `epoch` (0-based).
 * Throws `NumericalError` if any coordinate becomes non-finite.
 */
template<class Engine_>
EpochSampleLog run_epoch(const SimilarityGraph& graph, Embedding& embedding, const Kernel& kernel, const OptimizerConfig& config,
    std::size_t epoch, Engine_& rng)
{
    if (graph.size() != embedding.size()) {
        throw std::invalid_argument("run_epoch: graph and embedding sizes differ");
    }
    auto log = sample_epoch(graph, config.m, config.edge_order, rng);
    apply_epoch(log, embedding, kernel, learning_rate(config, epoch), config.push_tail);
    if (!all_finite(embedding.coords)) {
        throw NumericalError("non-finite embedding coordinates after epoch " + std::to_string(epoch + 1));
    }
    return log;
}

/**
 * Per-node sum of the (unclipped) gradients that one epoch's events apply, evaluated on
 * a frozen embedding. Its expectation over epochs is `expected_gradients`.
 */
inline Matrix realized_gradients(const EpochSampleLog& log, const Embedding& embedding, const Kernel& kernel, bool push_tail) {
    const std::size_t d = embedding.dim();
    Matrix out(embedding.size(), d);

    auto accumulate = [&](std::size_t target, std::size_t other, double coef) {
        auto et = embedding.point(target), eo = embedding.point(other);
        auto g = out.row(target);
        for (std::size_t c = 0; c < d; ++c) {
            g[c] += coef * (et[c] - eo[c]);
        }
    };

    for (std::size_t ev = 0; ev < log.edges.size(); ++ev) {
        const auto [i, j] = log.edges[ev];
        const double ca = attr_coefficient(kernel, squared_distance(embedding.point(i), embedding.point(j)));
        accumulate(i, j, ca);
        accumulate(j, i, ca);
        for (std::size_t s : log.negatives_of(ev)) {
            if (s == i) {
                continue;
            }
            const double cr = rep_coefficient(kernel, squared_distance(embedding.point(i), embedding.point(s)));
            accumulate(i, s, cr);
            if (push_tail) {
                accumulate(s, i, cr);
            }
        }
    }
    return out;
}

/**
 * Closed-form expectation of one epoch's total gradient on e_i:
 * sum_j 2 mu_ij dLa_ij/de_i + w_ij dLr_ij/de_i, with w_ij = d_i m / n, or
 * (d_i + d_j) m / n when negative samples are pushed as well.
 * Gradients are not clipped; `kernel.eps_rep` is honored.
 */
inline std::vector<double> expected_gradient(const SimilarityGraph& graph, const Embedding& embedding, const Kernel& kernel,
    std::size_t m, bool push_tail, std::size_t i)
{
    const std::size_t n = graph.size(), d = embedding.dim();
    std::vector<double> out(d, 0.0);
    auto ei = embedding.point(i);

    for (const auto& entry : graph.row(i)) {
        auto ej = embedding.point(entry.node);
        const double c = 2.0 * graph.weight(entry.edge) * attr_coefficient(kernel, squared_distance(ei, ej));
        for (std::size_t a = 0; a < d; ++a) {
            out[a] += c * (ei[a] - ej[a]);
        }
    }

    const double scale = static_cast<double>(m) / static_cast<double>(n);
    const double di = graph.degree(i);
    for (std::size_t s = 0; s < n; ++s) {
        if (s == i) {
            continue;
        }
        auto es = embedding.point(s);
        const double w = (push_tail ? di + graph.degree(s) : di) * scale;
        const double c = w * rep_coefficient(kernel, squared_distance(ei, es));
        for (std::size_t a = 0; a < d; ++a) {
            out[a] += c * (ei[a] - es[a]);
        }
    }
    return out;
}

inline std::vector<double> expected_gradient(const SimilarityGraph& graph, const Embedding& embedding, const Kernel& kernel,
    const OptimizerConfig& config, std::size_t i)
{
    return expected_gradient(graph, embedding, kernel, config.m, config.push_tail, i);
}

inline Matrix expected_gradients(const SimilarityGraph& graph, const Embedding& embedding, const Kernel& kernel,
    std::size_t m, bool push_tail)
{
    Matrix out(embedding.size(), embedding.dim());
    for (std::size_t i = 0; i < embedding.size(); ++i) {
        auto g = expected_gradient(graph, embedding, kernel, m, push_tail, i);
        std::copy(g.begin(), g.end(), out.row(i).begin());
    }
    return out;
}

/**
 * Writes `id,e1,...,ed`.
 */
inline void write_embedding(const Embedding& embedding, std::ostream& out) {
    out << "id";
    for (std::size_t c = 0; c < embedding.dim(); ++c) {
        out << ",e" << (c + 1);
    }
    out << '\n';
    for (std::size_t i = 0; i < embedding.size(); ++i) {
        out << i;
        for (double v : embedding.point(i)) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
}

inline void save_embedding(const Embedding& embedding, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    write_embedding(embedding, out);
}

/**
 * Reads an `id,e1,...,ed` file (the id column is dropped).
 */
inline Embedding load_embedding(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "' for reading");
    }
    auto table = read_csv(in);
    Embedding out{ Matrix(table.size(), table.dim() - 1) };
    for (std::size_t i = 0; i < table.size(); ++i) {
        for (std::size_t c = 1; c < table.dim(); ++c) {
            out.coords(i, c - 1) = table.points(i, c);
        }
    }
    return out;
}

}

#endif
