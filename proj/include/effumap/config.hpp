#ifndef EFFUMAP_CONFIG_HPP
#define EFFUMAP_CONFIG_HPP

#include "datagen.hpp"
#include "kernel.hpp"
#include "losses.hpp"
#include "optimizer.hpp"
#include "pumap_oracle.hpp"
#include "simgraph.hpp"

#include "toml.hpp"

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>

/**
 * @file config.hpp
 *
 * @brief Resolved run configuration, its TOML form, and the pipeline stages it drives.
 */

namespace effumap {

struct DatasetSpec {
    /// "ring" or "square"; empty when `csv` is used.
    std::string generator = "ring";
    std::string csv;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    double radius = 4.0;
    double half_width = 0.25;
};

struct GraphSpec {
    std::size_t k = 15;
    Metric metric = Metric::euclidean;
    /// mu_ij = phi(|x_i - x_j|) for all pairs instead of the kNN construction.
    bool dense = false;
    std::optional<PerturbMode> perturb;
    std::uint64_t perturb_seed = 0;
};

struct KernelSpec {
    double min_dist = 0.1;
    double spread = 1.0;
    /// When both are set they replace the fit from (min_dist, spread).
    std::optional<double> a, b;
    double eps_rep = 1e-3;
    double grad_clip = 4.0;
};

struct HistSpec {
    std::size_t bins = 20;
    PairSubset subset = PairSubset::positive_mu;
};

struct PumapSpec {
    std::size_t batch_size = 32;
    std::size_t trials = 20000;
    std::uint64_t seed = 0;
};

struct RunConfig {
    std::string name = "run";
    std::string output = "out";
    DatasetSpec dataset;
    GraphSpec graph;
    KernelSpec kernel;
    OptimizerConfig optimizer;
    /// Loss evaluation stride of the embed command; 0 turns tracking off.
    std::size_t loss_every = 10;
    HistSpec hist;
    PumapSpec pumap;
};

/**
 * @cond
 */
namespace detail {

inline const toml::table* section(const toml::table& root, std::string_view key) {
    const auto* node = root.get(key);
    if (!node) {
        return nullptr;
    }
    if (!node->is_table()) {
        throw std::invalid_argument("config: '" + std::string(key) + "' must be a table");
    }
    return node->as_table();
}

inline void check_keys(const toml::table& t, std::initializer_list<std::string_view> allowed, std::string_view where) {
    for (const auto& [key, value] : t) {
        bool ok = false;
        for (auto a : allowed) {
            ok = ok || key.str() == a;
        }
        if (!ok) {
            throw std::invalid_argument("config: unknown key '" + std::string(key.str()) + "' in " + std::string(where));
        }
    }
}

inline void read(const toml::table& t, std::string_view key, std::string& out) {
    if (const auto* node = t.get(key)) {
        auto v = node->value<std::string>();
        if (!v) {
            throw std::invalid_argument("config: '" + std::string(key) + "' must be a string");
        }
        out = *v;
    }
}

inline void read(const toml::table& t, std::string_view key, bool& out) {
    if (const auto* node = t.get(key)) {
        auto v = node->value<bool>();
        if (!v) {
            throw std::invalid_argument("config: '" + std::string(key) + "' must be a boolean");
        }
        out = *v;
    }
}

inline void read(const toml::table& t, std::string_view key, double& out) {
    if (const auto* node = t.get(key)) {
        // Integers are accepted where a float is expected.
        auto v = node->value<double>();
        if (!v) {
            throw std::invalid_argument("config: '" + std::string(key) + "' must be a number");
        }
        out = *v;
    }
}

template<class Unsigned_>
    requires std::is_unsigned_v<Unsigned_>
void read(const toml::table& t, std::string_view key, Unsigned_& out) {
    if (const auto* node = t.get(key)) {
        if (!node->is_integer() || node->as_integer()->get() < 0) {
            throw std::invalid_argument("config: '" + std::string(key) + "' must be a non-negative integer");
        }
        out = static_cast<Unsigned_>(node->as_integer()->get());
    }
}

inline void read(const toml::table& t, std::string_view key, std::optional<double>& out) {
    if (t.get(key)) {
        double v = 0;
        read(t, key, v);
        out = v;
    }
}

template<class Parse_, class Enum_>
void read_enum(const toml::table& t, std::string_view key, Enum_& out, Parse_ parse) {
    std::string s;
    if (t.get(key)) {
        read(t, key, s);
        out = parse(s);
    }
}

inline std::int64_t as_toml_int(std::uint64_t v) {
    return static_cast<std::int64_t>(v);
}

}
/**
 * @endcond
 */

/**
 * Overwrites the fields present in `root`; absent keys keep their current values.
 * Unknown keys and ill-typed values are errors.
 */
inline void apply_toml(RunConfig& c, const toml::table& root) {
    using detail::read;
    detail::check_keys(root, { "name", "output", "dataset", "graph", "kernel", "optimizer", "hist", "pumap" }, "top level");
    read(root, "name", c.name);
    read(root, "output", c.output);

    if (const auto* t = detail::section(root, "dataset")) {
        detail::check_keys(*t, { "generator", "csv", "n", "seed", "radius", "half_width" }, "[dataset]");
        if (t->get("csv") && !t->get("generator")) {
            c.dataset.generator.clear();
        }
        if (t->get("generator") && !t->get("csv")) {
            c.dataset.csv.clear();
        }
        read(*t, "generator", c.dataset.generator);
        read(*t, "csv", c.dataset.csv);
        read(*t, "n", c.dataset.n);
        read(*t, "seed", c.dataset.seed);
        read(*t, "radius", c.dataset.radius);
        read(*t, "half_width", c.dataset.half_width);
    }

    if (const auto* t = detail::section(root, "graph")) {
        detail::check_keys(*t, { "k", "metric", "dense", "perturb", "perturb_seed" }, "[graph]");
        read(*t, "k", c.graph.k);
        detail::read_enum(*t, "metric", c.graph.metric, parse_metric);
        read(*t, "dense", c.graph.dense);
        if (t->get("perturb")) {
            std::string s;
            read(*t, "perturb", s);
            c.graph.perturb = s == "none" ? std::nullopt : std::optional<PerturbMode>(parse_perturb_mode(s));
        }
        read(*t, "perturb_seed", c.graph.perturb_seed);
    }

    if (const auto* t = detail::section(root, "kernel")) {
        detail::check_keys(*t, { "min_dist", "spread", "a", "b", "eps_rep", "grad_clip" }, "[kernel]");
        read(*t, "min_dist", c.kernel.min_dist);
        read(*t, "spread", c.kernel.spread);
        read(*t, "a", c.kernel.a);
        read(*t, "b", c.kernel.b);
        read(*t, "eps_rep", c.kernel.eps_rep);
        read(*t, "grad_clip", c.kernel.grad_clip);
    }

    if (const auto* t = detail::section(root, "optimizer")) {
        detail::check_keys(*t, { "dim", "m", "n_epochs", "alpha0", "lr_decay", "push_tail", "seed", "init", "edge_order", "loss_every" },
            "[optimizer]");
        auto& o = c.optimizer;
        read(*t, "dim", o.dim);
        read(*t, "m", o.m);
        read(*t, "n_epochs", o.n_epochs);
        read(*t, "alpha0", o.alpha0);
        read(*t, "lr_decay", o.lr_decay);
        read(*t, "push_tail", o.push_tail);
        read(*t, "seed", o.seed);
        detail::read_enum(*t, "init", o.init, parse_init_mode);
        detail::read_enum(*t, "edge_order", o.edge_order, parse_edge_order);
        read(*t, "loss_every", c.loss_every);
    }

    if (const auto* t = detail::section(root, "hist")) {
        detail::check_keys(*t, { "bins", "subset" }, "[hist]");
        read(*t, "bins", c.hist.bins);
        detail::read_enum(*t, "subset", c.hist.subset, parse_pair_subset);
    }

    if (const auto* t = detail::section(root, "pumap")) {
        detail::check_keys(*t, { "batch_size", "trials", "seed" }, "[pumap]");
        read(*t, "batch_size", c.pumap.batch_size);
        read(*t, "trials", c.pumap.trials);
        read(*t, "seed", c.pumap.seed);
    }
}

inline void apply_toml_file(RunConfig& c, const std::string& path) {
    if (!std::filesystem::exists(path)) {
        throw std::invalid_argument("config file '" + path + "' does not exist");
    }
    toml::table root;
    try {
        root = toml::parse_file(path);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "config file '" << path << "': " << e.description() << " at line " << e.source().begin.line;
        throw std::invalid_argument(msg.str());
    }
    apply_toml(c, root);
}

inline RunConfig load_run_config(const std::string& path) {
    RunConfig c;
    apply_toml_file(c, path);
    return c;
}

/**
 * Checks the cross-field invariants: exactly one dataset source, an existing CSV path,
 * k < n for generated data, and the optimizer and kernel ranges.
 * The k < n check for CSV input happens once the file is read.
 */
inline void validate(const RunConfig& c) {
    const bool gen = !c.dataset.generator.empty(), csv = !c.dataset.csv.empty();
    if (gen == csv) {
        throw std::invalid_argument("config: exactly one of dataset.generator and dataset.csv must be set");
    }
    if (gen && c.dataset.generator != "ring" && c.dataset.generator != "square") {
        throw std::invalid_argument("config: unknown generator '" + c.dataset.generator + "'");
    }
    if (csv && !std::filesystem::exists(c.dataset.csv)) {
        throw std::invalid_argument("config: dataset file '" + c.dataset.csv + "' does not exist");
    }
    if (gen && c.dataset.n < 2) {
        throw std::invalid_argument("config: dataset.n must be at least 2");
    }
    if (!c.graph.dense && gen && c.graph.k >= c.dataset.n) {
        throw std::invalid_argument("config: graph.k must be smaller than dataset.n");
    }
    if (c.graph.k < 2) {
        throw std::invalid_argument("config: graph.k must be at least 2");
    }
    if (c.kernel.a.has_value() != c.kernel.b.has_value()) {
        throw std::invalid_argument("config: kernel.a and kernel.b must be given together");
    }
    if (!(c.kernel.spread > 0) || !(c.kernel.min_dist >= 0)) {
        throw std::invalid_argument("config: kernel needs spread > 0 and min_dist >= 0");
    }
    if (c.name.empty() || c.output.empty()) {
        throw std::invalid_argument("config: name and output must be non-empty");
    }
    if (c.hist.bins < 1) {
        throw std::invalid_argument("config: hist.bins must be positive");
    }
    validate(c.optimizer);
    validate(BatchSimConfig{ c.pumap.batch_size, c.optimizer.m == 0 ? 1 : c.optimizer.m, c.pumap.trials, c.pumap.seed });
}

/**
 * Kernel from `KernelSpec`; (a, b) are fitted unless both are given.
 */
inline Kernel make_kernel(const KernelSpec& s) {
    Kernel k;
    if (s.a && s.b) {
        k.a = *s.a;
        k.b = *s.b;
    } else {
        auto fit = fit_ab(s.min_dist, s.spread);
        k.a = fit.a;
        k.b = fit.b;
    }
    k.eps_rep = s.eps_rep;
    k.grad_clip = s.grad_clip;
    validate(k);
    return k;
}

/**
 * Replaces any fitted (a, b) with explicit values so the echo reproduces the same kernel.
 */
inline RunConfig resolved(RunConfig c) {
    auto k = make_kernel(c.kernel);
    c.kernel.a = k.a;
    c.kernel.b = k.b;
    return c;
}

inline std::string to_toml(const RunConfig& c) {
    using detail::as_toml_int;
    toml::table dataset;
    if (!c.dataset.generator.empty()) {
        dataset.insert("generator", c.dataset.generator);
    } else {
        dataset.insert("csv", c.dataset.csv);
    }
    dataset.insert("n", as_toml_int(c.dataset.n));
    dataset.insert("seed", as_toml_int(c.dataset.seed));
    dataset.insert("radius", c.dataset.radius);
    dataset.insert("half_width", c.dataset.half_width);

    toml::table graph{
        { "k", as_toml_int(c.graph.k) },
        { "metric", to_string(c.graph.metric) },
        { "dense", c.graph.dense },
        { "perturb", c.graph.perturb ? to_string(*c.graph.perturb) : "none" },
        { "perturb_seed", as_toml_int(c.graph.perturb_seed) },
    };

    toml::table kernel{
        { "min_dist", c.kernel.min_dist },
        { "spread", c.kernel.spread },
        { "eps_rep", c.kernel.eps_rep },
        { "grad_clip", c.kernel.grad_clip },
    };
    if (c.kernel.a && c.kernel.b) {
        kernel.insert("a", *c.kernel.a);
        kernel.insert("b", *c.kernel.b);
    }

    const auto& o = c.optimizer;
    toml::table optimizer{
        { "dim", as_toml_int(o.dim) },
        { "m", as_toml_int(o.m) },
        { "n_epochs", as_toml_int(o.n_epochs) },
        { "alpha0", o.alpha0 },
        { "lr_decay", o.lr_decay },
        { "push_tail", o.push_tail },
        { "seed", as_toml_int(o.seed) },
        { "init", to_string(o.init) },
        { "edge_order", to_string(o.edge_order) },
        { "loss_every", as_toml_int(c.loss_every) },
    };

    toml::table root{
        { "name", c.name },
        { "output", c.output },
        { "dataset", std::move(dataset) },
        { "graph", std::move(graph) },
        { "kernel", std::move(kernel) },
        { "optimizer", std::move(optimizer) },
        { "hist", toml::table{ { "bins", as_toml_int(c.hist.bins) }, { "subset", to_string(c.hist.subset) } } },
        { "pumap", toml::table{ { "batch_size", as_toml_int(c.pumap.batch_size) }, { "trials", as_toml_int(c.pumap.trials) }, { "seed", as_toml_int(c.pumap.seed) } } },
    };
    std::ostringstream out;
    out << root << '\n';
    return out.str();
}

inline Dataset make_dataset(const DatasetSpec& s) {
    if (!s.csv.empty()) {
        return load_csv(s.csv);
    }
    if (s.generator == "square") {
        return gen_uniform_square(s.n, s.seed);
    }
    return gen_ring(s.n, s.radius, s.half_width, s.seed);
}

/**
 * The input similarities of a run. The kNN graph is epoch-filtered with `n_epochs`, and a
 * perturbation, if any, is applied to that filtered graph, so perturbed graphs share its edge set.
 * Dense similarities are used unfiltered.
 */
inline SimilarityGraph make_graph(const GraphSpec& s, const Dataset& data, const Kernel& kernel, std::size_t n_epochs) {
    SimilarityGraph graph;
    if (s.dense) {
        graph = dense_similarities(data, kernel);
    } else {
        if (s.k >= data.size()) {
            throw std::invalid_argument("graph.k must be smaller than the number of points");
        }
        graph = epoch_filter(build_graph(data, s.k, s.metric).graph, static_cast<double>(n_epochs));
    }
    if (s.perturb) {
        graph = perturb(graph, *s.perturb, s.perturb_seed, static_cast<double>(n_epochs));
    }
    return graph;
}

}

#endif
