// Command-line driver: one subcommand per experiment artifact.
//
// Every command resolves its configuration as built-in defaults, then `--config`,
// then explicit flags, and echoes the result to <output>/config.toml.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
// 3 verification gate failure.

#include "effumap/effumap.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace effumap;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_numerical = 2;
constexpr int exit_gate = 3;

/// Smallest trial count for which the Monte-Carlo gate is applied.
constexpr std::size_t min_gated_trials = 1000;

struct StageError : std::runtime_error {
    StageError(std::string stage, const std::string& what, bool numerical) :
        std::runtime_error(what), stage(std::move(stage)), numerical(numerical) {}
    std::string stage;
    bool numerical;
};

template<class Function_>
auto stage(const std::string& name, Function_ fun) -> decltype(fun()) {
    try {
        return fun();
    } catch (const NumericalError& e) {
        throw StageError(name, e.what(), true);
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what(), false);
    }
}

/// Flag values; unset optionals leave the configuration alone.
struct Overrides {
    std::string config;
    std::optional<std::string> name, output;
    bool ring = false, square = false;
    std::optional<std::string> csv;
    std::optional<std::size_t> n;
    std::optional<std::uint64_t> seed;
    std::optional<double> radius, half_width;

    std::optional<std::size_t> k;
    std::optional<std::string> metric;
    bool dense = false;
    std::optional<std::string> perturb;
    std::optional<std::uint64_t> perturb_seed;

    std::optional<double> min_dist, spread, a, b, eps_rep, grad_clip;

    std::optional<std::size_t> dim, m, epochs, loss_every;
    std::optional<double> alpha0;
    bool no_lr_decay = false, push_tail = false;
    std::optional<std::uint64_t> opt_seed;
    std::optional<std::string> init, edge_order;

    std::optional<std::size_t> bins;
    std::optional<std::string> subset;
    std::optional<std::size_t> batch_size, trials;
    std::optional<std::uint64_t> pumap_seed;
};

void add_common_options(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config, "TOML run configuration")->check(CLI::ExistingFile);
    app->add_option("--name", o.name, "Experiment name");
    app->add_option("-o,--output", o.output, "Output directory (created if missing)");

    auto* ring = app->add_flag("--ring", o.ring, "Generate the noisy ring");
    auto* square = app->add_flag("--square", o.square, "Generate the unit square");
    auto* csv = app->add_option("--csv", o.csv, "Read the dataset from a CSV file");
    ring->excludes(square)->excludes(csv);
    square->excludes(csv);
    app->add_option("--n", o.n, "Number of generated points");
    app->add_option("--seed", o.seed, "Dataset seed");
    app->add_option("--radius", o.radius, "Ring radius");
    app->add_option("--half-width", o.half_width, "Ring half-width");

    app->add_option("--k", o.k, "Neighbors per point");
    app->add_option("--metric", o.metric, "euclidean or cosine");
    app->add_flag("--dense", o.dense, "Use mu_ij = phi(|x_i - x_j|) for every pair");
    app->add_option("--perturb", o.perturb, "none, binarize, invert, permute or uniform_random");
    app->add_option("--perturb-seed", o.perturb_seed, "Seed of random perturbations");

    app->add_option("--min-dist", o.min_dist);
    app->add_option("--spread", o.spread);
    app->add_option("--a", o.a, "Kernel a (with --b, replaces the fit)");
    app->add_option("--b", o.b, "Kernel b (with --a, replaces the fit)");
    app->add_option("--eps-rep", o.eps_rep);
    app->add_option("--grad-clip", o.grad_clip);

    app->add_option("--dim", o.dim, "Embedding dimension");
    app->add_option("--m", o.m, "Negative samples per fired edge");
    app->add_option("--epochs", o.epochs, "Number of epochs");
    app->add_option("--alpha0", o.alpha0, "Initial learning rate");
    app->add_flag("--no-lr-decay", o.no_lr_decay, "Keep the learning rate constant");
    app->add_flag("--push-tail", o.push_tail, "Also repel the negative sample from its head");
    app->add_option("--opt-seed", o.opt_seed, "Optimizer seed");
    app->add_option("--init", o.init, "data, pca or random");
    app->add_option("--edge-order", o.edge_order, "fixed or shuffled");
    app->add_option("--loss-every", o.loss_every, "Loss evaluation stride (0 disables)");

    app->add_option("--bins", o.bins, "Histogram bins");
    app->add_option("--subset", o.subset, "all, positive or zero");
    app->add_option("--batch-size", o.batch_size, "Parametric batch size b");
    app->add_option("--trials", o.trials, "Monte-Carlo trials");
    app->add_option("--pumap-seed", o.pumap_seed, "Monte-Carlo seed");
}

template<class T_>
void set(T_& target, const std::optional<T_>& value) {
    if (value) {
        target = *value;
    }
}

RunConfig resolve(const Overrides& o, RunConfig c) {
    if (!o.config.empty()) {
        apply_toml_file(c, o.config);
    }
    set(c.name, o.name);
    set(c.output, o.output);

    if (o.ring || o.square) {
        c.dataset.generator = o.ring ? "ring" : "square";
        c.dataset.csv.clear();
    }
    if (o.csv) {
        c.dataset.csv = *o.csv;
        c.dataset.generator.clear();
    }
    set(c.dataset.n, o.n);
    set(c.dataset.seed, o.seed);
    set(c.dataset.radius, o.radius);
    set(c.dataset.half_width, o.half_width);

    set(c.graph.k, o.k);
    if (o.metric) {
        c.graph.metric = parse_metric(*o.metric);
    }
    c.graph.dense = c.graph.dense || o.dense;
    if (o.perturb) {
        c.graph.perturb = *o.perturb == "none" ? std::nullopt : std::optional<PerturbMode>(parse_perturb_mode(*o.perturb));
    }
    set(c.graph.perturb_seed, o.perturb_seed);

    set(c.kernel.min_dist, o.min_dist);
    set(c.kernel.spread, o.spread);
    if (o.min_dist || o.spread) {
        // A new fit target discards (a, b) inherited from a config file.
        c.kernel.a.reset();
        c.kernel.b.reset();
    }
    if (o.a) {
        c.kernel.a = *o.a;
    }
    if (o.b) {
        c.kernel.b = *o.b;
    }
    set(c.kernel.eps_rep, o.eps_rep);
    set(c.kernel.grad_clip, o.grad_clip);

    auto& opt = c.optimizer;
    set(opt.dim, o.dim);
    set(opt.m, o.m);
    set(opt.n_epochs, o.epochs);
    set(opt.alpha0, o.alpha0);
    if (o.no_lr_decay) {
        opt.lr_decay = false;
    }
    opt.push_tail = opt.push_tail || o.push_tail;
    set(opt.seed, o.opt_seed);
    if (o.init) {
        opt.init = parse_init_mode(*o.init);
    }
    if (o.edge_order) {
        opt.edge_order = parse_edge_order(*o.edge_order);
    }
    set(c.loss_every, o.loss_every);

    set(c.hist.bins, o.bins);
    if (o.subset) {
        c.hist.subset = parse_pair_subset(*o.subset);
    }
    set(c.pumap.batch_size, o.batch_size);
    set(c.pumap.trials, o.trials);
    set(c.pumap.seed, o.pumap_seed);

    validate(c);
    return resolved(std::move(c));
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

fs::path prepare_output(const RunConfig& c) {
    fs::path dir(c.output);
    fs::create_directories(dir);
    open_output(dir / "config.toml") << to_toml(c);
    return dir;
}

/// Base configuration of a completed run: its echoed config with the output left in place.
RunConfig run_config(const std::string& run_dir) {
    const fs::path path = fs::path(run_dir) / "config.toml";
    if (!fs::exists(path)) {
        throw std::invalid_argument("run directory '" + run_dir + "' has no config.toml");
    }
    return load_run_config(path.string());
}

Embedding run_embedding(const std::string& run_dir) {
    const fs::path path = fs::path(run_dir) / "embedding.csv";
    if (!fs::exists(path)) {
        throw std::invalid_argument("run directory '" + run_dir + "' has no embedding.csv");
    }
    return load_embedding(path.string());
}

int cmd_generate(const RunConfig& c) {
    auto data = stage("dataset", [&] { return make_dataset(c.dataset); });
    auto dir = prepare_output(c);
    save_csv(data, (dir / "data.csv").string());
    std::cout << "wrote " << data.size() << " points to " << (dir / "data.csv").string() << '\n';
    return exit_ok;
}

int cmd_embed(const RunConfig& c) {
    auto dir = stage("output", [&] { return prepare_output(c); });
    auto data = stage("dataset", [&] { return make_dataset(c.dataset); });
    const auto kernel = make_kernel(c.kernel);
    auto graph = stage("graph", [&] { return make_graph(c.graph, data, kernel, c.optimizer.n_epochs); });
    auto initial = stage("init", [&] { return init_embedding(data, c.optimizer); });

    OptimizeOptions options;
    options.loss_every = c.loss_every;
    auto result = stage("optimize", [&] { return optimize(graph, initial, kernel, c.optimizer, options); });

    stage("write", [&] {
        save_csv(data, (dir / "data.csv").string());
        save_graph(graph, (dir / "graph_edges.csv").string(), (dir / "graph_nodes.csv").string());
        save_embedding(initial, (dir / "embedding_init.csv").string());
        save_embedding(result.embedding, (dir / "embedding.csv").string());
        auto losses = open_output(dir / "losses.csv");
        write_loss_records(result.losses, losses);
        auto plot = open_output(dir / "scatter.svg");
        svg::scatter(plot, { { "initial", &initial.coords }, { "after " + std::to_string(c.optimizer.n_epochs) + " epochs", &result.embedding.coords } });
        return 0;
    });

    std::cout << "nodes " << graph.size() << ", edges " << graph.num_edges() << ", mu(E) " << format_double(graph.total_weight()) << '\n';
    if (c.optimizer.dim >= 2) {
        const auto before = radial_stats(initial.coords), after = radial_stats(result.embedding.coords);
        std::cout << "radial std about centroid: " << format_double(before.radial_std) << " -> " << format_double(after.radial_std) << '\n';
        std::cout << "sector radial std:         " << format_double(before.sector_std) << " -> " << format_double(after.sector_std) << '\n';
    }
    if (!result.losses.empty()) {
        const auto& first = result.losses.front();
        const auto& last = result.losses.back();
        std::cout << "purported total: " << format_double(first.purported.total) << " -> " << format_double(last.purported.total) << '\n';
        std::cout << "effective total: " << format_double(first.effective.total) << " -> " << format_double(last.effective.total) << '\n';
    }
    std::cout << "artifacts in " << dir.string() << '\n';
    return exit_ok;
}

/// Purported losses of the standard and dense input similarities against four embedding similarities.
int cmd_loss_table(const RunConfig& c, const std::string& run_dir) {
    auto final_embedding = stage("load run", [&] { return run_embedding(run_dir); });
    auto data = stage("dataset", [&] { return make_dataset(c.dataset); });
    if (final_embedding.size() != data.size()) {
        throw StageError("load run", "embedding and dataset sizes differ", false);
    }
    const auto kernel = make_kernel(c.kernel);
    GraphSpec standard_spec = c.graph;
    standard_spec.dense = false;
    standard_spec.perturb.reset();
    auto standard = stage("graph", [&] { return make_graph(standard_spec, data, kernel, c.optimizer.n_epochs); });
    auto dense = stage("graph", [&] { return dense_similarities(data, kernel); });
    auto dir = prepare_output(c);

    const Embedding original{ data.points };
    auto row = [&](const SimilarityGraph& g) {
        const auto r = purported_loss_row(g, final_embedding, original, kernel);
        return std::vector<double>{ r.nu_equals_mu, r.diverged, r.phi_final, r.phi_original };
    };

    auto out = open_output(dir / "loss_table.csv");
    out << "input,nu_equals_mu,diverged,phi_final,phi_original\n";
    for (const auto& [label, g] : { std::pair<const char*, const SimilarityGraph*>{ "standard", &standard }, { "dense", &dense } }) {
        auto values = row(*g);
        out << label;
        std::cout << label;
        for (double v : values) {
            out << ',' << format_double(v);
            std::cout << '\t' << format_double(v);
        }
        out << '\n';
        std::cout << '\n';
    }
    return exit_ok;
}

void write_count_hist(std::ostream& out, const std::vector<double>& lo, const std::vector<double>& hi,
    const std::vector<std::pair<std::string, const std::vector<std::size_t>*> >& columns)
{
    out << "bin_lo,bin_hi";
    for (const auto& col : columns) {
        out << ',' << col.first;
    }
    out << '\n';
    for (std::size_t b = 0; b < lo.size(); ++b) {
        out << format_double(lo[b]) << ',' << format_double(hi[b]);
        for (const auto& col : columns) {
            out << ',' << (*col.second)[b];
        }
        out << '\n';
    }
}

std::vector<double> bin_edges(const std::vector<double>& lo, const std::vector<double>& hi) {
    auto edges = lo;
    edges.push_back(hi.back());
    return edges;
}

std::vector<double> as_doubles(const std::vector<std::size_t>& v) {
    return { v.begin(), v.end() };
}

int cmd_hist(const RunConfig& c, const std::string& run_dir, bool degrees, const std::string& compare) {
    auto data = stage("dataset", [&] { return make_dataset(c.dataset); });
    const auto kernel = make_kernel(c.kernel);
    auto graph = stage("graph", [&] { return make_graph(c.graph, data, kernel, c.optimizer.n_epochs); });
    auto dir = prepare_output(c);
    const auto targets = target_similarities(graph, c.optimizer.m);

    if (degrees) {
        auto h = degree_histogram(graph, c.hist.bins);
        auto out = open_output(dir / "degrees.csv");
        out << "# log2k=" << format_double(h.log2k_line) << " k_minus_1=" << format_double(h.knn_line) << '\n';
        write_count_hist(out, h.bin_lo, h.bin_hi, { { "count", &h.counts } });
        auto plot = open_output(dir / "degrees.svg");
        svg::bar_chart(plot, "node degrees", bin_edges(h.bin_lo, h.bin_hi), { { "degree", as_doubles(h.counts) } },
            { { "log2(k)", h.log2k_line }, { "k-1", h.knn_line } });
        std::cout << "degrees in [" << format_double(h.min_degree) << ", " << format_double(h.max_degree) << "], log2(k) = "
                  << format_double(h.log2k_line) << '\n';
        return exit_ok;
    }

    if (!compare.empty()) {
        const auto mode = parse_perturb_mode(compare);
        GraphSpec other_spec = c.graph;
        other_spec.perturb = mode;
        auto other = stage("graph", [&] { return make_graph(other_spec, data, kernel, c.optimizer.n_epochs); });
        const auto other_targets = target_similarities(other, c.optimizer.m);
        // Targets only: the embedding does not enter, so the data serve as a placeholder.
        const Embedding placeholder{ data.points };
        auto h0 = similarity_histograms(graph, targets, placeholder, kernel, c.hist.bins, PairSubset::positive_mu);
        auto h1 = similarity_histograms(other, other_targets, placeholder, kernel, c.hist.bins, PairSubset::positive_mu);
        const std::string name = std::string("compare_") + to_string(mode);
        auto out = open_output(dir / (name + ".csv"));
        write_count_hist(out, h0.bin_lo, h0.bin_hi, { { "target_original", &h0.count_target }, { std::string("target_") + to_string(mode), &h1.count_target } });
        auto plot = open_output(dir / (name + ".svg"));
        svg::bar_chart(plot, "target similarities on positive pairs", bin_edges(h0.bin_lo, h0.bin_hi),
            { { "original", as_doubles(h0.count_target) }, { to_string(mode), as_doubles(h1.count_target) } });
        std::cout << "total variation distance: " << format_double(total_variation(h0.count_target, h1.count_target)) << '\n';
        return exit_ok;
    }

    Embedding embedding;
    if (!run_dir.empty()) {
        embedding = stage("load run", [&] { return run_embedding(run_dir); });
    } else {
        auto initial = stage("init", [&] { return init_embedding(data, c.optimizer); });
        OptimizeOptions options;
        options.loss_every = 0;
        embedding = stage("optimize", [&] { return optimize(graph, initial, kernel, c.optimizer, options).embedding; });
    }
    auto h = stage("histogram", [&] { return similarity_histograms(graph, targets, embedding, kernel, c.hist.bins, c.hist.subset); });
    const std::string name = std::string("hist_") + to_string(c.hist.subset);
    auto out = open_output(dir / (name + ".csv"));
    write_histograms(h, out);
    auto plot = open_output(dir / (name + ".svg"));
    svg::bar_chart(plot, std::string("similarities, ") + to_string(c.hist.subset) + " pairs", bin_edges(h.bin_lo, h.bin_hi),
        { { "mu", as_doubles(h.count_mu) }, { "target", as_doubles(h.count_target) }, { "nu", as_doubles(h.count_nu) } }, {}, h.log_counts);
    std::cout << "wrote " << (dir / (name + ".csv")).string() << '\n';
    return exit_ok;
}

struct VerifyRow {
    std::string check;
    std::size_t i = 0, j = 0;
    double closed_form = 0, estimate = 0, se = 0;
    /// Informational rows are reported but never gate.
    bool gated = true;
};

int cmd_pumap_verify(const RunConfig& c) {
    auto data = stage("dataset", [&] { return make_dataset(c.dataset); });
    const auto kernel = make_kernel(c.kernel);
    auto graph = stage("graph", [&] { return make_graph(c.graph, data, kernel, c.optimizer.n_epochs); });
    auto embedding = stage("init", [&] { return init_embedding(data, c.optimizer); });
    auto dir = prepare_output(c);

    BatchSimConfig sim{ c.pumap.batch_size, c.optimizer.m, c.pumap.trials, c.pumap.seed };
    auto est = stage("monte carlo", [&] { return mc_expectations(graph, sim, &embedding, kernel); });
    const std::size_t n = graph.size();
    const auto T = static_cast<double>(sim.trials);

    std::vector<VerifyRow> rows;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t p = i * n + j;
            const double ep = i == j ? 0.0 : expected_edge_count(graph, sim.batch_size, i, j);
            const double en = expected_negative_count(graph, sim.m, sim.batch_size, i, j);
            // Poisson floor keeps rare pairs with no observed hits from collapsing the SE to zero.
            rows.push_back({ "E(P)", i, j, ep, est.mean_P[p], std::max(est.se_P[p], std::sqrt(ep / T)) });
            rows.push_back({ "E(N)", i, j, en, est.mean_N[p], std::max(est.se_N[p], std::sqrt(en / T)) });
        }
    }
    rows.push_back({ "batch_loss", 0, 0, pumap_expected_batch_loss(graph, embedding, kernel, sim.m, sim.batch_size), est.mean_loss, est.se_loss });
    rows.push_back({ "batch_loss_without_same_slot", 0, 0, pumap_effective_loss(graph, embedding, kernel, sim.m, sim.batch_size), est.mean_loss,
        est.se_loss, false });

    const bool precise = sim.trials >= min_gated_trials;
    std::size_t failures = 0;
    auto out = open_output(dir / "report.csv");
    out << "check,i,j,closed_form,estimate,se,z,status\n";
    for (const auto& r : rows) {
        const double diff = r.estimate - r.closed_form;
        const double z = r.se > 0 ? diff / r.se : (diff == 0 ? 0.0 : std::numeric_limits<double>::infinity());
        std::string status;
        if (!r.gated) {
            status = "info";
        } else if (!precise) {
            status = "insufficient_precision";
        } else if (std::abs(z) <= 4) {
            status = "pass";
        } else {
            status = "fail";
            ++failures;
        }
        out << r.check << ',' << r.i << ',' << r.j << ',' << format_double(r.closed_form) << ',' << format_double(r.estimate) << ','
            << format_double(r.se) << ',' << format_double(z) << ',' << status << '\n';
    }

    const double want = 2.0 * static_cast<double>(sim.m) * graph.total_weight() * static_cast<double>(sim.batch_size - 1) /
        static_cast<double>(sim.batch_size);
    const double got = pumap_total_repulsive_weight(graph, sim.m, sim.batch_size);
    const bool weight_ok = std::abs(got - want) <= 1e-9 * std::abs(want);
    out << "repulsive_total,0,0," << format_double(want) << ',' << format_double(got) << ",0,0," << (weight_ok ? "pass" : "fail") << '\n';
    failures += weight_ok ? 0 : 1;

    std::cout << "conservation violations: " << est.conservation_violations << '\n';
    failures += est.conservation_violations > 0 ? 1 : 0;
    if (!precise) {
        std::cout << "insufficient precision: " << sim.trials << " trials (need at least " << min_gated_trials
                  << "); Monte-Carlo rows not gated\n";
    }
    std::cout << rows.size() + 1 << " checks, " << failures << " failures; report in " << (dir / "report.csv").string() << '\n';
    return failures == 0 ? exit_ok : exit_gate;
}

}

int main(int argc, char** argv) {
    CLI::App app{ "Experiments on the effective objective of negative-sampling embedding optimizers" };
    app.require_subcommand(1);

    Overrides gen_o, embed_o, table_o, hist_o, verify_o;
    auto* gen = app.add_subcommand("generate", "Write a toy dataset");
    add_common_options(gen, gen_o);

    auto* embed = app.add_subcommand("embed", "Build the graph, optimize, and write embedding, losses and scatter plot");
    add_common_options(embed, embed_o);

    std::string table_run;
    auto* table = app.add_subcommand("loss-table", "Purported losses of a completed run against reference similarities");
    add_common_options(table, table_o);
    table->add_option("--run", table_run, "Directory of a completed embed run")->required();

    std::string hist_run, hist_compare;
    bool hist_degrees = false;
    auto* hist = app.add_subcommand("hist", "Similarity, target and degree histograms");
    add_common_options(hist, hist_o);
    hist->add_option("--run", hist_run, "Use the embedding of a completed embed run");
    auto* deg_flag = hist->add_flag("--degrees", hist_degrees, "Degree histogram with the log2(k) and k-1 lines");
    hist->add_option("--compare", hist_compare, "Overlay targets of the original and a perturbed graph")->excludes(deg_flag);

    auto* verify = app.add_subcommand("pumap-verify", "Monte-Carlo check of the parametric batch expectations");
    add_common_options(verify, verify_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    RunConfig config;
    try {
        if (gen->parsed()) {
            config = resolve(gen_o, RunConfig{});
            return cmd_generate(config);
        }
        if (embed->parsed()) {
            config = resolve(embed_o, RunConfig{});
            return cmd_embed(config);
        }
        if (table->parsed()) {
            RunConfig base = run_config(table_run);
            base.output = table_run;
            config = resolve(table_o, base);
            return cmd_loss_table(config, table_run);
        }
        if (hist->parsed()) {
            RunConfig base;
            if (!hist_run.empty()) {
                base = run_config(hist_run);
                base.output = hist_run;
            }
            config = resolve(hist_o, base);
            return cmd_hist(config, hist_run, hist_degrees, hist_compare);
        }
        if (verify->parsed()) {
            RunConfig base;
            base.name = "pumap";
            base.dataset.n = 20;
            base.graph.k = 5;
            config = resolve(verify_o, base);
            return cmd_pumap_verify(config);
        }
    } catch (const StageError& e) {
        std::cerr << "error in stage '" << e.stage << "': " << e.what() << "\nresolved configuration:\n" << to_toml(config);
        return e.numerical ? exit_numerical : exit_usage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}
