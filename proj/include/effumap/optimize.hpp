#ifndef EFFUMAP_OPTIMIZE_HPP
#define EFFUMAP_OPTIMIZE_HPP

#include "losses.hpp"
#include "optimizer.hpp"

#include <functional>
#include <vector>

/**
 * @file optimize.hpp
 *
 * @brief Full optimization run with per-epoch loss tracking.
 */

namespace effumap {

struct OptimizeOptions {
    /// Record losses every `loss_every` epochs (and always after the last one); 0 disables tracking.
    std::size_t loss_every = 1;
    LogMode log_mode = LogMode::clamped;
    /// Called with (epoch, embedding) after each epoch, e.g. to write snapshots.
    std::function<void(std::size_t, const Embedding&)> on_epoch;
};

struct OptimizeResult {
    Embedding embedding;
    /// First record is the initial embedding (epoch 0); then one per tracked epoch, 1-based.
    std::vector<LossRecord> losses;
};

inline LossRecord evaluate_losses(const SimilarityGraph& graph, const Embedding& embedding, const Kernel& kernel, std::size_t m,
    const EpochSampleLog* log, std::size_t epoch, LogMode mode)
{
    LossRecord r;
    r.epoch = epoch;
    r.purported = purported_loss(graph, embedding, kernel, mode);
    r.effective = effective_loss(graph, embedding, kernel, m, mode);
    if (log) {
        r.actual = actual_epoch_loss(*log, embedding, kernel, mode);
    }
    for (const LossParts* p : { &r.purported, &r.effective, &r.actual }) {
        if (!std::isfinite(p->total)) {
            throw NumericalError("non-finite loss at epoch " + std::to_string(epoch));
        }
    }
    return r;
}

/**
 * Runs `config.n_epochs` epochs from `initial`. Each loss record is evaluated on the
 * embedding after its epoch; the actual loss uses that epoch's sample log.
 */
inline OptimizeResult optimize(const SimilarityGraph& graph, Embedding initial, const Kernel& kernel, const OptimizerConfig& config,
    const OptimizeOptions& options = {})
{
    validate(config);
    validate(kernel);
    if (graph.size() != initial.size()) {
        throw std::invalid_argument("optimize: graph and embedding sizes differ");
    }

    OptimizeResult out{ std::move(initial), {} };
    if (options.loss_every > 0) {
        out.losses.push_back(evaluate_losses(graph, out.embedding, kernel, config.m, nullptr, 0, options.log_mode));
    }

    auto rng = make_rng(config.seed, stream::optimizer);
    for (std::size_t t = 0; t < config.n_epochs; ++t) {
        auto log = run_epoch(graph, out.embedding, kernel, config, t, rng);
        const std::size_t epoch = t + 1;
        if (options.loss_every > 0 && (epoch % options.loss_every == 0 || epoch == config.n_epochs)) {
            out.losses.push_back(evaluate_losses(graph, out.embedding, kernel, config.m, &log, epoch, options.log_mode));
        }
        if (options.on_epoch) {
            options.on_epoch(epoch, out.embedding);
        }
    }
    return out;
}

/**
 * Convenience overload: initializes from `data` per `config.init`.
 */
inline OptimizeResult optimize(const SimilarityGraph& graph, const Dataset& data, const Kernel& kernel, const OptimizerConfig& config,
    const OptimizeOptions& options = {})
{
    return optimize(graph, init_embedding(data, config), kernel, config, options);
}

}

#endif
