#include "portnet/training.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "portnet/error.hpp"

namespace portnet::tgnn {

EarlyStopping::EarlyStopping(int patience)
    : patience_(patience), best_loss_(std::numeric_limits<double>::infinity()) {
    if (patience < 1) throw InvalidInput("patience must be >= 1", "patience");
}

bool EarlyStopping::observe(int epoch, double val_loss) {
    if (val_loss < best_loss_) {
        best_loss_ = val_loss;
        best_epoch_ = epoch;
        since_best_ = 0;
        return true;
    }
    ++since_best_;
    return false;
}

std::vector<SnapshotGraph> prepare_fold(std::span<const GraphSnapshot> snapshots, const FeatureStats& stats,
                                        bool normalize, std::size_t end) {
    if (end > snapshots.size()) throw PreconditionError("fold extends past the last snapshot");
    const auto head = snapshots.first(end);
    const TemporalDataset ds = normalize ? apply_stats(head, stats) : raw_dataset(head);
    return prepare(ds.snapshots);
}

TrainResult train_fold(std::span<const GraphSnapshot> snapshots, const Fold& fold, const TrainConfig& config,
                       int fold_index) {
    config.validate();
    if (fold.train.size() == 0 || fold.val.size() == 0 || fold.val.end > snapshots.size() ||
        fold.train.end > fold.val.begin)
        throw PreconditionError("invalid fold ranges");

    TrainResult result;
    result.train = fold.train;
    result.val = fold.val;
    if (config.normalize) result.stats = compute_stats(snapshots, fold.train.end);
    const auto graphs = prepare_fold(snapshots, result.stats, config.normalize, fold.val.end);
    const std::span<const SnapshotGraph> train_graphs(graphs.data(), fold.train.end);
    result.class_weights = class_weights(train_graphs.subspan(fold.train.begin));

    const auto seed = config.seed + static_cast<std::uint64_t>(fold_index);
    ModelParameters params = init_parameters(static_cast<int>(kFeatureDim), config, seed);
    result.parameter_count = parameter_count(params);
    OptimizerState opt = make_optimizer(params);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const DropoutSampler dropout{config.dropout, &rng};
    EarlyStopping stopper(config.patience);
    result.params = params;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) try {
        ad::Tape tape;
        const ParamVars vars = bind(tape, params);
        const auto logits = model_forward(tape, train_graphs, vars, config, &dropout);
        const Var loss = weighted_loss(logits, train_graphs, fold.train, result.class_weights);
        tape.backward(loss);
        const ModelParameters grads = gradients(tape, vars);
        check_finite(grads, "gradient");
        adam_step(params, grads, opt, config.learning_rate);
        check_finite(params, "parameter");

        const auto eval = model_forward(graphs, params, config);
        const double val_loss = weighted_loss(eval, graphs, fold.val, result.class_weights);
        if (!std::isfinite(val_loss)) throw NumericError("non-finite validation loss");
        result.history.push_back({epoch, loss.scalar(), val_loss});
        if (stopper.observe(epoch, val_loss)) result.params = params;
        if (stopper.should_stop()) {
            result.stop = StopReason::EarlyStopping;
            break;
        }
    } catch (const NumericError& e) {
        throw NumericError("fold " + std::to_string(fold_index) + ", epoch " + std::to_string(epoch) + ": " + e.what());
    }
    result.best_epoch = stopper.best_epoch();
    return result;
}

}  // namespace portnet::tgnn
