#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "portnet/temporal_graph.hpp"
#include "portnet/tgnn.hpp"

namespace portnet::tgnn {

/// Tracks the best validation loss and stops after `patience` epochs
/// without strict improvement.
class EarlyStopping {
public:
    explicit EarlyStopping(int patience);

    /// Records epoch `epoch`'s validation loss; returns true if it is a new best.
    bool observe(int epoch, double val_loss);
    bool should_stop() const { return since_best_ >= patience_; }
    int best_epoch() const { return best_epoch_; }
    double best_loss() const { return best_loss_; }

private:
    int patience_;
    int best_epoch_ = 0;
    int since_best_ = 0;
    double best_loss_;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

enum class StopReason { EarlyStopping, MaxEpochs };

struct TrainResult {
    ModelParameters params;  // from the best-validation epoch
    FeatureStats stats;
    IndexRange train;
    IndexRange val;
    std::vector<double> class_weights;
    int best_epoch = 0;
    StopReason stop = StopReason::MaxEpochs;
    std::vector<EpochRecord> history;
    std::size_t parameter_count = 0;
};

/// Full-batch training on snapshots[fold.train] with early stopping on the loss
/// over snapshots[fold.val]. The recurrent state for validation is warmed up on
/// every snapshot before the validation block. Seeded with config.seed + fold_index.
TrainResult train_fold(std::span<const GraphSnapshot> snapshots, const Fold& fold,
                       const TrainConfig& config, int fold_index = 0);

/// Normalizes with the fold's training statistics (or passes raw features
/// when config.normalize is false) and prepares every snapshot up to fold.val.end.
std::vector<SnapshotGraph> prepare_fold(std::span<const GraphSnapshot> snapshots,
                                        const FeatureStats& stats, bool normalize,
                                        std::size_t end);

}  // namespace portnet::tgnn
