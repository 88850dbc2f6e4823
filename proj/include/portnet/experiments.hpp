#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "portnet/metrics.hpp"
#include "portnet/training.hpp"

namespace portnet {

struct FoldOutcome {
    tgnn::TrainResult training;
    std::vector<int> y_true;  // labeled validation node-days, snapshot-major
    std::vector<int> y_pred;
    Prf scores;
};

struct CvResult {
    std::vector<FoldOutcome> folds;
    ScoreReport report;
    ConfusionMatrix confusion;  // counts pooled over folds
};

using ProgressFn = std::function<void(const std::string&)>;

/// Time-series cross-validation: one model per fold, scored on that fold's
/// validation block with per-(day, node) granularity.
CvResult cross_validate(std::span<const GraphSnapshot> snapshots, const tgnn::TrainConfig& config,
                        const ProgressFn& progress = {});

/// Scores a trained model on snapshots[result.val].
FoldOutcome evaluate_fold(std::span<const GraphSnapshot> snapshots, const tgnn::TrainConfig& config,
                          const tgnn::TrainResult& result);

struct AblationRow {
    std::string flags;  // "alpha", "t", "alpha+t"
    bool use_attention = true;
    bool use_temporal = true;
    CvResult cv;
};

/// Attention-only, temporal-only and full model with identical seeds.
std::vector<AblationRow> ablation_report(std::span<const GraphSnapshot> snapshots,
                                         const tgnn::TrainConfig& base,
                                         const ProgressFn& progress = {});

struct SweepRow {
    double dropout = 0.0;
    CvResult cv;
};

std::vector<SweepRow> dropout_sweep(std::span<const GraphSnapshot> snapshots,
                                    const tgnn::TrainConfig& base, std::span<const double> ps,
                                    const ProgressFn& progress = {});

inline constexpr double kDropoutGrid[] = {0.0, 0.1, 0.2, 0.3};

// Report tables.
struct ReportRow {
    std::string key;  // flags or dropout probability
    ScoreReport scores;
};

std::string report_to_csv(const std::string& key_column, std::span<const ReportRow> rows);
std::vector<ReportRow> report_from_csv(const std::string& text, std::string* key_column = nullptr);
std::string report_to_text(const std::string& key_column, std::span<const ReportRow> rows);

std::vector<ReportRow> rows_of(std::span<const AblationRow> rows);
std::vector<ReportRow> rows_of(std::span<const SweepRow> rows);

/// epoch,train_loss,val_loss for one training run.
std::string loss_history_csv(const tgnn::TrainResult& run);
/// fold,epoch,train_loss,val_loss for every fold.
std::string loss_history_all_csv(const CvResult& cv);

}  // namespace portnet
