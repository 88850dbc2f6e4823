#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace portnet {

/// Rows are true labels, columns predicted labels.
struct ConfusionMatrix {
    std::array<std::array<long, 2>, 2> counts{};
    std::array<std::array<double, 2>, 2> normalized{};

    double diagonal_mean() const { return 0.5 * (normalized[0][0] + normalized[1][1]); }
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);
ConfusionMatrix confusion_from_counts(const std::array<std::array<long, 2>, 2>& counts);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double fscore = 0.0;
};

/// Support-weighted precision/recall/F1 over classes {0, 1}. A class with no
/// predictions gets precision 0.
Prf weighted_prf(std::span<const int> y_true, std::span<const int> y_pred);

struct MeanStd {
    double mean = 0.0;
    double sd = 0.0;  // population standard deviation
};

MeanStd mean_std(std::span<const double> values);

struct ScoreReport {
    MeanStd precision;
    MeanStd recall;
    MeanStd fscore;
};

ScoreReport aggregate(std::span<const Prf> per_fold);

std::string confusion_to_csv(const ConfusionMatrix& m);

}  // namespace portnet
