#include "portnet/metrics.hpp"

#include <cmath>
#include <sstream>

#include "portnet/error.hpp"

namespace portnet {
namespace {

void check_label(int y) {
    if (y != 0 && y != 1) throw InvalidInput("label " + std::to_string(y) + " is not 0 or 1", "label");
}

}  // namespace

ConfusionMatrix confusion_from_counts(const std::array<std::array<long, 2>, 2>& counts) {
    ConfusionMatrix m;
    m.counts = counts;
    for (int t = 0; t < 2; ++t) {
        const double row = static_cast<double>(counts[t][0] + counts[t][1]);
        for (int p = 0; p < 2; ++p) m.normalized[t][p] = row > 0 ? static_cast<double>(counts[t][p]) / row : 0.0;
    }
    return m;
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size()) throw InvalidInput("y_true and y_pred differ in length", "y_pred");
    std::array<std::array<long, 2>, 2> counts{};
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        check_label(y_true[i]);
        check_label(y_pred[i]);
        ++counts[y_true[i]][y_pred[i]];
    }
    return confusion_from_counts(counts);
}

Prf weighted_prf(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.empty()) throw InvalidInput("no samples to score", "y_true");
    const auto m = confusion(y_true, y_pred);
    const auto& c = m.counts;
    Prf out;
    const double n = static_cast<double>(y_true.size());
    for (int k = 0; k < 2; ++k) {
        const double tp = static_cast<double>(c[k][k]);
        const double support = static_cast<double>(c[k][0] + c[k][1]);
        const double predicted = static_cast<double>(c[0][k] + c[1][k]);
        const double p = predicted > 0 ? tp / predicted : 0.0;
        const double r = support > 0 ? tp / support : 0.0;
        const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
        out.precision += support / n * p;
        out.recall += support / n * r;
        out.fscore += support / n * f;
    }
    return out;
}

MeanStd mean_std(std::span<const double> values) {
    if (values.empty()) return {};
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

ScoreReport aggregate(std::span<const Prf> per_fold) {
    std::vector<double> p, r, f;
    for (const auto& s : per_fold) {
        p.push_back(s.precision);
        r.push_back(s.recall);
        f.push_back(s.fscore);
    }
    return {mean_std(p), mean_std(r), mean_std(f)};
}

std::string confusion_to_csv(const ConfusionMatrix& m) {
    std::ostringstream os;
    os << "true,pred_actual,pred_gateway,count_actual,count_gateway\n";
    const char* names[] = {"actual", "gateway"};
    for (int t = 0; t < 2; ++t)
        os << names[t] << ',' << m.normalized[t][0] << ',' << m.normalized[t][1] << ',' << m.counts[t][0] << ','
           << m.counts[t][1] << '\n';
    return os.str();
}

}  // namespace portnet
