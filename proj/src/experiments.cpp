#include "portnet/experiments.hpp"

#include <exception>
#include <iomanip>
#include <sstream>

#include "portnet/ais_csv.hpp"
#include "portnet/error.hpp"

namespace portnet {
namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s, const char* field, std::size_t line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw InvalidInput("bad number '" + s + "'", field, line);
    return v;
}

std::string dropout_key(double p) {
    std::ostringstream os;
    os << p;
    return os.str();
}

}  // namespace

FoldOutcome evaluate_fold(std::span<const GraphSnapshot> snapshots, const tgnn::TrainConfig& config,
                          const tgnn::TrainResult& result) {
    const auto graphs = tgnn::prepare_fold(snapshots, result.stats, config.normalize, result.val.end);
    const auto preds = tgnn::predict(graphs, result.params, config);
    FoldOutcome out;
    for (std::size_t s = result.val.begin; s < result.val.end; ++s)
        for (std::size_t i = 0; i < graphs[s].labels.size(); ++i) {
            const int y = graphs[s].labels[i];
            if (y < 0) continue;
            out.y_true.push_back(y);
            out.y_pred.push_back(preds[s][i].cls);
        }
    if (out.y_true.empty()) throw PreconditionError("validation block has no labeled nodes");
    out.scores = weighted_prf(out.y_true, out.y_pred);
    out.training = result;
    return out;
}

CvResult cross_validate(std::span<const GraphSnapshot> snapshots, const tgnn::TrainConfig& config,
                        const ProgressFn& progress) {
    config.validate();
    const auto folds = time_series_splits(snapshots.size(), static_cast<std::size_t>(config.n_splits));
    CvResult cv;
    cv.folds.resize(folds.size());
    std::vector<std::exception_ptr> errors(folds.size());
    const int n = static_cast<int>(folds.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < n; ++k) {
        try {
            const auto trained = tgnn::train_fold(snapshots, folds[k], config, k);
            cv.folds[k] = evaluate_fold(snapshots, config, trained);
            if (progress) {
                const auto& f = cv.folds[k];
                std::ostringstream os;
                os << "fold " << k + 1 << '/' << n << ": f=" << f.scores.fscore << " best_epoch=" << f.training.best_epoch
                   << " epochs=" << f.training.history.size();
#pragma omp critical(portnet_progress)
                progress(os.str());
            }
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<Prf> scores;
    std::array<std::array<long, 2>, 2> pooled{};
    for (int k = 0; k < n; ++k) {
        const auto& f = cv.folds[k];
        scores.push_back(f.scores);
        const auto c = confusion(f.y_true, f.y_pred);
        for (int t = 0; t < 2; ++t)
            for (int p = 0; p < 2; ++p) pooled[t][p] += c.counts[t][p];
    }
    cv.report = aggregate(scores);
    cv.confusion = confusion_from_counts(pooled);
    return cv;
}

std::vector<AblationRow> ablation_report(std::span<const GraphSnapshot> snapshots, const tgnn::TrainConfig& base,
                                         const ProgressFn& progress) {
    std::vector<AblationRow> rows{{"alpha", true, false, {}}, {"t", false, true, {}}, {"alpha+t", true, true, {}}};
    for (auto& row : rows) {
        auto config = base;
        config.use_attention = row.use_attention;
        config.use_temporal = row.use_temporal;
        if (progress) progress("setting " + row.flags);
        row.cv = cross_validate(snapshots, config, progress);
    }
    return rows;
}

std::vector<SweepRow> dropout_sweep(std::span<const GraphSnapshot> snapshots, const tgnn::TrainConfig& base,
                                    std::span<const double> ps, const ProgressFn& progress) {
    std::vector<SweepRow> rows;
    for (double p : ps) {
        auto config = base;
        config.dropout = p;
        if (progress) progress("dropout " + dropout_key(p));
        rows.push_back({p, cross_validate(snapshots, config, progress)});
    }
    return rows;
}

std::string report_to_csv(const std::string& key_column, std::span<const ReportRow> rows) {
    std::ostringstream os;
    os << key_column << ",precision_mu,precision_sd,recall_mu,recall_sd,f_mu,f_sd\n";
    for (const auto& r : rows) {
        const auto& s = r.scores;
        os << r.key << ',' << format_double(s.precision.mean) << ',' << format_double(s.precision.sd) << ','
           << format_double(s.recall.mean) << ',' << format_double(s.recall.sd) << ',' << format_double(s.fscore.mean)
           << ',' << format_double(s.fscore.sd) << '\n';
    }
    return os.str();
}

std::vector<ReportRow> report_from_csv(const std::string& text, std::string* key_column) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw InvalidInput("empty report", "header", 1);
    const auto header = split(line);
    if (header.size() != 7 || header[1] != "precision_mu" || header[6] != "f_sd")
        throw InvalidInput("unexpected report header", "header", 1);
    if (key_column) *key_column = header[0];
    std::vector<ReportRow> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != 7) throw InvalidInput("expected 7 columns", "row", lineno);
        ReportRow r;
        r.key = cells[0];
        r.scores.precision = {parse_number(cells[1], "precision_mu", lineno), parse_number(cells[2], "precision_sd", lineno)};
        r.scores.recall = {parse_number(cells[3], "recall_mu", lineno), parse_number(cells[4], "recall_sd", lineno)};
        r.scores.fscore = {parse_number(cells[5], "f_mu", lineno), parse_number(cells[6], "f_sd", lineno)};
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string report_to_text(const std::string& key_column, std::span<const ReportRow> rows) {
    std::ostringstream os;
    os << std::left << std::setw(10) << key_column << std::setw(20) << "precision" << std::setw(20) << "recall"
       << "f-score\n";
    os << std::fixed << std::setprecision(4);
    for (const auto& r : rows) {
        auto cell = [](const MeanStd& m) {
            std::ostringstream c;
            c << std::fixed << std::setprecision(4) << m.mean << " +/- " << m.sd;
            return c.str();
        };
        os << std::setw(10) << r.key << std::setw(20) << cell(r.scores.precision) << std::setw(20)
           << cell(r.scores.recall) << cell(r.scores.fscore) << '\n';
    }
    return os.str();
}

std::vector<ReportRow> rows_of(std::span<const AblationRow> rows) {
    std::vector<ReportRow> out;
    for (const auto& r : rows) out.push_back({r.flags, r.cv.report});
    return out;
}

std::vector<ReportRow> rows_of(std::span<const SweepRow> rows) {
    std::vector<ReportRow> out;
    for (const auto& r : rows) out.push_back({dropout_key(r.dropout), r.cv.report});
    return out;
}

std::string loss_history_csv(const tgnn::TrainResult& run) {
    std::ostringstream os;
    os << "epoch,train_loss,val_loss\n";
    for (const auto& e : run.history)
        os << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.val_loss) << '\n';
    return os.str();
}

std::string loss_history_all_csv(const CvResult& cv) {
    std::ostringstream os;
    os << "fold,epoch,train_loss,val_loss\n";
    for (std::size_t k = 0; k < cv.folds.size(); ++k)
        for (const auto& e : cv.folds[k].training.history)
            os << k << ',' << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.val_loss) << '\n';
    return os.str();
}

}  // namespace portnet
