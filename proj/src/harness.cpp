#include "psr/harness.hpp"

#include "psr/penalize.hpp"
#include "psr/rng.hpp"
#include "psr/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace psr {

const char* to_string(SelectionMetric metric) {
    switch (metric) {
        case SelectionMetric::f1: return "f1";
        case SelectionMetric::bs: return "bs";
        case SelectionMetric::pbs: return "pbs";
        case SelectionMetric::ll: return "ll";
        case SelectionMetric::pll: return "pll";
    }
    return "?";
}

SelectionMetric selection_metric_from_string(const std::string& name) {
    if (name == "f1") return SelectionMetric::f1;
    if (name == "bs") return SelectionMetric::bs;
    if (name == "pbs") return SelectionMetric::pbs;
    if (name == "ll") return SelectionMetric::ll;
    if (name == "pll") return SelectionMetric::pll;
    throw DomainError("unknown selection metric '" + name + "'");
}

Orientation orientation(SelectionMetric metric) {
    return metric == SelectionMetric::f1 ? Orientation::PositivelyOriented
                                         : Orientation::NegativelyOriented;
}

double EpochRecord::value(SelectionMetric metric) const {
    switch (metric) {
        case SelectionMetric::f1: return f1;
        case SelectionMetric::bs: return bs;
        case SelectionMetric::pbs: return pbs;
        case SelectionMetric::ll: return ll;
        case SelectionMetric::pll: return pll;
    }
    throw DomainError("bad selection metric");
}

std::vector<double> TrainingTrace::series(SelectionMetric metric) const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& record : records) {
        out.push_back(record.value(metric));
    }
    return out;
}

FeatureScaler FeatureScaler::fit(const Matrix& data) {
    FeatureScaler scaler;
    scaler.mean = data.colwise().mean();
    const Matrix centered = data.rowwise() - scaler.mean.transpose();
    scaler.scale =
        (centered.array().square().colwise().sum() / double(data.rows())).sqrt().max(1e-8);
    return scaler;
}

Matrix FeatureScaler::apply(const Matrix& data) const {
    return (data.rowwise() - mean.transpose()).array().rowwise() /
           scale.transpose().array();
}

namespace {

EpochRecord validation_record(int epoch, const SoftmaxMlp& net, const Matrix& val_x,
                              const SegmentSet& val) {
    const PredictionBatch preds(net.predict(val_x));
    const LabelBatch truth(val.window_labels);
    EpochRecord record;
    record.epoch = epoch;
    record.f1 = macro_f1(preds, truth);
    record.bs = brier_score(preds, truth).mean;
    record.pbs = penalized_brier_score(preds, truth).mean;
    record.ll = log_loss(preds, truth).mean;
    record.pll = penalized_log_loss(preds, truth).mean;
    return record;
}

}  // namespace

TrainingRun train_classifier(const SegmentSet& train, const SegmentSet& val, const Hyperparams& hp,
                             const std::optional<EarlyStopSpec>& early_stopping) {
    if (hp.epochs < 1) {
        throw DomainError("train_classifier: need at least one epoch");
    }
    if (hp.batch_size < 1 || hp.hidden_units < 1 || hp.learning_rate <= 0.0) {
        throw DomainError("train_classifier: bad hyperparameters");
    }
    if (train.feature_dim() != val.feature_dim() || train.classes() != val.classes()) {
        throw ShapeError("train_classifier: train and validation shapes differ");
    }
    if (train.size() < 1 || val.size() < 1) {
        throw DomainError("train_classifier: empty train or validation set");
    }

    const FeatureScaler scaler = FeatureScaler::fit(train.windows);
    const Matrix train_x = scaler.apply(train.windows);
    const Matrix val_x = scaler.apply(val.windows);

    SoftmaxMlp net(train.feature_dim(), hp.hidden_units, train.classes(), hp.seed);
    Rng shuffle_rng = substream(hp.seed, 0x5huffle);
    std::vector<Eigen::Index> order(std::size_t(train.size()));
    std::iota(order.begin(), order.end(), 0);

    TrainingRun run;
    run.trace.hyperparams = hp;
    MlpParams grads;
    Matrix batch_x, batch_y;

    for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[std::size_t(shuffle_rng.next_below(i))]);
        }
        for (Eigen::Index start = 0; start < train.size(); start += hp.batch_size) {
            const Eigen::Index count = std::min<Eigen::Index>(hp.batch_size, train.size() - start);
            batch_x.resize(count, train_x.cols());
            batch_y.resize(count, train.classes());
            for (Eigen::Index b = 0; b < count; ++b) {
                batch_x.row(b) = train_x.row(order[std::size_t(start + b)]);
                batch_y.row(b) = train.window_labels.row(order[std::size_t(start + b)]);
            }
            const double loss = net.loss_and_gradients(batch_x, batch_y, grads);
            if (!std::isfinite(loss)) {
                throw std::runtime_error("train_classifier: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch offset " +
                                         std::to_string(start));
            }
            net.gradient_step(grads, hp.learning_rate);
        }
        run.trace.records.push_back(validation_record(epoch, net, val_x, val));
        run.checkpoints.push_back(net.params());
        run.stopping_epoch = epoch;
        if (early_stopping &&
            early_stop(run.trace, early_stopping->metric, early_stopping->patience,
                       early_stopping->min_delta) == StopDecision::stop) {
            break;
        }
    }
    return run;
}

StopDecision early_stop(const TrainingTrace& trace_so_far, SelectionMetric metric, int patience,
                        double min_delta) {
    if (patience < 1) {
        throw DomainError("early_stop: patience must be >= 1");
    }
    const bool maximize = orientation(metric) == Orientation::PositivelyOriented;
    double best = maximize ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();
    int stagnant = 0;
    for (const auto& record : trace_so_far.records) {
        const double value = record.value(metric);
        const bool improved = maximize ? value > best + min_delta : value < best - min_delta;
        if (improved) {
            best = value;
            stagnant = 0;
        } else if (++stagnant >= patience) {
            return StopDecision::stop;
        }
    }
    return StopDecision::keep_training;
}

SelectionOutcome select_checkpoint(const TrainingTrace& trace, SelectionMetric metric) {
    if (trace.records.empty()) {
        throw DomainError("select_checkpoint: empty trace");
    }
    const bool maximize = orientation(metric) == Orientation::PositivelyOriented;
    SelectionOutcome outcome;
    outcome.metric = metric;
    outcome.stopping_epoch = trace.records.back().epoch;
    int best_epoch = trace.records.front().epoch;
    double best = trace.records.front().value(metric);
    for (const auto& record : trace.records) {
        const double value = record.value(metric);
        if (maximize ? value > best : value < best) {
            best = value;
            best_epoch = record.epoch;
        }
    }
    outcome.chosen_epoch = best_epoch;
    return outcome;
}

double flipped_trace_correlation(const TrainingTrace& trace, SelectionMetric metric) {
    if (trace.records.size() < 2) {
        throw DomainError("flipped_trace_correlation: need at least 2 epochs");
    }
    const std::vector<double> f1 = trace.series(SelectionMetric::f1);
    std::vector<double> other = trace.series(metric);
    if (orientation(metric) == Orientation::NegativelyOriented) {
        for (double& v : other) {
            v = -v;
        }
    }
    return pearson_corr(f1, other);
}

std::vector<BlockSplit> hblock_splits(int h) {
    if (h < 4) {
        throw DomainError("hblock_splits: need h >= 4 for nonempty roles");
    }
    const int nv = int(std::floor(0.2 * h));
    const int nt = int(std::floor(0.3 * h));
    std::vector<BlockSplit> folds;
    folds.reserve(std::size_t(h));
    for (int i = 0; i < h; ++i) {
        BlockSplit split;
        split.fold = i;
        split.h = h;
        std::vector<bool> used(std::size_t(h), false);
        for (int k = 0; k < nv; ++k) {
            const int b = (i + k) % h;
            split.validation_blocks.push_back(b);
            used[std::size_t(b)] = true;
        }
        for (int k = 0; k < nt; ++k) {
            const int b = (i + nv + k) % h;
            split.test_blocks.push_back(b);
            used[std::size_t(b)] = true;
        }
        for (int b = 0; b < h; ++b) {
            if (!used[std::size_t(b)]) {
                split.train_blocks.push_back(b);
            }
        }
        folds.push_back(std::move(split));
    }
    return folds;
}

FoldData build_fold(const TimeSeriesDataset& ds, const BlockSplit& split,
                    Eigen::Index window_length, double overlap) {
    if (split.train_blocks.empty() || split.validation_blocks.empty() ||
        split.test_blocks.empty()) {
        throw DomainError("build_fold: every role needs at least one block");
    }
    const auto segments_of = [&](const std::vector<int>& blocks) {
        std::vector<SegmentSet> parts;
        parts.reserve(blocks.size());
        for (const int b : blocks) {
            const Eigen::Index begin = ds.length() * b / split.h;
            const Eigen::Index end = ds.length() * (b + 1) / split.h;
            parts.push_back(segment(slice(ds, begin, end), window_length, overlap));
        }
        return concat(parts);
    };
    return FoldData{segments_of(split.train_blocks), segments_of(split.validation_blocks),
                    segments_of(split.test_blocks)};
}

std::map<std::string, double> evaluate_checkpoint(const MlpParams& params, const SegmentSet& test) {
    SoftmaxMlp net(params.w1.cols(), params.w1.rows(), params.w2.rows(), 0);
    net.set_params(params);
    const PredictionBatch preds(net.predict(test.windows));
    const LabelBatch truth(test.window_labels);
    return {
        {"f1", macro_f1(preds, truth)},
        {"acc", accuracy(preds, truth)},
        {"bs", brier_score(preds, truth).mean},
        {"pbs", penalized_brier_score(preds, truth).mean},
        {"ll", log_loss(preds, truth).mean},
        {"pll", penalized_log_loss(preds, truth).mean},
    };
}

namespace {

// Test features must go through the same scaler as training; re-fit here to
// keep checkpoints free of scaler state.
struct FoldEvaluation {
    TrainingRun run;
    FeatureScaler scaler;
    SegmentSet scaled_test;
};

FoldEvaluation train_fold(const ExperimentConfig& cfg, const TimeSeriesDataset& ds,
                          const BlockSplit& split) {
    FoldData fold = build_fold(ds, split, cfg.window_length, cfg.overlap);
    FoldEvaluation eval;
    eval.scaler = FeatureScaler::fit(fold.train.windows);
    Hyperparams hp = cfg.hp;
    hp.seed = substream(cfg.hp.seed, std::uint64_t(split.fold) + 1).next_u64();
    eval.run = train_classifier(fold.train, fold.validation, hp);
    eval.scaled_test = std::move(fold.test);
    eval.scaled_test.windows = eval.scaler.apply(eval.scaled_test.windows);
    return eval;
}

TrainingTrace truncated(const TrainingTrace& trace, int epochs) {
    TrainingTrace out;
    out.hyperparams = trace.hyperparams;
    out.records.assign(trace.records.begin(), trace.records.begin() + epochs);
    return out;
}

// Early stopping replayed over a finished trace: training dynamics do not
// depend on the stop signal, so the stop epoch can be found after the fact.
int simulated_stop_epoch(const TrainingTrace& trace, SelectionMetric metric, int patience,
                         double min_delta) {
    for (int epoch = 1; epoch <= trace.epochs(); ++epoch) {
        if (early_stop(truncated(trace, epoch), metric, patience, min_delta) ==
            StopDecision::stop) {
            return epoch;
        }
    }
    return trace.epochs();
}

BenchmarkRow evaluate_mode(const ExperimentConfig& cfg, const FoldEvaluation& eval, int fold,
                           bool early_stopping_mode) {
    BenchmarkRow row;
    row.fold = fold;
    row.early_stopping = early_stopping_mode;
    for (const SelectionMetric metric : kComparedMetrics) {
        TrainingTrace visible = eval.run.trace;
        if (early_stopping_mode) {
            const int stop = simulated_stop_epoch(eval.run.trace, metric, cfg.es_patience,
                                                  cfg.es_min_delta);
            visible = truncated(eval.run.trace, stop);
        }
        const SelectionOutcome outcome = select_checkpoint(visible, metric);
        const auto metrics = evaluate_checkpoint(
            eval.run.checkpoints[std::size_t(outcome.chosen_epoch - 1)], eval.scaled_test);
        const std::string name = to_string(metric);
        row.test_f1[name] = metrics.at("f1");
        row.correlation[name] = flipped_trace_correlation(visible, metric);
        row.chosen_epoch[name] = outcome.chosen_epoch;
    }
    return row;
}

}  // namespace

BenchmarkTable benchmark(const ExperimentConfig& cfg) {
    const TimeSeriesDataset ds =
        synth_dataset(cfg.classes, cfg.channels, cfg.length, cfg.data_seed, cfg.difficulty);
    const std::vector<BlockSplit> folds = hblock_splits(cfg.h);

    BenchmarkTable table;
    for (const BlockSplit& split : folds) {
        const FoldEvaluation eval = train_fold(cfg, ds, split);
        table.rows.push_back(evaluate_mode(cfg, eval, split.fold, false));
        table.rows.push_back(evaluate_mode(cfg, eval, split.fold, true));
    }

    const auto aggregate = [&](bool es, std::map<std::string, double>& mean_f1,
                               std::map<std::string, double>& std_f1,
                               std::map<std::string, double>& mean_cor) {
        for (const SelectionMetric metric : kComparedMetrics) {
            const std::string name = to_string(metric);
            double sum = 0.0, sum_sq = 0.0, cor_sum = 0.0;
            int count = 0;
            for (const auto& row : table.rows) {
                if (row.early_stopping != es) {
                    continue;
                }
                const double f1 = row.test_f1.at(name);
                sum += f1;
                sum_sq += f1 * f1;
                cor_sum += row.correlation.at(name);
                ++count;
            }
            const double mean = sum / count;
            mean_f1[name] = mean;
            std_f1[name] = std::sqrt(std::max(0.0, sum_sq / count - mean * mean));
            mean_cor[name] = cor_sum / count;
        }
    };
    aggregate(false, table.mean_f1_cp, table.std_f1_cp, table.mean_cor_cp);
    aggregate(true, table.mean_f1_es, table.std_f1_es, table.mean_cor_es);
    return table;
}

SelectionStudyRun run_selection_study(const ExperimentConfig& cfg, int fold_index) {
    const TimeSeriesDataset ds =
        synth_dataset(cfg.classes, cfg.channels, cfg.length, cfg.data_seed, cfg.difficulty);
    const std::vector<BlockSplit> folds = hblock_splits(cfg.h);
    if (fold_index < 0 || fold_index >= int(folds.size())) {
        throw DomainError("run_selection_study: fold index out of range");
    }
    const FoldEvaluation eval = train_fold(cfg, ds, folds[std::size_t(fold_index)]);
    const BenchmarkRow row = evaluate_mode(cfg, eval, fold_index, false);
    return SelectionStudyRun{row.test_f1, row.correlation};
}

}  // namespace psr
