#pragma once

#include "psr/dataset.hpp"
#include "psr/network.hpp"
#include "psr/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace psr {

enum class SelectionMetric { f1, bs, pbs, ll, pll };

const char* to_string(SelectionMetric metric);
SelectionMetric selection_metric_from_string(const std::string& name);
Orientation orientation(SelectionMetric metric);

/// Per-epoch validation metrics recorded during training.
struct EpochRecord {
    int epoch = 0;  // 1-based
    double f1 = 0.0;
    double bs = 0.0;
    double pbs = 0.0;
    double ll = 0.0;
    double pll = 0.0;

    double value(SelectionMetric metric) const;
};

struct TrainingTrace {
    std::vector<EpochRecord> records;
    Hyperparams hyperparams;

    std::vector<double> series(SelectionMetric metric) const;
    int epochs() const { return int(records.size()); }
};

struct EarlyStopSpec {
    SelectionMetric metric = SelectionMetric::pbs;
    int patience = 10;
    double min_delta = 0.0;
};

/// Trace plus a parameter snapshot per epoch, so any epoch can be re-evaluated
/// later.
struct TrainingRun {
    TrainingTrace trace;
    std::vector<MlpParams> checkpoints;
    int stopping_epoch = 0;  // last epoch trained
};

/// Per-feature standardization fitted on training windows and applied
/// elsewhere.
struct FeatureScaler {
    Vector mean;
    Vector scale;

    static FeatureScaler fit(const Matrix& data);
    Matrix apply(const Matrix& data) const;
};

/// Trains the one-hidden-layer softmax classifier with mini-batch gradient
/// descent, recording all five validation metrics after every epoch.
/// Deterministic given (hyperparams, data). Aborts on a non-finite loss.
TrainingRun train_classifier(const SegmentSet& train, const SegmentSet& val, const Hyperparams& hp,
                             const std::optional<EarlyStopSpec>& early_stopping = std::nullopt);

enum class StopDecision { keep_training, stop };

/// Stop once the running best has not improved by more than min_delta for
/// `patience` consecutive epochs.
StopDecision early_stop(const TrainingTrace& trace_so_far, SelectionMetric metric, int patience,
                        double min_delta);

struct SelectionOutcome {
    SelectionMetric metric = SelectionMetric::pbs;
    int chosen_epoch = 0;    // 1-based; earliest among ties
    int stopping_epoch = 0;  // == max epochs unless early stopping fired
    std::map<std::string, double> test_metrics;  // filled when a test set was evaluated
};

/// Best epoch of the trace under the metric's orientation, ties to the
/// earliest epoch.
SelectionOutcome select_checkpoint(const TrainingTrace& trace, SelectionMetric metric);

/// Pearson correlation between the F1 series and the metric series flipped to
/// a positive orientation (metric * -1 for losses, raw for F1).
double flipped_trace_correlation(const TrainingTrace& trace, SelectionMetric metric);

/// One h-block cross-validation fold. Validation and test are contiguous
/// block ranges (wrapping around modulo h); training takes the remainder.
struct BlockSplit {
    int fold = 0;  // 0-based
    int h = 0;
    std::vector<int> train_blocks;
    std::vector<int> validation_blocks;
    std::vector<int> test_blocks;
};

/// All h folds with validation size floor(0.2 h) and test size floor(0.3 h).
std::vector<BlockSplit> hblock_splits(int h);

struct ExperimentConfig {
    int classes = 4;
    int channels = 3;
    Eigen::Index length = 6000;
    std::uint64_t data_seed = 1;
    double difficulty = 0.5;
    Eigen::Index window_length = 32;
    double overlap = 0.5;
    int h = 10;
    Hyperparams hp;
    int es_patience = 10;
    double es_min_delta = 0.0;
};

/// Segment sets for one fold: blocks are cut first and segmented one at a
/// time, so no window straddles a block boundary; features are standardized
/// with training-set statistics.
struct FoldData {
    SegmentSet train;
    SegmentSet validation;
    SegmentSet test;
};

FoldData build_fold(const TimeSeriesDataset& ds, const BlockSplit& split,
                    Eigen::Index window_length, double overlap);

/// Test metrics of one checkpoint.
std::map<std::string, double> evaluate_checkpoint(const MlpParams& params, const SegmentSet& test);

struct BenchmarkRow {
    int fold = 0;
    bool early_stopping = false;  // false = checkpointing over the full trace
    std::map<std::string, double> test_f1;      // by selection metric name
    std::map<std::string, double> correlation;  // flipped-trace Cor per metric
    std::map<std::string, int> chosen_epoch;
};

struct BenchmarkTable {
    std::vector<BenchmarkRow> rows;
    std::map<std::string, double> mean_f1_cp;
    std::map<std::string, double> mean_f1_es;
    std::map<std::string, double> std_f1_cp;
    std::map<std::string, double> std_f1_es;
    std::map<std::string, double> mean_cor_cp;
    std::map<std::string, double> mean_cor_es;
};

inline const std::vector<SelectionMetric> kComparedMetrics = {
    SelectionMetric::bs, SelectionMetric::pbs, SelectionMetric::ll, SelectionMetric::pll};

/// Runs every fold: one training per fold, then per-metric checkpoint
/// selection (CP) and simulated early stopping (ES), each evaluated on the
/// fold's test blocks.
BenchmarkTable benchmark(const ExperimentConfig& cfg);

/// One seeded train/select/test pass on a single fold; the aggregate of these
/// across seeds is the harness's headline comparison.
struct SelectionStudyRun {
    std::map<std::string, double> test_f1;
    std::map<std::string, double> correlation;
};

SelectionStudyRun run_selection_study(const ExperimentConfig& cfg, int fold_index);

}  // namespace psr
