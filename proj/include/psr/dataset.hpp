#pragma once

#include "psr/types.hpp"

#include <cstdint>
#include <vector>

namespace psr {

/// Multichannel time series with a class label per timestep.
struct TimeSeriesDataset {
    Matrix channels;          // T x d
    std::vector<int> labels;  // length T, values in 0..classes-1
    int classes = 0;
    double sample_rate = 1.0;  // steps per unit time

    Eigen::Index length() const { return channels.rows(); }
    Eigen::Index channel_count() const { return channels.cols(); }
};

/// Synthetic dataset: the label switches class in contiguous runs, and each
/// class writes its own per-channel signature (offset, tone frequency, phase)
/// plus shared AR(1) noise whose scale grows with `difficulty`. At
/// difficulty 0 the classes are cleanly separable; at 1 the noise dominates.
TimeSeriesDataset synth_dataset(int classes, int channels, Eigen::Index length,
                                std::uint64_t seed, double difficulty);

/// Contiguous sub-series [begin, end); labels come along.
TimeSeriesDataset slice(const TimeSeriesDataset& ds, Eigen::Index begin, Eigen::Index end);

/// Flattened sliding windows with one-hot majority labels.
struct SegmentSet {
    Matrix windows;        // m x (d * L), channel-major flattening
    Matrix window_labels;  // m x c one-hot
    std::vector<int> label_ids;
    Eigen::Index window_length = 0;
    double overlap = 0.0;

    Eigen::Index size() const { return windows.rows(); }
    Eigen::Index feature_dim() const { return windows.cols(); }
    Eigen::Index classes() const { return window_labels.cols(); }
};

/// Sliding-window segmentation at stride floor(L * (1 - overlap)). Window
/// labels are the majority timestep label, earliest class on ties.
SegmentSet segment(const TimeSeriesDataset& ds, Eigen::Index window_length, double overlap);

/// Concatenates segment sets with matching shapes.
SegmentSet concat(const std::vector<SegmentSet>& parts);

}  // namespace psr
