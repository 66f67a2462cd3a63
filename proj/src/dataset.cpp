#include "psr/dataset.hpp"

#include "psr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace psr {

namespace {

struct ChannelSignature {
    double offset;
    double amplitude;
    double frequency;  // cycles per step
    double phase;
};

constexpr double kNoiseRho = 0.8;
// Innovation scale at difficulty 1; the stationary noise sd is this / 0.6,
// which swamps the ~[-1, 1] class offsets.
constexpr double kNoiseScale = 1.6;

}  // namespace

TimeSeriesDataset synth_dataset(int classes, int channels, Eigen::Index length,
                                std::uint64_t seed, double difficulty) {
    if (classes < 2) {
        throw DomainError("synth_dataset: need at least 2 classes");
    }
    if (channels < 1) {
        throw DomainError("synth_dataset: need at least 1 channel");
    }
    if (length < 2) {
        throw DomainError("synth_dataset: need at least 2 timesteps");
    }
    if (difficulty < 0.0 || difficulty > 1.0) {
        throw DomainError("synth_dataset: difficulty must be in [0, 1]");
    }

    Rng rng(seed);
    std::vector<ChannelSignature> signatures(std::size_t(classes) * std::size_t(channels));
    for (auto& sig : signatures) {
        sig.offset = rng.next_in(-1.0, 1.0);
        sig.amplitude = rng.next_in(0.4, 1.0);
        sig.frequency = rng.next_in(0.02, 0.12);
        sig.phase = rng.next_in(0.0, 2.0 * M_PI);
    }

    // Label runs: classes cycle in a reshuffled order so every class keeps
    // appearing; run lengths are capped so short series still see >= 2 classes.
    TimeSeriesDataset ds;
    ds.classes = classes;
    ds.labels.resize(std::size_t(length));
    const Eigen::Index run_cap = std::max<Eigen::Index>(1, length / 2);
    std::vector<int> order(std::size_t(classes));
    std::iota(order.begin(), order.end(), 0);
    Eigen::Index t = 0;
    std::size_t cursor = order.size();
    while (t < length) {
        if (cursor == order.size()) {
            for (std::size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1], order[std::size_t(rng.next_below(i))]);
            }
            cursor = 0;
        }
        const int cls = order[cursor++];
        const Eigen::Index run =
            std::min<Eigen::Index>({Eigen::Index(60 + rng.next_below(81)), run_cap, length - t});
        std::fill(ds.labels.begin() + t, ds.labels.begin() + t + run, cls);
        t += run;
    }

    ds.channels.resize(length, channels);
    const double sigma = difficulty * kNoiseScale;
    for (int ch = 0; ch < channels; ++ch) {
        double noise = 0.0;
        for (Eigen::Index step = 0; step < length; ++step) {
            noise = kNoiseRho * noise + sigma * rng.next_normal();
            const auto& sig =
                signatures[std::size_t(ds.labels[std::size_t(step)]) * std::size_t(channels) +
                           std::size_t(ch)];
            ds.channels(step, ch) =
                sig.offset +
                sig.amplitude * std::sin(2.0 * M_PI * sig.frequency * double(step) + sig.phase) +
                noise;
        }
    }
    return ds;
}

TimeSeriesDataset slice(const TimeSeriesDataset& ds, Eigen::Index begin, Eigen::Index end) {
    if (begin < 0 || end > ds.length() || begin >= end) {
        throw DomainError("slice: bad range [" + std::to_string(begin) + ", " +
                          std::to_string(end) + ") for length " + std::to_string(ds.length()));
    }
    TimeSeriesDataset out;
    out.classes = ds.classes;
    out.sample_rate = ds.sample_rate;
    out.channels = ds.channels.middleRows(begin, end - begin);
    out.labels.assign(ds.labels.begin() + begin, ds.labels.begin() + end);
    return out;
}

SegmentSet segment(const TimeSeriesDataset& ds, Eigen::Index window_length, double overlap) {
    const Eigen::Index total = ds.length();
    if (window_length < 1 || window_length > total) {
        throw DomainError("segment: window length must be in 1..series length");
    }
    if (overlap < 0.0 || overlap >= 1.0) {
        throw DomainError("segment: overlap must be in [0, 1)");
    }
    const Eigen::Index stride = Eigen::Index(std::floor(double(window_length) * (1.0 - overlap)));
    if (stride < 1) {
        throw DomainError("segment: stride floor(L * (1 - overlap)) is below one step");
    }

    const Eigen::Index d = ds.channel_count();
    const Eigen::Index count = (total - window_length) / stride + 1;
    SegmentSet set;
    set.window_length = window_length;
    set.overlap = overlap;
    set.windows.resize(count, d * window_length);
    set.window_labels = Matrix::Zero(count, ds.classes);
    set.label_ids.resize(std::size_t(count));

    std::vector<Eigen::Index> votes(std::size_t(ds.classes));
    for (Eigen::Index w = 0; w < count; ++w) {
        const Eigen::Index start = w * stride;
        for (Eigen::Index ch = 0; ch < d; ++ch) {
            set.windows.row(w).segment(ch * window_length, window_length) =
                ds.channels.col(ch).segment(start, window_length).transpose();
        }
        std::fill(votes.begin(), votes.end(), 0);
        for (Eigen::Index s = start; s < start + window_length; ++s) {
            ++votes[std::size_t(ds.labels[std::size_t(s)])];
        }
        // Majority label; earliest class wins ties.
        const int label = int(std::max_element(votes.begin(), votes.end()) - votes.begin());
        set.label_ids[std::size_t(w)] = label;
        set.window_labels(w, label) = 1.0;
    }
    return set;
}

SegmentSet concat(const std::vector<SegmentSet>& parts) {
    if (parts.empty()) {
        throw DomainError("concat: no segment sets given");
    }
    Eigen::Index rows = 0;
    for (const auto& part : parts) {
        if (part.feature_dim() != parts.front().feature_dim() ||
            part.classes() != parts.front().classes()) {
            throw ShapeError("concat: mismatched segment shapes");
        }
        rows += part.size();
    }
    SegmentSet out;
    out.window_length = parts.front().window_length;
    out.overlap = parts.front().overlap;
    out.windows.resize(rows, parts.front().feature_dim());
    out.window_labels.resize(rows, parts.front().classes());
    out.label_ids.reserve(std::size_t(rows));
    Eigen::Index at = 0;
    for (const auto& part : parts) {
        out.windows.middleRows(at, part.size()) = part.windows;
        out.window_labels.middleRows(at, part.size()) = part.window_labels;
        out.label_ids.insert(out.label_ids.end(), part.label_ids.begin(), part.label_ids.end());
        at += part.size();
    }
    return out;
}

}  // namespace psr
