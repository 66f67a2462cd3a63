#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace psr {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = Mat<double>;
using Vector = Vec<double>;
using IndexVector = Vec<Eigen::Index>;

/// Dimension mismatch between paired inputs.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Input data violates a representation invariant (off-simplex row, bad label, ...).
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Scalar argument outside the operation's domain (c < 2, h too small, ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class Orientation {
    NegativelyOriented,  // lower is better (BS, LL, PBS, PLL)
    PositivelyOriented,  // higher is better (accuracy, F1)
};

inline const char* to_string(Orientation o) {
    return o == Orientation::NegativelyOriented ? "negatively-oriented" : "positively-oriented";
}

/// Per-sample scores plus their mean. `mean` is always computed from
/// `per_sample`, so the two stay consistent by construction.
template <typename Scalar = double>
struct ScoreReportT {
    Vec<Scalar> per_sample;
    Scalar mean = Scalar(0);
    std::string metric_name;
    Orientation orientation = Orientation::NegativelyOriented;
    std::vector<std::string> flags;

    static ScoreReportT make(Vec<Scalar> scores, std::string name, Orientation orientation,
                             std::vector<std::string> flags = {}) {
        if (scores.size() == 0) {
            throw ValidationError("ScoreReport: empty per-sample vector");
        }
        ScoreReportT r;
        r.mean = scores.mean();
        r.per_sample = std::move(scores);
        r.metric_name = std::move(name);
        r.orientation = orientation;
        r.flags = std::move(flags);
        return r;
    }
};

using ScoreReport = ScoreReportT<double>;

inline constexpr double kSimplexTolerance = 1e-9;

/// Batch of n probability vectors over c classes, one row per sample.
/// Rows must lie on the c-simplex: entries in [0,1], sums within
/// kSimplexTolerance of 1. Construction validates; `Renormalize::yes`
/// rescales row sums to exactly 1 instead of rejecting small drift.
template <typename Scalar = double>
class PredictionBatchT {
public:
    enum class Renormalize { no, yes };

    explicit PredictionBatchT(Mat<Scalar> values, Renormalize renorm = Renormalize::no)
        : values_(std::move(values)) {
        if (values_.rows() < 1 || values_.cols() < 2) {
            throw ValidationError("PredictionBatch: need n >= 1 rows and c >= 2 columns, got " +
                                  std::to_string(values_.rows()) + "x" + std::to_string(values_.cols()));
        }
        if (!values_.allFinite()) {
            throw ValidationError("PredictionBatch: non-finite entry");
        }
        if ((values_.array() < Scalar(0)).any() || (values_.array() > Scalar(1)).any()) {
            throw ValidationError("PredictionBatch: entry outside [0, 1]");
        }
        if (renorm == Renormalize::yes) {
            const Vec<Scalar> sums = values_.rowwise().sum();
            if ((sums.array() <= Scalar(0)).any()) {
                throw ValidationError("PredictionBatch: cannot renormalize a zero-sum row");
            }
            values_.array().colwise() /= sums.array();
            renormalized_ = true;
        }
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            const Scalar sum = values_.row(i).sum();
            if (std::abs(double(sum) - 1.0) > kSimplexTolerance) {
                throw ValidationError("PredictionBatch: row " + std::to_string(i) +
                                      " sums to " + std::to_string(double(sum)) +
                                      ", off the simplex beyond tolerance");
            }
        }
    }

    const Mat<Scalar>& values() const { return values_; }
    Eigen::Index samples() const { return values_.rows(); }
    Eigen::Index classes() const { return values_.cols(); }
    bool renormalized() const { return renormalized_; }

private:
    Mat<Scalar> values_;
    bool renormalized_ = false;
};

/// One-hot ground-truth batch paired with a PredictionBatch of equal shape.
template <typename Scalar = double>
class LabelBatchT {
public:
    explicit LabelBatchT(Mat<Scalar> values) : values_(std::move(values)) {
        if (values_.rows() < 1 || values_.cols() < 2) {
            throw ValidationError("LabelBatch: need n >= 1 rows and c >= 2 columns");
        }
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            int ones = 0;
            for (Eigen::Index j = 0; j < values_.cols(); ++j) {
                const Scalar v = values_(i, j);
                if (v != Scalar(0) && v != Scalar(1)) {
                    throw ValidationError("LabelBatch: entry at (" + std::to_string(i) + "," +
                                          std::to_string(j) + ") is not 0 or 1");
                }
                ones += (v == Scalar(1));
            }
            if (ones != 1) {
                throw ValidationError("LabelBatch: row " + std::to_string(i) + " is not one-hot");
            }
        }
        true_class_.resize(values_.rows());
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            Eigen::Index cls = 0;
            values_.row(i).maxCoeff(&cls);
            true_class_[i] = cls;
        }
    }

    /// Build from class indices in [0, classes).
    static LabelBatchT from_classes(const std::vector<Eigen::Index>& classes, Eigen::Index class_count) {
        if (class_count < 2) {
            throw ValidationError("LabelBatch: need c >= 2 classes");
        }
        Mat<Scalar> m = Mat<Scalar>::Zero(Eigen::Index(classes.size()), class_count);
        for (std::size_t i = 0; i < classes.size(); ++i) {
            if (classes[i] < 0 || classes[i] >= class_count) {
                throw ValidationError("LabelBatch: class index " + std::to_string(classes[i]) +
                                      " out of range at row " + std::to_string(i));
            }
            m(Eigen::Index(i), classes[i]) = Scalar(1);
        }
        return LabelBatchT(std::move(m));
    }

    const Mat<Scalar>& values() const { return values_; }
    Eigen::Index samples() const { return values_.rows(); }
    Eigen::Index classes() const { return values_.cols(); }
    /// True-class index per row.
    const IndexVector& true_classes() const { return true_class_; }

private:
    Mat<Scalar> values_;
    IndexVector true_class_;
};

using PredictionBatch = PredictionBatchT<double>;
using LabelBatch = LabelBatchT<double>;

template <typename Scalar>
void require_same_shape(const PredictionBatchT<Scalar>& q, const LabelBatchT<Scalar>& y) {
    if (q.samples() != y.samples() || q.classes() != y.classes()) {
        throw ShapeError("prediction batch is " + std::to_string(q.samples()) + "x" +
                         std::to_string(q.classes()) + " but label batch is " +
                         std::to_string(y.samples()) + "x" + std::to_string(y.classes()));
    }
}

}  // namespace psr
