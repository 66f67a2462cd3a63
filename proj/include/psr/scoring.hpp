#pragma once

#include "psr/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace psr {

/// Floor applied to a true-class probability before taking its log. Zeros in
/// non-true classes are legitimate and never touch this path.
inline constexpr double kDefaultLogFloor = 1e-15;

// ---------------------------------------------------------------------------
// Row-level kernels. These take Eigen expressions so callers can score
// blocks, maps, or temporaries without materializing a batch.
// ---------------------------------------------------------------------------

/// Squared-error score of one probability row against true class `true_class`:
/// sum_j (q_j - y_j)^2. Range [0, 2].
template <typename Derived>
typename Derived::Scalar row_brier(const Eigen::MatrixBase<Derived>& q, Eigen::Index true_class) {
    using Scalar = typename Derived::Scalar;
    Scalar acc = Scalar(0);
    for (Eigen::Index j = 0; j < q.size(); ++j) {
        const Scalar d = q(j) - (j == true_class ? Scalar(1) : Scalar(0));
        acc += d * d;
    }
    return acc;
}

/// Natural-log loss of one row: -ln(q at true class), floored at `log_floor`.
/// `clamped`, when given, reports whether the floor was applied.
template <typename Derived>
typename Derived::Scalar row_log_loss(const Eigen::MatrixBase<Derived>& q, Eigen::Index true_class,
                                      double log_floor = kDefaultLogFloor, bool* clamped = nullptr) {
    using Scalar = typename Derived::Scalar;
    Scalar hot = q(true_class);
    if (double(hot) < log_floor) {
        hot = Scalar(log_floor);
        if (clamped != nullptr) {
            *clamped = true;
        }
    }
    return -std::log(hot);
}

/// A row is wrong iff some class strictly exceeds the true-class probability.
/// Ties at the maximum that include the true class count as correct.
template <typename Derived>
bool row_is_wrong(const Eigen::MatrixBase<Derived>& q, Eigen::Index true_class) {
    return q.maxCoeff() > q(true_class);
}

/// Predicted class under argmax with lowest-index tie-break, except that a tie
/// including the true class resolves to the true class (so the prediction is
/// "correct" exactly when row_is_wrong is false).
template <typename Derived>
Eigen::Index row_predicted_class(const Eigen::MatrixBase<Derived>& q, Eigen::Index true_class) {
    Eigen::Index arg = 0;
    const auto max = q.maxCoeff(&arg);
    return q(true_class) == max ? true_class : arg;
}

// ---------------------------------------------------------------------------
// Batch metrics.
// ---------------------------------------------------------------------------

template <typename Scalar>
ScoreReportT<Scalar> brier_score(const PredictionBatchT<Scalar>& q, const LabelBatchT<Scalar>& y) {
    require_same_shape(q, y);
    Vec<Scalar> scores = (q.values() - y.values()).rowwise().squaredNorm();
    return ScoreReportT<Scalar>::make(std::move(scores), "bs", Orientation::NegativelyOriented);
}

template <typename Scalar>
ScoreReportT<Scalar> log_loss(const PredictionBatchT<Scalar>& q, const LabelBatchT<Scalar>& y,
                              double log_floor = kDefaultLogFloor) {
    require_same_shape(q, y);
    Vec<Scalar> scores(q.samples());
    bool clamped = false;
    for (Eigen::Index i = 0; i < q.samples(); ++i) {
        scores[i] = row_log_loss(q.values().row(i), y.true_classes()[i], log_floor, &clamped);
    }
    std::vector<std::string> flags;
    if (clamped) {
        flags.push_back("log_floor_applied");
    }
    return ScoreReportT<Scalar>::make(std::move(scores), "ll", Orientation::NegativelyOriented,
                                      std::move(flags));
}

/// Fraction of rows whose prediction is correct under the tie-as-correct rule.
template <typename Scalar>
double accuracy(const PredictionBatchT<Scalar>& q, const LabelBatchT<Scalar>& y) {
    require_same_shape(q, y);
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < q.samples(); ++i) {
        correct += !row_is_wrong(q.values().row(i), y.true_classes()[i]);
    }
    return double(correct) / double(q.samples());
}

/// Macro-averaged F1 over all c classes. A class with zero support and zero
/// predictions contributes F1 = 0.
template <typename Scalar>
double macro_f1(const PredictionBatchT<Scalar>& q, const LabelBatchT<Scalar>& y) {
    require_same_shape(q, y);
    const Eigen::Index c = q.classes();
    std::vector<Eigen::Index> tp(c, 0), predicted(c, 0), support(c, 0);
    for (Eigen::Index i = 0; i < q.samples(); ++i) {
        const Eigen::Index truth = y.true_classes()[i];
        const Eigen::Index pred = row_predicted_class(q.values().row(i), truth);
        ++support[truth];
        ++predicted[pred];
        if (pred == truth) {
            ++tp[truth];
        }
    }
    double f1_sum = 0.0;
    for (Eigen::Index k = 0; k < c; ++k) {
        const double precision = predicted[k] > 0 ? double(tp[k]) / double(predicted[k]) : 0.0;
        const double recall = support[k] > 0 ? double(tp[k]) / double(support[k]) : 0.0;
        if (precision + recall > 0.0) {
            f1_sum += 2.0 * precision * recall / (precision + recall);
        }
    }
    return f1_sum / double(c);
}

/// Standard Pearson correlation of two equal-length sequences.
/// Throws DomainError when either input has zero variance.
template <typename DerivedA, typename DerivedB>
double pearson_corr(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.size() != b.size()) {
        throw ShapeError("pearson_corr: length mismatch " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
    }
    if (a.size() < 2) {
        throw DomainError("pearson_corr: need at least 2 points");
    }
    const double mean_a = double(a.template cast<double>().mean());
    const double mean_b = double(b.template cast<double>().mean());
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double da = double(a(i)) - mean_a;
        const double db = double(b(i)) - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) {
        throw DomainError("pearson_corr: zero variance makes the correlation undefined");
    }
    return cov / std::sqrt(var_a * var_b);
}

inline double pearson_corr(const std::vector<double>& a, const std::vector<double>& b) {
    return pearson_corr(Eigen::Map<const Vector>(a.data(), Eigen::Index(a.size())),
                        Eigen::Map<const Vector>(b.data(), Eigen::Index(b.size())));
}

/// Arithmetic mean of the per-sample scores.
template <typename Scalar>
Scalar mean_score(const ScoreReportT<Scalar>& report) {
    if (report.per_sample.size() == 0) {
        throw ValidationError("mean_score: empty report");
    }
    return report.per_sample.mean();
}

}  // namespace psr
