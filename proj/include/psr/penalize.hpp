#pragma once

#include "psr/scoring.hpp"
#include "psr/types.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace psr {

/// Per-sample misclassification payoffs: 0 for a correct row, `penalty`
/// otherwise.
template <typename Scalar = double>
struct PayoffVectorT {
    Vec<Scalar> values;
    Scalar penalty = Scalar(0);
};

using PayoffVector = PayoffVectorT<double>;

enum class Correctness { correct, wrong };

/// Membership of each row in the correct set (true positives/negatives) vs
/// the wrong set (false positives/negatives).
struct CorrectnessMask {
    std::vector<Correctness> values;

    Eigen::Index wrong_count() const {
        Eigen::Index n = 0;
        for (const Correctness c : values) {
            n += (c == Correctness::wrong);
        }
        return n;
    }
};

/// Classification of one row under the strict-exceedance rule: wrong iff some
/// class strictly exceeds the true-class probability, so a tie at the maximum
/// that includes the true class is correct.
template <typename Derived>
Correctness is_correct(const Eigen::MatrixBase<Derived>& q_row, Eigen::Index true_class) {
    return row_is_wrong(q_row, true_class) ? Correctness::wrong : Correctness::correct;
}

template <typename Scalar>
CorrectnessMask correctness_mask(const PredictionBatchT<Scalar>& q, const LabelBatchT<Scalar>& y) {
    require_same_shape(q, y);
    CorrectnessMask mask;
    mask.values.reserve(std::size_t(q.samples()));
    for (Eigen::Index i = 0; i < q.samples(); ++i) {
        mask.values.push_back(is_correct(q.values().row(i), y.true_classes()[i]));
    }
    return mask;
}

/// Misclassification payoff per row: take the probabilities in excess of the
/// true-class value, clip negatives to zero, and map any positive excess sum
/// to `penalty`. Rows where nothing strictly exceeds the true-class
/// probability (including exact ties) pay 0.
template <typename Scalar>
PayoffVectorT<Scalar> penalizing(const PredictionBatchT<Scalar>& q, const LabelBatchT<Scalar>& y,
                                 Scalar penalty) {
    require_same_shape(q, y);
    if (penalty < Scalar(0)) {
        throw DomainError("penalizing: penalty must be >= 0");
    }
    const Vec<Scalar> hot = (q.values().array() * y.values().array()).rowwise().sum();
    const Vec<Scalar> excess =
        (q.values().array().colwise() - hot.array()).max(Scalar(0)).rowwise().sum();
    PayoffVectorT<Scalar> payoff;
    payoff.penalty = penalty;
    payoff.values = (excess.array() > Scalar(0)).select(Vec<Scalar>::Constant(q.samples(), penalty),
                                                        Vec<Scalar>::Zero(q.samples()));
    return payoff;
}

/// Largest Brier Score a correct prediction can attain: (c-1)/c, reached at
/// the uniform row.
inline double bs_penalty(Eigen::Index class_count) {
    if (class_count < 2) {
        throw DomainError("bs_penalty: need c >= 2");
    }
    return double(class_count - 1) / double(class_count);
}

/// Largest Logarithmic Loss a correct prediction can attain: ln(c), reached
/// at the uniform row.
inline double ll_penalty(Eigen::Index class_count) {
    if (class_count < 2) {
        throw DomainError("ll_penalty: need c >= 2");
    }
    return std::log(double(class_count));
}

/// Whether penalized scores use the per-sample sum over classes (canonical)
/// or the mean-over-classes scaling of the vectorized algorithm, which divides
/// every per-sample value by c. Orderings and argmins agree between the two.
enum class PenalizedForm { sum, class_mean };

/// Penalized Brier Score: Brier per-sample plus (c-1)/c on wrong rows.
template <typename Scalar>
ScoreReportT<Scalar> penalized_brier_score(const PredictionBatchT<Scalar>& q,
                                           const LabelBatchT<Scalar>& y,
                                           PenalizedForm form = PenalizedForm::sum) {
    ScoreReportT<Scalar> base = brier_score(q, y);
    const PayoffVectorT<Scalar> payoff = penalizing(q, y, Scalar(bs_penalty(q.classes())));
    Vec<Scalar> scores = base.per_sample + payoff.values;
    if (form == PenalizedForm::class_mean) {
        scores /= Scalar(q.classes());
    }
    return ScoreReportT<Scalar>::make(std::move(scores), "pbs", Orientation::NegativelyOriented);
}

/// Penalized Logarithmic Loss: log loss per-sample plus ln(c) on wrong rows.
/// The class_mean form divides by c for symmetry with the PBS variant; the
/// penalized value keeps the loss's negative orientation in both forms.
template <typename Scalar>
ScoreReportT<Scalar> penalized_log_loss(const PredictionBatchT<Scalar>& q,
                                        const LabelBatchT<Scalar>& y,
                                        PenalizedForm form = PenalizedForm::sum,
                                        double log_floor = kDefaultLogFloor) {
    ScoreReportT<Scalar> base = log_loss(q, y, log_floor);
    const PayoffVectorT<Scalar> payoff = penalizing(q, y, Scalar(ll_penalty(q.classes())));
    Vec<Scalar> scores = base.per_sample + payoff.values;
    if (form == PenalizedForm::class_mean) {
        scores /= Scalar(q.classes());
    }
    return ScoreReportT<Scalar>::make(std::move(scores), "pll", Orientation::NegativelyOriented,
                                      std::move(base.flags));
}

// Row-level penalized kernels for the verification sweeps.

template <typename Derived>
typename Derived::Scalar row_pbs(const Eigen::MatrixBase<Derived>& q, Eigen::Index true_class) {
    using Scalar = typename Derived::Scalar;
    Scalar score = row_brier(q, true_class);
    if (row_is_wrong(q, true_class)) {
        score += Scalar(bs_penalty(q.size()));
    }
    return score;
}

template <typename Derived>
typename Derived::Scalar row_pll(const Eigen::MatrixBase<Derived>& q, Eigen::Index true_class,
                                 double log_floor = kDefaultLogFloor) {
    using Scalar = typename Derived::Scalar;
    Scalar score = row_log_loss(q, true_class, log_floor);
    if (row_is_wrong(q, true_class)) {
        score += Scalar(ll_penalty(q.size()));
    }
    return score;
}

}  // namespace psr
