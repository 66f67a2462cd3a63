#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "psr/penalize.hpp"
#include "psr/rng.hpp"
#include "psr/scoring.hpp"
#include "psr/simplex.hpp"

#include <cmath>
#include <vector>

using namespace psr;

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> data) {
    const Eigen::Index n = Eigen::Index(data.size());
    const Eigen::Index c = Eigen::Index(data.begin()->size());
    Matrix m(n, c);
    Eigen::Index i = 0;
    for (const auto& row : data) {
        Eigen::Index j = 0;
        for (const double v : row) {
            m(i, j++) = v;
        }
        ++i;
    }
    return m;
}

struct RandomBatch {
    PredictionBatch q;
    LabelBatch y;
};

RandomBatch random_batch(Rng& rng, int n, int c) {
    Matrix q(n, c);
    std::vector<Eigen::Index> truth(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        q.row(i) = random_simplex_row(rng, c, Generator::abs_normal).transpose();
        truth[std::size_t(i)] = Eigen::Index(rng.next_below(std::uint64_t(c)));
    }
    return {PredictionBatch(q), LabelBatch::from_classes(truth, c)};
}

}  // namespace

TEST_CASE("payoff is zero when the true class is the strict argmax") {
    const PredictionBatch q(rows({{0.2, 0.5, 0.3}}));
    const LabelBatch y(rows({{0, 1, 0}}));
    const auto payoff = penalizing(q, y, 2.0 / 3.0);
    CHECK(payoff.values[0] == 0.0);
}

TEST_CASE("payoff equals the penalty when another class wins") {
    const PredictionBatch q(rows({{0.6, 0.3, 0.1}}));
    const LabelBatch y(rows({{0, 1, 0}}));
    const auto payoff = penalizing(q, y, 2.0 / 3.0);
    CHECK(payoff.values[0] == 2.0 / 3.0);
}

TEST_CASE("a tie with the true class pays nothing") {
    const PredictionBatch q(rows({{0.5, 0.5, 0.0}}));
    const LabelBatch y(rows({{1, 0, 0}}));
    CHECK(penalizing(q, y, 0.75).values[0] == 0.0);
}

TEST_CASE("penalizing validates its inputs") {
    const PredictionBatch q(rows({{0.5, 0.5}}));
    const LabelBatch y2(rows({{1, 0}}));
    CHECK_THROWS_AS(penalizing(q, y2, -1.0), DomainError);
    const LabelBatch y3(rows({{1, 0, 0}}));
    CHECK_THROWS_AS(penalizing(q, y3, 1.0), ShapeError);
}

TEST_CASE("penalty constants follow the closed forms") {
    CHECK(bs_penalty(2) == 0.5);
    CHECK(std::abs(bs_penalty(3) - 2.0 / 3.0) < 1e-15);
    CHECK(bs_penalty(10) == 0.9);
    CHECK(std::abs(ll_penalty(2) - std::log(2.0)) < 1e-15);
    CHECK(std::abs(ll_penalty(2) - 0.69315) < 1e-5);
    CHECK(std::abs(ll_penalty(3) - 1.09861) < 1e-5);
    CHECK_THROWS_AS(bs_penalty(1), DomainError);
    CHECK_THROWS_AS(ll_penalty(1), DomainError);
}

TEST_CASE("penalized Brier score on the motivating vectors") {
    const PredictionBatch q(rows({{0.33, 0.34, 0.33}, {0.51, 0.49, 0.0}}));
    const LabelBatch y(rows({{0, 1, 0}, {0, 1, 0}}));
    const auto report = penalized_brier_score(q, y);
    CHECK(std::abs(report.per_sample[0] - 0.6534) < 1e-12);           // correct, no penalty
    CHECK(std::abs(report.per_sample[1] - (0.5202 + 2.0 / 3.0)) < 1e-12);
    CHECK(std::abs(report.per_sample[1] - 1.18687) < 1e-5);
    CHECK(report.metric_name == "pbs");
}

TEST_CASE("penalized Brier score of a perfect prediction is zero") {
    const PredictionBatch q(rows({{0, 1, 0}}));
    const LabelBatch y(rows({{0, 1, 0}}));
    CHECK(penalized_brier_score(q, y).per_sample[0] == 0.0);
}

TEST_CASE("penalized log loss on the motivating vectors") {
    const PredictionBatch q(rows({{0.33, 0.34, 0.33}, {0.51, 0.49, 0.0}}));
    const LabelBatch y(rows({{0, 1, 0}, {0, 1, 0}}));
    const auto report = penalized_log_loss(q, y);
    CHECK(std::abs(report.per_sample[0] - (-std::log(0.34))) < 1e-12);
    CHECK(std::abs(report.per_sample[0] - 1.07881) < 1e-5);
    CHECK(std::abs(report.per_sample[1] - (-std::log(0.49) + std::log(3.0))) < 1e-12);
    CHECK(std::abs(report.per_sample[1] - 1.81196) < 1e-5);
}

TEST_CASE("penalized log loss of a perfect prediction is zero") {
    const PredictionBatch q(rows({{1, 0, 0}}));
    const LabelBatch y(rows({{1, 0, 0}}));
    CHECK(penalized_log_loss(q, y).per_sample[0] == 0.0);
}

TEST_CASE("is_correct follows the strict-exceedance rule") {
    Vector row(3);
    row << 0.34, 0.33, 0.33;
    CHECK(is_correct(row, 0) == Correctness::correct);
    row << 0.33, 0.34, 0.33;
    CHECK(is_correct(row, 0) == Correctness::wrong);
    const Vector uniform = Vector::Constant(4, 0.25);
    for (Eigen::Index t = 0; t < 4; ++t) {
        CHECK(is_correct(uniform, t) == Correctness::correct);
    }
}

TEST_CASE("payoff entries are exactly zero or exactly the penalty") {
    Rng rng(101);
    for (int rep = 0; rep < 50; ++rep) {
        const int c = 2 + int(rng.next_below(8));
        const auto batch = random_batch(rng, 1 + int(rng.next_below(32)), c);
        const double penalty = rng.next_in(0.0, 3.0);
        const auto payoff = penalizing(batch.q, batch.y, penalty);
        const auto mask = correctness_mask(batch.q, batch.y);
        for (Eigen::Index i = 0; i < payoff.values.size(); ++i) {
            const bool wrong = mask.values[std::size_t(i)] == Correctness::wrong;
            CHECK(payoff.values[i] == (wrong ? penalty : 0.0));
        }
    }
}

TEST_CASE("penalized scores dominate the base scores, with equality iff correct") {
    Rng rng(202);
    for (int rep = 0; rep < 50; ++rep) {
        const int c = 2 + int(rng.next_below(8));
        const auto batch = random_batch(rng, 1 + int(rng.next_below(32)), c);
        const auto bs = brier_score(batch.q, batch.y);
        const auto pbs = penalized_brier_score(batch.q, batch.y);
        const auto ll = log_loss(batch.q, batch.y);
        const auto pll = penalized_log_loss(batch.q, batch.y);
        const auto mask = correctness_mask(batch.q, batch.y);
        for (Eigen::Index i = 0; i < bs.per_sample.size(); ++i) {
            const bool wrong = mask.values[std::size_t(i)] == Correctness::wrong;
            // The penalized score is exactly base plus the payoff constant,
            // bit for bit.
            CHECK(pbs.per_sample[i] == bs.per_sample[i] + (wrong ? bs_penalty(c) : 0.0));
            CHECK(pll.per_sample[i] == ll.per_sample[i] + (wrong ? ll_penalty(c) : 0.0));
        }
    }
}

TEST_CASE("penalized scores separate correct rows from wrong rows") {
    Rng rng(303);
    double max_correct_pbs = 0.0, min_wrong_pbs = 1e300;
    double max_correct_pll = 0.0, min_wrong_pll = 1e300;
    const int c = 4;
    for (int rep = 0; rep < 20000; ++rep) {
        const Vector row = random_simplex_row(rng, c, Generator::abs_normal);
        const Eigen::Index t = Eigen::Index(rng.next_below(c));
        const double pbs = row_pbs(row, t);
        const double pll = row_pll(row, t);
        if (row_is_wrong(row, t)) {
            min_wrong_pbs = std::min(min_wrong_pbs, pbs);
            min_wrong_pll = std::min(min_wrong_pll, pll);
        } else {
            max_correct_pbs = std::max(max_correct_pbs, pbs);
            max_correct_pll = std::max(max_correct_pll, pll);
            // Correct rows never exceed the closed-form ceilings.
            CHECK(pbs <= bs_penalty(c) + 1e-12);
            CHECK(pll <= ll_penalty(c) + 1e-12);
        }
    }
    CHECK(max_correct_pbs < min_wrong_pbs);
    CHECK(max_correct_pll < min_wrong_pll);
}

TEST_CASE("class-mean form rescales the canonical sum form by c") {
    Rng rng(505);
    for (int rep = 0; rep < 20; ++rep) {
        const int c = 2 + int(rng.next_below(8));
        const auto batch = random_batch(rng, 1 + int(rng.next_below(16)), c);
        const auto sum_form = penalized_brier_score(batch.q, batch.y);
        const auto mean_form = penalized_brier_score(batch.q, batch.y, PenalizedForm::class_mean);
        const auto mask = correctness_mask(batch.q, batch.y);
        for (Eigen::Index i = 0; i < sum_form.per_sample.size(); ++i) {
            CHECK(std::abs(sum_form.per_sample[i] - double(c) * mean_form.per_sample[i]) < 1e-12);
            // The mean form is the class-mean Brier score plus (c-1)/c^2.
            const double base =
                (batch.q.values().row(i) - batch.y.values().row(i)).squaredNorm() / c;
            const double payoff = mask.values[std::size_t(i)] == Correctness::wrong
                                      ? double(c - 1) / double(c * c)
                                      : 0.0;
            CHECK(std::abs(mean_form.per_sample[i] - (base + payoff)) < 1e-12);
        }
        const auto pll_sum = penalized_log_loss(batch.q, batch.y);
        const auto pll_mean = penalized_log_loss(batch.q, batch.y, PenalizedForm::class_mean);
        for (Eigen::Index i = 0; i < pll_sum.per_sample.size(); ++i) {
            CHECK(std::abs(pll_sum.per_sample[i] - double(c) * pll_mean.per_sample[i]) < 1e-12);
        }
    }
}
