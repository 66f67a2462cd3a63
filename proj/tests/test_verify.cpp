#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "psr/penalize.hpp"
#include "psr/scoring.hpp"
#include "psr/verify.hpp"

#include <cmath>

using namespace psr;

namespace {

Vector vec3(double a, double b, double c) {
    Vector v(3);
    v << a, b, c;
    return v;
}

SweepConfig small_sweep(std::uint64_t trials, std::uint64_t seed, int c_min = 2, int c_max = 15) {
    SweepConfig cfg;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.c_min = c_min;
    cfg.c_max = c_max;
    return cfg;
}

bool same_result(const SweepResult& a, const SweepResult& b) {
    if (a.comparisons != b.comparisons || a.violations != b.violations ||
        a.resamples != b.resamples || a.rate != b.rate ||
        a.cumulative_rate_curve.size() != b.cumulative_rate_curve.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.cumulative_rate_curve.size(); ++i) {
        if (a.cumulative_rate_curve[i].trial_index != b.cumulative_rate_curve[i].trial_index ||
            a.cumulative_rate_curve[i].cumulative_percentage !=
                b.cumulative_rate_curve[i].cumulative_percentage) {
            return false;
        }
    }
    if (a.counterexample.has_value() != b.counterexample.has_value()) {
        return false;
    }
    if (a.counterexample) {
        if (a.counterexample->trial_index != b.counterexample->trial_index ||
            a.counterexample->x != b.counterexample->x || a.counterexample->q != b.counterexample->q) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("the motivating pair is a Brier-score superiority violation") {
    const Vector x = vec3(0.33, 0.34, 0.33);  // correct for class 1
    const Vector w = vec3(0.51, 0.49, 0.0);   // wrong for class 1
    CHECK(superiority_violation(Rule::bs, x, 1, w, 1));
    CHECK(superiority_violation(Rule::ll, x, 1, w, 1));
    CHECK_FALSE(superiority_violation(Rule::pbs, x, 1, w, 1));
    CHECK_FALSE(superiority_violation(Rule::pll, x, 1, w, 1));
}

TEST_CASE("penalized rules show zero violations in a seeded sweep") {
    for (const Rule rule : {Rule::pbs, Rule::pll}) {
        const auto result = superiority_sweep(rule, small_sweep(20000, 7));
        CHECK(result.comparisons == 20000);
        CHECK(result.violations == 0);
        CHECK_FALSE(result.counterexample.has_value());
    }
}

TEST_CASE("base rules produce violations with c >= 3") {
    for (const Rule rule : {Rule::bs, Rule::ll}) {
        const auto result = superiority_sweep(rule, small_sweep(100000, 7, 3, 15));
        CHECK(result.violations >= 1);
        REQUIRE(result.counterexample.has_value());
        const auto& pair = *result.counterexample;
        // The recorded pair really is a violation: correct x scores no better.
        CHECK_FALSE(row_is_wrong(pair.x, pair.true_x));
        CHECK(row_is_wrong(pair.q, pair.true_q));
        CHECK(pair.score_x >= pair.score_q);
        CHECK(score_row(rule, pair.x, pair.true_x) == pair.score_x);
    }
}

TEST_CASE("sweep results are deterministic and worker-count invariant") {
    const auto base = superiority_sweep(Rule::bs, small_sweep(20000, 99, 3, 8));
    const auto repeat = superiority_sweep(Rule::bs, small_sweep(20000, 99, 3, 8));
    CHECK(same_result(base, repeat));
    auto parallel_cfg = small_sweep(20000, 99, 3, 8);
    parallel_cfg.workers = 4;
    const auto parallel = superiority_sweep(Rule::bs, parallel_cfg);
    CHECK(same_result(base, parallel));
    auto more_workers = small_sweep(20000, 99, 3, 8);
    more_workers.workers = 7;
    CHECK(same_result(base, superiority_sweep(Rule::bs, more_workers)));
}

TEST_CASE("sweep config validation") {
    CHECK_THROWS_AS(superiority_sweep(Rule::bs, small_sweep(0, 1)), DomainError);
    CHECK_THROWS_AS(superiority_sweep(Rule::bs, small_sweep(10, 1, 1, 4)), DomainError);
    CHECK_THROWS_AS(superiority_sweep(Rule::bs, small_sweep(10, 1, 5, 4)), DomainError);
    CHECK_THROWS_AS(montecarlo_hot_below(small_sweep(0, 1, 3, 15)), DomainError);
}

TEST_CASE("curve is a running aggregate ending at the final rate") {
    const auto result = superiority_sweep(Rule::bs, small_sweep(12345, 3, 3, 10));
    REQUIRE_FALSE(result.cumulative_rate_curve.empty());
    const auto& curve = result.cumulative_rate_curve;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        CHECK(curve[i].trial_index > curve[i - 1].trial_index);
    }
    CHECK(curve.back().trial_index == 12345);
    CHECK(curve.back().cumulative_percentage == doctest::Approx(100.0 * result.rate).epsilon(1e-12));
    CHECK(result.violations <= result.comparisons);
}

TEST_CASE("hot-below single pair: direct evaluation of the squared-error sums") {
    // x = [0.6, 0.2, 0.2] with true class 0: 0.4^2 + 0.2^2 + 0.2^2 = 0.24.
    // q = [0.3, 0.4, 0.3] with true class 0: 0.7^2 + 0.4^2 + 0.3^2 = 0.74.
    const Vector x = vec3(0.6, 0.2, 0.2);
    const Vector q = vec3(0.3, 0.4, 0.3);
    CHECK(std::abs(score_row(Rule::bs, x, 0) - 0.24) < 1e-12);
    CHECK(std::abs(score_row(Rule::bs, q, 0) - 0.74) < 1e-12);
    CHECK(score_row(Rule::bs, q, 0) > score_row(Rule::bs, x, 0));
}

TEST_CASE("hot-below sweep satisfies the condition almost always") {
    const auto result = montecarlo_hot_below(small_sweep(20000, 11, 3, 15));
    CHECK(result.rate >= 0.99);
    CHECK(result.rate <= 1.0);
    // Misses exist and are recorded as counterexamples at this trial count.
    if (result.counterexample) {
        const auto& pair = *result.counterexample;
        CHECK(pair.score_q <= pair.score_x);
        CHECK(pair.q[pair.true_q] < pair.x[pair.true_x]);  // hot value below alpha
    }
}

TEST_CASE("hot-above single pair: direct evaluation of the squared-error sums") {
    // x = [0.4, 0.3, 0.3] true class 0: 0.6^2 + 0.3^2 + 0.3^2 = 0.54.
    // q = [0.45, 0.55, 0] true class 0: 0.55^2 + 0.55^2 = 0.605, and q is wrong.
    const Vector x = vec3(0.4, 0.3, 0.3);
    const Vector q = vec3(0.45, 0.55, 0.0);
    CHECK(std::abs(score_row(Rule::bs, x, 0) - 0.54) < 1e-12);
    CHECK(std::abs(score_row(Rule::bs, q, 0) - 0.605) < 1e-12);
    CHECK(row_is_wrong(q, 0));
    CHECK(q[0] > x[0]);
    CHECK(score_row(Rule::bs, q, 0) > score_row(Rule::bs, x, 0));
}

TEST_CASE("hot-above sweep sits strictly between the extremes") {
    const auto result = montecarlo_hot_above(small_sweep(20000, 13, 3, 15));
    CHECK(result.rate > 0.0);
    CHECK(result.rate < 1.0);
    // The generated wrong rows always carry more true-class mass than x, yet
    // often score worse: both orderings occur (non-superiority both ways).
    CHECK(result.violations > 0);
    CHECK(result.violations < result.comparisons);
}

TEST_CASE("hot-above rejects two-class configurations") {
    CHECK_THROWS_AS(montecarlo_hot_above(small_sweep(10, 1, 2, 2)), DomainError);
}

TEST_CASE("log-loss case analysis reproduces the three orderings") {
    const auto equal = ll_case_analysis(0.4, 0.0, 3, HotCase::equal);
    CHECK(equal.q_vs_x == Ordering::equal);
    CHECK(equal.ll_x == equal.ll_q);

    const auto below = ll_case_analysis(0.4, 0.1, 3, HotCase::below);
    CHECK(below.q_vs_x == Ordering::greater);  // lower hot value, higher loss
    CHECK(below.ll_q > below.ll_x);
    CHECK(below.q_in_wrong_set);

    const auto above = ll_case_analysis(0.4, 0.1, 3, HotCase::above);
    CHECK(above.q_vs_x == Ordering::less);  // the wrong row gets the better loss
    CHECK(above.ll_q < above.ll_x);
}

TEST_CASE("log-loss case analysis marks unreachable wrong sets") {
    // With a true-class probability of 0.6 nothing can strictly exceed it.
    const auto witness = ll_case_analysis(0.5, 0.1, 3, HotCase::above);
    CHECK_FALSE(witness.q_in_wrong_set);
    CHECK(witness.ll_q < witness.ll_x);
}

TEST_CASE("log-loss case analysis validates parameters") {
    CHECK_THROWS_AS(ll_case_analysis(0.0, 0.0, 3, HotCase::equal), DomainError);
    CHECK_THROWS_AS(ll_case_analysis(1.1, 0.0, 3, HotCase::equal), DomainError);
    CHECK_THROWS_AS(ll_case_analysis(0.2, 0.0, 3, HotCase::equal), DomainError);  // below 1/c
    CHECK_THROWS_AS(ll_case_analysis(0.4, 0.0, 3, HotCase::below), DomainError);
    CHECK_THROWS_AS(ll_case_analysis(0.4, 0.5, 3, HotCase::below), DomainError);  // hot <= 0
    CHECK_THROWS_AS(ll_case_analysis(0.4, 0.7, 3, HotCase::above), DomainError);  // hot > 1
    CHECK_THROWS_AS(ll_case_analysis(0.4, 0.1, 1, HotCase::equal), DomainError);
}

TEST_CASE("expected score at the truth has margin zero") {
    const Vector uniform = Vector::Constant(3, 1.0 / 3.0);
    for (const Rule rule : {Rule::bs, Rule::ll, Rule::pbs, Rule::pll}) {
        const double margin = expected_score(rule, uniform, uniform) -
                              expected_score(rule, uniform, uniform);
        CHECK(margin == 0.0);
    }
}

TEST_CASE("hand-checked penalized-Brier propriety margin") {
    // Q = [0.5, 0.3, 0.2], P = [0.6, 0.2, 0.2]; exact three-term expectations.
    const Vector q_truth = vec3(0.5, 0.3, 0.2);
    const Vector p = vec3(0.6, 0.2, 0.2);
    double expected_p = 0.0, expected_q = 0.0;
    for (int i = 0; i < 3; ++i) {
        expected_p += q_truth[i] * score_row(Rule::pbs, p, i);
        expected_q += q_truth[i] * score_row(Rule::pbs, q_truth, i);
    }
    const double margin = expected_p - expected_q;
    CHECK(std::abs(margin - 0.02) < 1e-12);
    CHECK(expected_score(Rule::pbs, p, q_truth) == doctest::Approx(expected_p).epsilon(1e-15));
}

TEST_CASE("propriety check passes for all four rules at small c") {
    ProprietyConfig cfg;
    cfg.q_samples = 40;
    cfg.p_samples = 120;
    cfg.seed = 21;
    for (const Rule rule : {Rule::bs, Rule::ll, Rule::pbs, Rule::pll}) {
        for (const Eigen::Index c : {2, 3, 4}) {
            const auto report = propriety_check(rule, c, cfg);
            CHECK(report.pass);
            CHECK(report.violations == 0);
            CHECK(report.distant_nonpositive == 0);
            CHECK(report.max_violation_margin >= -cfg.tolerance);
            CHECK(report.min_positive_margin_at_distance > 0.0);
        }
    }
    CHECK_THROWS_AS(propriety_check(Rule::bs, 7, cfg), DomainError);
    CHECK_THROWS_AS(propriety_check(Rule::bs, 1, cfg), DomainError);
}

TEST_CASE("bound check attains the closed-form suprema at the uniform row") {
    const auto bs4 = bound_check(Rule::bs, 4, 20000, 5);
    CHECK(std::abs(bs4.bound - 0.75) < 1e-15);
    CHECK(bs4.attained_at_uniform);
    CHECK(bs4.max_excess <= 1e-12);

    const auto ll3 = bound_check(Rule::ll, 3, 20000, 5);
    CHECK(std::abs(ll3.bound - std::log(3.0)) < 1e-15);
    CHECK(ll3.attained_at_uniform);
    CHECK(ll3.max_excess <= 1e-12);

    const auto bs2 = bound_check(Rule::bs, 2, 1000, 5);
    CHECK(std::abs(bs2.uniform_score - 0.5) < 1e-15);

    CHECK_THROWS_AS(bound_check(Rule::pbs, 3, 10, 5), DomainError);
    CHECK_THROWS_AS(bound_check(Rule::bs, 1, 10, 5), DomainError);
}

TEST_CASE("rule names round-trip") {
    for (const Rule rule : {Rule::bs, Rule::ll, Rule::pbs, Rule::pll}) {
        CHECK(rule_from_string(to_string(rule)) == rule);
    }
    CHECK_THROWS_AS(rule_from_string("brier"), DomainError);
}
