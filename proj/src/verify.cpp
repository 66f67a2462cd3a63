#include "psr/verify.hpp"

#include "psr/penalize.hpp"
#include "psr/rng.hpp"
#include "psr/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

namespace psr {

const char* to_string(Rule rule) {
    switch (rule) {
        case Rule::bs: return "bs";
        case Rule::ll: return "ll";
        case Rule::pbs: return "pbs";
        case Rule::pll: return "pll";
    }
    return "?";
}

Rule rule_from_string(const std::string& name) {
    if (name == "bs") return Rule::bs;
    if (name == "ll") return Rule::ll;
    if (name == "pbs") return Rule::pbs;
    if (name == "pll") return Rule::pll;
    throw DomainError("unknown scoring rule '" + name + "'");
}

double score_row(Rule rule, const Vector& row, Eigen::Index true_class) {
    switch (rule) {
        case Rule::bs: return row_brier(row, true_class);
        case Rule::ll: return row_log_loss(row, true_class);
        case Rule::pbs: return row_pbs(row, true_class);
        case Rule::pll: return row_pll(row, true_class);
    }
    throw DomainError("score_row: bad rule");
}

bool superiority_violation(Rule rule, const Vector& x, Eigen::Index true_x, const Vector& w,
                           Eigen::Index true_w) {
    return score_row(rule, x, true_x) >= score_row(rule, w, true_w);
}

namespace {

void validate_sweep_config(const SweepConfig& cfg) {
    if (cfg.trials < 1) {
        throw DomainError("sweep: need at least one trial");
    }
    if (cfg.c_min < 2 || cfg.c_max < cfg.c_min) {
        throw DomainError("sweep: class-count range must satisfy 2 <= c_min <= c_max");
    }
    if (cfg.workers < 1) {
        throw DomainError("sweep: need at least one worker");
    }
}

// Log-spaced checkpoints {1,2,5}*10^k plus the final trial.
std::vector<std::uint64_t> curve_checkpoints(std::uint64_t trials) {
    std::vector<std::uint64_t> points;
    for (std::uint64_t decade = 1; decade <= trials && decade != 0; decade *= 10) {
        for (const std::uint64_t mult : {1, 2, 5}) {
            const std::uint64_t p = decade * mult;
            if (p <= trials) {
                points.push_back(p);
            }
        }
    }
    if (points.empty() || points.back() != trials) {
        points.push_back(trials);
    }
    return points;
}

// One trial: fills `condition` and returns the sampled pair when asked.
using TrialFn = std::function<bool(Rng&, std::uint64_t& resamples, PairExample* out)>;

enum class CaptureOn { condition_true, condition_false };

SweepResult run_sweep(const SweepConfig& cfg, CaptureOn capture, const TrialFn& trial) {
    validate_sweep_config(cfg);
    const std::uint64_t n = cfg.trials;
    std::vector<std::uint8_t> outcome(n);
    std::vector<std::uint64_t> worker_resamples(std::size_t(cfg.workers), 0);

    const auto run_range = [&](std::uint64_t begin, std::uint64_t end, std::uint64_t* resamples) {
        for (std::uint64_t t = begin; t < end; ++t) {
            Rng rng = substream(cfg.seed, t);
            outcome[t] = trial(rng, *resamples, nullptr) ? 1 : 0;
        }
    };

    if (cfg.workers == 1) {
        run_range(0, n, &worker_resamples[0]);
    } else {
        std::vector<std::thread> pool;
        const std::uint64_t chunk = (n + std::uint64_t(cfg.workers) - 1) / std::uint64_t(cfg.workers);
        for (int w = 0; w < cfg.workers; ++w) {
            const std::uint64_t begin = std::min(n, std::uint64_t(w) * chunk);
            const std::uint64_t end = std::min(n, begin + chunk);
            pool.emplace_back(run_range, begin, end, &worker_resamples[std::size_t(w)]);
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    SweepResult result;
    result.comparisons = n;
    for (const std::uint64_t r : worker_resamples) {
        result.resamples += r;
    }

    // Counts and curve from the canonical trial order, so the result does not
    // depend on how trials were partitioned.
    const std::vector<std::uint64_t> checkpoints = curve_checkpoints(n);
    std::size_t next_checkpoint = 0;
    std::uint64_t hits = 0;
    std::optional<std::uint64_t> capture_index;
    const std::uint8_t capture_value = capture == CaptureOn::condition_true ? 1 : 0;
    for (std::uint64_t t = 0; t < n; ++t) {
        hits += outcome[t];
        if (!capture_index && outcome[t] == capture_value) {
            capture_index = t;
        }
        if (next_checkpoint < checkpoints.size() && t + 1 == checkpoints[next_checkpoint]) {
            result.cumulative_rate_curve.push_back(
                {t + 1, 100.0 * double(hits) / double(t + 1)});
            ++next_checkpoint;
        }
    }
    result.violations = hits;
    result.rate = double(hits) / double(n);

    if (capture_index) {
        Rng rng = substream(cfg.seed, *capture_index);
        PairExample example;
        std::uint64_t scratch = 0;
        trial(rng, scratch, &example);
        example.trial_index = *capture_index + 1;
        result.counterexample = example;
    }
    return result;
}

Eigen::Index draw_class_count(Rng& rng, const SweepConfig& cfg) {
    return cfg.c_min + Eigen::Index(rng.next_below(std::uint64_t(cfg.c_max - cfg.c_min + 1)));
}

// Fixes q[hot_index] = hot_value and spreads the remaining mass over the
// other coordinates with generator-shaped weights.
void fill_non_hot(Rng& rng, Generator gen, Vector& q, Eigen::Index hot_index, double hot_value,
                  std::uint64_t& resamples) {
    const Eigen::Index c = q.size();
    double sum = 0.0;
    do {
        sum = 0.0;
        for (Eigen::Index j = 0; j < c; ++j) {
            if (j == hot_index) {
                continue;
            }
            const double v = gen == Generator::abs_normal ? std::abs(rng.next_normal())
                                                          : -std::log(rng.next_open_double());
            q[j] = v;
            sum += v;
        }
        if (sum <= 0.0) {
            ++resamples;
        }
    } while (sum <= 0.0);
    for (Eigen::Index j = 0; j < c; ++j) {
        if (j != hot_index) {
            q[j] *= (1.0 - hot_value) / sum;
        }
    }
    q[hot_index] = hot_value;
}

}  // namespace

SweepResult superiority_sweep(Rule rule, const SweepConfig& cfg) {
    const Generator gen = cfg.generator;
    const TrialFn trial = [rule, gen, &cfg](Rng& rng, std::uint64_t& resamples,
                                            PairExample* out) -> bool {
        const Eigen::Index c = draw_class_count(rng, cfg);
        Vector x = random_simplex_row(rng, c, gen, &resamples);
        const Eigen::Index true_x = make_correct_row(rng, x);
        Vector w;
        Eigen::Index true_w = -1;
        do {
            w = random_simplex_row(rng, c, gen, &resamples);
            true_w = make_wrong_row(rng, w);
            if (true_w < 0) {
                ++resamples;
            }
        } while (true_w < 0);
        const double score_x = score_row(rule, x, true_x);
        const double score_w = score_row(rule, w, true_w);
        if (out != nullptr) {
            *out = PairExample{0, c, true_x, true_w, x, w, score_x, score_w};
        }
        return score_x >= score_w;
    };
    return run_sweep(cfg, CaptureOn::condition_true, trial);
}

SweepResult montecarlo_hot_below(const SweepConfig& cfg) {
    const Generator gen = cfg.generator;
    const TrialFn trial = [gen, &cfg](Rng& rng, std::uint64_t& resamples, PairExample* out) -> bool {
        const Eigen::Index c = draw_class_count(rng, cfg);
        Vector x = random_simplex_row(rng, c, gen, &resamples);
        const Eigen::Index true_class = make_correct_row(rng, x);
        const double alpha = x[true_class];
        Vector q(c);
        for (;;) {
            const double beta = rng.next_in(0.0, alpha);
            const double hot_q = alpha - beta;
            if (hot_q <= 0.0) {
                ++resamples;
                continue;
            }
            fill_non_hot(rng, gen, q, true_class, hot_q, resamples);
            if (row_is_wrong(q, true_class)) {
                break;
            }
            ++resamples;
        }
        const double score_x = row_brier(x, true_class);
        const double score_q = row_brier(q, true_class);
        if (out != nullptr) {
            *out = PairExample{0, c, true_class, true_class, x, q, score_x, score_q};
        }
        return score_q > score_x;
    };
    return run_sweep(cfg, CaptureOn::condition_false, trial);
}

SweepResult montecarlo_hot_above(const SweepConfig& cfg) {
    if (cfg.c_min < 3) {
        throw DomainError(
            "montecarlo_hot_above: a wrong two-class row cannot carry more true-class "
            "probability than a correct one; use c >= 3");
    }
    const Generator gen = cfg.generator;
    const TrialFn trial = [gen, &cfg](Rng& rng, std::uint64_t& resamples, PairExample* out) -> bool {
        const Eigen::Index c = draw_class_count(rng, cfg);
        Vector x(c), q(c);
        Eigen::Index true_class = 0;
        for (;;) {
            x = random_simplex_row(rng, c, gen, &resamples);
            true_class = make_correct_row(rng, x);
            const double alpha = x[true_class];
            if (alpha >= 0.5) {
                // No wrong row can have a higher true-class probability.
                ++resamples;
                continue;
            }
            bool accepted = false;
            for (int attempt = 0; attempt < 64 && !accepted; ++attempt) {
                const double beta = rng.next_in(0.0, 1.0 - alpha);
                const double hot_q = alpha + beta;
                if (hot_q >= 0.5) {
                    ++resamples;
                    continue;
                }
                fill_non_hot(rng, gen, q, true_class, hot_q, resamples);
                accepted = row_is_wrong(q, true_class);
                if (!accepted) {
                    ++resamples;
                }
            }
            if (accepted) {
                break;
            }
        }
        const double score_x = row_brier(x, true_class);
        const double score_q = row_brier(q, true_class);
        if (out != nullptr) {
            *out = PairExample{0, c, true_class, true_class, x, q, score_x, score_q};
        }
        return score_q > score_x;
    };
    return run_sweep(cfg, CaptureOn::condition_false, trial);
}

LlCaseWitness ll_case_analysis(double alpha, double beta, Eigen::Index c, HotCase hot_case) {
    if (c < 2) {
        throw DomainError("ll_case_analysis: need c >= 2");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw DomainError("ll_case_analysis: alpha must be in (0, 1]");
    }
    if (alpha * double(c) < 1.0) {
        throw DomainError("ll_case_analysis: no correct row has true-class probability below 1/c");
    }
    if (hot_case == HotCase::equal ? beta != 0.0 : beta <= 0.0) {
        throw DomainError("ll_case_analysis: beta must be 0 for the equal case, > 0 otherwise");
    }
    double hot_q = alpha;
    if (hot_case == HotCase::below) {
        hot_q = alpha - beta;
        if (hot_q <= 0.0) {
            throw DomainError("ll_case_analysis: alpha - beta must stay positive");
        }
    } else if (hot_case == HotCase::above) {
        hot_q = alpha + beta;
        if (hot_q > 1.0) {
            throw DomainError("ll_case_analysis: alpha + beta exceeds 1");
        }
    }

    LlCaseWitness witness;
    witness.hot_case = hot_case;
    witness.c = c;
    witness.true_class = 0;
    // Correct row: remaining mass spread evenly, so nothing exceeds alpha.
    witness.x = Vector::Constant(c, (1.0 - alpha) / double(c - 1));
    witness.x[0] = alpha;
    // Challenger: remaining mass concentrated on one class, which beats the
    // true class whenever geometry allows (hot_q < 1/2).
    witness.q = Vector::Zero(c);
    witness.q[0] = hot_q;
    witness.q[1] = 1.0 - hot_q;
    witness.q_in_wrong_set = row_is_wrong(witness.q, 0);

    witness.ll_x = row_log_loss(witness.x, 0);
    witness.ll_q = row_log_loss(witness.q, 0);
    if (witness.ll_q > witness.ll_x) {
        witness.q_vs_x = Ordering::greater;
    } else if (witness.ll_q < witness.ll_x) {
        witness.q_vs_x = Ordering::less;
    } else {
        witness.q_vs_x = Ordering::equal;
    }
    return witness;
}

double expected_score(Rule rule, const Vector& p, const Vector& q_truth) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < q_truth.size(); ++i) {
        acc += q_truth[i] * score_row(rule, p, i);
    }
    return acc;
}

ProprietyReport propriety_check(Rule rule, Eigen::Index c, const ProprietyConfig& cfg) {
    if (c < 2 || c > 6) {
        throw DomainError("propriety_check: c must be in 2..6");
    }
    if (cfg.q_samples < 1 || cfg.p_samples < 1) {
        throw DomainError("propriety_check: need at least one Q and one P sample");
    }

    ProprietyReport report;
    report.c = c;
    report.q_samples = cfg.q_samples;
    report.p_samples_per_q = cfg.p_samples;
    report.max_violation_margin = 0.0;
    report.min_positive_margin_at_distance = std::numeric_limits<double>::infinity();

    static constexpr double kDeltas[] = {0.3, 0.1, 0.03, 0.01};
    std::uint64_t scratch = 0;

    for (int qi = 0; qi < cfg.q_samples; ++qi) {
        Rng rng = substream(cfg.seed, std::uint64_t(qi));
        const Vector q_truth = random_simplex_row(rng, c, cfg.generator, &scratch);
        const double self_score = expected_score(rule, q_truth, q_truth);

        const auto consider = [&](const Vector& p) {
            const double margin = expected_score(rule, p, q_truth) - self_score;
            if (margin < report.max_violation_margin) {
                report.max_violation_margin = margin;
            }
            if (margin < -cfg.tolerance) {
                ++report.violations;
            }
            if (total_variation(p, q_truth) > cfg.tv_threshold) {
                if (margin <= 0.0) {
                    ++report.distant_nonpositive;
                }
                if (margin < report.min_positive_margin_at_distance) {
                    report.min_positive_margin_at_distance = margin;
                }
            }
        };

        int proposals = 0;
        consider(q_truth);  // equality case, margin exactly 0
        ++proposals;
        for (Eigen::Index a = 0; a < c && proposals < cfg.p_samples; ++a) {
            for (Eigen::Index b = 0; b < c && proposals < cfg.p_samples; ++b) {
                if (a == b) {
                    continue;
                }
                for (const double delta : kDeltas) {
                    if (proposals >= cfg.p_samples) {
                        break;
                    }
                    if (q_truth[a] + delta > 1.0 || q_truth[b] - delta < 0.0) {
                        continue;
                    }
                    Vector p = q_truth;
                    p[a] += delta;
                    p[b] -= delta;
                    consider(p);
                    ++proposals;
                }
            }
        }
        while (proposals < cfg.p_samples) {
            consider(random_simplex_row(rng, c, cfg.generator, &scratch));
            ++proposals;
        }
    }

    report.pass = report.violations == 0 && report.distant_nonpositive == 0;
    return report;
}

BoundCheckResult bound_check(Rule rule, Eigen::Index c, std::uint64_t trials, std::uint64_t seed) {
    if (rule != Rule::bs && rule != Rule::ll) {
        throw DomainError("bound_check: closed-form suprema exist for bs and ll only");
    }
    if (c < 2) {
        throw DomainError("bound_check: need c >= 2");
    }
    BoundCheckResult result;
    result.rule = rule;
    result.c = c;
    result.bound = rule == Rule::bs ? bs_penalty(c) : ll_penalty(c);

    Rng rng(seed);
    double observed = -std::numeric_limits<double>::infinity();
    std::uint64_t scratch = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        Vector row = random_simplex_row(rng, c, Generator::abs_normal, &scratch);
        const Eigen::Index true_class = make_correct_row(rng, row);
        observed = std::max(observed, score_row(rule, row, true_class));
    }
    const Vector uniform = Vector::Constant(c, 1.0 / double(c));
    result.uniform_score = score_row(rule, uniform, 0);
    observed = std::max(observed, result.uniform_score);
    result.observed_max = observed;
    result.attained_at_uniform = std::abs(result.uniform_score - result.bound) <= 1e-12;
    result.max_excess = result.observed_max - result.bound;
    return result;
}

}  // namespace psr
