#pragma once

#include "psr/rng.hpp"
#include "psr/types.hpp"

#include <cmath>
#include <cstdint>
#include <string>

namespace psr {

enum class Generator {
    abs_normal,          // c independent |N(0,1)| draws, normalized to sum 1
    dirichlet_uniform,   // flat Dirichlet(1, ..., 1)
};

inline const char* to_string(Generator g) {
    return g == Generator::abs_normal ? "abs-normal" : "dirichlet-uniform";
}

inline Generator generator_from_string(const std::string& name) {
    if (name == "abs-normal") {
        return Generator::abs_normal;
    }
    if (name == "dirichlet-uniform" || name == "dirichlet") {
        return Generator::dirichlet_uniform;
    }
    throw DomainError("unknown generator '" + name + "'");
}

/// One random probability row. Degenerate draws (all mass collapsing onto a
/// single class after normalization) are resampled; `resamples`, when given,
/// counts them.
inline Vector random_simplex_row(Rng& rng, Eigen::Index c, Generator gen,
                                 std::uint64_t* resamples = nullptr) {
    Vector row(c);
    for (;;) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < c; ++j) {
            const double v = gen == Generator::abs_normal
                                 ? std::abs(rng.next_normal())
                                 : -std::log(rng.next_open_double());  // Exp(1) draw
            row[j] = v;
            sum += v;
        }
        if (sum > 0.0) {
            row /= sum;
            if (row.maxCoeff() < 1.0) {
                return row;
            }
        }
        if (resamples != nullptr) {
            ++*resamples;
        }
    }
}

/// Random correct prediction: a random row whose argmax is swapped onto a
/// uniformly chosen true class. Returns the true-class index.
inline Eigen::Index make_correct_row(Rng& rng, Vector& row) {
    const Eigen::Index c = row.size();
    const Eigen::Index true_class = Eigen::Index(rng.next_below(std::uint64_t(c)));
    Eigen::Index arg = 0;
    row.maxCoeff(&arg);
    std::swap(row[arg], row[true_class]);
    return true_class;
}

/// Random wrong prediction: picks the true class uniformly among the row's
/// strictly dominated coordinates, leaving the row itself untouched. Fails
/// (returns -1) only for fully tied rows, which callers resample.
inline Eigen::Index make_wrong_row(Rng& rng, const Vector& row) {
    const Eigen::Index c = row.size();
    const double max = row.maxCoeff();
    Eigen::Index dominated = 0;
    for (Eigen::Index j = 0; j < c; ++j) {
        dominated += (row[j] < max);
    }
    if (dominated == 0) {
        return -1;
    }
    Eigen::Index pick = Eigen::Index(rng.next_below(std::uint64_t(dominated)));
    for (Eigen::Index j = 0; j < c; ++j) {
        if (row[j] < max && pick-- == 0) {
            return j;
        }
    }
    return -1;  // unreachable
}

/// Total-variation distance between two rows on the same simplex.
inline double total_variation(const Vector& p, const Vector& q) {
    return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace psr
