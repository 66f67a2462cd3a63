#pragma once

#include "psr/types.hpp"

#include <cstdint>

namespace psr {

struct Hyperparams {
    int epochs = 30;
    double learning_rate = 0.05;
    int hidden_units = 16;
    std::uint64_t seed = 0;
    int batch_size = 32;
};

/// Parameter tensors of the one-hidden-layer network; gradients use the same
/// layout.
struct MlpParams {
    Matrix w1;  // hidden x input
    Vector b1;  // hidden
    Matrix w2;  // classes x hidden
    Vector b2;  // classes
};

/// affine -> tanh -> affine -> softmax, trained with mini-batch gradient
/// descent on mean cross-entropy. Deterministic for a given seed.
class SoftmaxMlp {
public:
    SoftmaxMlp(Eigen::Index input_dim, Eigen::Index hidden_units, Eigen::Index classes,
               std::uint64_t seed);

    /// Row-wise class probabilities, n x c.
    Matrix predict(const Matrix& inputs) const;

    /// Mean cross-entropy of one-hot targets.
    double loss(const Matrix& inputs, const Matrix& targets) const;

    /// Loss plus analytic gradients for every parameter tensor.
    double loss_and_gradients(const Matrix& inputs, const Matrix& targets,
                              MlpParams& gradients) const;

    void gradient_step(const MlpParams& gradients, double learning_rate);

    const MlpParams& params() const { return params_; }
    MlpParams& params() { return params_; }
    void set_params(const MlpParams& p) { params_ = p; }

    Eigen::Index input_dim() const { return params_.w1.cols(); }
    Eigen::Index classes() const { return params_.w2.rows(); }

private:
    MlpParams params_;
};

}  // namespace psr
