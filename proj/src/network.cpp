#include "psr/network.hpp"

#include "psr/rng.hpp"

#include <cmath>

namespace psr {

namespace {

Matrix glorot(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / double(rows + cols));
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = rng.next_in(-limit, limit);
        }
    }
    return m;
}

Matrix hidden_activations(const MlpParams& p, const Matrix& inputs) {
    return ((inputs * p.w1.transpose()).rowwise() + p.b1.transpose()).array().tanh();
}

Matrix logits_of(const MlpParams& p, const Matrix& hidden) {
    return (hidden * p.w2.transpose()).rowwise() + p.b2.transpose();
}

Matrix softmax_rows(const Matrix& logits) {
    const Vector shift = logits.rowwise().maxCoeff();
    Matrix probs = (logits.colwise() - shift).array().exp();
    probs.array().colwise() /= probs.rowwise().sum().array();
    return probs;
}

// Mean cross-entropy from logits: logsumexp(l) - l_true, stable for any
// logit magnitude.
double cross_entropy(const Matrix& logits, const Matrix& targets) {
    const Vector shift = logits.rowwise().maxCoeff();
    const Vector lse =
        (logits.colwise() - shift).array().exp().rowwise().sum().log().matrix() + shift;
    const Vector true_logit = (logits.array() * targets.array()).rowwise().sum();
    return (lse - true_logit).mean();
}

}  // namespace

SoftmaxMlp::SoftmaxMlp(Eigen::Index input_dim, Eigen::Index hidden_units, Eigen::Index classes,
                       std::uint64_t seed) {
    if (input_dim < 1 || hidden_units < 1 || classes < 2) {
        throw DomainError("SoftmaxMlp: need input_dim >= 1, hidden_units >= 1, classes >= 2");
    }
    Rng rng(seed);
    params_.w1 = glorot(hidden_units, input_dim, rng);
    params_.b1 = Vector::Zero(hidden_units);
    params_.w2 = glorot(classes, hidden_units, rng);
    params_.b2 = Vector::Zero(classes);
}

Matrix SoftmaxMlp::predict(const Matrix& inputs) const {
    return softmax_rows(logits_of(params_, hidden_activations(params_, inputs)));
}

double SoftmaxMlp::loss(const Matrix& inputs, const Matrix& targets) const {
    return cross_entropy(logits_of(params_, hidden_activations(params_, inputs)), targets);
}

double SoftmaxMlp::loss_and_gradients(const Matrix& inputs, const Matrix& targets,
                                      MlpParams& gradients) const {
    const Eigen::Index n = inputs.rows();
    const Matrix hidden = hidden_activations(params_, inputs);
    const Matrix logits = logits_of(params_, hidden);
    const double value = cross_entropy(logits, targets);

    const Matrix dlogits = (softmax_rows(logits) - targets) / double(n);
    gradients.w2 = dlogits.transpose() * hidden;
    gradients.b2 = dlogits.colwise().sum().transpose();
    const Matrix dhidden =
        (dlogits * params_.w2).array() * (1.0 - hidden.array().square());
    gradients.w1 = dhidden.transpose() * inputs;
    gradients.b1 = dhidden.colwise().sum().transpose();
    return value;
}

void SoftmaxMlp::gradient_step(const MlpParams& gradients, double learning_rate) {
    params_.w1 -= learning_rate * gradients.w1;
    params_.b1 -= learning_rate * gradients.b1;
    params_.w2 -= learning_rate * gradients.w2;
    params_.b2 -= learning_rate * gradients.b2;
}

}  // namespace psr
