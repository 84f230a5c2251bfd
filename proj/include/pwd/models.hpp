#pragma once

#include <utility>
#include <vector>

#include "pwd/core.hpp"
#include "pwd/linalg.hpp"

namespace pwd {

// 1-D toy loss (w-1)^2/2, unregularized part only; the penalty enters
// through the optimizer.
std::pair<double, double> toy_loss_and_grad(double w);

// (1/2) w^T A w - b^T w with symmetric PSD A. The Lipschitz constant of the
// gradient (largest eigenvalue of A) is computed once at construction by
// power iteration.
class QuadraticLoss {
public:
    QuadraticLoss(Matrix a, ParamVector b);

    std::size_t dim() const { return b_.size(); }
    double loss(const ParamVector& w) const;
    double loss_and_grad(const ParamVector& w, ParamVector& grad) const;
    double lipschitz() const { return lipschitz_; }
    const Matrix& a() const { return a_; }

private:
    Matrix a_;
    ParamVector b_;
    double lipschitz_ = 0.0;
};

// ||X w - y||^2 / (2n) with exact gradient X^T (X w - y) / n.
class LinRegLoss {
public:
    LinRegLoss(Matrix x, ParamVector y);

    std::size_t dim() const { return x_.cols; }
    std::size_t samples() const { return x_.rows; }
    double loss(const ParamVector& w) const;
    double loss_and_grad(const ParamVector& w, ParamVector& grad) const;
    double lipschitz() const { return lipschitz_; }

private:
    Matrix x_;
    ParamVector y_;
    double lipschitz_ = 0.0;
};

// Mean binary cross-entropy with a sigmoid head; labels in {0, 1}.
class LogRegLoss {
public:
    LogRegLoss(Matrix x, std::vector<int> labels);

    std::size_t dim() const { return x_.cols; }
    std::size_t samples() const { return x_.rows; }
    double loss(const ParamVector& w) const;
    double loss_and_grad(const ParamVector& w, ParamVector& grad) const;
    double accuracy(const ParamVector& w) const;  // fraction in [0, 1]

private:
    Matrix x_;
    std::vector<int> labels_;
};

enum class Activation { Tanh, Relu };

// Fully connected net with a softmax cross-entropy head. layer_sizes runs
// from input width to class count, e.g. {2, 16, 16, 4}.
struct MlpModel {
    std::vector<std::size_t> layer_sizes;
    Activation activation = Activation::Tanh;

    std::size_t layers() const { return layer_sizes.size() - 1; }
};

// Forward cache: input batch plus post-activation values per layer,
// enough for exact backprop. Valid only for the parameters it was built
// with; mlp_backward checks the recorded dimensions.
struct MlpCache {
    Matrix input;
    std::vector<Matrix> activations;  // one per hidden layer
    Matrix logits;
    std::vector<std::size_t> layer_sizes;
};

// Weights drawn from a Gaussian scaled by 1/sqrt(fan_in); biases exactly 0
// and decay-ineligible. Groups are named layer<i>.weight / layer<i>.bias.
std::vector<ParamGroup> init_params(const MlpModel& model, Rng& rng);

// Deterministic forward pass; returns logits (batch x classes) and fills
// the cache.
Matrix mlp_forward(const MlpModel& model, const std::vector<ParamGroup>& params,
                   const Matrix& batch, MlpCache& cache);

// Mean cross-entropy of logits against integer labels.
double mlp_loss(const Matrix& logits, const std::vector<int>& labels);

// Row-wise softmax of logits.
Matrix softmax(const Matrix& logits);

double mlp_accuracy(const Matrix& logits, const std::vector<int>& labels);

// Exact gradients of the mean cross-entropy, laid out exactly like params.
std::vector<ParamGroup> mlp_backward(const MlpModel& model,
                                     const std::vector<ParamGroup>& params,
                                     const MlpCache& cache, const std::vector<int>& labels);

}  // namespace pwd
