#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coupdate/prediction.hpp"
#include "coupdate/types.hpp"

namespace coupdate {

enum class Loss {
    // Multinomial logistic loss; predict_proba is the model's softmax.
    Logistic,
    // One-vs-rest hinge loss; predict_proba is a softmax over the margins.
    Hinge,
};

struct Hyperparams {
    Loss loss = Loss::Logistic;
    double eta0 = 0.1;
    // L2 strength; also the decay constant of the learning-rate schedule.
    double alpha = 1e-4;
    int epochs = 50;
    int partial_passes = 5;
    std::uint64_t seed = 0;

    void validate() const;

    friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

struct Gradient {
    std::vector<double> weights;  // num_classes x dim, row-major
    std::vector<double> bias;
};

// Multi-class linear model trained by plain SGD with the inverse-scaling
// schedule eta_t = eta0 / (1 + alpha * eta0 * t). The step counter t survives
// across fit/partial_fit calls, so a model continued with partial_fit follows
// the same schedule it would have followed in one long run.
class LinearModel {
public:
    LinearModel() = default;

    // Fresh model trained for hp.epochs passes. Requires at least two distinct
    // labels in [0, num_classes) and a consistent, finite feature dimension.
    static LinearModel fit(std::span<const Features> samples, std::span<const ClassId> labels,
                           int num_classes, const Hyperparams& hp);

    // Continues training for hp.partial_passes passes over the given samples.
    // An empty batch leaves the model untouched.
    void partial_fit(std::span<const Features> samples, std::span<const ClassId> labels);

    Prediction predict_proba(std::span<const double> x) const;
    std::vector<double> decision_function(std::span<const double> x) const;
    ClassId predict(std::span<const double> x) const { return predict_proba(x).top1; }

    bool fitted() const { return num_classes_ > 0; }
    int num_classes() const { return num_classes_; }
    std::size_t dim() const { return dim_; }
    std::uint64_t steps() const { return steps_; }
    const Hyperparams& hyperparams() const { return hp_; }

    std::span<const double> weights() const { return weights_; }
    std::span<double> weights() { return weights_; }
    std::span<const double> bias() const { return bias_; }
    std::span<double> bias() { return bias_; }

    // Rebuilds a model from stored parameters (deserialization).
    static LinearModel from_parameters(int num_classes, std::size_t dim, std::vector<double> weights,
                                       std::vector<double> bias, Hyperparams hp, std::uint64_t steps);

    friend bool operator==(const LinearModel&, const LinearModel&) = default;

private:
    void check_batch(std::span<const Features> samples, std::span<const ClassId> labels) const;
    void run_epochs(std::span<const Features> samples, std::span<const ClassId> labels, int epochs);
    void sgd_step(const Features& x, ClassId y);

    int num_classes_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> weights_;
    std::vector<double> bias_;
    Hyperparams hp_;
    std::uint64_t steps_ = 0;
};

// Regularized empirical risk minimized by the SGD updates:
//   (1/N) sum_i loss(x_i, y_i) + (alpha / 2) * ||W||^2   (bias unregularized)
double training_loss(const LinearModel& model, std::span<const Features> samples,
                     std::span<const ClassId> labels);

// Analytic gradient of training_loss with respect to weights and bias.
Gradient training_gradient(const LinearModel& model, std::span<const Features> samples,
                           std::span<const ClassId> labels);

}  // namespace coupdate
