#include "coupdate/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace coupdate {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Per-sample loss and its derivative with respect to the class scores.
double score_loss(Loss loss, std::span<const double> scores, ClassId y, std::vector<double>& dscore) {
    const std::size_t a = scores.size();
    dscore.assign(a, 0.0);
    if (loss == Loss::Logistic) {
        const std::vector<double> p = softmax(scores);
        for (std::size_t k = 0; k < a; ++k) dscore[k] = p[k];
        dscore[static_cast<std::size_t>(y)] -= 1.0;
        return -std::log(std::max(p[static_cast<std::size_t>(y)], 1e-300));
    }
    double total = 0.0;
    for (std::size_t k = 0; k < a; ++k) {
        const double target = static_cast<ClassId>(k) == y ? 1.0 : -1.0;
        const double margin = 1.0 - target * scores[k];
        if (margin > 0.0) {
            total += margin;
            dscore[k] = -target;
        }
    }
    return total;
}

}  // namespace

void Hyperparams::validate() const {
    if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw ValidationError("eta0 must be positive");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be non-negative");
    if (epochs < 1) throw ValidationError("epochs must be at least 1");
    if (partial_passes < 1) throw ValidationError("partial_passes must be at least 1");
}

LinearModel LinearModel::fit(std::span<const Features> samples, std::span<const ClassId> labels,
                             int num_classes, const Hyperparams& hp) {
    hp.validate();
    if (num_classes < 2) throw ValidationError("fit needs at least two classes");
    if (samples.empty()) throw ValidationError("fit needs at least one sample");

    LinearModel m;
    m.num_classes_ = num_classes;
    m.dim_ = samples.front().size();
    m.hp_ = hp;
    m.check_batch(samples, labels);
    if (std::set<ClassId>(labels.begin(), labels.end()).size() < 2) {
        throw ValidationError("fit needs samples of at least two distinct classes");
    }
    m.weights_.assign(static_cast<std::size_t>(num_classes) * m.dim_, 0.0);
    m.bias_.assign(static_cast<std::size_t>(num_classes), 0.0);
    m.run_epochs(samples, labels, hp.epochs);
    return m;
}

void LinearModel::partial_fit(std::span<const Features> samples, std::span<const ClassId> labels) {
    if (!fitted()) throw ValidationError("partial_fit on an unfitted model");
    if (samples.empty() && labels.empty()) return;
    check_batch(samples, labels);
    run_epochs(samples, labels, hp_.partial_passes);
}

void LinearModel::check_batch(std::span<const Features> samples, std::span<const ClassId> labels) const {
    if (samples.size() != labels.size()) {
        throw ValidationError("sample and label counts differ");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].size() != dim_) throw ValidationError("sample dimension mismatch");
        if (!all_finite(samples[i])) throw ValidationError("non-finite sample value");
        if (labels[i] < 0 || labels[i] >= num_classes_) {
            throw ValidationError("label " + std::to_string(labels[i]) + " out of range");
        }
    }
}

void LinearModel::run_epochs(std::span<const Features> samples, std::span<const ClassId> labels,
                             int epochs) {
    std::mt19937_64 rng(splitmix64(hp_.seed ^ splitmix64(steps_)));
    std::vector<std::size_t> order(samples.size());
    for (int e = 0; e < epochs; ++e) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i : order) sgd_step(samples[i], labels[i]);
    }
}

void LinearModel::sgd_step(const Features& x, ClassId y) {
    const double eta = hp_.eta0 / (1.0 + hp_.alpha * hp_.eta0 * static_cast<double>(steps_));
    const std::vector<double> scores = decision_function(x);
    std::vector<double> dscore;
    score_loss(hp_.loss, scores, y, dscore);

    const double shrink = 1.0 - eta * hp_.alpha;
    for (std::size_t k = 0; k < static_cast<std::size_t>(num_classes_); ++k) {
        double* row = weights_.data() + k * dim_;
        const double g = eta * dscore[k];
        for (std::size_t j = 0; j < dim_; ++j) row[j] = shrink * row[j] - g * x[j];
        bias_[k] -= g;
    }
    ++steps_;
}

std::vector<double> LinearModel::decision_function(std::span<const double> x) const {
    if (!fitted()) throw ValidationError("prediction with an unfitted model");
    if (x.size() != dim_) throw ValidationError("feature dimension mismatch");
    std::vector<double> scores(static_cast<std::size_t>(num_classes_));
    for (std::size_t k = 0; k < scores.size(); ++k) {
        const double* row = weights_.data() + k * dim_;
        scores[k] = std::inner_product(x.begin(), x.end(), row, bias_[k]);
    }
    return scores;
}

Prediction LinearModel::predict_proba(std::span<const double> x) const {
    return Prediction::from_probabilities(softmax(decision_function(x)));
}

LinearModel LinearModel::from_parameters(int num_classes, std::size_t dim, std::vector<double> weights,
                                         std::vector<double> bias, Hyperparams hp, std::uint64_t steps) {
    if (num_classes < 2 || weights.size() != static_cast<std::size_t>(num_classes) * dim ||
        bias.size() != static_cast<std::size_t>(num_classes)) {
        throw ValidationError("inconsistent linear model parameters");
    }
    if (!all_finite(weights) || !all_finite(bias)) throw ValidationError("non-finite model parameter");
    hp.validate();
    LinearModel m;
    m.num_classes_ = num_classes;
    m.dim_ = dim;
    m.weights_ = std::move(weights);
    m.bias_ = std::move(bias);
    m.hp_ = hp;
    m.steps_ = steps;
    return m;
}

double training_loss(const LinearModel& model, std::span<const Features> samples,
                     std::span<const ClassId> labels) {
    if (samples.empty() || samples.size() != labels.size()) {
        throw ValidationError("training_loss needs matching, non-empty samples and labels");
    }
    std::vector<double> dscore;
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        total += score_loss(model.hyperparams().loss, model.decision_function(samples[i]), labels[i], dscore);
    }
    double sq = 0.0;
    for (double w : model.weights()) sq += w * w;
    return total / static_cast<double>(samples.size()) + 0.5 * model.hyperparams().alpha * sq;
}

Gradient training_gradient(const LinearModel& model, std::span<const Features> samples,
                           std::span<const ClassId> labels) {
    if (samples.empty() || samples.size() != labels.size()) {
        throw ValidationError("training_gradient needs matching, non-empty samples and labels");
    }
    const std::size_t a = static_cast<std::size_t>(model.num_classes());
    const std::size_t d = model.dim();
    Gradient g{std::vector<double>(a * d, 0.0), std::vector<double>(a, 0.0)};
    std::vector<double> dscore;
    const double inv_n = 1.0 / static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        score_loss(model.hyperparams().loss, model.decision_function(samples[i]), labels[i], dscore);
        for (std::size_t k = 0; k < a; ++k) {
            for (std::size_t j = 0; j < d; ++j) g.weights[k * d + j] += inv_n * dscore[k] * samples[i][j];
            g.bias[k] += inv_n * dscore[k];
        }
    }
    const auto w = model.weights();
    for (std::size_t i = 0; i < w.size(); ++i) g.weights[i] += model.hyperparams().alpha * w[i];
    return g;
}

}  // namespace coupdate
