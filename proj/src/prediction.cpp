#include "coupdate/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coupdate {

const Features& MultiModalSequence::channel(const ChannelId& id) const {
    auto it = channels.find(id);
    if (it == channels.end()) {
        throw ValidationError("sequence '" + sequence_id + "' has no channel '" + id + "'");
    }
    return it->second;
}

void Thresholds::validate() const {
    for (double t : {cre, close, diff}) {
        if (!(t >= 0.0 && t <= 1.0)) {
            throw ValidationError("thresholds must lie in [0, 1]");
        }
    }
}

bool all_finite(const Features& values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

std::size_t Dataset::channel_dim(const ChannelId& id) const {
    if (sequences.empty()) {
        throw ValidationError("empty dataset");
    }
    return sequences.front().channel(id).size();
}

void Dataset::validate() const {
    if (num_classes < 2) {
        throw ValidationError("a dataset needs at least two activity classes");
    }
    if (channels.empty()) {
        throw ValidationError("a dataset needs at least one channel");
    }
    std::map<ChannelId, std::size_t> dims;
    for (const auto& seq : sequences) {
        if (seq.true_label && (*seq.true_label < 0 || *seq.true_label >= num_classes)) {
            throw ValidationError("sequence '" + seq.sequence_id + "' has label out of range");
        }
        for (const auto& ch : channels) {
            const Features& f = seq.channel(ch);
            if (f.empty() || !all_finite(f)) {
                throw ValidationError("sequence '" + seq.sequence_id + "' channel '" + ch +
                                      "' is empty or non-finite");
            }
            auto [it, inserted] = dims.emplace(ch, f.size());
            if (!inserted && it->second != f.size()) {
                throw ValidationError("channel '" + ch + "' changes dimensionality at sequence '" +
                                      seq.sequence_id + "'");
            }
        }
    }
}

Certainty degree_of_certainty(std::span<const double> probs) {
    if (probs.size() < 2) {
        throw ValidationError("a probability vector needs at least two classes");
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0) {
            throw ValidationError("probability entries must be finite and non-negative");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kNormalizationTolerance) {
        throw ValidationError("probability vector is not normalized");
    }

    Certainty c;
    c.top1 = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
        if (probs[i] > probs[static_cast<std::size_t>(c.top1)]) c.top1 = static_cast<ClassId>(i);
    }
    c.top2 = c.top1 == 0 ? 1 : 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (static_cast<ClassId>(i) == c.top1) continue;
        if (probs[i] > probs[static_cast<std::size_t>(c.top2)]) c.top2 = static_cast<ClassId>(i);
    }
    const double p1 = probs[static_cast<std::size_t>(c.top1)];
    const double p2 = probs[static_cast<std::size_t>(c.top2)];
    c.doc = p1 > 0.0 ? std::clamp(1.0 - p2 / p1, 0.0, 1.0) : 0.0;
    return c;
}

Prediction Prediction::from_probabilities(std::vector<double> probs) {
    const Certainty c = degree_of_certainty(probs);
    Prediction p;
    p.probs = std::move(probs);
    p.top1 = c.top1;
    p.top2 = c.top2;
    p.doc = c.doc;
    return p;
}

std::vector<double> softmax(std::span<const double> scores) {
    std::vector<double> out(scores.begin(), scores.end());
    if (out.empty()) return out;
    const double mx = *std::max_element(out.begin(), out.end());
    double sum = 0.0;
    for (double& v : out) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : out) v /= sum;
    return out;
}

}  // namespace coupdate
