#pragma once

#include <span>
#include <vector>

#include "coupdate/types.hpp"

namespace coupdate {

// Two most probable classes and the degree of certainty of the top one.
// Ties resolve to the lower class id.
struct Certainty {
    double doc = 0.0;
    ClassId top1 = 0;
    ClassId top2 = 0;
};

// Tolerance on |sum(p) - 1| accepted for a probability vector.
inline constexpr double kNormalizationTolerance = 1e-9;

// doc = 1 - p[top2] / p[top1], and 0 when p[top1] == 0.
// Throws ValidationError when p has fewer than two entries, a negative or
// non-finite entry, or does not sum to one.
Certainty degree_of_certainty(std::span<const double> probs);

// cre = doc * w.
constexpr double credibility(double doc, double weight) { return doc * weight; }

struct Prediction {
    std::vector<double> probs;
    ClassId top1 = 0;
    ClassId top2 = 0;
    double doc = 0.0;
    // Filled in by callers that know the channel's reliability weights.
    double cre = 0.0;

    static Prediction from_probabilities(std::vector<double> probs);

    friend bool operator==(const Prediction&, const Prediction&) = default;
};

// Softmax with max-subtraction; output sums to one.
std::vector<double> softmax(std::span<const double> scores);

}  // namespace coupdate
