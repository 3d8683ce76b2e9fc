#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "coupdate/types.hpp"

namespace coupdate {

struct SyntheticChannel {
    ChannelId id;
    std::size_t dim = 16;
    // Class pairs whose prototypes are pulled together in this channel only.
    std::vector<std::pair<ClassId, ClassId>> confusable;
};

struct StreamConfig {
    int num_classes = 14;
    int num_subjects = 20;
    int repetitions = 2;
    std::vector<SyntheticChannel> channels;
    // Standard deviation of the class prototypes around the origin.
    double class_separation = 1.0;
    // Fraction of the prototype distance left between a confusable pair.
    double confusable_factor = 0.15;
    // Standard deviation of the per-(subject, class) offsets.
    double subject_scale = 0.5;
    double noise = 0.3;
    // Execution styles per (class, channel); each subject picks one per class
    // and channel. Zero disables styles.
    int styles = 0;
    double style_scale = 1.0;
    std::uint64_t seed = 1;

    void validate() const;
};

// Class-conditional Gaussian features: for each channel, a prototype per
// class, an additive offset per (subject, class) and per-sample noise.
// Output order is subject-major, then class, then repetition; sequence ids
// are "sNN_aNN_rN" and subject ids "subjNN".
Dataset generate(const StreamConfig& config);

}  // namespace coupdate
