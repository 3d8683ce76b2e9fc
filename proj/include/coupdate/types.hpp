#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace coupdate {

// Raised for malformed input: bad configuration, dimension mismatches,
// out-of-range labels. The CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using ChannelId = std::string;
using ClassId = int;
using Features = std::vector<double>;

struct ActivityLabel {
    ClassId id = 0;
    std::string name;

    friend bool operator==(const ActivityLabel&, const ActivityLabel&) = default;
};

// One activity clip observed through every configured channel.
struct MultiModalSequence {
    std::string sequence_id;
    std::string subject_id;
    std::map<ChannelId, Features> channels;
    std::optional<ClassId> true_label;

    const Features& channel(const ChannelId& id) const;

    friend bool operator==(const MultiModalSequence&, const MultiModalSequence&) = default;
};

// Acceptance thresholds of the labelling gate.
struct Thresholds {
    double cre = 0.35;
    double close = 0.2;
    double diff = 0.2;

    void validate() const;

    friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

struct Dataset {
    int num_classes = 0;
    std::vector<ChannelId> channels;
    std::vector<MultiModalSequence> sequences;

    // Checks label range, channel presence and per-channel dimensionality.
    void validate() const;
    std::size_t channel_dim(const ChannelId& id) const;
};

bool all_finite(const Features& values);

}  // namespace coupdate
