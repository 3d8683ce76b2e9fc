#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "coupdate/types.hpp"

namespace coupdate {

struct BufferEntry {
    Features features;
    ClassId label = 0;
    bool pinned = false;
    double doc_at_insert = 0.0;

    friend bool operator==(const BufferEntry&, const BufferEntry&) = default;
};

enum class InsertOutcome { Appended, Replaced, Rejected };

struct InsertResult {
    InsertOutcome outcome = InsertOutcome::Rejected;
    std::optional<BufferEntry> evicted;
};

// Bounded, class-balanced store of labelled samples used to update one
// channel's classifier.
//
// Overflow, whether of the class quota or of the total capacity, is resolved
// inside the class of the incoming sample: the unpinned entry with the highest
// doc_at_insert (the one the classifier was most certain about) leaves, so the
// buffer keeps the samples that were hardest to classify. Pinned entries are
// the initial training samples and are never evicted; when every same-class
// entry is pinned the insertion is rejected.
class LabeledBuffer {
public:
    LabeledBuffer() = default;
    LabeledBuffer(std::size_t capacity, std::size_t per_class_cap, int num_classes);

    // Adds an initial training sample. Throws ValidationError if this would
    // exceed either cap, since pinned entries cannot be evicted later.
    void add_pinned(Features features, ClassId label);

    InsertResult insert(Features features, ClassId label, double doc_at_insert);

    // Rebuilds a buffer from stored entries, re-checking both caps.
    static LabeledBuffer restore(std::size_t capacity, std::size_t per_class_cap, int num_classes,
                                 std::vector<BufferEntry> entries);

    const std::vector<BufferEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t per_class_cap() const { return per_class_cap_; }
    int num_classes() const { return num_classes_; }
    std::size_t count(ClassId label) const;

    std::vector<Features> samples() const;
    std::vector<ClassId> labels() const;

    friend bool operator==(const LabeledBuffer&, const LabeledBuffer&) = default;

private:
    void check_label(ClassId label) const;

    std::size_t capacity_ = 0;
    std::size_t per_class_cap_ = 0;
    int num_classes_ = 0;
    std::vector<BufferEntry> entries_;
    std::vector<std::size_t> class_counts_;
};

}  // namespace coupdate
