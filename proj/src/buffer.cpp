#include "coupdate/buffer.hpp"

namespace coupdate {

LabeledBuffer::LabeledBuffer(std::size_t capacity, std::size_t per_class_cap, int num_classes)
    : capacity_(capacity),
      per_class_cap_(per_class_cap),
      num_classes_(num_classes),
      class_counts_(static_cast<std::size_t>(num_classes > 0 ? num_classes : 0), 0) {
    if (num_classes < 1 || capacity == 0 || per_class_cap == 0) {
        throw ValidationError("buffer needs positive capacity, class cap and class count");
    }
}

void LabeledBuffer::check_label(ClassId label) const {
    if (label < 0 || label >= num_classes_) {
        throw ValidationError("buffer label " + std::to_string(label) + " out of range");
    }
}

std::size_t LabeledBuffer::count(ClassId label) const {
    check_label(label);
    return class_counts_[static_cast<std::size_t>(label)];
}

void LabeledBuffer::add_pinned(Features features, ClassId label) {
    check_label(label);
    if (entries_.size() >= capacity_ || count(label) >= per_class_cap_) {
        throw ValidationError("initial training samples exceed the buffer caps for class " +
                              std::to_string(label));
    }
    entries_.push_back({std::move(features), label, true, 0.0});
    ++class_counts_[static_cast<std::size_t>(label)];
}

InsertResult LabeledBuffer::insert(Features features, ClassId label, double doc_at_insert) {
    check_label(label);
    if (count(label) < per_class_cap_ && entries_.size() < capacity_) {
        entries_.push_back({std::move(features), label, false, doc_at_insert});
        ++class_counts_[static_cast<std::size_t>(label)];
        return {InsertOutcome::Appended, std::nullopt};
    }

    // Earliest entry wins ties on doc_at_insert.
    std::optional<std::size_t> victim;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const BufferEntry& e = entries_[i];
        if (e.label != label || e.pinned) continue;
        if (!victim || e.doc_at_insert > entries_[*victim].doc_at_insert) victim = i;
    }
    if (!victim) {
        return {InsertOutcome::Rejected, std::nullopt};
    }
    InsertResult result{InsertOutcome::Replaced, std::move(entries_[*victim])};
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(*victim));
    entries_.push_back({std::move(features), label, false, doc_at_insert});
    return result;
}

LabeledBuffer LabeledBuffer::restore(std::size_t capacity, std::size_t per_class_cap, int num_classes,
                                     std::vector<BufferEntry> entries) {
    LabeledBuffer b(capacity, per_class_cap, num_classes);
    if (entries.size() > capacity) throw ValidationError("stored buffer exceeds its capacity");
    for (const auto& e : entries) {
        b.check_label(e.label);
        if (++b.class_counts_[static_cast<std::size_t>(e.label)] > per_class_cap) {
            throw ValidationError("stored buffer exceeds its per-class cap");
        }
    }
    b.entries_ = std::move(entries);
    return b;
}

std::vector<Features> LabeledBuffer::samples() const {
    std::vector<Features> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.features);
    return out;
}

std::vector<ClassId> LabeledBuffer::labels() const {
    std::vector<ClassId> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.label);
    return out;
}

}  // namespace coupdate
