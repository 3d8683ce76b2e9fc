#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coupdate/buffer.hpp"
#include "coupdate/classifier.hpp"
#include "coupdate/prediction.hpp"
#include "coupdate/serialization.hpp"
#include "coupdate/types.hpp"

namespace coupdate {

// Threshold comparisons treat values within this distance of a threshold as
// equal to it, so that e.g. 0.6 - 0.4 meets a 0.2 gap requirement.
inline constexpr double kThresholdSlack = 1e-9;

struct GateOptions {
    // Let the dominance rule accept a sequence on which all channels agree but
    // whose credibilities are not close. Off restricts dominance to
    // disagreeing channels.
    bool dominance_when_agree = true;
    // Relax cre/close by the number of channels n: cre * 2/n, close * n/2.
    bool scale_by_channels = false;

    friend bool operator==(const GateOptions&, const GateOptions&) = default;
};

enum class GateBranch { None, Consensus, Dominance, Supervised };

const char* branch_name(GateBranch branch);

struct GateDecision {
    std::optional<ClassId> label;
    GateBranch branch = GateBranch::None;

    friend bool operator==(const GateDecision&, const GateDecision&) = default;
};

// The most probable class of one channel and that prediction's credibility.
struct ChannelVote {
    ClassId top1 = 0;
    double cre = 0.0;
};

// Labelling gate over per-channel votes, consensus rule first:
//  consensus: every channel votes c, every cre >= cre threshold, and every
//             pairwise |cre_i - cre_j| < close threshold;
//  dominance: some channel k has cre_k >= cre threshold and
//             |cre_k - cre_i| >= diff threshold for every other channel i.
// Otherwise no label.
GateDecision assign_class_label(std::span<const ChannelVote> votes, const Thresholds& thresholds,
                                const GateOptions& options = {});

// Late fusion: probs proportional to sum_k w^k (elementwise) p^k. Falls back
// to the unweighted sum when every weighted entry is zero.
Prediction fuse_predictions(const std::map<ChannelId, Prediction>& predictions,
                            const std::map<ChannelId, std::vector<double>>& weights);

// Per-class precision of one channel's classifier, estimated by k-fold
// cross-validation over the labelled training sequences. Folds group whole
// subjects when there are at least two subjects, otherwise they are
// stratified by class. A class the classifier never predicts gets weight 0.
std::vector<double> compute_channel_weights(const ChannelId& channel,
                                            std::span<const MultiModalSequence> training,
                                            int num_classes, int folds, const Hyperparams& hp,
                                            std::uint64_t seed);

struct EngineConfig {
    Thresholds thresholds;
    GateOptions gate;
    std::size_t buffer_max = 170;
    // 0 selects floor(buffer_max / num_classes).
    std::size_t per_class_cap = 0;
    int max_retry_passes = 5;
    int weight_folds = 4;
    Hyperparams classifier;

    void validate() const;
    std::size_t class_cap(int num_classes) const;

    friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

struct ChannelState {
    ChannelId id;
    LinearModel model;
    std::vector<double> weights;
    LabeledBuffer buffer;
    bool new_template = false;

    friend bool operator==(const ChannelState&, const ChannelState&) = default;
};

struct EngineState {
    int num_classes = 0;
    EngineConfig config;
    std::vector<ChannelState> channels;
    std::deque<MultiModalSequence> unlabeled;
    std::size_t update_count = 0;

    friend bool operator==(const EngineState&, const EngineState&) = default;
};

// One row of the event log: a sequence seen by the gate, either on arrival
// or while retrying the unlabelled queue.
struct SequenceEvent {
    std::string sequence_id;
    GateDecision decision;
    bool retry = false;
    std::vector<ClassId> top1;
    std::vector<double> cre;
    std::vector<std::size_t> buffer_sizes;
    std::size_t update_count = 0;
};

class CoUpdatingEngine {
public:
    using UpdateObserver = std::function<void(const CoUpdatingEngine&)>;

    explicit CoUpdatingEngine(EngineState state);

    // Fits every channel on the labelled training sequences, estimates the
    // reliability weights and seeds each buffer with pinned training samples.
    static CoUpdatingEngine initialize(std::span<const MultiModalSequence> training,
                                       std::vector<ChannelId> channels, int num_classes,
                                       const EngineConfig& config);

    std::map<ChannelId, Prediction> predict(const MultiModalSequence& seq) const;
    Prediction predict_fused(const MultiModalSequence& seq) const;
    GateDecision assign_class_label(const MultiModalSequence& seq) const;

    // One iteration of the co-updating loop. The true label, if any, is
    // discarded before the sequence reaches the engine.
    GateDecision process_sequence(MultiModalSequence seq);

    // Supervised-updating path: same buffers and classifier updates, with the
    // given label in place of the gate.
    void process_labeled(const MultiModalSequence& seq, ClassId label);

    // Re-runs the gate over the unlabelled queue, accepting what it can,
    // until a pass accepts nothing or max_retry_passes passes have run.
    // Returns the number of sequences accepted.
    std::size_t retry_unlabeled();

    void set_update_observer(UpdateObserver observer) { observer_ = std::move(observer); }

    const EngineState& state() const { return state_; }
    const std::vector<SequenceEvent>& events() const { return events_; }
    std::map<ChannelId, std::vector<double>> weights() const;

    void save_checkpoint(const std::filesystem::path& path) const;
    static CoUpdatingEngine load_checkpoint(const std::filesystem::path& path);

private:
    std::vector<ChannelVote> votes(const std::map<ChannelId, Prediction>& preds) const;
    void accept(const MultiModalSequence& seq, ClassId label, const std::map<ChannelId, Prediction>& preds);
    void update_classifiers();
    void record(const std::string& sequence_id, const GateDecision& decision, bool retry,
                const std::map<ChannelId, Prediction>& preds);

    EngineState state_;
    std::vector<SequenceEvent> events_;
    UpdateObserver observer_;
};

// CSV: sequence_id,decision,branch,retry,top1_<ch>...,cre_<ch>...,buffer_<ch>...,update_count
void write_event_log(std::ostream& out, const std::vector<ChannelId>& channels,
                     const std::vector<SequenceEvent>& events);

void to_json(Json& j, const EngineConfig& c);
void from_json(const Json& j, EngineConfig& c);
void to_json(Json& j, const EngineState& s);
void from_json(const Json& j, EngineState& s);

}  // namespace coupdate
