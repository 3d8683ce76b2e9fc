#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "coupdate/engine.hpp"
#include "coupdate/types.hpp"

namespace coupdate {

struct SplitRatios {
    double train = 0.2;
    double update = 0.5;
    double test = 0.3;

    void validate() const;
};

// Subject-disjoint train / update / test split.
struct Partition {
    std::vector<std::string> train_subjects;
    std::vector<std::string> update_subjects;
    std::vector<std::string> test_subjects;
    std::vector<MultiModalSequence> train;
    std::vector<MultiModalSequence> update;
    std::vector<MultiModalSequence> test;
};

// Shuffles the distinct subject ids with `seed` and cuts them at
// round(train * n) and round((train + update) * n). Every split must receive
// at least one subject.
Partition partition_new_person(const Dataset& dataset, const SplitRatios& ratios, std::uint64_t seed);

// Rows are true labels, columns predicted labels.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(int num_classes);

    int num_classes() const { return n_; }
    std::size_t at(ClassId truth, ClassId predicted) const;
    void add(ClassId truth, ClassId predicted);
    std::size_t row_sum(ClassId truth) const;
    std::size_t col_sum(ClassId predicted) const;
    std::size_t total() const;
    double accuracy() const;

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    int n_ = 0;
    std::vector<std::size_t> cells_;
};

ConfusionMatrix confusion_matrix(std::span<const ClassId> predicted, std::span<const ClassId> truth,
                                 int num_classes);

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
};

struct PrecisionRecall {
    std::vector<ClassScores> per_class;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
};

// P = TP / (TP + FP), R = TP / (TP + FN), 0/0 taken as 0; macro values are
// unweighted means over classes.
PrecisionRecall precision_recall(const ConfusionMatrix& matrix);

enum class Mode { CoUpdating, SupervisedUpdating, Batch };

const char* mode_name(Mode mode);
Mode parse_mode(const std::string& name);

// Name under which fused predictions appear next to the channel ids.
inline constexpr const char* kFusionSource = "fusion";

// Confusion matrices on the test split, one per channel plus the fusion.
struct Evaluation {
    std::vector<std::string> sources;
    std::vector<ConfusionMatrix> confusion;

    const ConfusionMatrix& at(const std::string& source) const;
};

struct TrendPoint {
    std::size_t update_count = 0;
    std::vector<double> channel_accuracy;
    double fused_accuracy = 0.0;
};

struct ExperimentConfig {
    EngineConfig engine;
    SplitRatios ratios;

    void validate() const;
};

struct ExperimentReport {
    Mode mode = Mode::Batch;
    std::uint64_t seed = 0;
    int num_classes = 0;
    std::vector<ChannelId> channels;
    Partition partition;
    Evaluation initial;
    Evaluation final;
    std::vector<TrendPoint> trend;
    std::vector<SequenceEvent> events;
    // Update-set sequences labelled by the gate, and how many of those
    // labels were wrong. Zero outside co-updating.
    std::size_t accepted = 0;
    std::size_t wrong_labels = 0;
    std::size_t left_unlabeled = 0;
};

// co_updating: fit on the train split, then stream the update split (shuffled
// with `seed`, labels hidden) through the co-updating engine.
// supervised_updating: same fit and stream order, using the true labels.
// batch: fit once on train + update, no updating.
// The trend gets one point before any update and one after every update.
ExperimentReport run_experiment(const Dataset& dataset, Mode mode, const ExperimentConfig& config,
                                std::uint64_t seed);

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for a single run
};

struct RepeatedReport {
    Mode mode = Mode::Batch;
    std::vector<ExperimentReport> runs;
    // Keys "<source>.<initial|final>.<precision|recall|accuracy>" plus
    // "accepted" and "wrong_labels".
    std::map<std::string, MetricSummary> metrics;
};

std::map<std::string, double> scalar_metrics(const ExperimentReport& report);
MetricSummary summarize(std::span<const double> values);

// Repetition r uses partition seed base_seed + r for every mode. Runs are
// spread over `jobs` threads; results do not depend on the thread count.
std::vector<RepeatedReport> run_repeated(const Dataset& dataset, std::span<const Mode> modes,
                                         const ExperimentConfig& config, int repetitions,
                                         std::uint64_t base_seed, int jobs = 1);

}  // namespace coupdate
