#include "coupdate/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <thread>

namespace coupdate {

void SplitRatios::validate() const {
    if (!(train > 0.0 && update > 0.0 && test > 0.0) ||
        std::abs(train + update + test - 1.0) > 1e-9) {
        throw ValidationError("split ratios must be positive and sum to 1");
    }
}

Partition partition_new_person(const Dataset& dataset, const SplitRatios& ratios, std::uint64_t seed) {
    ratios.validate();
    std::vector<std::string> subjects;
    for (const auto& s : dataset.sequences) subjects.push_back(s.subject_id);
    std::sort(subjects.begin(), subjects.end());
    subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());

    const double n = static_cast<double>(subjects.size());
    const auto n_train = static_cast<std::size_t>(std::llround(ratios.train * n));
    const auto n_train_update = static_cast<std::size_t>(std::llround((ratios.train + ratios.update) * n));
    if (n_train < 1 || n_train_update <= n_train || n_train_update >= subjects.size()) {
        throw ValidationError("too few subjects (" + std::to_string(subjects.size()) +
                              ") to fill every split");
    }

    std::mt19937_64 rng(seed);
    std::shuffle(subjects.begin(), subjects.end(), rng);

    Partition p;
    p.train_subjects.assign(subjects.begin(), subjects.begin() + static_cast<std::ptrdiff_t>(n_train));
    p.update_subjects.assign(subjects.begin() + static_cast<std::ptrdiff_t>(n_train),
                             subjects.begin() + static_cast<std::ptrdiff_t>(n_train_update));
    p.test_subjects.assign(subjects.begin() + static_cast<std::ptrdiff_t>(n_train_update), subjects.end());
    for (auto* v : {&p.train_subjects, &p.update_subjects, &p.test_subjects}) std::sort(v->begin(), v->end());

    const std::set<std::string> train(p.train_subjects.begin(), p.train_subjects.end());
    const std::set<std::string> update(p.update_subjects.begin(), p.update_subjects.end());
    for (const auto& s : dataset.sequences) {
        if (train.count(s.subject_id)) {
            p.train.push_back(s);
        } else if (update.count(s.subject_id)) {
            p.update.push_back(s);
        } else {
            p.test.push_back(s);
        }
    }
    return p;
}

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : n_(num_classes), cells_(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes), 0) {
    if (num_classes < 1) throw ValidationError("confusion matrix needs at least one class");
}

std::size_t ConfusionMatrix::at(ClassId truth, ClassId predicted) const {
    if (truth < 0 || truth >= n_ || predicted < 0 || predicted >= n_) {
        throw ValidationError("confusion matrix index out of range");
    }
    return cells_[static_cast<std::size_t>(truth * n_ + predicted)];
}

void ConfusionMatrix::add(ClassId truth, ClassId predicted) {
    if (truth < 0 || truth >= n_ || predicted < 0 || predicted >= n_) {
        throw ValidationError("label out of range for the confusion matrix");
    }
    ++cells_[static_cast<std::size_t>(truth * n_ + predicted)];
}

std::size_t ConfusionMatrix::row_sum(ClassId truth) const {
    std::size_t s = 0;
    for (ClassId j = 0; j < n_; ++j) s += at(truth, j);
    return s;
}

std::size_t ConfusionMatrix::col_sum(ClassId predicted) const {
    std::size_t s = 0;
    for (ClassId i = 0; i < n_; ++i) s += at(i, predicted);
    return s;
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(cells_.begin(), cells_.end(), std::size_t{0}); }

double ConfusionMatrix::accuracy() const {
    const std::size_t t = total();
    if (t == 0) return 0.0;
    std::size_t diag = 0;
    for (ClassId i = 0; i < n_; ++i) diag += at(i, i);
    return static_cast<double>(diag) / static_cast<double>(t);
}

ConfusionMatrix confusion_matrix(std::span<const ClassId> predicted, std::span<const ClassId> truth,
                                 int num_classes) {
    if (predicted.size() != truth.size()) throw ValidationError("prediction and truth counts differ");
    ConfusionMatrix m(num_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) m.add(truth[i], predicted[i]);
    return m;
}

PrecisionRecall precision_recall(const ConfusionMatrix& m) {
    PrecisionRecall pr;
    const int n = m.num_classes();
    for (ClassId c = 0; c < n; ++c) {
        const double tp = static_cast<double>(m.at(c, c));
        const double predicted = static_cast<double>(m.col_sum(c));
        const double actual = static_cast<double>(m.row_sum(c));
        ClassScores s;
        s.precision = predicted > 0.0 ? tp / predicted : 0.0;
        s.recall = actual > 0.0 ? tp / actual : 0.0;
        pr.macro_precision += s.precision;
        pr.macro_recall += s.recall;
        pr.per_class.push_back(s);
    }
    if (n > 0) {
        pr.macro_precision /= n;
        pr.macro_recall /= n;
    }
    return pr;
}

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::CoUpdating: return "co_updating";
        case Mode::SupervisedUpdating: return "supervised_updating";
        case Mode::Batch: return "batch";
    }
    return "batch";
}

Mode parse_mode(const std::string& name) {
    for (Mode m : {Mode::CoUpdating, Mode::SupervisedUpdating, Mode::Batch}) {
        if (name == mode_name(m)) return m;
    }
    throw ValidationError("unknown mode '" + name + "'");
}

const ConfusionMatrix& Evaluation::at(const std::string& source) const {
    for (std::size_t i = 0; i < sources.size(); ++i) {
        if (sources[i] == source) return confusion[i];
    }
    throw ValidationError("no evaluation for source '" + source + "'");
}

void ExperimentConfig::validate() const {
    engine.validate();
    ratios.validate();
}

namespace {

using PredictFn = std::function<std::map<ChannelId, Prediction>(const MultiModalSequence&)>;

Evaluation evaluate(const PredictFn& predict, const std::map<ChannelId, std::vector<double>>& weights,
                    const std::vector<ChannelId>& channels, std::span<const MultiModalSequence> test,
                    int num_classes) {
    Evaluation ev;
    ev.sources = channels;
    ev.sources.push_back(kFusionSource);
    ev.confusion.assign(ev.sources.size(), ConfusionMatrix(num_classes));
    for (const auto& seq : test) {
        const auto preds = predict(seq);
        const ClassId truth = *seq.true_label;
        for (std::size_t k = 0; k < channels.size(); ++k) ev.confusion[k].add(truth, preds.at(channels[k]).top1);
        ev.confusion.back().add(truth, fuse_predictions(preds, weights).top1);
    }
    return ev;
}

TrendPoint trend_point(const Evaluation& ev, std::size_t update_count) {
    TrendPoint t;
    t.update_count = update_count;
    for (std::size_t k = 0; k + 1 < ev.confusion.size(); ++k) t.channel_accuracy.push_back(ev.confusion[k].accuracy());
    t.fused_accuracy = ev.confusion.back().accuracy();
    return t;
}

std::uint64_t run_classifier_seed(std::uint64_t base, std::uint64_t run_seed) {
    return base * 0x100000001b3ULL + run_seed;
}

}  // namespace

ExperimentReport run_experiment(const Dataset& dataset, Mode mode, const ExperimentConfig& config,
                                std::uint64_t seed) {
    config.validate();
    dataset.validate();
    ExperimentReport report;
    report.mode = mode;
    report.seed = seed;
    report.num_classes = dataset.num_classes;
    report.channels = dataset.channels;
    report.partition = partition_new_person(dataset, config.ratios, seed);
    const Partition& part = report.partition;
    for (const auto& seq : dataset.sequences) {
        if (!seq.true_label) throw ValidationError("experiments need a fully labelled dataset");
    }

    EngineConfig engine_cfg = config.engine;
    engine_cfg.classifier.seed = run_classifier_seed(config.engine.classifier.seed, seed);

    if (mode == Mode::Batch) {
        std::vector<MultiModalSequence> all = part.train;
        all.insert(all.end(), part.update.begin(), part.update.end());
        std::vector<ClassId> labels;
        for (const auto& s : all) labels.push_back(*s.true_label);
        std::map<ChannelId, LinearModel> models;
        std::map<ChannelId, std::vector<double>> weights;
        for (const auto& ch : dataset.channels) {
            std::vector<Features> xs;
            for (const auto& s : all) xs.push_back(s.channel(ch));
            models.emplace(ch, LinearModel::fit(xs, labels, dataset.num_classes, engine_cfg.classifier));
            weights.emplace(ch, compute_channel_weights(ch, all, dataset.num_classes, engine_cfg.weight_folds,
                                                        engine_cfg.classifier, engine_cfg.classifier.seed));
        }
        const PredictFn predict = [&](const MultiModalSequence& seq) {
            std::map<ChannelId, Prediction> out;
            for (const auto& [id, model] : models) out.emplace(id, model.predict_proba(seq.channel(id)));
            return out;
        };
        report.initial = evaluate(predict, weights, dataset.channels, part.test, dataset.num_classes);
        report.final = report.initial;
        report.trend.push_back(trend_point(report.initial, 0));
        return report;
    }

    CoUpdatingEngine engine =
        CoUpdatingEngine::initialize(part.train, dataset.channels, dataset.num_classes, engine_cfg);
    const auto weights = engine.weights();
    const PredictFn predict = [&engine](const MultiModalSequence& seq) { return engine.predict(seq); };

    report.initial = evaluate(predict, weights, dataset.channels, part.test, dataset.num_classes);
    report.trend.push_back(trend_point(report.initial, 0));
    engine.set_update_observer([&](const CoUpdatingEngine& e) {
        const Evaluation ev = evaluate(predict, weights, dataset.channels, part.test, dataset.num_classes);
        report.trend.push_back(trend_point(ev, e.state().update_count));
    });

    std::vector<MultiModalSequence> stream = part.update;
    std::mt19937_64 rng(seed ^ 0x5eed5eed5eedULL);
    std::shuffle(stream.begin(), stream.end(), rng);

    if (mode == Mode::CoUpdating) {
        for (const auto& seq : stream) engine.process_sequence(seq);
    } else {
        for (const auto& seq : stream) engine.process_labeled(seq, *seq.true_label);
    }

    report.final = evaluate(predict, weights, dataset.channels, part.test, dataset.num_classes);
    report.events = engine.events();
    report.left_unlabeled = engine.state().unlabeled.size();
    if (mode == Mode::CoUpdating) {
        std::map<std::string, ClassId> truth;
        for (const auto& s : stream) truth.emplace(s.sequence_id, *s.true_label);
        for (const auto& ev : report.events) {
            if (!ev.decision.label) continue;
            ++report.accepted;
            if (truth.at(ev.sequence_id) != *ev.decision.label) ++report.wrong_labels;
        }
    }
    return report;
}

std::map<std::string, double> scalar_metrics(const ExperimentReport& report) {
    std::map<std::string, double> out;
    for (const auto& [stage, ev] : {std::pair<const char*, const Evaluation*>{"initial", &report.initial},
                                    std::pair<const char*, const Evaluation*>{"final", &report.final}}) {
        for (std::size_t i = 0; i < ev->sources.size(); ++i) {
            const auto pr = precision_recall(ev->confusion[i]);
            const std::string prefix = ev->sources[i] + "." + stage + ".";
            out[prefix + "precision"] = pr.macro_precision;
            out[prefix + "recall"] = pr.macro_recall;
            out[prefix + "accuracy"] = ev->confusion[i].accuracy();
        }
    }
    out["accepted"] = static_cast<double>(report.accepted);
    out["wrong_labels"] = static_cast<double>(report.wrong_labels);
    return out;
}

MetricSummary summarize(std::span<const double> values) {
    MetricSummary s;
    if (values.empty()) return s;
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(sq / (n - 1.0));
    }
    return s;
}

std::vector<RepeatedReport> run_repeated(const Dataset& dataset, std::span<const Mode> modes,
                                         const ExperimentConfig& config, int repetitions,
                                         std::uint64_t base_seed, int jobs) {
    if (repetitions < 1) throw ValidationError("repetitions must be at least 1");
    if (modes.empty()) throw ValidationError("no modes requested");
    config.validate();

    const std::size_t reps = static_cast<std::size_t>(repetitions);
    const std::size_t tasks = modes.size() * reps;
    std::vector<ExperimentReport> results(tasks);
    std::vector<std::exception_ptr> errors(tasks);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks; t = next++) {
            try {
                results[t] = run_experiment(dataset, modes[t / reps], config, base_seed + t % reps);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, tasks);
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    std::vector<RepeatedReport> out;
    for (std::size_t m = 0; m < modes.size(); ++m) {
        RepeatedReport rr;
        rr.mode = modes[m];
        std::map<std::string, std::vector<double>> columns;
        for (std::size_t r = 0; r < reps; ++r) {
            rr.runs.push_back(std::move(results[m * reps + r]));
            for (const auto& [key, value] : scalar_metrics(rr.runs.back())) columns[key].push_back(value);
        }
        for (const auto& [key, values] : columns) rr.metrics[key] = summarize(values);
        out.push_back(std::move(rr));
    }
    return out;
}

}  // namespace coupdate
