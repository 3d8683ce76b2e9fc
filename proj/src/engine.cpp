#include "coupdate/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "coupdate/csv.hpp"

namespace coupdate {

const char* branch_name(GateBranch branch) {
    switch (branch) {
        case GateBranch::None: return "none";
        case GateBranch::Consensus: return "consensus";
        case GateBranch::Dominance: return "dominance";
        case GateBranch::Supervised: return "supervised";
    }
    return "none";
}

GateDecision assign_class_label(std::span<const ChannelVote> votes, const Thresholds& thresholds,
                                const GateOptions& options) {
    if (votes.empty()) throw ValidationError("the gate needs at least one channel vote");

    double min_cre = thresholds.cre;
    double close = thresholds.close;
    if (options.scale_by_channels) {
        const double n = static_cast<double>(votes.size());
        min_cre *= 2.0 / n;
        close *= n / 2.0;
    }
    auto credible = [&](double cre) { return cre >= min_cre - kThresholdSlack; };

    const bool agree = std::all_of(votes.begin(), votes.end(),
                                   [&](const ChannelVote& v) { return v.top1 == votes.front().top1; });
    if (agree) {
        bool consensus = std::all_of(votes.begin(), votes.end(),
                                     [&](const ChannelVote& v) { return credible(v.cre); });
        for (std::size_t i = 0; consensus && i < votes.size(); ++i) {
            for (std::size_t j = i + 1; j < votes.size(); ++j) {
                if (!(std::abs(votes[i].cre - votes[j].cre) < close - kThresholdSlack)) {
                    consensus = false;
                    break;
                }
            }
        }
        if (consensus) return {votes.front().top1, GateBranch::Consensus};
        if (!options.dominance_when_agree) return {};
    }

    for (std::size_t k = 0; k < votes.size(); ++k) {
        if (!credible(votes[k].cre)) continue;
        bool dominant = true;
        for (std::size_t i = 0; i < votes.size(); ++i) {
            if (i != k && !(std::abs(votes[k].cre - votes[i].cre) >= thresholds.diff - kThresholdSlack)) {
                dominant = false;
                break;
            }
        }
        if (dominant) return {votes[k].top1, GateBranch::Dominance};
    }
    return {};
}

Prediction fuse_predictions(const std::map<ChannelId, Prediction>& predictions,
                            const std::map<ChannelId, std::vector<double>>& weights) {
    if (predictions.empty()) throw ValidationError("fusion needs at least one channel");
    const std::size_t a = predictions.begin()->second.probs.size();
    std::vector<double> weighted(a, 0.0);
    std::vector<double> plain(a, 0.0);
    for (const auto& [id, pred] : predictions) {
        if (pred.probs.size() != a) throw ValidationError("fused predictions disagree on the label set");
        auto w = weights.find(id);
        if (w == weights.end() || w->second.size() != a) {
            throw ValidationError("missing or mis-sized weights for channel '" + id + "'");
        }
        for (std::size_t c = 0; c < a; ++c) {
            weighted[c] += w->second[c] * pred.probs[c];
            plain[c] += pred.probs[c];
        }
    }
    std::vector<double>& fused = std::accumulate(weighted.begin(), weighted.end(), 0.0) > 0.0 ? weighted : plain;
    const double sum = std::accumulate(fused.begin(), fused.end(), 0.0);
    for (double& v : fused) v /= sum;
    return Prediction::from_probabilities(std::move(fused));
}

namespace {

std::vector<int> assign_folds(std::span<const MultiModalSequence> training, int num_classes, int folds,
                              std::uint64_t seed, int& used_folds) {
    std::mt19937_64 rng(seed);
    std::vector<int> fold_of(training.size(), 0);

    std::vector<std::string> subjects;
    for (const auto& s : training) subjects.push_back(s.subject_id);
    std::sort(subjects.begin(), subjects.end());
    subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());

    if (subjects.size() >= 2) {
        used_folds = std::min<int>(folds, static_cast<int>(subjects.size()));
        std::shuffle(subjects.begin(), subjects.end(), rng);
        std::map<std::string, int> subject_fold;
        for (std::size_t i = 0; i < subjects.size(); ++i) {
            subject_fold[subjects[i]] = static_cast<int>(i % static_cast<std::size_t>(used_folds));
        }
        for (std::size_t i = 0; i < training.size(); ++i) fold_of[i] = subject_fold[training[i].subject_id];
        return fold_of;
    }

    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < training.size(); ++i) {
        by_class[static_cast<std::size_t>(*training[i].true_label)].push_back(i);
    }
    std::size_t smallest = training.size();
    for (const auto& members : by_class) smallest = std::min(smallest, members.size());
    used_folds = std::min<int>(folds, static_cast<int>(smallest));
    if (used_folds < 2) {
        used_folds = 1;
        return fold_of;
    }
    for (auto& members : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t r = 0; r < members.size(); ++r) {
            fold_of[members[r]] = static_cast<int>(r % static_cast<std::size_t>(used_folds));
        }
    }
    return fold_of;
}

}  // namespace

std::vector<double> compute_channel_weights(const ChannelId& channel,
                                            std::span<const MultiModalSequence> training,
                                            int num_classes, int folds, const Hyperparams& hp,
                                            std::uint64_t seed) {
    if (folds < 2) throw ValidationError("weight estimation needs at least two folds");
    std::vector<std::size_t> class_count(static_cast<std::size_t>(num_classes), 0);
    for (const auto& s : training) {
        if (!s.true_label) throw ValidationError("weight estimation needs labelled sequences");
        if (*s.true_label < 0 || *s.true_label >= num_classes) throw ValidationError("label out of range");
        ++class_count[static_cast<std::size_t>(*s.true_label)];
    }
    for (std::size_t c = 0; c < class_count.size(); ++c) {
        if (class_count[c] == 0) {
            throw ValidationError("class " + std::to_string(c) + " is absent from the training set");
        }
    }

    int used_folds = 0;
    const std::vector<int> fold_of = assign_folds(training, num_classes, folds, seed, used_folds);

    std::vector<std::size_t> predicted(class_count.size(), 0);
    std::vector<std::size_t> correct(class_count.size(), 0);
    auto tally = [&](const LinearModel& model, std::size_t i) {
        const ClassId p = model.predict(training[i].channel(channel));
        ++predicted[static_cast<std::size_t>(p)];
        if (p == *training[i].true_label) ++correct[static_cast<std::size_t>(p)];
    };

    for (int f = 0; f < used_folds; ++f) {
        std::vector<Features> xs;
        std::vector<ClassId> ys;
        for (std::size_t i = 0; i < training.size(); ++i) {
            if (used_folds == 1 || fold_of[i] != f) {
                xs.push_back(training[i].channel(channel));
                ys.push_back(*training[i].true_label);
            }
        }
        if (std::set<ClassId>(ys.begin(), ys.end()).size() < 2) continue;
        const LinearModel model = LinearModel::fit(xs, ys, num_classes, hp);
        for (std::size_t i = 0; i < training.size(); ++i) {
            if (used_folds == 1 || fold_of[i] == f) tally(model, i);
        }
    }

    std::vector<double> w(class_count.size(), 0.0);
    for (std::size_t c = 0; c < w.size(); ++c) {
        if (predicted[c] > 0) w[c] = static_cast<double>(correct[c]) / static_cast<double>(predicted[c]);
    }
    return w;
}

void EngineConfig::validate() const {
    thresholds.validate();
    classifier.validate();
    if (buffer_max == 0) throw ValidationError("buffer_max must be positive");
    if (max_retry_passes < 0) throw ValidationError("max_retry_passes must be non-negative");
    if (weight_folds < 2) throw ValidationError("weight_folds must be at least 2");
}

std::size_t EngineConfig::class_cap(int num_classes) const {
    if (per_class_cap > 0) return per_class_cap;
    return std::max<std::size_t>(1, buffer_max / static_cast<std::size_t>(num_classes));
}

CoUpdatingEngine::CoUpdatingEngine(EngineState state) : state_(std::move(state)) {
    state_.config.validate();
    if (state_.channels.empty()) throw ValidationError("engine needs at least one channel");
    for (const auto& ch : state_.channels) {
        if (!ch.model.fitted()) throw ValidationError("channel '" + ch.id + "' has an unfitted classifier");
        if (ch.model.num_classes() != state_.num_classes ||
            ch.weights.size() != static_cast<std::size_t>(state_.num_classes)) {
            throw ValidationError("channel '" + ch.id + "' disagrees on the label set");
        }
    }
}

CoUpdatingEngine CoUpdatingEngine::initialize(std::span<const MultiModalSequence> training,
                                              std::vector<ChannelId> channels, int num_classes,
                                              const EngineConfig& config) {
    config.validate();
    EngineState state;
    state.num_classes = num_classes;
    state.config = config;
    std::vector<ClassId> labels;
    for (const auto& s : training) {
        if (!s.true_label) throw ValidationError("training sequence '" + s.sequence_id + "' is unlabelled");
        labels.push_back(*s.true_label);
    }
    for (const auto& id : channels) {
        ChannelState ch;
        ch.id = id;
        std::vector<Features> xs;
        for (const auto& s : training) xs.push_back(s.channel(id));
        ch.model = LinearModel::fit(xs, labels, num_classes, config.classifier);
        ch.weights = compute_channel_weights(id, training, num_classes, config.weight_folds,
                                             config.classifier, config.classifier.seed);
        ch.buffer = LabeledBuffer(config.buffer_max, config.class_cap(num_classes), num_classes);
        for (std::size_t i = 0; i < xs.size(); ++i) ch.buffer.add_pinned(std::move(xs[i]), labels[i]);
        state.channels.push_back(std::move(ch));
    }
    return CoUpdatingEngine(std::move(state));
}

std::map<ChannelId, Prediction> CoUpdatingEngine::predict(const MultiModalSequence& seq) const {
    std::map<ChannelId, Prediction> out;
    for (const auto& ch : state_.channels) {
        Prediction p = ch.model.predict_proba(seq.channel(ch.id));
        p.cre = credibility(p.doc, ch.weights[static_cast<std::size_t>(p.top1)]);
        out.emplace(ch.id, std::move(p));
    }
    return out;
}

std::map<ChannelId, std::vector<double>> CoUpdatingEngine::weights() const {
    std::map<ChannelId, std::vector<double>> out;
    for (const auto& ch : state_.channels) out.emplace(ch.id, ch.weights);
    return out;
}

Prediction CoUpdatingEngine::predict_fused(const MultiModalSequence& seq) const {
    return fuse_predictions(predict(seq), weights());
}

std::vector<ChannelVote> CoUpdatingEngine::votes(const std::map<ChannelId, Prediction>& preds) const {
    std::vector<ChannelVote> out;
    for (const auto& ch : state_.channels) {
        const Prediction& p = preds.at(ch.id);
        out.push_back({p.top1, p.cre});
    }
    return out;
}

GateDecision CoUpdatingEngine::assign_class_label(const MultiModalSequence& seq) const {
    return coupdate::assign_class_label(votes(predict(seq)), state_.config.thresholds, state_.config.gate);
}

void CoUpdatingEngine::accept(const MultiModalSequence& seq, ClassId label,
                              const std::map<ChannelId, Prediction>& preds) {
    for (auto& ch : state_.channels) {
        ch.buffer.insert(seq.channel(ch.id), label, preds.at(ch.id).doc);
        ch.new_template = true;
    }
}

void CoUpdatingEngine::update_classifiers() {
    for (auto& ch : state_.channels) {
        if (!ch.new_template) continue;
        const std::vector<Features> xs = ch.buffer.samples();
        const std::vector<ClassId> ys = ch.buffer.labels();
        ch.model.partial_fit(xs, ys);
        ch.new_template = false;
    }
    ++state_.update_count;
    if (observer_) observer_(*this);
}

void CoUpdatingEngine::record(const std::string& sequence_id, const GateDecision& decision, bool retry,
                              const std::map<ChannelId, Prediction>& preds) {
    SequenceEvent ev;
    ev.sequence_id = sequence_id;
    ev.decision = decision;
    ev.retry = retry;
    for (const auto& ch : state_.channels) {
        ev.top1.push_back(preds.at(ch.id).top1);
        ev.cre.push_back(preds.at(ch.id).cre);
        ev.buffer_sizes.push_back(ch.buffer.size());
    }
    ev.update_count = state_.update_count;
    events_.push_back(std::move(ev));
}

GateDecision CoUpdatingEngine::process_sequence(MultiModalSequence seq) {
    seq.true_label.reset();
    const auto preds = predict(seq);
    const GateDecision decision =
        coupdate::assign_class_label(votes(preds), state_.config.thresholds, state_.config.gate);
    if (!decision.label) {
        record(seq.sequence_id, decision, false, preds);
        state_.unlabeled.push_back(std::move(seq));
        return decision;
    }
    accept(seq, *decision.label, preds);
    update_classifiers();
    record(seq.sequence_id, decision, false, preds);
    retry_unlabeled();
    return decision;
}

void CoUpdatingEngine::process_labeled(const MultiModalSequence& seq, ClassId label) {
    if (label < 0 || label >= state_.num_classes) throw ValidationError("label out of range");
    const auto preds = predict(seq);
    accept(seq, label, preds);
    update_classifiers();
    record(seq.sequence_id, {label, GateBranch::Supervised}, false, preds);
}

std::size_t CoUpdatingEngine::retry_unlabeled() {
    std::size_t accepted = 0;
    for (int pass = 0; pass < state_.config.max_retry_passes; ++pass) {
        std::size_t accepted_this_pass = 0;
        for (auto it = state_.unlabeled.begin(); it != state_.unlabeled.end();) {
            const auto preds = predict(*it);
            const GateDecision decision =
                coupdate::assign_class_label(votes(preds), state_.config.thresholds, state_.config.gate);
            if (!decision.label) {
                ++it;
                continue;
            }
            MultiModalSequence seq = std::move(*it);
            it = state_.unlabeled.erase(it);
            accept(seq, *decision.label, preds);
            update_classifiers();
            record(seq.sequence_id, decision, true, preds);
            ++accepted_this_pass;
        }
        accepted += accepted_this_pass;
        if (accepted_this_pass == 0) break;
    }
    return accepted;
}

void write_event_log(std::ostream& out, const std::vector<ChannelId>& channels,
                     const std::vector<SequenceEvent>& events) {
    out << "sequence_id,decision,branch,retry";
    for (const char* prefix : {"top1_", "cre_", "buffer_"}) {
        for (const auto& ch : channels) out << ',' << prefix << ch;
    }
    out << ",update_count\n";
    for (const auto& ev : events) {
        out << ev.sequence_id << ',' << (ev.decision.label ? std::to_string(*ev.decision.label) : "NONE")
            << ',' << branch_name(ev.decision.branch) << ',' << (ev.retry ? 1 : 0);
        for (ClassId c : ev.top1) out << ',' << c;
        for (double c : ev.cre) out << ',' << format_number(c);
        for (std::size_t b : ev.buffer_sizes) out << ',' << b;
        out << ',' << ev.update_count << '\n';
    }
}

void to_json(Json& j, const EngineConfig& c) {
    j = Json{{"thresholds", c.thresholds},
             {"dominance_when_agree", c.gate.dominance_when_agree},
             {"scale_by_channels", c.gate.scale_by_channels},
             {"buffer_max", c.buffer_max},
             {"per_class_cap", c.per_class_cap},
             {"max_retry_passes", c.max_retry_passes},
             {"weight_folds", c.weight_folds},
             {"classifier", c.classifier}};
}

void from_json(const Json& j, EngineConfig& c) {
    j.at("thresholds").get_to(c.thresholds);
    j.at("dominance_when_agree").get_to(c.gate.dominance_when_agree);
    j.at("scale_by_channels").get_to(c.gate.scale_by_channels);
    j.at("buffer_max").get_to(c.buffer_max);
    j.at("per_class_cap").get_to(c.per_class_cap);
    j.at("max_retry_passes").get_to(c.max_retry_passes);
    j.at("weight_folds").get_to(c.weight_folds);
    j.at("classifier").get_to(c.classifier);
}

void to_json(Json& j, const EngineState& s) {
    Json channels = Json::array();
    for (const auto& ch : s.channels) {
        channels.push_back(Json{{"id", ch.id},
                                {"weights", ch.weights},
                                {"new_template", ch.new_template},
                                {"model", ch.model},
                                {"buffer", ch.buffer}});
    }
    Json unlabeled = Json::array();
    for (const auto& seq : s.unlabeled) unlabeled.push_back(seq);
    j = Json{{"num_classes", s.num_classes},
             {"update_count", s.update_count},
             {"config", s.config},
             {"channels", std::move(channels)},
             {"unlabeled", std::move(unlabeled)}};
}

void from_json(const Json& j, EngineState& s) {
    j.at("num_classes").get_to(s.num_classes);
    j.at("update_count").get_to(s.update_count);
    j.at("config").get_to(s.config);
    s.channels.clear();
    for (const auto& c : j.at("channels")) {
        ChannelState ch;
        c.at("id").get_to(ch.id);
        c.at("weights").get_to(ch.weights);
        c.at("new_template").get_to(ch.new_template);
        c.at("model").get_to(ch.model);
        c.at("buffer").get_to(ch.buffer);
        s.channels.push_back(std::move(ch));
    }
    s.unlabeled.clear();
    for (const auto& u : j.at("unlabeled")) s.unlabeled.push_back(u.get<MultiModalSequence>());
}

void CoUpdatingEngine::save_checkpoint(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << Json(state_).dump() << '\n';
}

CoUpdatingEngine CoUpdatingEngine::load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint '" + path.string() + "'");
    try {
        return CoUpdatingEngine(Json::parse(in).get<EngineState>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed checkpoint: ") + e.what());
    }
}

}  // namespace coupdate
