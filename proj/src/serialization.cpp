#include "coupdate/serialization.hpp"

namespace coupdate {

const char* loss_name(Loss loss) { return loss == Loss::Logistic ? "log" : "hinge"; }

Loss parse_loss(const std::string& name) {
    if (name == "log" || name == "logistic") return Loss::Logistic;
    if (name == "hinge") return Loss::Hinge;
    throw ValidationError("unknown classifier loss '" + name + "'");
}

void to_json(Json& j, const Thresholds& t) {
    j = Json{{"cre", t.cre}, {"close", t.close}, {"diff", t.diff}};
}

void from_json(const Json& j, Thresholds& t) {
    j.at("cre").get_to(t.cre);
    j.at("close").get_to(t.close);
    j.at("diff").get_to(t.diff);
}

void to_json(Json& j, const Prediction& p) {
    j = Json{{"probs", p.probs}, {"top1", p.top1}, {"top2", p.top2}, {"doc", p.doc}, {"cre", p.cre}};
}

void from_json(const Json& j, Prediction& p) {
    j.at("probs").get_to(p.probs);
    j.at("top1").get_to(p.top1);
    j.at("top2").get_to(p.top2);
    j.at("doc").get_to(p.doc);
    j.at("cre").get_to(p.cre);
}

void to_json(Json& j, const Hyperparams& hp) {
    j = Json{{"loss", loss_name(hp.loss)}, {"eta0", hp.eta0},       {"alpha", hp.alpha},
             {"epochs", hp.epochs},        {"partial_passes", hp.partial_passes}, {"seed", hp.seed}};
}

void from_json(const Json& j, Hyperparams& hp) {
    hp.loss = parse_loss(j.at("loss").get<std::string>());
    j.at("eta0").get_to(hp.eta0);
    j.at("alpha").get_to(hp.alpha);
    j.at("epochs").get_to(hp.epochs);
    j.at("partial_passes").get_to(hp.partial_passes);
    j.at("seed").get_to(hp.seed);
}

void to_json(Json& j, const LinearModel& m) {
    if (!m.fitted()) {
        j = nullptr;
        return;
    }
    j = Json{{"num_classes", m.num_classes()},
             {"dim", m.dim()},
             {"steps", m.steps()},
             {"hyperparams", m.hyperparams()},
             {"weights", std::vector<double>(m.weights().begin(), m.weights().end())},
             {"bias", std::vector<double>(m.bias().begin(), m.bias().end())}};
}

void from_json(const Json& j, LinearModel& m) {
    if (j.is_null()) {
        m = LinearModel{};
        return;
    }
    m = LinearModel::from_parameters(j.at("num_classes").get<int>(), j.at("dim").get<std::size_t>(),
                                     j.at("weights").get<std::vector<double>>(),
                                     j.at("bias").get<std::vector<double>>(),
                                     j.at("hyperparams").get<Hyperparams>(),
                                     j.at("steps").get<std::uint64_t>());
}

void to_json(Json& j, const BufferEntry& e) {
    j = Json{{"label", e.label}, {"pinned", e.pinned}, {"doc_at_insert", e.doc_at_insert},
             {"features", e.features}};
}

void from_json(const Json& j, BufferEntry& e) {
    j.at("label").get_to(e.label);
    j.at("pinned").get_to(e.pinned);
    j.at("doc_at_insert").get_to(e.doc_at_insert);
    j.at("features").get_to(e.features);
}

void to_json(Json& j, const LabeledBuffer& b) {
    j = Json{{"capacity", b.capacity()},
             {"per_class_cap", b.per_class_cap()},
             {"num_classes", b.num_classes()},
             {"entries", b.entries()}};
}

void from_json(const Json& j, LabeledBuffer& b) {
    b = LabeledBuffer::restore(j.at("capacity").get<std::size_t>(), j.at("per_class_cap").get<std::size_t>(),
                               j.at("num_classes").get<int>(),
                               j.at("entries").get<std::vector<BufferEntry>>());
}

}  // namespace coupdate
