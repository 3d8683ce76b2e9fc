#include "coupdate/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "coupdate/serialization.hpp"

namespace coupdate {

void to_json(Json& j, const MultiModalSequence& s) {
    j = Json::object();
    j["sequence_id"] = s.sequence_id;
    j["subject_id"] = s.subject_id;
    j["activity_id"] = s.true_label ? Json(*s.true_label) : Json(nullptr);
    Json channels = Json::object();
    for (const auto& [id, values] : s.channels) channels[id] = values;
    j["channels"] = std::move(channels);
}

void from_json(const Json& j, MultiModalSequence& s) {
    s.sequence_id = j.at("sequence_id").get<std::string>();
    s.subject_id = j.at("subject_id").get<std::string>();
    const Json& label = j.at("activity_id");
    s.true_label = label.is_null() ? std::nullopt : std::optional<ClassId>(label.get<ClassId>());
    s.channels.clear();
    for (const auto& [id, values] : j.at("channels").items()) {
        s.channels[id] = values.get<Features>();
    }
}

std::string format_record(const MultiModalSequence& seq) { return Json(seq).dump(); }

MultiModalSequence parse_record(const std::string& line) {
    try {
        return Json::parse(line).get<MultiModalSequence>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed dataset record: ") + e.what());
    }
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
    for (const auto& seq : dataset.sequences) out << format_record(seq) << '\n';
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write_dataset(out, dataset);
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

Dataset read_dataset(std::istream& in, std::optional<int> num_classes) {
    Dataset ds;
    std::string line;
    int max_label = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        MultiModalSequence seq = parse_record(line);
        if (seq.true_label) max_label = std::max(max_label, *seq.true_label);
        if (ds.sequences.empty()) {
            for (const auto& [id, _] : seq.channels) ds.channels.push_back(id);
        } else if (seq.channels.size() != ds.channels.size()) {
            throw ValidationError("sequence '" + seq.sequence_id + "' has a different channel set");
        }
        ds.sequences.push_back(std::move(seq));
    }
    if (ds.sequences.empty()) throw ValidationError("dataset has no records");
    ds.num_classes = num_classes.value_or(max_label + 1);
    ds.validate();
    return ds;
}

Dataset read_dataset(const std::filesystem::path& path, std::optional<int> num_classes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open dataset '" + path.string() + "'");
    return read_dataset(in, num_classes);
}

}  // namespace coupdate
