#include "coupdate/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

namespace coupdate {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ValidationError("config key '" + key + "': cannot parse '" + text + "'");
    }
    return value;
}

const std::set<std::string> kKnownKeys = {
    "thresholds.cre",
    "thresholds.close",
    "thresholds.diff",
    "thresholds.scale_by_channels",
    "gate.dominance_when_agree",
    "buffer.max",
    "buffer.per_class_cap",
    "engine.max_retry_passes",
    "weights.folds",
    "classifier.loss",
    "classifier.eta0",
    "classifier.alpha",
    "classifier.epochs",
    "classifier.partial_passes",
    "classifier.seed",
    "experiment.modes",
    "experiment.repetitions",
    "experiment.seed",
    "experiment.jobs",
    "experiment.ratios",
    "dataset.path",
    "dataset.num_classes",
    "generator.num_classes",
    "generator.num_subjects",
    "generator.repetitions",
    "generator.channels",
    "generator.class_separation",
    "generator.confusable_factor",
    "generator.subject_scale",
    "generator.noise",
    "generator.styles",
    "generator.style_scale",
    "generator.seed",
    "generator.output",
    "output.dir",
};

}  // namespace

FlatConfig FlatConfig::parse(std::istream& in) {
    FlatConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ValidationError("config line " + std::to_string(line_no) + ": empty key");
        if (!cfg.values_.emplace(key, trim(line.substr(eq + 1))).second) {
            throw ValidationError("config key '" + key + "' given twice");
        }
    }
    return cfg;
}

FlatConfig FlatConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
    return parse(in);
}

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_number<double>(key, it->second);
}

long long FlatConfig::get_int(const std::string& key, long long fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_number<long long>(key, it->second);
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ValidationError("config key '" + key + "': expected true or false");
}

std::vector<std::string> FlatConfig::get_list(const std::string& key) const {
    auto it = values_.find(key);
    return it == values_.end() ? std::vector<std::string>{} : split(it->second, ',');
}

StreamConfig default_stream_config() {
    StreamConfig c;
    c.num_classes = 14;
    c.num_subjects = 20;
    c.repetitions = 2;
    c.channels = {
        {"rgb", 16, {{0, 1}, {2, 3}, {4, 5}, {6, 7}}},
        {"skeleton", 16, {{8, 9}, {10, 11}, {12, 13}, {1, 2}}},
    };
    return c;
}

RunConfig RunConfig::from_flat(const FlatConfig& flat, const std::filesystem::path& base_dir) {
    for (const auto& [key, _] : flat.values()) {
        if (!kKnownKeys.count(key) && key.rfind("generator.confusable.", 0) != 0) {
            throw ValidationError("unknown config key '" + key + "'");
        }
    }
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };
    auto non_negative = [&](const std::string& key, long long fallback) {
        const long long v = flat.get_int(key, fallback);
        if (v < 0) throw ValidationError("config key '" + key + "' must be non-negative");
        return v;
    };

    RunConfig rc;
    EngineConfig& e = rc.experiment.engine;
    e.thresholds.cre = flat.get_double("thresholds.cre", e.thresholds.cre);
    e.thresholds.close = flat.get_double("thresholds.close", e.thresholds.close);
    e.thresholds.diff = flat.get_double("thresholds.diff", e.thresholds.diff);
    e.gate.scale_by_channels = flat.get_bool("thresholds.scale_by_channels", e.gate.scale_by_channels);
    e.gate.dominance_when_agree = flat.get_bool("gate.dominance_when_agree", e.gate.dominance_when_agree);
    e.buffer_max = static_cast<std::size_t>(non_negative("buffer.max", static_cast<long long>(e.buffer_max)));
    e.per_class_cap =
        static_cast<std::size_t>(non_negative("buffer.per_class_cap", static_cast<long long>(e.per_class_cap)));
    e.max_retry_passes = static_cast<int>(flat.get_int("engine.max_retry_passes", e.max_retry_passes));
    e.weight_folds = static_cast<int>(flat.get_int("weights.folds", e.weight_folds));
    e.classifier.loss = parse_loss(flat.get_string("classifier.loss", loss_name(e.classifier.loss)));
    e.classifier.eta0 = flat.get_double("classifier.eta0", e.classifier.eta0);
    e.classifier.alpha = flat.get_double("classifier.alpha", e.classifier.alpha);
    e.classifier.epochs = static_cast<int>(flat.get_int("classifier.epochs", e.classifier.epochs));
    e.classifier.partial_passes =
        static_cast<int>(flat.get_int("classifier.partial_passes", e.classifier.partial_passes));
    e.classifier.seed = static_cast<std::uint64_t>(non_negative("classifier.seed", 0));

    if (flat.has("experiment.modes")) {
        rc.modes.clear();
        for (const auto& m : flat.get_list("experiment.modes")) rc.modes.push_back(parse_mode(m));
    }
    rc.repetitions = static_cast<int>(flat.get_int("experiment.repetitions", rc.repetitions));
    rc.seed = static_cast<std::uint64_t>(non_negative("experiment.seed", static_cast<long long>(rc.seed)));
    rc.jobs = static_cast<int>(flat.get_int("experiment.jobs", rc.jobs));
    if (flat.has("experiment.ratios")) {
        const auto parts = flat.get_list("experiment.ratios");
        if (parts.size() != 3) throw ValidationError("experiment.ratios needs three values");
        rc.experiment.ratios = {parse_number<double>("experiment.ratios", parts[0]),
                                parse_number<double>("experiment.ratios", parts[1]),
                                parse_number<double>("experiment.ratios", parts[2])};
    }

    if (flat.has("dataset.path")) rc.dataset_path = resolve(flat.get_string("dataset.path", ""));
    if (flat.has("dataset.num_classes")) {
        rc.dataset_num_classes = static_cast<int>(flat.get_int("dataset.num_classes", 0));
    }

    StreamConfig& g = rc.generator;
    g = default_stream_config();
    g.num_classes = static_cast<int>(flat.get_int("generator.num_classes", g.num_classes));
    g.num_subjects = static_cast<int>(flat.get_int("generator.num_subjects", g.num_subjects));
    g.repetitions = static_cast<int>(flat.get_int("generator.repetitions", g.repetitions));
    g.class_separation = flat.get_double("generator.class_separation", g.class_separation);
    g.confusable_factor = flat.get_double("generator.confusable_factor", g.confusable_factor);
    g.subject_scale = flat.get_double("generator.subject_scale", g.subject_scale);
    g.noise = flat.get_double("generator.noise", g.noise);
    g.styles = static_cast<int>(flat.get_int("generator.styles", g.styles));
    g.style_scale = flat.get_double("generator.style_scale", g.style_scale);
    g.seed = static_cast<std::uint64_t>(non_negative("generator.seed", static_cast<long long>(g.seed)));
    if (flat.has("generator.channels")) {
        g.channels.clear();
        for (const auto& spec : flat.get_list("generator.channels")) {
            const auto colon = spec.find(':');
            if (colon == std::string::npos) {
                throw ValidationError("generator.channels entries look like 'name:dim'");
            }
            SyntheticChannel ch;
            ch.id = trim(spec.substr(0, colon));
            ch.dim = static_cast<std::size_t>(parse_number<long long>("generator.channels", spec.substr(colon + 1)));
            g.channels.push_back(ch);
        }
    }
    for (auto& ch : g.channels) {
        const std::string key = "generator.confusable." + ch.id;
        if (!flat.has(key)) continue;
        ch.confusable.clear();
        for (const auto& pair : flat.get_list(key)) {
            const auto dash = pair.find('-');
            if (dash == std::string::npos) throw ValidationError(key + " entries look like 'a-b'");
            ch.confusable.emplace_back(parse_number<int>(key, pair.substr(0, dash)),
                                       parse_number<int>(key, pair.substr(dash + 1)));
        }
    }
    for (const auto& [key, _] : flat.values()) {
        if (key.rfind("generator.confusable.", 0) != 0) continue;
        const std::string id = key.substr(std::string("generator.confusable.").size());
        if (std::none_of(g.channels.begin(), g.channels.end(), [&](const auto& ch) { return ch.id == id; })) {
            throw ValidationError("'" + key + "' names an unknown generator channel");
        }
    }

    rc.output_dir = resolve(flat.get_string("output.dir", "out"));
    rc.generator_output = flat.has("generator.output") ? resolve(flat.get_string("generator.output", ""))
                                                       : rc.output_dir / "dataset.jsonl";
    rc.validate();
    return rc;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    return from_flat(FlatConfig::load(path), path.parent_path());
}

void RunConfig::validate() const {
    experiment.validate();
    if (modes.empty()) throw ValidationError("experiment.modes is empty");
    if (repetitions < 1) throw ValidationError("experiment.repetitions must be at least 1");
    if (jobs < 1) throw ValidationError("experiment.jobs must be at least 1");
    if (dataset_num_classes && *dataset_num_classes < 2) throw ValidationError("dataset.num_classes must be >= 2");
    if (!dataset_path) generator.validate();
}

}  // namespace coupdate
