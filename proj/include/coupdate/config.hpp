#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coupdate/eval.hpp"
#include "coupdate/synthetic.hpp"

namespace coupdate {

// "key = value" lines with flat dotted keys; '#' starts a comment.
class FlatConfig {
public:
    static FlatConfig parse(std::istream& in);
    static FlatConfig load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

private:
    std::map<std::string, std::string> values_;
};

// Everything one `run` or `gen-data` invocation needs. Relative paths are
// resolved against the directory of the configuration file.
struct RunConfig {
    ExperimentConfig experiment;
    std::vector<Mode> modes{Mode::CoUpdating, Mode::SupervisedUpdating, Mode::Batch};
    int repetitions = 7;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::optional<std::filesystem::path> dataset_path;
    std::optional<int> dataset_num_classes;
    StreamConfig generator;
    std::filesystem::path output_dir = "out";
    std::filesystem::path generator_output;

    // Rejects unknown keys and invalid values with ValidationError.
    static RunConfig from_flat(const FlatConfig& flat, const std::filesystem::path& base_dir = {});
    static RunConfig load(const std::filesystem::path& path);

    void validate() const;
};

// Generator used when a configuration names no dataset file: 14 classes,
// 20 subjects, 2 repetitions, two complementary channels.
StreamConfig default_stream_config();

}  // namespace coupdate
