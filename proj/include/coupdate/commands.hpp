#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace coupdate {

struct RunOverrides {
    std::optional<std::filesystem::path> out;
    std::optional<int> jobs;
    std::optional<std::uint64_t> seed;
};

// Generates the synthetic dataset described by the configuration and writes
// it to overrides.out (or generator.output). Returns the path written.
std::filesystem::path cmd_gen_data(const std::filesystem::path& config_path, const RunOverrides& overrides,
                                   std::ostream& log);

// Runs every configured mode and repetition and writes the CSV reports.
// Returns the output directory.
std::filesystem::path cmd_run(const std::filesystem::path& config_path, const RunOverrides& overrides,
                              std::ostream& log);

void cmd_report(const std::filesystem::path& run_dir, std::ostream& out);

}  // namespace coupdate
