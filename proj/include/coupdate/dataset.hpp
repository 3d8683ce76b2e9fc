#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "coupdate/types.hpp"

namespace coupdate {

// Line-delimited JSON, one record per sequence:
//   {"sequence_id":"s01_a03_r0","subject_id":"subj01","activity_id":3,
//    "channels":{"rgb":[...],"skeleton":[...]}}
// activity_id is null for unlabelled sequences. Writing a parsed file back
// reproduces it byte for byte.
std::string format_record(const MultiModalSequence& seq);
MultiModalSequence parse_record(const std::string& line);

void write_dataset(std::ostream& out, const Dataset& dataset);
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);

// num_classes defaults to (largest activity_id + 1). Channels are taken from
// the first record; every record must carry the same set.
Dataset read_dataset(std::istream& in, std::optional<int> num_classes = std::nullopt);
Dataset read_dataset(const std::filesystem::path& path, std::optional<int> num_classes = std::nullopt);

}  // namespace coupdate
