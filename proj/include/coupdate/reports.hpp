#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>

#include "coupdate/eval.hpp"

namespace coupdate {

// Writes, under `dir`:
//   summary.csv                          one row per (source, mode), averaged
//   <mode>/rep<r>/confusion_<source>_<initial|final>.csv
//   <mode>/rep<r>/per_class.csv          source,stage,class,precision,recall
//   <mode>/rep<r>/trend.csv              update_count,<channels...>,fusion
//   <mode>/rep<r>/events.csv             event log (updating modes)
void write_reports(const std::filesystem::path& dir, std::span<const RepeatedReport> reports);

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& matrix);
void write_trend_csv(std::ostream& out, const std::vector<ChannelId>& channels,
                     const std::vector<TrendPoint>& trend);

// Table with rows source x mode and columns initial/final precision/recall,
// read back from summary.csv.
void print_summary_table(std::ostream& out, const std::filesystem::path& dir);

}  // namespace coupdate
