#include "coupdate/reports.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "coupdate/csv.hpp"

namespace coupdate {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

double summary_value(const std::string& text) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size()) {
        throw ValidationError("malformed number '" + text + "' in summary.csv");
    }
    return v;
}

const char* kSummaryHeader =
    "source,mode,repetitions,initial_precision,initial_recall,final_precision,final_recall,"
    "initial_accuracy,final_accuracy,initial_precision_sd,initial_recall_sd,final_precision_sd,"
    "final_recall_sd";

}  // namespace

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& m) {
    out << "truth";
    for (ClassId j = 0; j < m.num_classes(); ++j) out << ",pred_" << j;
    out << '\n';
    for (ClassId i = 0; i < m.num_classes(); ++i) {
        out << i;
        for (ClassId j = 0; j < m.num_classes(); ++j) out << ',' << m.at(i, j);
        out << '\n';
    }
}

void write_trend_csv(std::ostream& out, const std::vector<ChannelId>& channels,
                     const std::vector<TrendPoint>& trend) {
    out << "update_count";
    for (const auto& ch : channels) out << ',' << ch;
    out << ',' << kFusionSource << '\n';
    for (const auto& t : trend) {
        out << t.update_count;
        for (double a : t.channel_accuracy) out << ',' << format_number(a);
        out << ',' << format_number(t.fused_accuracy) << '\n';
    }
}

void write_reports(const std::filesystem::path& dir, std::span<const RepeatedReport> reports) {
    std::filesystem::create_directories(dir);
    auto summary = open_out(dir / "summary.csv");
    summary << kSummaryHeader << '\n';

    std::vector<std::string> sources;
    if (!reports.empty() && !reports.front().runs.empty()) sources = reports.front().runs.front().initial.sources;
    for (const auto& source : sources) {
        for (const auto& rr : reports) {
            auto metric = [&](const std::string& key) -> const MetricSummary& { return rr.metrics.at(source + "." + key); };
            summary << source << ',' << mode_name(rr.mode) << ',' << rr.runs.size();
            for (const char* key : {"initial.precision", "initial.recall", "final.precision", "final.recall",
                                    "initial.accuracy", "final.accuracy"}) {
                summary << ',' << format_number(metric(key).mean);
            }
            for (const char* key : {"initial.precision", "initial.recall", "final.precision", "final.recall"}) {
                summary << ',' << format_number(metric(key).stddev);
            }
            summary << '\n';
        }
    }

    for (const auto& rr : reports) {
        for (std::size_t r = 0; r < rr.runs.size(); ++r) {
            const ExperimentReport& run = rr.runs[r];
            const auto run_dir = dir / mode_name(rr.mode) / ("rep" + std::to_string(r));
            std::filesystem::create_directories(run_dir);

            auto per_class = open_out(run_dir / "per_class.csv");
            per_class << "source,stage,class,precision,recall\n";
            for (const auto& [stage, ev] : {std::pair<const char*, const Evaluation*>{"initial", &run.initial},
                                            std::pair<const char*, const Evaluation*>{"final", &run.final}}) {
                for (std::size_t i = 0; i < ev->sources.size(); ++i) {
                    auto out = open_out(run_dir / ("confusion_" + ev->sources[i] + "_" + stage + ".csv"));
                    write_confusion_csv(out, ev->confusion[i]);
                    const auto pr = precision_recall(ev->confusion[i]);
                    for (std::size_t c = 0; c < pr.per_class.size(); ++c) {
                        per_class << ev->sources[i] << ',' << stage << ',' << c << ','
                                  << format_number(pr.per_class[c].precision) << ','
                                  << format_number(pr.per_class[c].recall) << '\n';
                    }
                }
            }
            auto trend = open_out(run_dir / "trend.csv");
            write_trend_csv(trend, run.channels, run.trend);
            if (run.mode != Mode::Batch) {
                auto events = open_out(run_dir / "events.csv");
                write_event_log(events, run.channels, run.events);
            }
        }
    }
}

void print_summary_table(std::ostream& out, const std::filesystem::path& dir) {
    const auto path = dir / "summary.csv";
    if (!std::filesystem::exists(path)) {
        throw ValidationError("'" + dir.string() + "' holds no summary.csv");
    }
    const auto rows = read_csv(path);
    if (rows.empty() || rows.front().size() < 7) throw ValidationError("malformed summary.csv");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size()) throw ValidationError("malformed summary.csv row");
    }

    char line[256];
    std::snprintf(line, sizeof(line), "%-12s %-20s | %-22s | %-22s\n", "", "", "Initial templates",
                  "Final templates");
    out << line;
    std::snprintf(line, sizeof(line), "%-12s %-20s | %-10s %-11s | %-10s %-11s\n", "source", "mode",
                  "Precision", "Recall", "Precision", "Recall");
    out << line << std::string(82, '-') << '\n';
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        double v[4];
        for (std::size_t k = 0; k < 4; ++k) v[k] = summary_value(r[3 + k]);
        std::snprintf(line, sizeof(line), "%-12s %-20s | %-10.4f %-11.4f | %-10.4f %-11.4f\n", r[0].c_str(),
                      r[1].c_str(), v[0], v[1], v[2], v[3]);
        out << line;
    }
}

}  // namespace coupdate
