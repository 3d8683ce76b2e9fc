#include "coupdate/commands.hpp"

#include <ostream>

#include "coupdate/config.hpp"
#include "coupdate/dataset.hpp"
#include "coupdate/reports.hpp"

namespace coupdate {

std::filesystem::path cmd_gen_data(const std::filesystem::path& config_path, const RunOverrides& overrides,
                                   std::ostream& log) {
    RunConfig rc = RunConfig::load(config_path);
    if (overrides.seed) rc.generator.seed = *overrides.seed;
    rc.generator.validate();
    const auto path = overrides.out.value_or(rc.generator_output);
    const Dataset ds = generate(rc.generator);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    write_dataset(path, ds);
    log << "wrote " << ds.sequences.size() << " sequences to " << path.string() << '\n';
    return path;
}

std::filesystem::path cmd_run(const std::filesystem::path& config_path, const RunOverrides& overrides,
                              std::ostream& log) {
    RunConfig rc = RunConfig::load(config_path);
    if (overrides.seed) rc.seed = *overrides.seed;
    if (overrides.jobs) rc.jobs = *overrides.jobs;
    if (overrides.out) rc.output_dir = *overrides.out;
    rc.validate();

    const Dataset ds = rc.dataset_path ? read_dataset(*rc.dataset_path, rc.dataset_num_classes)
                                       : generate(rc.generator);
    log << "dataset: " << ds.sequences.size() << " sequences, " << ds.num_classes << " classes, "
        << ds.channels.size() << " channels\n";
    const auto reports = run_repeated(ds, rc.modes, rc.experiment, rc.repetitions, rc.seed, rc.jobs);
    write_reports(rc.output_dir, reports);
    log << "reports written to " << rc.output_dir.string() << '\n';
    return rc.output_dir;
}

void cmd_report(const std::filesystem::path& run_dir, std::ostream& out) { print_summary_table(out, run_dir); }

}  // namespace coupdate
