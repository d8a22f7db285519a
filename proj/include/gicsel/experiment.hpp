#ifndef GICSEL_EXPERIMENT_HPP
#define GICSEL_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gicsel/gic.hpp"
#include "gicsel/metrics.hpp"
#include "gicsel/sim.hpp"

namespace gicsel {

/// Full sweep description: one model at fixed (n, p), a rho grid, and the
/// cross product of procedures, penalties and losses, L replications each.
struct ExperimentConfig {
    SimModel model = SimModel::m2;
    int n = 500;
    int p = 150;
    int replications = 100;
    std::vector<double> rho_grid{0.0};
    std::vector<Procedure> procedures{Procedure::ssnet};
    std::vector<GicPenalty> penalties{GicPenalty::ebic1()};
    std::vector<LossSpec> losses{LossSpec::logistic()};
    std::int64_t base_seed = 1;
    int lambda_count = 20;
    double lambda_ratio = 0.01;
    int folds = 10;
    double ss_lambda = 0.1; // used only when procedures include ss
    std::string output_dir = "experiment_out";

    void validate() const;
};

ExperimentConfig parse_experiment_config(const std::string& path);

struct ReportRow {
    std::string model;
    int n = 0, p = 0;
    double rho = 0.0;
    std::string procedure, penalty, loss;
    int l = 0;
    double p_inc = 0.0, p_equal = 0.0, p_supset = 0.0, angle = 0.0;
    double se_p_inc = 0.0, se_p_equal = 0.0, se_p_supset = 0.0;
};

struct ExperimentResult {
    std::vector<ReportRow> rows;
};

/// Runs (or resumes) the sweep. Completed cells are detected by the content
/// hash of their configuration and skipped. Writes cells/<hash>.*.csv, a
/// combined reports.csv, and returns all rows. dry_run only prints the plan.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads, bool dry_run,
                                std::ostream& log);

/// Long-format projection of the report rows for one measure, directly
/// plottable: model, procedure, penalty, loss, rho, value, se.
void emit_plot_data(const std::vector<ReportRow>& rows, const std::string& measure,
                    std::ostream& out);

std::vector<ReportRow> load_report_csv(const std::string& path);
void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path);

} // namespace gicsel

#endif
