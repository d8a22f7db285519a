#include "gicsel/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "gicsel/errors.hpp"
#include "gicsel/parallel.hpp"

namespace gicsel {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
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

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string model_name(SimModel m) { return m == SimModel::m1 ? "m1" : "m2"; }

} // namespace

void ExperimentConfig::validate() const {
    if (n < 2) throw std::invalid_argument("n must be at least 2");
    if (p < 1) throw std::invalid_argument("p must be at least 1");
    if (model == SimModel::m1 && p < 9) throw std::invalid_argument("the m1 design needs p >= 9");
    if (model == SimModel::m2 && p < 2) throw std::invalid_argument("the m2 design needs p >= 2");
    if (replications < 1) throw std::invalid_argument("replications must be >= 1");
    if (rho_grid.empty()) throw std::invalid_argument("empty rho grid");
    for (double rho : rho_grid)
        if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("rho grid entries must lie in (-1,1)");
    if (procedures.empty()) throw std::invalid_argument("no procedures");
    if (losses.empty()) throw std::invalid_argument("no losses");
    if (penalties.empty()) throw std::invalid_argument("no penalties");
    if (lambda_count < 1) throw std::invalid_argument("lambda_count must be >= 1");
    if (!(lambda_ratio > 0.0 && lambda_ratio < 1.0))
        throw std::invalid_argument("lambda_ratio must lie in (0,1)");
    if (folds < 2) throw std::invalid_argument("folds must be >= 2");
    if (output_dir.empty()) throw std::invalid_argument("output_dir must be set");
}

ExperimentConfig parse_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("missing config file: " + path);
    ExperimentConfig cfg;
    double huber_delta = 0.1;
    std::vector<std::string> loss_names{"logistic"};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw data_error("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "model")
                cfg.model = value == "m1" ? SimModel::m1 : (value == "m2" ? SimModel::m2
                                                                          : throw data_error("bad model"));
            else if (key == "n") cfg.n = std::stoi(value);
            else if (key == "p") cfg.p = std::stoi(value);
            else if (key == "replications") cfg.replications = std::stoi(value);
            else if (key == "rho_grid") {
                cfg.rho_grid.clear();
                for (const auto& tok : split(value, ',')) cfg.rho_grid.push_back(std::stod(tok));
            } else if (key == "procedures") {
                cfg.procedures.clear();
                for (const auto& tok : split(value, ',')) cfg.procedures.push_back(procedure_from_name(tok));
            } else if (key == "penalties") {
                cfg.penalties.clear();
                for (const auto& tok : split(value, ',')) cfg.penalties.push_back(penalty_from_name(tok));
            } else if (key == "losses") {
                loss_names = split(value, ',');
            } else if (key == "huber_delta") huber_delta = std::stod(value);
            else if (key == "base_seed") cfg.base_seed = std::stoll(value);
            else if (key == "lambda_count") cfg.lambda_count = std::stoi(value);
            else if (key == "lambda_ratio") cfg.lambda_ratio = std::stod(value);
            else if (key == "folds") cfg.folds = std::stoi(value);
            else if (key == "ss_lambda") cfg.ss_lambda = std::stod(value);
            else if (key == "output_dir") cfg.output_dir = value;
            else throw data_error("unknown key '" + key + "'");
        } catch (const std::invalid_argument& e) {
            throw data_error("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    cfg.losses.clear();
    for (const auto& name : loss_names) cfg.losses.push_back(loss_from_name(name, huber_delta));
    cfg.validate();
    return cfg;
}

namespace {

struct CellSpec {
    double rho;
    Procedure procedure;
    LossSpec loss;
};

struct PenaltyRecord {
    std::string penalty;
    std::string status; // "ok" or "failed:<reason>"
    ReplicationRecord record;
};

std::string cell_identity(const ExperimentConfig& cfg, const CellSpec& cell) {
    std::string pens;
    for (const auto& pen : cfg.penalties) {
        if (!pens.empty()) pens += ',';
        pens += pen.name();
    }
    std::ostringstream os;
    os << "model=" << model_name(cfg.model) << ";n=" << cfg.n << ";p=" << cfg.p
       << ";L=" << cfg.replications << ";seed=" << cfg.base_seed << ";rho=" << fmt(cell.rho)
       << ";proc=" << procedure_name(cell.procedure) << ";loss=" << cell.loss.name();
    if (cell.loss.kind == LossKind::huber) os << ";delta=" << fmt(cell.loss.delta);
    os << ";pens=" << pens << ";m=" << cfg.lambda_count << ";ratio=" << fmt(cfg.lambda_ratio)
       << ";folds=" << cfg.folds;
    if (cell.procedure == Procedure::ss) os << ";ss_lambda=" << fmt(cfg.ss_lambda);
    return os.str();
}

// Penalty labels a cell reports on: the configured list, or the fixed
// Fan-Tang penalty for the refit-free procedure.
std::vector<std::string> cell_penalty_labels(const ExperimentConfig& cfg, Procedure proc) {
    if (proc == Procedure::lft) return {GicPenalty::fan_tang().name()};
    std::vector<std::string> out;
    out.reserve(cfg.penalties.size());
    for (const auto& pen : cfg.penalties) out.push_back(pen.name());
    return out;
}

std::vector<PenaltyRecord> run_replication(const ExperimentConfig& cfg, const CellSpec& cell,
                                           int k) {
    SimModelSpec sim;
    sim.model = cfg.model;
    sim.n = cfg.n;
    sim.p = cfg.p;
    sim.rho = cell.rho;
    sim.seed = static_cast<std::uint64_t>(cfg.base_seed) + static_cast<std::uint64_t>(k);
    const SolverConfig solver_cfg;

    const std::vector<std::string> labels = cell_penalty_labels(cfg, cell.procedure);
    auto truth_record = [&](const GroundTruth& truth) {
        ReplicationRecord rec;
        rec.true_support = truth.true_support;
        rec.true_direction = truth.padded_direction(cfg.p);
        rec.refit_coefficients = Eigen::VectorXd::Zero(cfg.p);
        return rec;
    };

    std::vector<PenaltyRecord> out;
    GroundTruth truth;
    try {
        auto [data, gt] = generate(sim);
        truth = std::move(gt);
        const Dataset ds = standardize(data);

        std::vector<SelectionOutcome> outcomes;
        if (cell.procedure == Procedure::lft) {
            outcomes.push_back(select_lft(ds, cell.loss, cfg.lambda_count, cfg.lambda_ratio,
                                          solver_cfg));
        } else if (cell.procedure == Procedure::ss) {
            const PenalizedFit fit = fit_lasso(ds, cell.loss, cfg.ss_lambda, solver_cfg);
            const NestedFamily family = nested_from_order(order_support(fit));
            RefitCache cache;
            const auto evaluated = evaluate_family(ds, cell.loss, family, solver_cfg, cache);
            for (const auto& pen : cfg.penalties)
                outcomes.push_back(select_among(evaluated, ds, pen, Procedure::ss));
        } else if (cell.procedure == Procedure::ssnet) {
            const PathResult path = fit_path(ds, cell.loss, cfg.lambda_count, cfg.lambda_ratio,
                                             solver_cfg);
            const NestedFamily family = union_families(path);
            RefitCache cache;
            const auto evaluated = evaluate_family(ds, cell.loss, family, solver_cfg, cache);
            for (const auto& pen : cfg.penalties)
                outcomes.push_back(select_among(evaluated, ds, pen, Procedure::ssnet));
        } else { // sscv: the lambda choice is penalty-free, share everything after it
            const PathResult path = fit_path(ds, cell.loss, cfg.lambda_count, cfg.lambda_ratio,
                                             solver_cfg);
            std::vector<double> grid;
            for (const auto& fit : path.fits) grid.push_back(fit.lambda);
            const auto fold_ids = cv_fold_assignment(cfg.n, cfg.folds, sim.seed);
            const CvCurve curve = cv_risk_curve(ds, cell.loss, grid, fold_ids, solver_cfg);
            const std::size_t chosen = pick_lambda_1se(curve);
            const NestedFamily family = nested_from_order(order_support(path.fits[chosen]));
            RefitCache cache;
            const auto evaluated = evaluate_family(ds, cell.loss, family, solver_cfg, cache);
            for (const auto& pen : cfg.penalties)
                outcomes.push_back(select_among(evaluated, ds, pen, Procedure::sscv));
        }

        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            const SelectionOutcome& oc = outcomes[i];
            PenaltyRecord pr;
            pr.penalty = labels[i];
            pr.status = oc.failure.empty() ? "ok" : "failed:" + oc.failure;
            pr.record = truth_record(truth);
            pr.record.selected = oc.selected;
            for (const auto& [set, value] : oc.gic_table)
                pr.record.family_contained_truth =
                    pr.record.family_contained_truth || set == truth.true_support;
            if (oc.failure.empty()) {
                auto [b0, coefs] =
                    destandardize_coefficients(ds, oc.refit.intercept, oc.refit.coefficients);
                (void)b0;
                pr.record.refit_coefficients = std::move(coefs);
            }
            out.push_back(std::move(pr));
        }
    } catch (const std::exception& e) {
        // record-and-continue policy: a failed replication must not kill a sweep
        out.clear();
        if (truth.true_support.empty()) {
            truth.true_support = cfg.model == SimModel::m1 ? PredictorSet({6, 7, 8, 9})
                                                           : PredictorSet({1, 2});
            truth.true_direction = cfg.model == SimModel::m1
                                       ? Eigen::VectorXd(Eigen::Vector4d(3, 3, 1, 1))
                                       : Eigen::VectorXd(Eigen::Vector2d(1, 1));
        }
        for (const auto& label : labels) {
            PenaltyRecord pr;
            pr.penalty = label;
            pr.status = std::string("failed:") + e.what();
            pr.record = truth_record(truth);
            out.push_back(std::move(pr));
        }
    }
    return out;
}

std::string report_header() {
    return "model,n,p,rho,procedure,penalty,loss,l,p_inc,p_equal,p_supset,angle,"
           "se_p_inc,se_p_equal,se_p_supset";
}

std::string row_to_csv(const ReportRow& r) {
    std::ostringstream os;
    os << r.model << ',' << r.n << ',' << r.p << ',' << fmt(r.rho) << ',' << r.procedure << ','
       << r.penalty << ',' << r.loss << ',' << r.l << ',' << fmt(r.p_inc) << ',' << fmt(r.p_equal)
       << ',' << fmt(r.p_supset) << ',' << fmt(r.angle) << ',' << fmt(r.se_p_inc) << ','
       << fmt(r.se_p_equal) << ',' << fmt(r.se_p_supset);
    return os.str();
}

ReportRow row_from_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 15) throw data_error("malformed report row: " + line);
    ReportRow r;
    r.model = cells[0];
    r.n = std::stoi(cells[1]);
    r.p = std::stoi(cells[2]);
    r.rho = std::stod(cells[3]);
    r.procedure = cells[4];
    r.penalty = cells[5];
    r.loss = cells[6];
    r.l = std::stoi(cells[7]);
    r.p_inc = std::stod(cells[8]);
    r.p_equal = std::stod(cells[9]);
    r.p_supset = std::stod(cells[10]);
    r.angle = std::stod(cells[11]);
    r.se_p_inc = std::stod(cells[12]);
    r.se_p_equal = std::stod(cells[13]);
    r.se_p_supset = std::stod(cells[14]);
    return r;
}

} // namespace

std::vector<ReportRow> load_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("missing report file: " + path);
    std::string line;
    if (!std::getline(in, line) || trim(line) != report_header())
        throw data_error("unexpected report header in " + path);
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        rows.push_back(row_from_csv(trim(line)));
    }
    return rows;
}

void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open for writing: " + path);
    out << report_header() << '\n';
    for (const auto& r : rows) out << row_to_csv(r) << '\n';
    if (!out) throw data_error("write failed: " + path);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads, bool dry_run,
                                std::ostream& log) {
    cfg.validate();

    std::vector<CellSpec> cells;
    for (const auto& loss : cfg.losses)
        for (double rho : cfg.rho_grid)
            for (Procedure proc : cfg.procedures) cells.push_back({rho, proc, loss});

    if (dry_run) {
        const std::size_t per_loss =
            cfg.rho_grid.size() * static_cast<std::size_t>(cfg.replications) * cfg.procedures.size();
        log << "plan: " << cells.size() << " cells ("
            << cfg.rho_grid.size() << " rho x " << cfg.procedures.size() << " procedures x "
            << cfg.losses.size() << " losses), " << cfg.replications << " replications each\n";
        log << "plan: " << per_loss << " replication runs per loss, "
            << per_loss * cfg.losses.size() << " total\n";
        return {};
    }

    namespace fs = std::filesystem;
    const fs::path out_dir(cfg.output_dir);
    const fs::path cell_dir = out_dir / "cells";
    try {
        fs::create_directories(cell_dir);
    } catch (const fs::filesystem_error& e) {
        throw data_error("cannot create output directory: " + std::string(e.what()));
    }

    ExperimentResult result;
    for (const CellSpec& cell : cells) {
        const std::string identity = cell_identity(cfg, cell);
        const std::string hash = hex64(fnv1a64(identity));
        const fs::path report_path = cell_dir / (hash + ".report.csv");
        const fs::path reps_path = cell_dir / (hash + ".reps.csv");

        if (fs::exists(report_path)) {
            try {
                auto rows = load_report_csv(report_path.string());
                log << "cell " << hash << " [" << identity << "]: resumed (" << rows.size()
                    << " rows)\n";
                result.rows.insert(result.rows.end(), rows.begin(), rows.end());
                continue;
            } catch (const std::exception& e) {
                log << "cell " << hash << ": cached report unreadable (" << e.what()
                    << "), recomputing\n";
            }
        }

        const std::vector<std::string> labels = cell_penalty_labels(cfg, cell.procedure);
        std::vector<std::vector<PenaltyRecord>> per_rep(
            static_cast<std::size_t>(cfg.replications));
        parallel_for(cfg.replications, threads,
                     [&](int k) { per_rep[static_cast<std::size_t>(k)] = run_replication(cfg, cell, k); });

        // per-replication audit file
        {
            std::ofstream reps(reps_path);
            reps << "k,penalty,status,selected,family_contained_truth,equal,supset,angle\n";
            for (int k = 0; k < cfg.replications; ++k) {
                for (const auto& pr : per_rep[static_cast<std::size_t>(k)]) {
                    const auto& rec = pr.record;
                    std::string sel = rec.selected.to_string();
                    std::replace(sel.begin(), sel.end(), ',', ';');
                    reps << k << ',' << pr.penalty << ',' << pr.status << ',' << sel << ','
                         << (rec.family_contained_truth ? 1 : 0) << ','
                         << (rec.selected == rec.true_support ? 1 : 0) << ','
                         << (rec.selected.superset_of(rec.true_support) ? 1 : 0) << ','
                         << fmt(angle_statistic(rec.true_direction, rec.refit_coefficients))
                         << '\n';
                }
            }
        }

        std::vector<ReportRow> cell_rows;
        for (const std::string& label : labels) {
            std::vector<ReplicationRecord> records;
            records.reserve(static_cast<std::size_t>(cfg.replications));
            for (int k = 0; k < cfg.replications; ++k)
                for (const auto& pr : per_rep[static_cast<std::size_t>(k)])
                    if (pr.penalty == label) records.push_back(pr.record);
            const ExperimentReport report = aggregate(records);
            ReportRow row;
            row.model = model_name(cfg.model);
            row.n = cfg.n;
            row.p = cfg.p;
            row.rho = cell.rho;
            row.procedure = procedure_name(cell.procedure);
            row.penalty = label;
            row.loss = cell.loss.name();
            row.l = report.l;
            row.p_inc = report.p_inc;
            row.p_equal = report.p_equal;
            row.p_supset = report.p_supset;
            row.angle = report.angle;
            row.se_p_inc = binomial_se(report.p_inc, report.l);
            row.se_p_equal = binomial_se(report.p_equal, report.l);
            row.se_p_supset = binomial_se(report.p_supset, report.l);
            cell_rows.push_back(std::move(row));
        }
        write_report_csv(cell_rows, report_path.string());
        log << "cell " << hash << " [" << identity << "]: done\n";
        result.rows.insert(result.rows.end(), cell_rows.begin(), cell_rows.end());
    }

    write_report_csv(result.rows, (out_dir / "reports.csv").string());
    return result;
}

void emit_plot_data(const std::vector<ReportRow>& rows, const std::string& measure,
                    std::ostream& out) {
    if (measure != "p_inc" && measure != "p_equal" && measure != "p_supset" && measure != "angle")
        throw std::invalid_argument("unknown measure: " + measure);
    std::vector<ReportRow> sorted = rows;
    std::stable_sort(sorted.begin(), sorted.end(), [](const ReportRow& a, const ReportRow& b) {
        return std::tie(a.model, a.procedure, a.penalty, a.loss, a.rho) <
               std::tie(b.model, b.procedure, b.penalty, b.loss, b.rho);
    });
    out << "model,procedure,penalty,loss,rho,value,se\n";
    for (const auto& r : sorted) {
        double value = 0.0, se = 0.0;
        if (measure == "p_inc") {
            value = r.p_inc;
            se = r.se_p_inc;
        } else if (measure == "p_equal") {
            value = r.p_equal;
            se = r.se_p_equal;
        } else if (measure == "p_supset") {
            value = r.p_supset;
            se = r.se_p_supset;
        } else {
            value = r.angle;
            se = 0.0; // angle SE not tracked; the P-statistics carry binomial SEs
        }
        out << r.model << ',' << r.procedure << ',' << r.penalty << ',' << r.loss << ','
            << fmt(r.rho) << ',' << fmt(value) << ',' << fmt(se) << '\n';
    }
}

} // namespace gicsel
