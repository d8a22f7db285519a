#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include "gicsel/errors.hpp"
#include "gicsel/experiment.hpp"
#include "gicsel/gic.hpp"
#include "gicsel/theory.hpp"

namespace {

using namespace gicsel;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open for writing: " + path);
    return out;
}

int run_simulate(const std::string& model, int n, int p, double rho, std::uint64_t seed,
                 const std::string& output) {
    SimModelSpec spec;
    spec.model = model == "m1" ? SimModel::m1 : SimModel::m2;
    spec.n = n;
    spec.p = p;
    spec.rho = rho;
    spec.seed = seed;
    auto [data, truth] = generate(spec);
    write_csv(data, output);
    std::cout << "wrote " << output << " (n=" << data.n() << ", p=" << data.p()
              << ", true support " << truth.true_support.to_string() << ")\n";
    return 0;
}

int run_path(const std::string& input, const std::string& response, const LossSpec& loss, int m,
             double ratio, const std::string& output) {
    const Dataset raw = load_csv(input, response);
    const Dataset data = standardize(raw);
    const SolverConfig cfg;
    const PathResult path = fit_path(data, loss, m, ratio, cfg);
    auto out = open_out(output);
    out << "lambda,support_size,objective,intercept";
    for (Eigen::Index j = 0; j < data.p(); ++j) out << ",x" << (j + 1);
    out << '\n';
    for (const PenalizedFit& fit : path.fits) {
        auto [b0, coefs] = destandardize_coefficients(data, fit.intercept, fit.coefficients);
        out << fmt(fit.lambda) << ',' << fit.support().size() << ',' << fmt(fit.objective) << ','
            << fmt(b0);
        for (Eigen::Index j = 0; j < coefs.size(); ++j) out << ',' << fmt(coefs[j]);
        out << '\n';
    }
    std::cout << "wrote " << output << " (" << path.fits.size() << " lambda values)\n";
    return 0;
}

int run_select(const std::string& input, const std::string& response, const std::string& proc,
               const std::string& penalty, const LossSpec& loss, double lambda, int folds, int m,
               double ratio, std::uint64_t seed, const std::string& output) {
    const Dataset raw = load_csv(input, response);
    const Dataset data = standardize(raw);
    const SolverConfig cfg;
    const Procedure procedure = procedure_from_name(proc);
    const GicPenalty pen = penalty_from_name(penalty);
    SelectionOutcome outcome;
    switch (procedure) {
    case Procedure::ss: outcome = select_ss(data, loss, lambda, pen, cfg); break;
    case Procedure::ssnet: outcome = select_ssnet(data, loss, m, ratio, pen, cfg); break;
    case Procedure::sscv: outcome = select_sscv(data, loss, folds, m, ratio, pen, cfg, seed); break;
    case Procedure::lft: outcome = select_lft(data, loss, m, ratio, cfg); break;
    }
    if (!outcome.failure.empty()) {
        std::cerr << "selection failed: " << outcome.failure << '\n';
        return 3;
    }
    auto [b0, coefs] = destandardize_coefficients(data, outcome.refit.intercept,
                                                  outcome.refit.coefficients);
    std::cout << "selected: {" << outcome.selected.to_string() << "}\n";
    std::cout << "intercept: " << fmt(b0) << '\n';
    for (int j : outcome.selected.indices())
        std::cout << "x" << j << ": " << fmt(coefs[j - 1]) << '\n';
    if (!output.empty()) {
        auto out = open_out(output);
        out << "model,size,gic\n";
        for (const auto& [set, value] : outcome.gic_table) {
            std::string s = set.to_string();
            std::replace(s.begin(), s.end(), ',', ';');
            out << s << ',' << set.size() << ',' << fmt(value) << '\n';
        }
        std::cout << "wrote GIC table to " << output << '\n';
    }
    return 0;
}

int run_theory_check(const std::string& check, const std::string& model, int n, int p, double rho,
                     std::uint64_t seed, const LossSpec& loss, const TheoryCheckConfig& tcfg,
                     double lambda, int replications, double sigma, double m_bound,
                     const std::vector<double>& t_grid, int probes, double kappa_epsilon,
                     const std::string& output) {
    SimModelSpec sim;
    sim.model = model == "m1" ? SimModel::m1 : SimModel::m2;
    sim.n = n;
    sim.p = p;
    sim.rho = rho;
    sim.seed = seed;

    std::string row;
    if (check == "tail-s" || check == "tail-s1" || check == "tail-s2") {
        const SupRegion region = sup_region_from_name(check.substr(5));
        const TailCheck tc = check_tail_bound(loss, sim, tcfg, region);
        row = check + "," + fmt(tc.empirical) + "," + fmt(tc.bound) + "," + fmt(tc.se) + "," +
              (tc.pass ? "1" : "0");
    } else if (check == "separation") {
        const double fraction = check_separation(loss, sim, lambda, replications);
        row = "separation," + fmt(fraction) + ",," +
              fmt(std::sqrt(std::max(0.0, fraction * (1.0 - fraction)) / replications)) + ",";
    } else if (check == "kappa") {
        const PopulationModel population(sim.model, sim.p, sim.rho, loss);
        const PredictorSet support =
            sim.model == SimModel::m1 ? PredictorSet({6, 7, 8, 9}) : PredictorSet({1, 2});
        Eigen::VectorXd beta_star;
        if (sim.model == SimModel::m1) {
            GroundTruth truth;
            truth.true_support = support;
            truth.true_direction = Eigen::Vector4d(3, 3, 1, 1);
            beta_star = truth.padded_direction(sim.p);
        } else {
            const Eigen::Vector2d eta = population_target_m2(sim.rho, loss);
            beta_star = Eigen::VectorXd::Zero(sim.p);
            beta_star[0] = eta[0];
            beta_star[1] = eta[1];
        }
        const Eigen::MatrixXd h = population.hessian(beta_star);
        const double estimate =
            estimate_cone_min_rayleigh(h, support, kappa_epsilon, probes, seed);
        row = "kappa," + fmt(estimate) + ",,,";
    } else if (check == "subg-product") {
        const SubgaussianCheck sc =
            check_subgaussian_product(sigma, m_bound, t_grid, tcfg.mc_samples, seed);
        for (const auto& pt : sc.points)
            std::cout << "t=" << pt.t << " mgf=" << fmt(pt.empirical_mgf) << " bound="
                      << fmt(pt.bound) << " se=" << fmt(pt.se) << (pt.pass ? " pass" : " FAIL")
                      << '\n';
        row = std::string("subg-product,,,,") + (sc.pass ? "1" : "0");
    } else {
        throw std::invalid_argument("unknown check: " + check);
    }

    std::cout << "check,estimate,bound,se,pass\n" << row << '\n';
    if (!output.empty()) {
        auto out = open_out(output);
        out << "check,estimate,bound,se,pass\n" << row << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage variable selection for high-dimensional binary regression"};
    app.require_subcommand(1);

    int threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    app.add_option("--threads", threads, "worker threads for sweeps");

    std::string loss_name = "logistic";
    double huber_delta = 0.1;

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate a dataset from the m1/m2 designs");
    std::string sim_model = "m2", sim_output = "data.csv";
    int sim_n = 500, sim_p = 150;
    double sim_rho = 0.0;
    std::uint64_t sim_seed = 1;
    simulate->add_option("--model", sim_model)->check(CLI::IsMember({"m1", "m2"}));
    simulate->add_option("--n", sim_n)->check(CLI::PositiveNumber);
    simulate->add_option("--p", sim_p)->check(CLI::PositiveNumber);
    simulate->add_option("--rho", sim_rho);
    simulate->add_option("--seed", sim_seed);
    simulate->add_option("--output", sim_output)->required();

    // path
    auto* path_cmd = app.add_subcommand("path", "fit a Lasso regularization path");
    std::string path_input, path_response = "y", path_output = "path.csv";
    int lambda_count = 20;
    double lambda_ratio = 0.01;
    path_cmd->add_option("--input", path_input)->required();
    path_cmd->add_option("--response", path_response);
    path_cmd->add_option("--loss", loss_name)->check(CLI::IsMember({"logistic", "quadratic", "huber"}));
    path_cmd->add_option("--huber-delta", huber_delta);
    path_cmd->add_option("--lambda-count", lambda_count)->check(CLI::PositiveNumber);
    path_cmd->add_option("--lambda-ratio", lambda_ratio);
    path_cmd->add_option("--output", path_output)->required();

    // select
    auto* select_cmd = app.add_subcommand("select", "run a selection procedure on a dataset");
    std::string sel_input, sel_response = "y", sel_proc = "ssnet", sel_penalty = "ebic1",
                sel_output;
    double sel_lambda = 0.1;
    int sel_folds = 10;
    std::uint64_t sel_seed = 1;
    select_cmd->add_option("--input", sel_input)->required();
    select_cmd->add_option("--response", sel_response);
    select_cmd->add_option("--procedure", sel_proc)
        ->check(CLI::IsMember({"ss", "ssnet", "sscv", "lft"}));
    select_cmd->add_option("--penalty", sel_penalty);
    select_cmd->add_option("--loss", loss_name)->check(CLI::IsMember({"logistic", "quadratic", "huber"}));
    select_cmd->add_option("--huber-delta", huber_delta);
    select_cmd->add_option("--lambda", sel_lambda, "penalty level (ss only)");
    select_cmd->add_option("--folds", sel_folds);
    select_cmd->add_option("--lambda-count", lambda_count);
    select_cmd->add_option("--lambda-ratio", lambda_ratio);
    select_cmd->add_option("--seed", sel_seed);
    select_cmd->add_option("--output", sel_output, "GIC table CSV");

    // experiment
    auto* exp_cmd = app.add_subcommand("experiment", "run a replication sweep from a config file");
    std::string exp_config, exp_output_override;
    bool dry_run = false;
    exp_cmd->add_option("--config", exp_config)->required();
    exp_cmd->add_flag("--dry-run", dry_run, "print the plan without executing");
    exp_cmd->add_option("--output", exp_output_override, "override output_dir");

    // theory-check
    auto* theory_cmd = app.add_subcommand("theory-check", "empirical checks of the tail bounds");
    std::string check_name, theory_model = "m2", theory_output;
    int theory_n = 500, theory_p = 3, theory_reps = 200, kappa_probes = 200;
    double theory_rho = 0.0, theory_lambda = 0.1, sigma = 1.0, m_bound = 2.0,
           kappa_epsilon = 0.5;
    std::uint64_t theory_seed = 1;
    std::vector<double> t_grid{-1.0, -0.5, 0.5, 1.0};
    TheoryCheckConfig tcfg;
    theory_cmd->add_option("--check", check_name)
        ->required()
        ->check(CLI::IsMember({"tail-s", "tail-s1", "tail-s2", "separation", "kappa",
                               "subg-product"}));
    theory_cmd->add_option("--model", theory_model)->check(CLI::IsMember({"m1", "m2"}));
    theory_cmd->add_option("--n", theory_n);
    theory_cmd->add_option("--p", theory_p);
    theory_cmd->add_option("--rho", theory_rho);
    theory_cmd->add_option("--seed", theory_seed);
    theory_cmd->add_option("--loss", loss_name)->check(CLI::IsMember({"logistic", "quadratic", "huber"}));
    theory_cmd->add_option("--huber-delta", huber_delta);
    theory_cmd->add_option("--mc-samples", tcfg.mc_samples);
    theory_cmd->add_option("--sup-probes", tcfg.sup_probes);
    theory_cmd->add_option("--r", tcfg.r);
    theory_cmd->add_option("--t", tcfg.t);
    theory_cmd->add_option("--k-n", tcfg.k_n);
    theory_cmd->add_option("--epsilon", tcfg.epsilon_cone);
    theory_cmd->add_option("--s-n", tcfg.s_n);
    theory_cmd->add_option("--lambda", theory_lambda, "Lasso penalty for the separation check");
    theory_cmd->add_option("--replications", theory_reps);
    theory_cmd->add_option("--sigma", sigma);
    theory_cmd->add_option("--m-bound", m_bound);
    theory_cmd->add_option("--t-grid", t_grid)->delimiter(',');
    theory_cmd->add_option("--probes", kappa_probes);
    theory_cmd->add_option("--kappa-epsilon", kappa_epsilon);
    theory_cmd->add_option("--output", theory_output);

    // plot-data
    auto* plot_cmd = app.add_subcommand("plot-data", "project report rows to one measure");
    std::string plot_reports, plot_measure = "p_equal", plot_output;
    plot_cmd->add_option("--reports", plot_reports)->required();
    plot_cmd->add_option("--measure", plot_measure)
        ->check(CLI::IsMember({"p_inc", "p_equal", "p_supset", "angle"}));
    plot_cmd->add_option("--output", plot_output);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        const gicsel::LossSpec loss = gicsel::loss_from_name(loss_name, huber_delta);
        if (simulate->parsed())
            return run_simulate(sim_model, sim_n, sim_p, sim_rho, sim_seed, sim_output);
        if (path_cmd->parsed())
            return run_path(path_input, path_response, loss, lambda_count, lambda_ratio,
                            path_output);
        if (select_cmd->parsed())
            return run_select(sel_input, sel_response, sel_proc, sel_penalty, loss, sel_lambda,
                              sel_folds, lambda_count, lambda_ratio, sel_seed, sel_output);
        if (exp_cmd->parsed()) {
            gicsel::ExperimentConfig cfg = gicsel::parse_experiment_config(exp_config);
            if (!exp_output_override.empty()) cfg.output_dir = exp_output_override;
            gicsel::run_experiment(cfg, threads, dry_run, std::cout);
            return 0;
        }
        if (theory_cmd->parsed())
            return run_theory_check(check_name, theory_model, theory_n, theory_p, theory_rho,
                                    theory_seed, loss, tcfg, theory_lambda, theory_reps, sigma,
                                    m_bound, t_grid, kappa_probes, kappa_epsilon, theory_output);
        if (plot_cmd->parsed()) {
            const auto rows = gicsel::load_report_csv(plot_reports);
            if (plot_output.empty()) {
                gicsel::emit_plot_data(rows, plot_measure, std::cout);
            } else {
                auto out = open_out(plot_output);
                gicsel::emit_plot_data(rows, plot_measure, out);
                std::cout << "wrote " << plot_output << '\n';
            }
            return 0;
        }
    } catch (const gicsel::data_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const gicsel::numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 1;
}
