// pseudoshrink: deterministic-equivalent limits, data-driven shrinkage of
// precision matrices and GMV portfolio weights, and the Monte Carlo harness.

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "pseudoshrink/csv.hpp"
#include "pseudoshrink/deterministic.hpp"
#include "pseudoshrink/errors.hpp"
#include "pseudoshrink/experiments.hpp"
#include "pseudoshrink/gmv_shrinkage.hpp"
#include "pseudoshrink/plugin.hpp"
#include "pseudoshrink/precision_shrinkage.hpp"

namespace ps = pseudoshrink;

namespace {

ps::ObservationMatrix load_observations(const std::string& path, bool n_is_columns) {
    Eigen::MatrixXd m = ps::read_matrix_csv(path);
    ps::ObservationMatrix y;
    y.entries = n_is_columns ? m : Eigen::MatrixXd(m.transpose());
    y.mean = Eigen::VectorXd::Zero(y.entries.rows());
    return y;
}

Eigen::MatrixXd load_target_matrix(const std::string& spec, Eigen::Index p) {
    if (spec == "identity") return Eigen::MatrixXd::Identity(p, p);
    Eigen::MatrixXd m = ps::read_matrix_csv(spec);
    if (m.rows() != p || m.cols() != p) {
        throw std::invalid_argument("target matrix dimension does not match the data");
    }
    return m;
}

Eigen::VectorXd load_target_portfolio(const std::string& spec, Eigen::Index p) {
    if (spec == "equal") return Eigen::VectorXd::Constant(p, 1.0 / static_cast<double>(p));
    Eigen::MatrixXd m = ps::read_matrix_csv(spec);
    Eigen::VectorXd b = (m.cols() == 1) ? Eigen::VectorXd(m.col(0)) : Eigen::VectorXd(m.row(0));
    if (b.size() != p) throw std::invalid_argument("target portfolio length does not match the data");
    return b;
}

void print_kv(const std::string& key, double value) {
    std::cout << key << "=" << ps::format_double(value) << "\n";
}

int run_limits(const std::string& spectrum, int p, double cn, const std::string& family_tag, int m,
               double t, const std::string& theta) {
    if (theta != "trace") {
        throw std::invalid_argument("limits: only --theta trace (Theta = I/p) is supported");
    }
    const ps::Family family = ps::parse_family(family_tag);
    double value = 0.0;
    if (spectrum == "identity") {
        value = ps::identity_closed_form(family, m, t, cn);
    } else {
        const Eigen::VectorXd lam =
            (spectrum == "paper") ? ps::paper_spectrum(p) : ps::read_vector_lines(spectrum);
        const ps::SpectralModel model(lam);
        const auto theta_w = ps::WeightMatrix::scaled_identity(model.p(), 1.0 / static_cast<double>(model.p()));
        value = ps::limit_moment(family, m, t, theta_w, cn, model).value;
    }
    std::cout << ps::format_double(value) << "\n";
    return 0;
}

int run_estimate(const std::string& data, bool n_is_columns, std::optional<double> t) {
    const ps::ObservationMatrix y = load_observations(data, n_is_columns);
    const ps::PluginContext ctx = ps::PluginContext::from_data(y);
    const auto theta_i = ps::WeightMatrix::scaled_identity(ctx.p(), 1.0 / static_cast<double>(ctx.p()));

    print_kv("p", static_cast<double>(ctx.p()));
    print_kv("n", static_cast<double>(ctx.n()));
    print_kv("cn", ctx.cn());
    print_kv("rank", static_cast<double>(ctx.rank()));
    print_kv("near_singular", ctx.near_singular() ? 1.0 : 0.0);
    print_kv("q1_I", ctx.hat_q(1, theta_i));
    print_kv("q2_I", ctx.hat_q(2, theta_i));
    print_kv("d0_I", ctx.hat_d(0, theta_i, 0.0));
    if (ctx.p() > ctx.n()) {
        print_kv("v0", ctx.hat_v_derivative(0, 0.0));
        print_kv("v1_0", ctx.hat_v_derivative(1, 0.0));
        print_kv("v2_0", ctx.hat_v_derivative(2, 0.0));
        print_kv("h2", ctx.hat_h(2));
        print_kv("h3", ctx.hat_h(3));
        print_kv("d1_I", ctx.hat_d(1, theta_i, 0.0));
        print_kv("d2_I", ctx.hat_d(2, theta_i, 0.0));
        print_kv("d3_I", ctx.hat_d(3, theta_i, 0.0));
    }
    if (t) {
        print_kv("t", *t);
        print_kv("vt", ctx.hat_v_derivative(0, *t));
        print_kv("v1_t", ctx.hat_v_derivative(1, *t));
        print_kv("d0_t_I", ctx.hat_d(0, theta_i, *t));
        print_kv("d1_t_I", ctx.hat_d(1, theta_i, *t));
    }
    return 0;
}

int run_shrink_precision(const std::string& data, bool n_is_columns, const std::string& method_tag,
                         const std::string& target, std::optional<double> t,
                         const std::string& out) {
    const ps::ObservationMatrix y = load_observations(data, n_is_columns);
    const ps::PluginContext ctx = ps::PluginContext::from_data(y);
    const Eigen::MatrixXd pi0 = load_target_matrix(target, ctx.p());
    const ps::PrecisionMethod method = ps::parse_precision_method(method_tag);

    ps::PrecisionShrinkagePlan plan;
    switch (method) {
        case ps::PrecisionMethod::EmpiricalBayes:
            plan = ps::empirical_bayes_precision(ctx.dense_covariance(), ctx.n());
            break;
        case ps::PrecisionMethod::OptimalRidge:
            plan = ps::optimal_ridge_precision(ctx.dense_covariance(), ctx.n());
            break;
        case ps::PrecisionMethod::OracleNL:
            throw std::invalid_argument("oracle_nl needs the population covariance; not a CLI method");
        default:
            plan = ps::bona_fide_precision(ctx, method, pi0, t);
            break;
    }
    std::cout << "method=" << ps::precision_method_name(plan.method) << "\n";
    print_kv("alpha", plan.alpha);
    print_kv("beta", plan.beta);
    print_kv("t_star", plan.t_star);
    print_kv("alpha_out_of_range", plan.alpha_out_of_range ? 1.0 : 0.0);
    print_kv("fell_back_to_mp", plan.fell_back_to_mp ? 1.0 : 0.0);
    print_kv("flat_objective", plan.flat_objective ? 1.0 : 0.0);
    if (!out.empty()) ps::write_matrix_csv(plan.estimate, out);
    return 0;
}

int run_shrink_gmv(const std::string& data, bool n_is_columns, const std::string& method,
                   const std::string& target, const std::string& out) {
    const ps::ObservationMatrix y = load_observations(data, n_is_columns);
    const ps::PluginContext ctx = ps::PluginContext::from_data(y);
    const Eigen::VectorXd b = load_target_portfolio(target, ctx.p());

    ps::PortfolioWeights w;
    if (method == "mp") {
        w = ps::bona_fide_alpha_mp(ctx, b);
    } else if (method == "reflexive") {
        w = ps::reflexive_weights(ctx, b);
    } else if (method == "double") {
        w = ps::double_shrinkage_weights(ctx, b);
    } else {
        throw std::invalid_argument("unknown gmv method: " + method);
    }
    std::cout << "method=" << w.method << "\n";
    print_kv("alpha", w.alpha);
    if (method == "double") print_kv("eta", w.eta);
    print_kv("alpha_out_of_range", w.alpha_out_of_range ? 1.0 : 0.0);
    if (!out.empty()) ps::write_matrix_csv(w.weights, out);
    return 0;
}

int run_simulate(ps::ExperimentConfig config, const std::string& out) {
    const auto rows = ps::run_experiment(config);
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write output file: " + out);
    ps::write_result_csv(config.kind, rows, os);
    for (const auto& row : rows) {
        if (std::isnan(row.stat)) {
            std::cerr << "cell failed (> 20% degenerate replications): method=" << row.method
                      << " n=" << row.n << " c=" << row.c << "\n";
            return 1;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"high-dimensional generalized-inverse shrinkage toolkit"};
    app.require_subcommand(1);

    // limits
    auto* limits = app.add_subcommand("limits", "deterministic trace-moment limits");
    std::string lim_spectrum = "identity";
    int lim_p = 100;
    double lim_cn = 2.0, lim_t = 0.0;
    int lim_m = 1;
    std::string lim_family = "mp", lim_theta = "trace";
    limits->add_option("--spectrum", lim_spectrum, "identity | paper | eigenvalue file");
    limits->add_option("--p", lim_p, "dimension (paper/file spectra)");
    limits->add_option("--cn", lim_cn, "concentration ratio p/n")->required();
    limits->add_option("--family", lim_family, "mp | ridge | mpr | samplecov | ordinary")->required();
    limits->add_option("--m", lim_m, "moment index")->required();
    limits->add_option("--t", lim_t, "tuning parameter (ridge/mpr)");
    limits->add_option("--theta", lim_theta, "weighting: trace (Theta = I/p)");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "plug-in estimator report");
    std::string est_data;
    bool est_ncols = false;
    double est_t = -1.0;
    estimate->add_option("--data", est_data, "observation CSV")->required();
    estimate->add_flag("--n-is-columns", est_ncols, "columns are observations (file is p x n)");
    estimate->add_option("--t", est_t, "also report the ridge-family estimators at t");

    // shrink-precision
    auto* sp = app.add_subcommand("shrink-precision", "bona fide precision-matrix shrinkage");
    std::string sp_data, sp_method, sp_target = "identity", sp_out;
    bool sp_ncols = false;
    double sp_t = -1.0;
    sp->add_option("--data", sp_data, "observation CSV")->required();
    sp->add_flag("--n-is-columns", sp_ncols, "columns are observations (file is p x n)");
    sp->add_option("--method", sp_method, "mp | ridge | mpr | eb | or")->required();
    sp->add_option("--target", sp_target, "identity | matrix file");
    sp->add_option("--t", sp_t, "fix the tuning parameter instead of searching");
    sp->add_option("--out", sp_out, "write the estimate matrix CSV here");

    // shrink-gmv
    auto* sg = app.add_subcommand("shrink-gmv", "GMV portfolio weight shrinkage");
    std::string sg_data, sg_method, sg_target = "equal", sg_out;
    bool sg_ncols = false;
    sg->add_option("--data", sg_data, "observation CSV")->required();
    sg->add_flag("--n-is-columns", sg_ncols, "columns are observations (file is p x n)");
    sg->add_option("--method", sg_method, "mp | reflexive | double")->required();
    sg->add_option("--target", sg_target, "equal | weight file");
    sg->add_option("--out", sg_out, "write the weights CSV here");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo experiment tables");
    std::string sim_config, sim_kind, sim_dist, sim_n, sim_c, sim_t, sim_methods, sim_spectrum,
        sim_out;
    int sim_reps = -1, sim_workers = -1;
    long long sim_seed = -1;
    sim->add_option("--config", sim_config, "key=value config file");
    sim->add_option("--kind", sim_kind, "vconv | prial | rosv");
    sim->add_option("--dist", sim_dist, "normal | scaled_t5");
    sim->add_option("--n", sim_n, "sample sizes, comma separated");
    sim->add_option("--c", sim_c, "concentration ratios, comma separated");
    sim->add_option("--t", sim_t, "vconv tuning grid, comma separated");
    sim->add_option("--reps", sim_reps, "replication count");
    sim->add_option("--seed", sim_seed, "base seed");
    sim->add_option("--methods", sim_methods, "method tags, comma separated");
    sim->add_option("--spectrum", sim_spectrum, "paper | eigenvalue file");
    sim->add_option("--workers", sim_workers, "concurrent replication workers");
    sim->add_option("--out", sim_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*limits) {
            return run_limits(lim_spectrum, lim_p, lim_cn, lim_family, lim_m, lim_t, lim_theta);
        }
        if (*estimate) {
            return run_estimate(est_data, est_ncols,
                                est_t > 0.0 ? std::optional<double>(est_t) : std::nullopt);
        }
        if (*sp) {
            return run_shrink_precision(sp_data, sp_ncols, sp_method, sp_target,
                                        sp_t > 0.0 ? std::optional<double>(sp_t) : std::nullopt,
                                        sp_out);
        }
        if (*sg) {
            return run_shrink_gmv(sg_data, sg_ncols, sg_method, sg_target, sg_out);
        }
        if (*sim) {
            ps::ExperimentConfig config;
            if (!sim_config.empty()) config = ps::parse_config_file(sim_config);
            if (!sim_kind.empty()) ps::apply_config_entry(config, "kind", sim_kind);
            if (!sim_dist.empty()) ps::apply_config_entry(config, "dist", sim_dist);
            if (!sim_n.empty()) ps::apply_config_entry(config, "n", sim_n);
            if (!sim_c.empty()) ps::apply_config_entry(config, "c", sim_c);
            if (!sim_t.empty()) ps::apply_config_entry(config, "t", sim_t);
            if (sim_reps >= 0) config.reps = sim_reps;
            if (sim_seed >= 0) config.base_seed = static_cast<std::uint64_t>(sim_seed);
            if (!sim_methods.empty()) ps::apply_config_entry(config, "methods", sim_methods);
            if (!sim_spectrum.empty()) config.spectrum = sim_spectrum;
            if (sim_workers >= 1) config.workers = sim_workers;
            return run_simulate(config, sim_out);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
