#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pseudoshrink/data_gen.hpp"

namespace pseudoshrink {

enum class ExperimentKind { VConv, Prial, Rosv };

ExperimentKind parse_experiment_kind(const std::string& tag);
std::string experiment_kind_name(ExperimentKind k);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Prial;
    Dist dist = Dist::Normal;
    std::vector<int> n_list{100};
    std::vector<double> c_grid{2.0};
    std::vector<double> t_grid{1.0};  // vconv only
    int reps = 100;
    std::uint64_t base_seed = 1;
    std::string spectrum = "paper";  // "paper" or a file of eigenvalues
    std::vector<std::string> methods;  // empty = per-kind defaults
    int workers = 1;

    void validate() const;
};

std::vector<std::string> default_methods(ExperimentKind kind);

struct ResultRow {
    std::string dist;
    int n = 0;
    double c = 0.0;
    double t = 0.0;  // vconv only
    std::string method;
    double stat = 0.0;    // mean_ratio | prial_pct | rosv
    double spread = 0.0;  // sd | se | se
    int reps = 0;
    int errors = 0;
    std::uint64_t seed = 0;
};

/// Runs every (n, c) cell: replication r uses data seed base_seed + r, the
/// cell's Haar basis comes from a hashed stream, replications may run on
/// `workers` threads, and the reduction is single-threaded in index order so
/// output is byte-identical for any worker count. Per-method wall time goes
/// to stderr.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

/// Header + rows in the fixed per-kind schema, 17 significant digits.
void write_result_csv(ExperimentKind kind, const std::vector<ResultRow>& rows, std::ostream& out);

/// key=value per line, '#' comments. Unknown keys are an error.
ExperimentConfig parse_config_file(const std::string& path);
void apply_config_entry(ExperimentConfig& config, const std::string& key, const std::string& value);

}  // namespace pseudoshrink
