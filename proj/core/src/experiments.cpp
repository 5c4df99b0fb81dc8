#include "pseudoshrink/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pseudoshrink/csv.hpp"
#include "pseudoshrink/deterministic.hpp"
#include "pseudoshrink/gmv_shrinkage.hpp"
#include "pseudoshrink/plugin.hpp"
#include "pseudoshrink/precision_shrinkage.hpp"
#include "pseudoshrink/rng.hpp"

namespace pseudoshrink {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RowKey {
    std::string method;
    double t = 0.0;
};

struct RepOutcome {
    double num = kNaN;  // ratio (vconv), loss numerator (prial), rosv value
    double den = kNaN;  // loss denominator (prial only)
    bool ok = false;
    double secs = 0.0;
};

std::vector<double> parse_list(const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::vector<std::string> parse_names(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

Eigen::VectorXd spectrum_for(const std::string& spec, Eigen::Index p) {
    if (spec == "paper" || spec == "paper_mix") return paper_spectrum(p);
    const Eigen::VectorXd file = read_vector_lines(spec);
    // tile the file entries proportionally so any p reuses the same
    // population distribution
    Eigen::VectorXd lam(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const auto j = static_cast<Eigen::Index>(
            static_cast<double>(i) * static_cast<double>(file.size()) / static_cast<double>(p));
        lam[i] = file[std::min(j, file.size() - 1)];
    }
    return lam;
}

double sample_sd(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

class Stopwatch {
public:
    Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    double secs() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

// runs rep_fn(r) for r in [0, reps) on `workers` threads; results land in a
// rep-indexed slot so the later reduction is schedule-independent
template <typename RepFn>
std::vector<std::vector<RepOutcome>> run_reps(int reps, int workers, RepFn&& rep_fn) {
    std::vector<std::vector<RepOutcome>> results(static_cast<std::size_t>(reps));
    std::atomic<int> next{0};
    auto work = [&]() {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= reps) break;
            results[static_cast<std::size_t>(r)] = rep_fn(r);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return results;
}

double frobenius_loss(const Eigen::MatrixXd& pi_hat, const Eigen::MatrixXd& sigma) {
    Eigen::MatrixXd m = pi_hat * sigma;
    m.diagonal().array() -= 1.0;
    return m.squaredNorm();
}

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& tag) {
    if (tag == "vconv") return ExperimentKind::VConv;
    if (tag == "prial") return ExperimentKind::Prial;
    if (tag == "rosv") return ExperimentKind::Rosv;
    throw std::invalid_argument("unknown experiment kind: " + tag);
}

std::string experiment_kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::VConv: return "vconv";
        case ExperimentKind::Prial: return "prial";
        case ExperimentKind::Rosv: return "rosv";
    }
    return "?";
}

std::vector<std::string> default_methods(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::VConv:
            return {"v0", "v1_0", "vt", "v1_t"};
        case ExperimentKind::Prial:
            return {"mp", "ridge", "mpr", "eb", "or", "oracle_nl", "identity"};
        case ExperimentKind::Rosv:
            return {"mp_bf", "plugin_mp", "reflexive", "double"};
    }
    return {};
}

void ExperimentConfig::validate() const {
    if (reps < 1) throw std::invalid_argument("config: reps >= 1 required");
    if (workers < 1) throw std::invalid_argument("config: workers >= 1 required");
    if (n_list.empty() || c_grid.empty()) throw std::invalid_argument("config: empty n or c grid");
    for (int n : n_list) {
        if (n < 2) throw std::invalid_argument("config: n >= 2 required");
    }
    for (double c : c_grid) {
        if (c <= 1.0) throw std::invalid_argument("config: concentration ratios must exceed 1");
    }
    if (kind == ExperimentKind::VConv) {
        for (double t : t_grid) {
            if (t <= 0.0) throw std::invalid_argument("config: vconv t grid must be positive");
        }
    }
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
    config.validate();
    const std::vector<std::string> methods =
        config.methods.empty() ? default_methods(config.kind) : config.methods;

    std::vector<ResultRow> rows;
    int cell_index = 0;
    for (int n : config.n_list) {
        for (double c : config.c_grid) {
            const auto p = static_cast<Eigen::Index>(std::lround(c * n));
            const Eigen::VectorXd lam = spectrum_for(config.spectrum, p);
            const std::uint64_t basis_seed = mix_seed(config.base_seed, 1000003ULL + static_cast<std::uint64_t>(cell_index));
            const SpectralModel model(lam, sample_haar_basis(p, basis_seed));
            const Eigen::VectorXd mu = Eigen::VectorXd::Zero(p);

            // row descriptors for this cell
            std::vector<RowKey> keys;
            for (const auto& m : methods) {
                if (config.kind == ExperimentKind::VConv && (m == "vt" || m == "v1_t")) {
                    for (double t : config.t_grid) keys.push_back({m, t});
                } else {
                    keys.push_back({m, 0.0});
                }
            }

            std::vector<std::vector<RepOutcome>> outcomes;
            switch (config.kind) {
                case ExperimentKind::VConv: {
                    const double cn = static_cast<double>(p) / static_cast<double>(n);
                    // true values, one solve per (method, t)
                    std::vector<double> truth(keys.size());
                    for (std::size_t k = 0; k < keys.size(); ++k) {
                        const auto& key = keys[k];
                        if (key.method == "v0") {
                            truth[k] = solve_v(0.0, cn, model);
                        } else if (key.method == "v1_0") {
                            truth[k] = v_derivatives(0.0, 1, cn, model).v(1);
                        } else if (key.method == "vt") {
                            truth[k] = solve_v(key.t, cn, model);
                        } else if (key.method == "v1_t") {
                            truth[k] = v_derivatives(key.t, 1, cn, model).v(1);
                        } else {
                            throw std::invalid_argument("unknown vconv method: " + key.method);
                        }
                    }
                    outcomes = run_reps(config.reps, config.workers, [&](int r) {
                        std::vector<RepOutcome> out(keys.size());
                        const ObservationMatrix y = generate_observations(
                            model, n, config.dist, mu, config.base_seed + static_cast<std::uint64_t>(r));
                        const PluginContext ctx = PluginContext::from_data(y);
                        for (std::size_t k = 0; k < keys.size(); ++k) {
                            Stopwatch sw;
                            try {
                                const auto& key = keys[k];
                                double hat = 0.0;
                                if (key.method == "v0") hat = ctx.hat_v_derivative(0, 0.0);
                                else if (key.method == "v1_0") hat = ctx.hat_v_derivative(1, 0.0);
                                else if (key.method == "vt") hat = ctx.hat_v_derivative(0, key.t);
                                else hat = ctx.hat_v_derivative(1, key.t);
                                out[k].num = hat / truth[k];
                                out[k].ok = std::isfinite(out[k].num);
                            } catch (const std::exception&) {
                                out[k].ok = false;
                            }
                            out[k].secs = sw.secs();
                        }
                        return out;
                    });
                    break;
                }
                case ExperimentKind::Prial: {
                    const Eigen::MatrixXd sigma = model.dense();
                    const Eigen::MatrixXd sigma_inv = model.dense_inverse();
                    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(p, p);
                    outcomes = run_reps(config.reps, config.workers, [&](int r) {
                        std::vector<RepOutcome> out(keys.size());
                        const ObservationMatrix y = generate_observations(
                            model, n, config.dist, mu, config.base_seed + static_cast<std::uint64_t>(r));
                        const Eigen::MatrixXd s = sample_covariance(y);
                        const PluginContext ctx = PluginContext::from_covariance(s, n);
                        const double den =
                            frobenius_loss(ctx.dense_inverse(InverseKind::MoorePenrose), sigma);
                        for (std::size_t k = 0; k < keys.size(); ++k) {
                            Stopwatch sw;
                            try {
                                const std::string& m = keys[k].method;
                                double num = 0.0;
                                if (m == "identity") {
                                    num = frobenius_loss(eye, sigma);
                                } else if (m == "true") {
                                    num = frobenius_loss(sigma_inv, sigma);
                                } else if (m == "mp_plugin") {
                                    num = den;
                                } else if (m == "mp" || m == "ridge" || m == "mpr") {
                                    const auto plan = bona_fide_precision(
                                        ctx, parse_precision_method(m), eye);
                                    num = frobenius_loss(plan.estimate, sigma);
                                } else if (m == "eb") {
                                    num = frobenius_loss(empirical_bayes_precision(s, n).estimate, sigma);
                                } else if (m == "or") {
                                    num = frobenius_loss(optimal_ridge_precision(s, n).estimate, sigma);
                                } else if (m == "oracle_nl") {
                                    num = frobenius_loss(oracle_nl_precision(s, model).estimate, sigma);
                                } else {
                                    throw std::invalid_argument("unknown prial method: " + m);
                                }
                                out[k].num = num;
                                out[k].den = den;
                                out[k].ok = std::isfinite(num) && std::isfinite(den);
                            } catch (const std::invalid_argument&) {
                                throw;  // misconfiguration, not a replication failure
                            } catch (const std::exception&) {
                                out[k].ok = false;
                            }
                            out[k].secs = sw.secs();
                        }
                        return out;
                    });
                    break;
                }
                case ExperimentKind::Rosv: {
                    const Eigen::VectorXd b =
                        Eigen::VectorXd::Constant(p, 1.0 / static_cast<double>(p));
                    outcomes = run_reps(config.reps, config.workers, [&](int r) {
                        std::vector<RepOutcome> out(keys.size());
                        const ObservationMatrix y = generate_observations(
                            model, n, config.dist, mu, config.base_seed + static_cast<std::uint64_t>(r));
                        const PluginContext ctx = PluginContext::from_data(y);
                        for (std::size_t k = 0; k < keys.size(); ++k) {
                            Stopwatch sw;
                            try {
                                const std::string& m = keys[k].method;
                                Eigen::VectorXd w;
                                if (m == "mp_bf") {
                                    w = bona_fide_alpha_mp(ctx, b).weights;
                                } else if (m == "plugin_mp") {
                                    w = plugin_weights(ctx, InverseKind::MoorePenrose).weights;
                                } else if (m == "reflexive") {
                                    w = reflexive_weights(ctx, b).weights;
                                } else if (m == "double") {
                                    w = double_shrinkage_weights(ctx, b).weights;
                                } else if (m == "target") {
                                    w = b;
                                } else if (m == "true") {
                                    w = true_gmv(model).weights;
                                } else {
                                    throw std::invalid_argument("unknown rosv method: " + m);
                                }
                                out[k].num = rosv(w, model);
                                out[k].ok = std::isfinite(out[k].num);
                            } catch (const std::invalid_argument&) {
                                throw;
                            } catch (const std::exception&) {
                                out[k].ok = false;
                            }
                            out[k].secs = sw.secs();
                        }
                        return out;
                    });
                    break;
                }
            }

            // single-threaded reduction in replication order
            for (std::size_t k = 0; k < keys.size(); ++k) {
                ResultRow row;
                row.dist = dist_name(config.dist);
                row.n = n;
                row.c = c;
                row.t = keys[k].t;
                row.method = keys[k].method;
                row.reps = config.reps;
                row.seed = config.base_seed;

                std::vector<double> per_rep;
                double num_sum = 0.0, den_sum = 0.0, secs = 0.0;
                int ok_count = 0;
                for (int r = 0; r < config.reps; ++r) {
                    const RepOutcome& o = outcomes[static_cast<std::size_t>(r)][k];
                    secs += o.secs;
                    if (!o.ok) continue;
                    ++ok_count;
                    if (config.kind == ExperimentKind::Prial) {
                        num_sum += o.num;
                        den_sum += o.den;
                        per_rep.push_back((1.0 - o.num / o.den) * 100.0);
                    } else {
                        num_sum += o.num;
                        per_rep.push_back(o.num);
                    }
                }
                row.errors = config.reps - ok_count;
                if (ok_count == 0 ||
                    static_cast<double>(row.errors) > 0.2 * static_cast<double>(config.reps)) {
                    row.stat = kNaN;
                    row.spread = kNaN;
                } else if (config.kind == ExperimentKind::Prial) {
                    row.stat = (1.0 - num_sum / den_sum) * 100.0;
                    const double mean_pr = [&] {
                        double acc = 0.0;
                        for (double v : per_rep) acc += v;
                        return acc / static_cast<double>(per_rep.size());
                    }();
                    row.spread = sample_sd(per_rep, mean_pr) / std::sqrt(static_cast<double>(per_rep.size()));
                } else {
                    const double mean = num_sum / static_cast<double>(ok_count);
                    row.stat = mean;
                    const double sd = sample_sd(per_rep, mean);
                    row.spread = (config.kind == ExperimentKind::VConv)
                                     ? sd
                                     : sd / std::sqrt(static_cast<double>(ok_count));
                }
                std::cerr << "# timing " << experiment_kind_name(config.kind) << " n=" << n
                          << " c=" << c << " method=" << row.method << " t=" << row.t
                          << " elapsed_s=" << secs << "\n";
                rows.push_back(std::move(row));
            }
            ++cell_index;
        }
    }
    return rows;
}

void write_result_csv(ExperimentKind kind, const std::vector<ResultRow>& rows, std::ostream& out) {
    switch (kind) {
        case ExperimentKind::VConv:
            out << "dist,n,c,t,method,mean_ratio,sd,reps,errors\n";
            break;
        case ExperimentKind::Prial:
            out << "dist,n,c,method,prial_pct,se,reps,errors\n";
            break;
        case ExperimentKind::Rosv:
            out << "dist,n,c,method,rosv,se,reps,errors\n";
            break;
    }
    for (const auto& r : rows) {
        out << r.dist << ',' << r.n << ',' << format_double(r.c) << ',';
        if (kind == ExperimentKind::VConv) out << format_double(r.t) << ',';
        out << r.method << ',' << format_double(r.stat) << ',' << format_double(r.spread) << ','
            << r.reps << ',' << r.errors << '\n';
    }
}

void apply_config_entry(ExperimentConfig& config, const std::string& key, const std::string& value) {
    if (key == "kind") {
        config.kind = parse_experiment_kind(value);
    } else if (key == "dist") {
        config.dist = parse_dist(value);
    } else if (key == "n") {
        config.n_list.clear();
        for (double v : parse_list(value)) config.n_list.push_back(static_cast<int>(std::lround(v)));
    } else if (key == "c") {
        config.c_grid = parse_list(value);
    } else if (key == "t") {
        config.t_grid = parse_list(value);
    } else if (key == "reps") {
        config.reps = std::stoi(value);
    } else if (key == "seed") {
        config.base_seed = static_cast<std::uint64_t>(std::stoull(value));
    } else if (key == "spectrum") {
        config.spectrum = value;
    } else if (key == "methods") {
        config.methods = parse_names(value);
    } else if (key == "workers") {
        config.workers = std::stoi(value);
    } else {
        throw std::invalid_argument("unknown config key: " + key);
    }
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    ExperimentConfig config;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line without '=': " + line);
        apply_config_entry(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return config;
}

}  // namespace pseudoshrink
