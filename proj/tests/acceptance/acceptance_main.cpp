// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// fails. argv[1] must be the pseudoshrink CLI binary (used by the
// determinism criterion).

#include <Eigen/Dense>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pseudoshrink/bell.hpp"
#include "pseudoshrink/data_gen.hpp"
#include "pseudoshrink/deterministic.hpp"
#include "pseudoshrink/experiments.hpp"
#include "pseudoshrink/generalized_inverse.hpp"
#include "pseudoshrink/gmv_shrinkage.hpp"
#include "pseudoshrink/plugin.hpp"
#include "pseudoshrink/precision_shrinkage.hpp"
#include "pseudoshrink/rng.hpp"

using namespace pseudoshrink;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, double seconds,
            const std::string& detail) {
    std::printf("%s  %2d %-28s (%.1f s)  %s\n", pass ? "PASS" : "FAIL", index, name.c_str(),
                seconds, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void run_criterion(int index, const std::string& name,
                   const std::function<std::pair<bool, std::string>()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
        auto r = body();
        pass = r.first;
        detail = r.second;
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(index, name, pass, secs, detail);
}

// brute-force Bell oracle by set-partition enumeration (independent of the
// implementation's j-sequence sum)
double bell_by_set_partitions(int m, int k, const std::vector<double>& x) {
    std::vector<int> block_of(static_cast<std::size_t>(m), 0);
    double total = 0.0;
    auto recurse = [&](auto&& self, int elem, int used) -> void {
        if (elem == m) {
            if (used != k) return;
            std::vector<int> sizes(static_cast<std::size_t>(used), 0);
            for (int e = 0; e < m; ++e) ++sizes[static_cast<std::size_t>(block_of[static_cast<std::size_t>(e)])];
            double prod = 1.0;
            for (int b = 0; b < used; ++b) prod *= x[static_cast<std::size_t>(sizes[static_cast<std::size_t>(b)] - 1)];
            total += prod;
            return;
        }
        for (int b = 0; b <= used && b < k; ++b) {
            block_of[static_cast<std::size_t>(elem)] = b;
            self(self, elem + 1, std::max(used, b + 1));
        }
    };
    recurse(recurse, 0, 0);
    return total;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = (argc > 1) ? argv[1] : "";

    run_criterion(1, "bell-oracle", []() -> std::pair<bool, std::string> {
        std::mt19937_64 eng(2024);
        std::uniform_int_distribution<int> val(-5, 5);
        int checked = 0;
        for (int trial = 0; trial < 200; ++trial) {
            const int m = 1 + static_cast<int>(eng() % 8);
            const int k = 1 + static_cast<int>(eng() % static_cast<std::uint64_t>(m));
            std::vector<double> x(static_cast<std::size_t>(m - k + 1));
            for (auto& v : x) v = static_cast<double>(val(eng));
            if (bell_partial(m, k, x) != bell_by_set_partitions(m, k, x)) {
                return {false, "mismatch at trial " + std::to_string(trial)};
            }
            ++checked;
        }
        return {true, std::to_string(checked) + " random inputs exact"};
    });

    run_criterion(2, "identity-closed-forms", []() -> std::pair<bool, std::string> {
        SpectralModel ident(Eigen::VectorXd::Ones(50));
        const auto theta = WeightMatrix::scaled_identity(50, 1.0 / 50.0);
        double worst = 0.0;
        auto compare = [&](Family f, int m, double t, double cn) {
            const double a = limit_moment(f, m, t, theta, cn, ident).value;
            const double b = identity_closed_form(f, m, t, cn);
            worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
        };
        for (double cn : {2.0, 3.0})
            for (int m = 1; m <= 4; ++m) compare(Family::MoorePenrose, m, 0.0, cn);
        for (double cn : {0.5, 2.0})
            for (int m = 1; m <= 4; ++m) compare(Family::SampleCov, m, 0.0, cn);
        for (double cn : {0.5, 2.0})
            for (double t : {0.5, 1.0, 2.0})
                for (int m = 0; m <= 3; ++m) compare(Family::Ridge, m, t, cn);
        for (double cn : {0.5, 2.0})
            for (double t : {0.5, 1.0, 2.0})
                for (int m = 1; m <= 2; ++m) compare(Family::MPR, m, t, cn);
        for (int m = 0; m <= 3; ++m) compare(Family::Ordinary, m, 0.0, 0.5);
        if (worst > 1e-9) return {false, "relative gap " + std::to_string(worst)};

        // the known 1/2, 1, 3, 11 coefficient sequence at c = 2
        const std::array<double, 4> want{0.5, 1.0, 3.0, 11.0};
        for (int m = 1; m <= 4; ++m) {
            if (std::abs(identity_closed_form(Family::MoorePenrose, m, 0.0, 2.0) -
                         want[static_cast<std::size_t>(m - 1)]) > 1e-12) {
                return {false, "mp sequence mismatch at m=" + std::to_string(m)};
            }
        }
        return {true, "all families within 1e-9; mp sequence 1/2,1,3,11 exact"};
    });

    run_criterion(3, "derivatives-vs-fd", []() -> std::pair<bool, std::string> {
        SpectralModel paper(paper_spectrum(10));
        // independent oracle: long double bisection on the 3-atom residual,
        // Richardson-extrapolated central differences. Long double keeps the
        // third-difference noise floor well under the 1e-6 target at the
        // c = 3 points where v''' is ~1e-3.
        const auto solve_ld = [](long double t, long double cn) {
            const auto f = [&](long double v) {
                return 0.2L / (v + 1.0L) + 0.4L / (3.0L * v + 1.0L) + 0.4L / (10.0L * v + 1.0L) -
                       (cn - 1.0L + t * v) / cn;
            };
            long double lo = 0.0L, hi = 1.0L;
            while (f(hi) > 0.0L) {
                lo = hi;
                hi *= 2.0L;
            }
            for (int it = 0; it < 200; ++it) {
                const long double mid = 0.5L * (lo + hi);
                if (mid == lo || mid == hi) break;
                (f(mid) > 0.0L ? lo : hi) = mid;
            }
            return 0.5L * (lo + hi);
        };
        double worst = 0.0;
        for (double cn : {1.5, 3.0}) {
            for (double t : {0.5, 2.0}) {
                const auto stack = v_derivatives(t, 3, cn, paper, 1e-13);
                const auto v = [&](long double tt) { return solve_ld(tt, cn); };
                const auto richardson = [&](int order, long double h1, long double h2) {
                    const auto diff = [&](long double h) -> long double {
                        switch (order) {
                            case 1: return (v(t + h) - v(t - h)) / (2.0L * h);
                            case 2: return (v(t + h) - 2.0L * v(t) + v(t - h)) / (h * h);
                            default:
                                return (v(t + 2.0L * h) - 2.0L * v(t + h) + 2.0L * v(t - h) -
                                        v(t - 2.0L * h)) /
                                       (2.0L * h * h * h);
                        }
                    };
                    const long double d1 = diff(h1), d2 = diff(h2);
                    return static_cast<double>((h1 * h1 * d2 - h2 * h2 * d1) / (h1 * h1 - h2 * h2));
                };
                const double fd1 = richardson(1, 1e-3L, 1e-4L);
                const double fd2 = richardson(2, 1e-3L, 1e-4L);
                const double fd3 = richardson(3, 2e-3L, 1e-3L);
                worst = std::max(worst, std::abs(stack.v(1) / fd1 - 1.0));
                worst = std::max(worst, std::abs(stack.v(2) / fd2 - 1.0));
                worst = std::max(worst, std::abs(stack.v(3) / fd3 - 1.0));
            }
        }
        return {worst < 1e-6, "worst relative gap " + std::to_string(worst)};
    });

    run_criterion(4, "stochastic-moments", []() -> std::pair<bool, std::string> {
        const Eigen::Index p = 800, n = 400;
        const double cn = 2.0;
        SpectralModel model(paper_spectrum(p), sample_haar_basis(p, mix_seed(4, 0)));
        const auto theta = WeightMatrix::scaled_identity(p, 1.0 / static_cast<double>(p));
        std::array<double, 4> acc{0, 0, 0, 0};
        const int reps = 20;
        for (int r = 0; r < reps; ++r) {
            auto y = generate_observations(model, n, Dist::Normal, Eigen::VectorXd::Zero(p),
                                           mix_seed(41, static_cast<std::uint64_t>(r)));
            const auto ctx = PluginContext::from_data(y);
            for (int m = 1; m <= 3; ++m) acc[static_cast<std::size_t>(m)] += ctx.mean_trace_pinv_pow(m);
        }
        std::string detail;
        for (int m = 1; m <= 3; ++m) {
            const double lim = limit_moment(Family::MoorePenrose, m, 0.0, theta, cn, model).value;
            const double rel = std::abs(acc[static_cast<std::size_t>(m)] / reps / lim - 1.0);
            detail += "m" + std::to_string(m) + "=" + std::to_string(rel) + " ";
            if (rel > ((m <= 2) ? 0.05 : 0.10)) return {false, detail};
        }
        return {true, detail};
    });

    run_criterion(5, "estimator-convergence", []() -> std::pair<bool, std::string> {
        // n = 500, c = 3 band; identity basis is distribution-equivalent for
        // spectral statistics under normal data
        {
            const Eigen::Index n = 500, p = 1500;
            SpectralModel model(paper_spectrum(p));
            const double v0 = solve_v(0.0, 3.0, model);
            const double v1 = v_derivatives(0.0, 1, 3.0, model).v(1);
            double e0 = 0.0, e1 = 0.0;
            const int reps = 50;
            for (int r = 0; r < reps; ++r) {
                auto y = generate_observations(model, n, Dist::Normal, Eigen::VectorXd::Zero(p),
                                               mix_seed(5, static_cast<std::uint64_t>(r)));
                const auto ctx = PluginContext::from_data(y);
                e0 += std::abs(ctx.hat_v_derivative(0, 0.0) / v0 - 1.0);
                e1 += std::abs(ctx.hat_v_derivative(1, 0.0) / v1 - 1.0);
            }
            e0 /= reps;
            e1 /= reps;
            if (e0 >= 0.03 || e1 >= 0.08) {
                return {false, "v0 err " + std::to_string(e0) + ", v1 err " + std::to_string(e1)};
            }
        }
        // Figure-1 shape at n = 100: error at c = 3 below error at c = 1.2
        auto mean_abs_err = [&](double cn) {
            const Eigen::Index n = 100;
            const auto p = static_cast<Eigen::Index>(std::lround(cn * 100.0));
            SpectralModel model(paper_spectrum(p));
            const double v0 = solve_v(0.0, cn, model);
            double e = 0.0;
            const int reps = 50;
            for (int r = 0; r < reps; ++r) {
                auto y = generate_observations(model, n, Dist::Normal, Eigen::VectorXd::Zero(p),
                                               mix_seed(55, static_cast<std::uint64_t>(r)));
                e += std::abs(PluginContext::from_data(y).hat_v_derivative(0, 0.0) / v0 - 1.0);
            }
            return e / reps;
        };
        const double far = mean_abs_err(3.0);
        const double near = mean_abs_err(1.2);
        if (!(far < near)) {
            return {false, "err(c=3)=" + std::to_string(far) + " !< err(c=1.2)=" + std::to_string(near)};
        }
        return {true, "bands met; err(c=3)=" + std::to_string(far) + " < err(c=1.2)=" + std::to_string(near)};
    });

    run_criterion(6, "v-monotonicity", []() -> std::pair<bool, std::string> {
        SpectralModel paper(paper_spectrum(10));
        int violations = 0;
        for (double cn : {1.5, 2.0, 4.0}) {
            double prev = solve_v(0.0, cn, paper);
            for (int i = 1; i < 50; ++i) {
                const double cur = solve_v(10.0 * i / 49.0, cn, paper);
                if (!(cur < prev)) ++violations;
                prev = cur;
            }
        }
        return {violations == 0, std::to_string(violations) + " violations"};
    });

    run_criterion(7, "mpr-mp-handoff", []() -> std::pair<bool, std::string> {
        SpectralModel paper(paper_spectrum(10));
        const auto theta = WeightMatrix::scaled_identity(10, 0.1);
        std::string detail;
        for (int m = 1; m <= 2; ++m) {
            const double s0 = limit_moment(Family::MoorePenrose, m, 0.0, theta, 2.0, paper).value;
            const double d3 = std::abs(mpr_limit_dform(m, 1e-3, theta, 2.0, paper) - s0);
            const double d4 = std::abs(mpr_limit_dform(m, 1e-4, theta, 2.0, paper) - s0);
            detail += "m" + std::to_string(m) + " ratio=" + std::to_string(d4 / d3) + " ";
            if (!(d4 <= 0.12 * d3)) return {false, detail};
        }
        return {true, detail};
    });

    run_criterion(8, "prial-ordering", []() -> std::pair<bool, std::string> {
        ExperimentConfig config;
        config.kind = ExperimentKind::Prial;
        config.n_list = {100};
        config.c_grid = {2.0};
        config.reps = 50;
        config.base_seed = 8;
        config.methods = {"mp", "ridge", "eb", "oracle_nl"};
        const auto rows = run_experiment(config);
        double mp = 0, ridge = 0, eb = 0, onl = 0;
        for (const auto& r : rows) {
            if (r.errors > 0) return {false, "degenerate replications in " + r.method};
            if (r.method == "mp") mp = r.stat;
            if (r.method == "ridge") ridge = r.stat;
            if (r.method == "eb") eb = r.stat;
            if (r.method == "oracle_nl") onl = r.stat;
        }
        std::ostringstream detail;
        detail << "mp=" << mp << " ridge=" << ridge << " eb=" << eb << " oracle_nl=" << onl;
        if (!(mp > 0.0)) return {false, detail.str()};
        if (!(ridge >= mp - 2.0)) return {false, detail.str()};
        if (!(ridge >= eb)) return {false, detail.str()};
        if (!(onl >= ridge - 3.0)) return {false, detail.str()};
        return {true, detail.str()};
    });

    run_criterion(9, "rosv-ordering", []() -> std::pair<bool, std::string> {
        ExperimentConfig config;
        config.kind = ExperimentKind::Rosv;
        config.n_list = {100};
        config.c_grid = {4.0};
        config.reps = 50;
        config.base_seed = 9;
        config.methods = {"mp_bf", "plugin_mp", "reflexive"};
        const auto rows = run_experiment(config);
        double bf = 0, plugin = 0, reflexive = 0;
        for (const auto& r : rows) {
            if (r.errors > 0) return {false, "degenerate replications in " + r.method};
            if (r.method == "mp_bf") bf = r.stat;
            if (r.method == "plugin_mp") plugin = r.stat;
            if (r.method == "reflexive") reflexive = r.stat;
        }
        std::ostringstream detail;
        detail << "mp_bf=" << bf << " plugin=" << plugin << " reflexive=" << reflexive;
        if (!(bf < plugin)) return {false, detail.str()};
        if (!(bf <= reflexive)) return {false, detail.str()};
        return {true, detail.str()};
    });

    run_criterion(10, "bona-fide-vs-oracle", []() -> std::pair<bool, std::string> {
        const Eigen::Index n = 250, p = 500;
        SpectralModel model(paper_spectrum(p), sample_haar_basis(p, mix_seed(10, 0)));
        const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(p, p);
        double sa = 0, sao = 0, sb = 0, sbo = 0;
        // the oracle alpha* is ~0.007 here, so the 10% band is ~7e-4; with 50
        // replications the Monte Carlo error of the averages alone is ~4e-4,
        // i.e. the stated band is under two standard errors wide. 200
        // replications measure the consistency claim instead of the draw
        // (still well inside the stated runtime budget).
        const int reps = 200;
        for (int r = 0; r < reps; ++r) {
            auto y = generate_observations(model, n, Dist::Normal, Eigen::VectorXd::Zero(p),
                                           mix_seed(101, static_cast<std::uint64_t>(r)));
            const Eigen::MatrixXd s = sample_covariance(y);
            const auto ctx = PluginContext::from_covariance(s, n);
            const auto plan = bona_fide_precision(ctx, PrecisionMethod::MP, eye);
            const auto orc =
                oracle_intensities(generalized_inverse(s, InverseKind::MoorePenrose), model, eye);
            sa += plan.alpha;
            sao += orc.alpha;
            sb += plan.beta;
            sbo += orc.beta;
        }
        const double ra = std::abs(sa - sao) / std::abs(sao);
        const double rb = std::abs(sb - sbo) / std::abs(sbo);
        std::ostringstream detail;
        detail << "alpha rel=" << ra << " beta rel=" << rb << " (" << reps << "-rep averages)";
        return {ra < 0.10 && rb < 0.10, detail.str()};
    });

    run_criterion(11, "simulate-determinism", [&cli]() -> std::pair<bool, std::string> {
        if (cli.empty()) return {false, "no CLI binary path given"};
        const std::string base = cli + " simulate --kind prial --reps 4 --n 40 --c 2,3 --seed 3"
                                       " --methods mp,identity --out ";
        auto run_one = [&](const std::string& out, int workers) {
            const std::string cmd =
                base + out + " --workers " + std::to_string(workers) + " 2>/dev/null";
            return std::system(cmd.c_str()) == 0;
        };
        if (!run_one("/tmp/ps_acc_w1.csv", 1)) return {false, "workers=1 run failed"};
        if (!run_one("/tmp/ps_acc_w2.csv", 2)) return {false, "workers=2 run failed"};
        if (!run_one("/tmp/ps_acc_w8.csv", 8)) return {false, "workers=8 run failed"};
        const std::string a = slurp("/tmp/ps_acc_w1.csv");
        const bool same = !a.empty() && a == slurp("/tmp/ps_acc_w2.csv") &&
                          a == slurp("/tmp/ps_acc_w8.csv");
        return {same, same ? "byte-identical across 1/2/8 workers" : "outputs differ"};
    });

    if (g_failures == 0) {
        std::printf("acceptance: all 11 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criteria failed\n", g_failures);
    return g_failures;
}
