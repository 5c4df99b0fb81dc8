#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pseudoshrink/data_gen.hpp"
#include "pseudoshrink/deterministic.hpp"
#include "pseudoshrink/plugin.hpp"
#include "pseudoshrink/rng.hpp"

using namespace pseudoshrink;

namespace {

PluginContext ctx_from_eigs(std::initializer_list<double> eigs, Eigen::Index n) {
    Eigen::VectorXd d(static_cast<Eigen::Index>(eigs.size()));
    Eigen::Index i = 0;
    for (double v : eigs) d[i++] = v;
    return PluginContext::from_covariance(Eigen::MatrixXd(d.asDiagonal()), n);
}

}  // namespace

TEST_CASE("hat_v_derivative hand values") {
    const auto ctx = ctx_from_eigs({4.0, 1.0, 0.0, 0.0}, 2);
    CHECK(ctx.cn() == 2.0);
    CHECK(ctx.hat_v_derivative(0, 0.0) == doctest::Approx(0.625).epsilon(1e-14));
    CHECK(ctx.hat_v_derivative(1, 0.0) == doctest::Approx(-0.53125).epsilon(1e-14));

    const auto ctx2 = ctx_from_eigs({2.0, 0.0}, 1);
    CHECK(ctx2.hat_v_derivative(0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    // t = 0 needs p > n
    const auto square = ctx_from_eigs({2.0, 1.0}, 3);
    CHECK_THROWS_AS(square.hat_v_derivative(0, 0.0), std::domain_error);
    CHECK_THROWS_AS(ctx2.hat_v_derivative(9, 0.0), std::invalid_argument);
}

TEST_CASE("hat_h hand values") {
    const auto ctx = ctx_from_eigs({1.0, 0.0}, 1);
    CHECK(ctx.hat_h(2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ctx.hat_h(3) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(ctx.hat_h(4), std::invalid_argument);
}

TEST_CASE("hat_d hand values and continuity at t = 0") {
    const auto ctx = ctx_from_eigs({2.0, 0.0}, 1);
    const auto theta = WeightMatrix::scaled_identity(2, 0.5);
    CHECK(ctx.hat_d(0, theta, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ctx.hat_d(0, theta, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    // continuity: t tr[(S+tI)^{-1} Theta] -> tr[(I - S S^+) Theta]
    CHECK(ctx.hat_d(0, theta, 1e-8) == doctest::Approx(ctx.hat_d(0, theta, 0.0)).epsilon(1e-6));

    CHECK_THROWS_AS(ctx.hat_d(2, theta, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ctx.hat_d(4, theta, 0.0), std::invalid_argument);
}

TEST_CASE("hat_q hand values") {
    const auto ctx = ctx_from_eigs({2.0, 1.0}, 4);  // c_n = 0.5
    const auto theta = WeightMatrix::scaled_identity(2, 0.5);
    CHECK(ctx.hat_q(1, theta) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(ctx.hat_q(2, theta) == doctest::Approx(1.375).epsilon(1e-14));
    // q_1 with Theta = e_i e_i^T extracts S_ii
    const auto e1 = WeightMatrix::low_rank({Eigen::VectorXd::Unit(2, 0)});
    CHECK(ctx.hat_q(1, e1) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("near-singular contexts carry a warning flag") {
    CHECK(ctx_from_eigs({3.0, 1.0, 0.5, 0.0}, 4).near_singular() == false);  // c_n = 1
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(21, 21);
    CHECK(PluginContext::from_covariance(s, 20).near_singular() == true);    // c_n = 1.05
    CHECK(ctx_from_eigs({4.0, 1.0, 0.0, 0.0}, 2).near_singular() == false);  // c_n = 2
}

TEST_CASE("plug-in estimators are invariant under column permutation") {
    const Eigen::Index p = 30, n = 12;
    SpectralModel model(paper_spectrum(p));
    auto y = generate_observations(model, n, Dist::Normal, Eigen::VectorXd::Zero(p), 41);
    ObservationMatrix shuffled = y;
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 eng(4);
    std::shuffle(perm.begin(), perm.end(), eng);
    for (Eigen::Index j = 0; j < n; ++j) {
        shuffled.entries.col(j) = y.entries.col(perm[static_cast<std::size_t>(j)]);
    }
    const auto a = PluginContext::from_data(y);
    const auto b = PluginContext::from_data(shuffled);
    const auto theta = WeightMatrix::scaled_identity(p, 1.0 / static_cast<double>(p));
    CHECK(a.hat_v_derivative(0, 0.0) == doctest::Approx(b.hat_v_derivative(0, 0.0)).epsilon(1e-10));
    CHECK(a.hat_v_derivative(1, 0.5) == doctest::Approx(b.hat_v_derivative(1, 0.5)).epsilon(1e-10));
    CHECK(a.hat_h(3) == doctest::Approx(b.hat_h(3)).epsilon(1e-10));
    CHECK(a.hat_d(2, theta, 0.0) == doctest::Approx(b.hat_d(2, theta, 0.0)).epsilon(1e-10));
    CHECK(a.hat_q(2, theta) == doctest::Approx(b.hat_q(2, theta)).epsilon(1e-10));
}

TEST_CASE("companion and dense routes agree") {
    const Eigen::Index p = 25, n = 10;
    SpectralModel model(paper_spectrum(p));
    auto y = generate_observations(model, n, Dist::Normal, Eigen::VectorXd::Zero(p), 8);
    const auto fast = PluginContext::from_data(y);
    const auto dense = PluginContext::from_covariance(sample_covariance(y), n);
    const auto theta = WeightMatrix::scaled_identity(p, 1.0 / static_cast<double>(p));
    CHECK(fast.rank() == dense.rank());
    CHECK(fast.mean_trace_pinv_pow(3) == doctest::Approx(dense.mean_trace_pinv_pow(3)).epsilon(1e-9));
    CHECK(fast.trace_ridge_pow_theta(0.7, 2, theta) ==
          doctest::Approx(dense.trace_ridge_pow_theta(0.7, 2, theta)).epsilon(1e-9));
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(p);
    CHECK(fast.quad_pinv(ones, ones, 2) == doctest::Approx(dense.quad_pinv(ones, ones, 2)).epsilon(1e-9));
    const double diff = (fast.dense_inverse(InverseKind::Ridge, 0.7) -
                         dense.dense_inverse(InverseKind::Ridge, 0.7))
                            .cwiseAbs()
                            .maxCoeff();
    CHECK(diff < 1e-9);
}

TEST_CASE("v-hat consistency sweep at n = 500" * doctest::timeout(600)) {
    // mirrors the estimator-convergence figures: normal data, paper spectrum
    const Eigen::Index n = 500;
    const int reps = 50;
    for (double cn : {2.5, 3.0, 4.0}) {
        const auto p = static_cast<Eigen::Index>(std::lround(cn * static_cast<double>(n)));
        SpectralModel model(paper_spectrum(p));
        const double v0 = solve_v(0.0, cn, model);
        const auto stack = v_derivatives(0.0, 1, cn, model);
        const double v1 = stack.v(1);
        const double h2 = hk_value(stack, 2, model);
        double e0 = 0.0, e1 = 0.0, eh = 0.0;
        for (int r = 0; r < reps; ++r) {
            auto y = generate_observations(model, n, Dist::Normal, Eigen::VectorXd::Zero(p),
                                           mix_seed(707, static_cast<std::uint64_t>(r)));
            PluginContext ctx = PluginContext::from_data(y);
            e0 += std::abs(ctx.hat_v_derivative(0, 0.0) / v0 - 1.0);
            e1 += std::abs(ctx.hat_v_derivative(1, 0.0) / v1 - 1.0);
            eh += std::abs(ctx.hat_h(2) / h2 - 1.0);
        }
        CHECK(e0 / reps < 0.03);
        CHECK(e1 / reps < 0.08);
        if (cn == 3.0) CHECK(eh / reps < 0.03);
    }
}

TEST_CASE("q-hat_2 removes the trace-product bias" * doctest::timeout(120)) {
    // Sigma = I: tr(S^2 Theta) concentrates at (c+1) tr(Theta) while the
    // corrected statistic recovers tr(Sigma^2 Theta)/tr(Theta) = 1
    const Eigen::Index p = 200, n = 400;
    SpectralModel model(Eigen::VectorXd::Ones(p));
    const auto theta = WeightMatrix::scaled_identity(p, 1.0 / static_cast<double>(p));
    double acc = 0.0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
        auto y = generate_observations(model, n, Dist::Normal, Eigen::VectorXd::Zero(p),
                                       mix_seed(606, static_cast<std::uint64_t>(r)));
        acc += PluginContext::from_data(y).hat_q(2, theta);
    }
    CHECK(acc / reps == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("v-hat(t) consistency at n = 100" * doctest::timeout(300)) {
    const Eigen::Index n = 100;
    const int reps = 50;
    for (double cn : {1.5, 3.0}) {
        const auto p = static_cast<Eigen::Index>(std::lround(cn * static_cast<double>(n)));
        SpectralModel model(paper_spectrum(p));
        for (double t : {1.0, 2.0, 5.0}) {
            const double vt = solve_v(t, cn, model);
            double err = 0.0;
            for (int r = 0; r < reps; ++r) {
                auto y = generate_observations(model, n, Dist::Normal, Eigen::VectorXd::Zero(p),
                                               mix_seed(808, static_cast<std::uint64_t>(r)));
                err += std::abs(PluginContext::from_data(y).hat_v_derivative(0, t) / vt - 1.0);
            }
            CHECK(err / reps < 0.05);
        }
    }
}
