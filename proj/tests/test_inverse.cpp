#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "pseudoshrink/data_gen.hpp"
#include "pseudoshrink/generalized_inverse.hpp"

using namespace pseudoshrink;

namespace {

Eigen::MatrixXd random_psd(Eigen::Index p, Eigen::Index n, std::uint64_t seed) {
    SpectralModel model(paper_spectrum(p));
    return sample_covariance(
        generate_observations(model, n, Dist::Normal, Eigen::VectorXd::Zero(p), seed));
}

}  // namespace

TEST_CASE("generalized inverse definitions on diag(2, 0)") {
    Eigen::MatrixXd s = Eigen::Vector2d(2.0, 0.0).asDiagonal();

    // S = diag(2, 0): MP -> diag(0.5, 0), Ridge(1) -> diag(1/3, 1),
    // MPR(1) -> diag(2/9, 0)
    auto mp = generalized_inverse(s, InverseKind::MoorePenrose);
    CHECK(mp.dense()(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(mp.dense()(1, 1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(mp.rank == 1);

    auto ridge = generalized_inverse(s, InverseKind::Ridge, 1.0);
    CHECK(ridge.dense()(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(ridge.dense()(1, 1) == doctest::Approx(1.0).epsilon(1e-14));

    auto mpr = generalized_inverse(s, InverseKind::MPR, 1.0);
    CHECK(mpr.dense()(0, 0) == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
    CHECK(mpr.dense()(1, 1) == doctest::Approx(0.0).epsilon(1e-14));

    CHECK_THROWS_AS(generalized_inverse(s, InverseKind::Ordinary), std::domain_error);
    CHECK_THROWS_AS(generalized_inverse(s, InverseKind::Ridge, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(generalized_inverse(s, InverseKind::MPR, -1.0), std::invalid_argument);
}

TEST_CASE("Penrose conditions hold on random singular covariances") {
    const Eigen::MatrixXd s = random_psd(40, 25, 17);
    const Eigen::MatrixXd g = generalized_inverse(s, InverseKind::MoorePenrose).dense();
    const double scale = s.norm() * g.norm();
    CHECK((g * s * g - g).norm() / g.norm() < 1e-8);
    CHECK((s * g * s - s).norm() / s.norm() < 1e-8);
    CHECK(((g * s).transpose() - g * s).norm() / scale < 1e-8);
    CHECK(((s * g).transpose() - s * g).norm() / scale < 1e-8);
}

TEST_CASE("MPR converges to Moore-Penrose linearly in t") {
    const Eigen::MatrixXd s = random_psd(50, 25, 23);
    const Eigen::MatrixXd mp = generalized_inverse(s, InverseKind::MoorePenrose).dense();
    double prev = 0.0;
    double ratio21 = 0.0, ratio32 = 0.0;
    int idx = 0;
    for (double t : {1e-2, 1e-3, 1e-4}) {
        const double dist = (generalized_inverse(s, InverseKind::MPR, t).dense() - mp).norm();
        if (idx == 1) ratio21 = prev / dist;
        if (idx == 2) ratio32 = prev / dist;
        prev = dist;
        ++idx;
    }
    // ||MPR(t) - MP|| ~ C t, so successive ratios sit near 10
    CHECK(ratio21 > 7.0);
    CHECK(ratio21 < 13.0);
    CHECK(ratio32 > 9.0);
    CHECK(ratio32 < 11.0);
}

TEST_CASE("weighted trace powers") {
    Eigen::MatrixXd s = Eigen::Vector2d(0.0, 2.0).asDiagonal();
    auto g = generalized_inverse(s, InverseKind::MoorePenrose);  // diag(0, 0.5)

    CHECK(weighted_trace_power(g, 2, WeightMatrix::scaled_identity(2, 0.5)) ==
          doctest::Approx(0.125).epsilon(1e-14));

    // diagonal extraction with Theta = e_i e_i^T
    Eigen::VectorXd e2 = Eigen::VectorXd::Unit(2, 1);
    CHECK(weighted_trace_power(g, 1, WeightMatrix::low_rank({e2})) ==
          doctest::Approx(0.5).epsilon(1e-12));

    // symmetrized off-diagonal of a diagonal matrix vanishes
    Eigen::VectorXd e1 = Eigen::VectorXd::Unit(2, 0);
    const auto theta = WeightMatrix::symmetrized_outer(e1, e2);
    CHECK(std::abs(weighted_trace_power(g, 3, theta)) < 1e-14);
}

TEST_CASE("dense and low-rank weight representations agree") {
    const Eigen::MatrixXd s = random_psd(30, 60, 31);
    auto g = generalized_inverse(s, InverseKind::Ridge, 0.7);
    Eigen::VectorXd th1 = Eigen::VectorXd::LinSpaced(30, -1.0, 2.0);
    Eigen::VectorXd th2 = Eigen::VectorXd::LinSpaced(30, 0.5, -0.5);
    const auto lowrank = WeightMatrix::low_rank({th1, th2}, {1.0, -0.3});
    const auto dense = WeightMatrix::dense(lowrank.to_dense());
    for (int m : {1, 2, 3, 4}) {
        const double a = weighted_trace_power(g, m, lowrank);
        const double b = weighted_trace_power(g, m, dense);
        CHECK(a == doctest::Approx(b).epsilon(1e-10));
    }
}
