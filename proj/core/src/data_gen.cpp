#include "pseudoshrink/data_gen.hpp"

#include <Eigen/Dense>
#include <stdexcept>

#include "pseudoshrink/rng.hpp"

namespace pseudoshrink {

Dist parse_dist(const std::string& tag) {
    if (tag == "normal") return Dist::Normal;
    if (tag == "scaled_t5") return Dist::ScaledT5;
    throw std::invalid_argument("unknown distribution tag: " + tag);
}

std::string dist_name(Dist d) { return d == Dist::Normal ? "normal" : "scaled_t5"; }

Eigen::MatrixXd sample_haar_basis(Eigen::Index p, std::uint64_t seed) {
    if (p < 1) throw std::invalid_argument("sample_haar_basis: p >= 1 required");
    Rng rng(seed);
    Eigen::MatrixXd a(p, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < p; ++i) a(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ();
    const auto& qrm = qr.matrixQR();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (qrm(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
}

ObservationMatrix generate_observations(const SpectralModel& model, Eigen::Index n, Dist dist,
                                        const Eigen::VectorXd& mean, std::uint64_t seed) {
    const Eigen::Index p = model.p();
    if (n < 2) throw std::invalid_argument("generate_observations: n >= 2 required");
    if (mean.size() != p) throw std::invalid_argument("generate_observations: mean length mismatch");

    Rng rng(seed);
    Eigen::MatrixXd x(p, n);
    if (dist == Dist::Normal) {
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < p; ++i) x(i, j) = rng.normal();
    } else {
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < p; ++i) x(i, j) = rng.scaled_t5();
    }

    ObservationMatrix y;
    y.entries = model.sqrt_times(x);
    if (!mean.isZero(0.0)) y.entries.colwise() += mean;
    y.mean = mean;
    return y;
}

Eigen::MatrixXd sample_covariance(const ObservationMatrix& y) {
    const auto n = y.n();
    if (n < 2) throw std::invalid_argument("sample_covariance: n >= 2 required");
    const double nd = static_cast<double>(n);
    const Eigen::VectorXd ybar = y.entries.rowwise().sum() / nd;
    Eigen::MatrixXd s = (y.entries * y.entries.transpose()) / nd;
    s.noalias() -= ybar * ybar.transpose();
    // enforce exact symmetry against rounding in the rank-one update
    s = 0.5 * (s + s.transpose()).eval();
    return s;
}

}  // namespace pseudoshrink
