#pragma once

#include <Eigen/Core>
#include <optional>

namespace pseudoshrink {

/// Population covariance Sigma given as eigenvalues plus an orthonormal basis
/// (identity when absent). All deterministic-equivalent machinery consumes the
/// spectrum; the basis only matters when data or dense matrices are formed.
class SpectralModel {
public:
    SpectralModel(Eigen::VectorXd eigenvalues, std::optional<Eigen::MatrixXd> basis = std::nullopt);

    Eigen::Index p() const { return eigenvalues_.size(); }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    bool has_basis() const { return basis_.has_value(); }
    const Eigen::MatrixXd& basis() const;

    Eigen::MatrixXd dense() const;          // Sigma
    Eigen::MatrixXd dense_inverse() const;  // Sigma^{-1}
    Eigen::MatrixXd sqrt_times(const Eigen::MatrixXd& x) const;  // Sigma^{1/2} * x

    // (1/p) tr(Sigma^k), k may be negative
    double mean_eigen_pow(int k) const;

private:
    Eigen::VectorXd eigenvalues_;
    std::optional<Eigen::MatrixXd> basis_;
};

/// The simulation-study spectrum: 20% eigenvalues one, 40% three, 40% ten.
Eigen::VectorXd paper_spectrum(Eigen::Index p);

}  // namespace pseudoshrink
