#include "pseudoshrink/spectral_model.hpp"

#include <cmath>
#include <stdexcept>

namespace pseudoshrink {

SpectralModel::SpectralModel(Eigen::VectorXd eigenvalues, std::optional<Eigen::MatrixXd> basis)
    : eigenvalues_(std::move(eigenvalues)), basis_(std::move(basis)) {
    if (eigenvalues_.size() == 0) throw std::invalid_argument("SpectralModel: empty spectrum");
    if (eigenvalues_.minCoeff() <= 0.0 || !eigenvalues_.allFinite()) {
        throw std::invalid_argument("SpectralModel: eigenvalues must be positive and finite");
    }
    if (basis_) {
        if (basis_->rows() != eigenvalues_.size() || basis_->cols() != eigenvalues_.size()) {
            throw std::invalid_argument("SpectralModel: basis dimension mismatch");
        }
        const double defect =
            (basis_->transpose() * (*basis_) -
             Eigen::MatrixXd::Identity(basis_->rows(), basis_->cols()))
                .cwiseAbs()
                .maxCoeff();
        if (defect > 1e-10) {
            throw std::invalid_argument("SpectralModel: basis is not orthonormal (defect > 1e-10)");
        }
    }
}

const Eigen::MatrixXd& SpectralModel::basis() const {
    if (!basis_) throw std::logic_error("SpectralModel: no explicit basis stored");
    return *basis_;
}

Eigen::MatrixXd SpectralModel::dense() const {
    if (!basis_) return eigenvalues_.asDiagonal();
    return (*basis_) * eigenvalues_.asDiagonal() * basis_->transpose();
}

Eigen::MatrixXd SpectralModel::dense_inverse() const {
    const Eigen::VectorXd inv = eigenvalues_.cwiseInverse();
    if (!basis_) return inv.asDiagonal();
    return (*basis_) * inv.asDiagonal() * basis_->transpose();
}

Eigen::MatrixXd SpectralModel::sqrt_times(const Eigen::MatrixXd& x) const {
    const Eigen::VectorXd root = eigenvalues_.cwiseSqrt();
    if (!basis_) return root.asDiagonal() * x;
    return (*basis_) * (root.asDiagonal() * (basis_->transpose() * x));
}

double SpectralModel::mean_eigen_pow(int k) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
        acc += std::pow(eigenvalues_[i], k);
    }
    return acc / static_cast<double>(eigenvalues_.size());
}

Eigen::VectorXd paper_spectrum(Eigen::Index p) {
    if (p < 1) throw std::invalid_argument("paper_spectrum: p >= 1 required");
    const auto n1 = static_cast<Eigen::Index>(std::lround(0.2 * static_cast<double>(p)));
    const auto n2 = static_cast<Eigen::Index>(std::lround(0.4 * static_cast<double>(p)));
    Eigen::VectorXd lam(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        lam[i] = (i < n1) ? 1.0 : (i < n1 + n2) ? 3.0 : 10.0;
    }
    return lam;
}

}  // namespace pseudoshrink
