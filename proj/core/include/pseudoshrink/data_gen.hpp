#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "pseudoshrink/spectral_model.hpp"

namespace pseudoshrink {

enum class Dist { Normal, ScaledT5 };

Dist parse_dist(const std::string& tag);
std::string dist_name(Dist d);

struct ObservationMatrix {
    Eigen::MatrixXd entries;  // p x n, columns are observations
    Eigen::VectorXd mean;     // the mu used at generation time

    Eigen::Index p() const { return entries.rows(); }
    Eigen::Index n() const { return entries.cols(); }
};

/// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with
/// each Q column flipped so the matching R diagonal entry is positive, which
/// pins the factorization and makes the law exactly Haar.
Eigen::MatrixXd sample_haar_basis(Eigen::Index p, std::uint64_t seed);

/// Y = mu 1^T + Sigma^{1/2} X with X iid unit-variance entries.
ObservationMatrix generate_observations(const SpectralModel& model, Eigen::Index n, Dist dist,
                                        const Eigen::VectorXd& mean, std::uint64_t seed);

/// S = (1/n) Y Y^T - ybar ybar^T
Eigen::MatrixXd sample_covariance(const ObservationMatrix& y);

}  // namespace pseudoshrink
