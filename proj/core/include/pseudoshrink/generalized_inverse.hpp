#pragma once

#include <Eigen/Core>
#include <string>

#include "pseudoshrink/weight_matrix.hpp"

namespace pseudoshrink {

enum class InverseKind { MoorePenrose, Ridge, MPR, Ordinary };

InverseKind parse_inverse_kind(const std::string& tag);

/// One generalized inverse of a sample covariance, carried as its spectral
/// decomposition plus the dense matrix. `eigenvalues`/`vectors` are the full
/// p-dimensional eigensystem of the *source* matrix S; `inv_eigenvalues` are
/// the transformed eigenvalues that define the inverse.
struct GeneralizedInverse {
    InverseKind kind;
    double t = 0.0;
    Eigen::VectorXd source_eigenvalues;  // eigenvalues of S (ascending)
    Eigen::VectorXd inv_eigenvalues;     // eigenvalues of the inverse, same order
    Eigen::MatrixXd vectors;             // shared eigenvectors
    Eigen::Index rank = 0;               // numerical rank of S

    Eigen::MatrixXd dense() const;
};

/// Default pseudoinverse cutoff: p * machine epsilon, relative to lambda_max.
double default_rank_tol(Eigen::Index p);

/// Moore-Penrose: invert eigenvalues above rank_tol*lambda_max, zero the rest.
/// Ridge: (S + tI)^{-1}. MPR: (S+tI)^{-1} S (S+tI)^{-1}. Ordinary: S^{-1}.
GeneralizedInverse generalized_inverse(const Eigen::MatrixXd& s, InverseKind kind, double t = 0.0,
                                       double rank_tol = -1.0);

/// tr(G^m Theta), evaluated through the spectral decomposition (G^m is never
/// formed densely).
double weighted_trace_power(const GeneralizedInverse& g, int m, const WeightMatrix& theta);

}  // namespace pseudoshrink
