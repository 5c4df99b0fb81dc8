#include "pseudoshrink/generalized_inverse.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pseudoshrink {

InverseKind parse_inverse_kind(const std::string& tag) {
    if (tag == "mp" || tag == "moore-penrose") return InverseKind::MoorePenrose;
    if (tag == "ridge") return InverseKind::Ridge;
    if (tag == "mpr") return InverseKind::MPR;
    if (tag == "ordinary") return InverseKind::Ordinary;
    throw std::invalid_argument("unknown inverse kind: " + tag);
}

double default_rank_tol(Eigen::Index p) {
    return static_cast<double>(p) * std::numeric_limits<double>::epsilon();
}

Eigen::MatrixXd GeneralizedInverse::dense() const {
    return vectors * inv_eigenvalues.asDiagonal() * vectors.transpose();
}

GeneralizedInverse generalized_inverse(const Eigen::MatrixXd& s, InverseKind kind, double t,
                                       double rank_tol) {
    if (s.rows() != s.cols()) throw std::invalid_argument("generalized_inverse: square matrix required");
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + s.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("generalized_inverse: symmetric matrix required");
    }
    if ((kind == InverseKind::Ridge || kind == InverseKind::MPR) && t <= 0.0) {
        throw std::invalid_argument("generalized_inverse: t > 0 required for Ridge/MPR");
    }
    if (rank_tol < 0.0) rank_tol = default_rank_tol(s.rows());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (es.info() != Eigen::Success) throw std::runtime_error("generalized_inverse: eigensolver failed");

    GeneralizedInverse g;
    g.kind = kind;
    g.t = (kind == InverseKind::Ridge || kind == InverseKind::MPR) ? t : 0.0;
    g.source_eigenvalues = es.eigenvalues();
    g.vectors = es.eigenvectors();

    const double lam_max = std::max(0.0, g.source_eigenvalues.maxCoeff());
    const double cut = rank_tol * lam_max;
    g.rank = 0;
    for (Eigen::Index i = 0; i < g.source_eigenvalues.size(); ++i) {
        if (g.source_eigenvalues[i] > cut) ++g.rank;
    }

    const Eigen::Index p = s.rows();
    g.inv_eigenvalues.resize(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double d = g.source_eigenvalues[i];
        switch (kind) {
            case InverseKind::MoorePenrose:
                g.inv_eigenvalues[i] = (d > cut) ? 1.0 / d : 0.0;
                break;
            case InverseKind::Ridge:
                g.inv_eigenvalues[i] = 1.0 / (d + t);
                break;
            case InverseKind::MPR: {
                const double dt = d + t;
                g.inv_eigenvalues[i] = std::max(d, 0.0) / (dt * dt);
                break;
            }
            case InverseKind::Ordinary:
                if (d <= cut) {
                    throw std::domain_error("generalized_inverse: Ordinary inverse of a singular matrix");
                }
                g.inv_eigenvalues[i] = 1.0 / d;
                break;
        }
    }
    return g;
}

double weighted_trace_power(const GeneralizedInverse& g, int m, const WeightMatrix& theta) {
    if (m < 1) throw std::invalid_argument("weighted_trace_power: m >= 1 required");
    if (theta.p() != g.vectors.rows()) {
        throw std::invalid_argument("weighted_trace_power: dimension mismatch");
    }
    const Eigen::Index p = g.vectors.rows();
    Eigen::VectorXd pw(p);
    for (Eigen::Index i = 0; i < p; ++i) pw[i] = std::pow(g.inv_eigenvalues[i], m);

    switch (theta.form()) {
        case WeightMatrix::Form::ScaledIdentity:
            return theta.scale() * pw.sum();
        case WeightMatrix::Form::LowRank: {
            double acc = 0.0;
            for (std::size_t j = 0; j < theta.vectors().size(); ++j) {
                const Eigen::VectorXd proj = g.vectors.transpose() * theta.vectors()[j];
                acc += theta.coeffs()[j] * proj.cwiseAbs2().dot(pw);
            }
            return acc;
        }
        case WeightMatrix::Form::Dense: {
            const Eigen::MatrixXd w = theta.dense_matrix() * g.vectors;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < p; ++i) {
                acc += pw[i] * g.vectors.col(i).dot(w.col(i));
            }
            return acc;
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace pseudoshrink
