#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pseudoshrink {

/// Weighting matrix Theta for trace functionals tr(A Theta). Three storage
/// forms: scaled identity s*I, dense symmetric, or a signed low-rank sum
/// sum_i c_i theta_i theta_i^T. Non-symmetric choices like 1 b^T enter through
/// the symmetrization identity, see `symmetrized_outer`.
class WeightMatrix {
public:
    enum class Form { ScaledIdentity, Dense, LowRank };

    static WeightMatrix scaled_identity(Eigen::Index p, double scale, std::string note = {}) {
        WeightMatrix w;
        w.form_ = Form::ScaledIdentity;
        w.p_ = p;
        w.scale_ = scale;
        w.scale_note_ = std::move(note);
        return w;
    }

    static WeightMatrix dense(Eigen::MatrixXd m, std::string note = {}) {
        if (m.rows() != m.cols()) throw std::invalid_argument("WeightMatrix: dense form must be square");
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + m.cwiseAbs().maxCoeff())) {
            throw std::invalid_argument("WeightMatrix: dense form must be symmetric");
        }
        WeightMatrix w;
        w.form_ = Form::Dense;
        w.p_ = m.rows();
        w.dense_ = std::move(m);
        w.scale_note_ = std::move(note);
        return w;
    }

    static WeightMatrix low_rank(std::vector<Eigen::VectorXd> vectors, std::vector<double> coeffs = {},
                                 std::string note = {}) {
        if (vectors.empty()) throw std::invalid_argument("WeightMatrix: empty low-rank list");
        if (coeffs.empty()) coeffs.assign(vectors.size(), 1.0);
        if (coeffs.size() != vectors.size()) {
            throw std::invalid_argument("WeightMatrix: coefficient/vector count mismatch");
        }
        const Eigen::Index p = vectors.front().size();
        for (const auto& v : vectors) {
            if (v.size() != p) throw std::invalid_argument("WeightMatrix: low-rank vector length mismatch");
            if (!v.allFinite()) throw std::invalid_argument("WeightMatrix: non-finite low-rank vector");
        }
        WeightMatrix w;
        w.form_ = Form::LowRank;
        w.p_ = p;
        w.vectors_ = std::move(vectors);
        w.coeffs_ = std::move(coeffs);
        w.scale_note_ = std::move(note);
        return w;
    }

    /// (theta eta^T + eta theta^T)/2 expressed in the signed low-rank form
    /// ((theta+eta)(theta+eta)^T - (theta-eta)(theta-eta)^T)/4.
    static WeightMatrix symmetrized_outer(const Eigen::VectorXd& theta, const Eigen::VectorXd& eta,
                                          std::string note = {}) {
        if (theta.size() != eta.size()) throw std::invalid_argument("WeightMatrix: outer length mismatch");
        std::vector<Eigen::VectorXd> vs{theta + eta, theta - eta};
        return low_rank(std::move(vs), {0.25, -0.25}, std::move(note));
    }

    Form form() const { return form_; }
    Eigen::Index p() const { return p_; }
    double scale() const { return scale_; }
    const Eigen::MatrixXd& dense_matrix() const { return dense_; }
    const std::vector<Eigen::VectorXd>& vectors() const { return vectors_; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    const std::string& scale_note() const { return scale_note_; }

    Eigen::MatrixXd to_dense() const {
        switch (form_) {
            case Form::ScaledIdentity:
                return scale_ * Eigen::MatrixXd::Identity(p_, p_);
            case Form::Dense:
                return dense_;
            case Form::LowRank: {
                Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p_, p_);
                for (std::size_t i = 0; i < vectors_.size(); ++i) {
                    m.noalias() += coeffs_[i] * vectors_[i] * vectors_[i].transpose();
                }
                return m;
            }
        }
        throw std::logic_error("unreachable");
    }

    double trace() const {
        switch (form_) {
            case Form::ScaledIdentity:
                return scale_ * static_cast<double>(p_);
            case Form::Dense:
                return dense_.trace();
            case Form::LowRank: {
                double t = 0.0;
                for (std::size_t i = 0; i < vectors_.size(); ++i) t += coeffs_[i] * vectors_[i].squaredNorm();
                return t;
            }
        }
        throw std::logic_error("unreachable");
    }

private:
    Form form_ = Form::ScaledIdentity;
    Eigen::Index p_ = 0;
    double scale_ = 1.0;
    Eigen::MatrixXd dense_;
    std::vector<Eigen::VectorXd> vectors_;
    std::vector<double> coeffs_;
    std::string scale_note_;
};

}  // namespace pseudoshrink
