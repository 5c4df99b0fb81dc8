#pragma once

#include <Eigen/Core>

#include "pseudoshrink/data_gen.hpp"
#include "pseudoshrink/generalized_inverse.hpp"
#include "pseudoshrink/weight_matrix.hpp"

namespace pseudoshrink {

/// Everything the data-driven estimators need from one sample, held as the
/// spectral decomposition of S. When p > n the decomposition comes from the
/// n x n companion matrix (1/n) Yc^T Yc, so no p x p eigenproblem is solved;
/// the p - rank zero eigenvalues of S are tracked by count.
class PluginContext {
public:
    static PluginContext from_data(const ObservationMatrix& y, double rank_tol = -1.0);
    static PluginContext from_covariance(const Eigen::MatrixXd& s, Eigen::Index n,
                                         double rank_tol = -1.0);

    Eigen::Index p() const { return p_; }
    Eigen::Index n() const { return n_; }
    double cn() const { return cn_; }
    Eigen::Index rank() const { return rank_; }
    // c_n in (1, 1.05]: Moore-Penrose plug-ins are computed but flagged unstable
    bool near_singular() const { return cn_ > 1.0 && cn_ <= 1.05; }

    const Eigen::VectorXd& stored_eigenvalues() const { return eigs_; }
    const Eigen::MatrixXd& stored_vectors() const { return vecs_; }
    Eigen::Index implicit_zeros() const { return p_ - eigs_.size(); }
    /// Fraction of (numerically) zero eigenvalues of S. The ridge-family
    /// plug-ins subtract t^{-m} times this mass; using the actual count
    /// instead of its limit (c_n - 1)/c_n removes an O(1/(n t)) distortion
    /// that otherwise corrupts small-t estimates (centering leaves rank n-1,
    /// not n).
    double null_fraction() const {
        return static_cast<double>(p_ - rank_) / static_cast<double>(p_);
    }

    // ---- scalar spectral traces, (1/p)-normalized ----
    double mean_trace_pinv_pow(int k) const;          // (1/p) tr[(S^+)^k]
    double mean_trace_pow(int k) const;               // (1/p) tr[S^k]
    double mean_trace_ridge_pow(double t, int k) const;  // (1/p) tr[(S+tI)^{-k}]

    // ---- trace functionals against a weighting matrix ----
    double trace_pinv_pow_theta(int k, const WeightMatrix& theta) const;
    double trace_pow_theta(int k, const WeightMatrix& theta) const;
    double trace_ridge_pow_theta(double t, int k, const WeightMatrix& theta) const;
    double trace_null_proj_theta(const WeightMatrix& theta) const;  // tr[(I - S S^+) Theta]

    // ---- quadratic forms ----
    Eigen::VectorXd pinv_times(const Eigen::VectorXd& x) const;  // S^+ x
    double quad_pinv(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int power = 1) const;
    double quad_pow(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int power = 1) const;
    double quad_ridge(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      int power = 1) const;

    // ---- plug-in estimators ----
    /// v-hat^(m)(t); t = 0 requires p > n, m <= 8.
    double hat_v_derivative(int m, double t) const;
    /// h-hat_k for k in {2, 3}; requires p > n.
    double hat_h(int k) const;
    /// d-hat_k(t, Theta). Supported: k = 0 for any t >= 0; k in {1,2,3} at
    /// t = 0 (Moore-Penrose family, p > n); k = 1 at t > 0 (ridge family).
    double hat_d(int k, const WeightMatrix& theta, double t) const;
    /// q-hat_1(Theta) = tr[S Theta]; q-hat_2(Theta) = tr[S^2 Theta] - c_n (1/p)tr[S] tr[S Theta].
    double hat_q(int order, const WeightMatrix& theta) const;

    // ---- dense reconstructions (null space handled exactly) ----
    Eigen::MatrixXd dense_covariance() const;
    Eigen::MatrixXd dense_inverse(InverseKind kind, double t = 0.0) const;

    /// Degrees-of-freedom-matched view: the unbiased covariance n/(n-1) S
    /// with effective sample size n - 1. Centering makes S an (n-1)-sample
    /// object with E[S] = ((n-1)/n) Sigma, so the matched view centers the
    /// plug-in functionals on their population values; asymptotically the
    /// two views coincide.
    PluginContext dof_matched() const;

private:
    Eigen::Index p_ = 0, n_ = 0;
    double cn_ = 0.0;
    Eigen::VectorXd eigs_;   // stored eigenvalues of S, >= 0
    Eigen::MatrixXd vecs_;   // p x eigs_.size()
    Eigen::Index rank_ = 0;  // count above rank_tol * lambda_max
    double cut_ = 0.0;

    template <typename F>
    double theta_sum(F&& f_nonzero, double f_zero, const WeightMatrix& theta) const;
};

}  // namespace pseudoshrink
