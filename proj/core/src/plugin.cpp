#include "pseudoshrink/plugin.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "pseudoshrink/errors.hpp"

namespace pseudoshrink {

namespace {

double fact(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= static_cast<double>(i);
    return f;
}

}  // namespace

PluginContext PluginContext::from_data(const ObservationMatrix& y, double rank_tol) {
    const Eigen::Index p = y.p();
    const Eigen::Index n = y.n();
    if (n < 2) throw std::invalid_argument("PluginContext: n >= 2 required for data input");
    if (rank_tol < 0.0) rank_tol = default_rank_tol(p);

    const Eigen::VectorXd ybar = y.entries.rowwise().mean();
    Eigen::MatrixXd yc = y.entries.colwise() - ybar;

    PluginContext ctx;
    ctx.p_ = p;
    ctx.n_ = n;
    ctx.cn_ = static_cast<double>(p) / static_cast<double>(n);

    if (p > n) {
        // companion route: nonzero spectrum of S from the n x n Gram matrix
        Eigen::MatrixXd comp = (yc.transpose() * yc) / static_cast<double>(n);
        comp = 0.5 * (comp + comp.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(comp);
        if (es.info() != Eigen::Success) throw std::runtime_error("PluginContext: eigensolver failed");
        const Eigen::VectorXd& ev = es.eigenvalues();
        const double cut = rank_tol * std::max(0.0, ev.maxCoeff());
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            if (ev[i] > cut) keep.push_back(i);
        }
        const auto r = static_cast<Eigen::Index>(keep.size());
        ctx.eigs_.resize(r);
        Eigen::MatrixXd vkeep(n, r);
        for (Eigen::Index j = 0; j < r; ++j) {
            ctx.eigs_[j] = ev[keep[static_cast<std::size_t>(j)]];
            vkeep.col(j) = es.eigenvectors().col(keep[static_cast<std::size_t>(j)]);
        }
        ctx.vecs_ = yc * vkeep;
        for (Eigen::Index j = 0; j < r; ++j) {
            ctx.vecs_.col(j) /= std::sqrt(static_cast<double>(n) * ctx.eigs_[j]);
        }
        ctx.rank_ = r;
        ctx.cut_ = cut;
        return ctx;
    }

    Eigen::MatrixXd s = (yc * yc.transpose()) / static_cast<double>(n);
    s = 0.5 * (s + s.transpose()).eval();
    return from_covariance(s, n, rank_tol);
}

PluginContext PluginContext::from_covariance(const Eigen::MatrixXd& s, Eigen::Index n,
                                             double rank_tol) {
    if (s.rows() != s.cols()) throw std::invalid_argument("PluginContext: square matrix required");
    if (n < 1) throw std::invalid_argument("PluginContext: n >= 1 required");
    if (rank_tol < 0.0) rank_tol = default_rank_tol(s.rows());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (es.info() != Eigen::Success) throw std::runtime_error("PluginContext: eigensolver failed");

    PluginContext ctx;
    ctx.p_ = s.rows();
    ctx.n_ = n;
    ctx.cn_ = static_cast<double>(ctx.p_) / static_cast<double>(n);
    ctx.eigs_ = es.eigenvalues().cwiseMax(0.0);
    ctx.vecs_ = es.eigenvectors();
    ctx.cut_ = rank_tol * ctx.eigs_.maxCoeff();
    ctx.rank_ = 0;
    for (Eigen::Index i = 0; i < ctx.eigs_.size(); ++i) {
        if (ctx.eigs_[i] > ctx.cut_) ++ctx.rank_;
    }
    return ctx;
}

double PluginContext::mean_trace_pinv_pow(int k) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eigs_.size(); ++i) {
        if (eigs_[i] > cut_) acc += std::pow(eigs_[i], -k);
    }
    return acc / static_cast<double>(p_);
}

double PluginContext::mean_trace_pow(int k) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eigs_.size(); ++i) acc += std::pow(eigs_[i], k);
    return acc / static_cast<double>(p_);
}

double PluginContext::mean_trace_ridge_pow(double t, int k) const {
    if (t <= 0.0) throw std::invalid_argument("mean_trace_ridge_pow: t > 0 required");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eigs_.size(); ++i) acc += std::pow(eigs_[i] + t, -k);
    acc += static_cast<double>(implicit_zeros()) * std::pow(t, -k);
    return acc / static_cast<double>(p_);
}

template <typename F>
double PluginContext::theta_sum(F&& f_nonzero, double f_zero, const WeightMatrix& theta) const {
    if (theta.p() != p_) throw std::invalid_argument("PluginContext: weight matrix dimension mismatch");
    const Eigen::Index r = eigs_.size();
    Eigen::VectorXd f(r);
    for (Eigen::Index i = 0; i < r; ++i) f[i] = f_nonzero(eigs_[i]);

    switch (theta.form()) {
        case WeightMatrix::Form::ScaledIdentity:
            return theta.scale() * (f.sum() + f_zero * static_cast<double>(p_ - r));
        case WeightMatrix::Form::LowRank: {
            double acc = 0.0;
            for (std::size_t j = 0; j < theta.vectors().size(); ++j) {
                const Eigen::VectorXd& th = theta.vectors()[j];
                const Eigen::VectorXd proj = vecs_.transpose() * th;
                const double range_part = proj.cwiseAbs2().dot(f);
                const double total = th.squaredNorm();
                acc += theta.coeffs()[j] * (range_part + f_zero * (total - proj.squaredNorm()));
            }
            return acc;
        }
        case WeightMatrix::Form::Dense: {
            const Eigen::MatrixXd w = theta.dense_matrix() * vecs_;
            double acc = 0.0;
            double range_diag = 0.0;
            for (Eigen::Index i = 0; i < r; ++i) {
                const double q = vecs_.col(i).dot(w.col(i));
                acc += f[i] * q;
                range_diag += q;
            }
            return acc + f_zero * (theta.trace() - range_diag);
        }
    }
    throw std::logic_error("unreachable");
}

double PluginContext::trace_pinv_pow_theta(int k, const WeightMatrix& theta) const {
    return theta_sum([this, k](double l) { return l > cut_ ? std::pow(l, -k) : 0.0; }, 0.0, theta);
}

double PluginContext::trace_pow_theta(int k, const WeightMatrix& theta) const {
    return theta_sum([k](double l) { return std::pow(l, k); }, 0.0, theta);
}

double PluginContext::trace_ridge_pow_theta(double t, int k, const WeightMatrix& theta) const {
    if (t <= 0.0) throw std::invalid_argument("trace_ridge_pow_theta: t > 0 required");
    return theta_sum([t, k](double l) { return std::pow(l + t, -k); }, std::pow(t, -k), theta);
}

double PluginContext::trace_null_proj_theta(const WeightMatrix& theta) const {
    return theta_sum([this](double l) { return l > cut_ ? 0.0 : 1.0; }, 1.0, theta);
}

Eigen::VectorXd PluginContext::pinv_times(const Eigen::VectorXd& x) const {
    Eigen::VectorXd proj = vecs_.transpose() * x;
    for (Eigen::Index i = 0; i < eigs_.size(); ++i) {
        proj[i] = (eigs_[i] > cut_) ? proj[i] / eigs_[i] : 0.0;
    }
    return vecs_ * proj;
}

double PluginContext::quad_pinv(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int power) const {
    const Eigen::VectorXd px = vecs_.transpose() * x;
    const Eigen::VectorXd py = vecs_.transpose() * y;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eigs_.size(); ++i) {
        if (eigs_[i] > cut_) acc += std::pow(eigs_[i], -power) * px[i] * py[i];
    }
    return acc;
}

double PluginContext::quad_pow(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int power) const {
    const Eigen::VectorXd px = vecs_.transpose() * x;
    const Eigen::VectorXd py = vecs_.transpose() * y;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eigs_.size(); ++i) acc += std::pow(eigs_[i], power) * px[i] * py[i];
    return acc;
}

double PluginContext::quad_ridge(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                 int power) const {
    if (t <= 0.0) throw std::invalid_argument("quad_ridge: t > 0 required");
    const Eigen::VectorXd px = vecs_.transpose() * x;
    const Eigen::VectorXd py = vecs_.transpose() * y;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eigs_.size(); ++i) acc += std::pow(eigs_[i] + t, -power) * px[i] * py[i];
    acc += std::pow(t, -power) * (x.dot(y) - px.dot(py));
    return acc;
}

double PluginContext::hat_v_derivative(int m, double t) const {
    if (m < 0 || m > 8) throw std::invalid_argument("hat_v_derivative: m must lie in [0, 8]");
    if (t < 0.0) throw std::invalid_argument("hat_v_derivative: t >= 0 required");
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    if (t == 0.0) {
        if (p_ <= n_) throw std::domain_error("hat_v_derivative: t = 0 requires p > n");
        return sign * fact(m) * cn_ * mean_trace_pinv_pow(m + 1);
    }
    return sign * fact(m) * cn_ *
           (mean_trace_ridge_pow(t, m + 1) - std::pow(t, -(m + 1)) * null_fraction());
}

double PluginContext::hat_h(int k) const {
    if (k != 2 && k != 3) throw std::invalid_argument("hat_h: k must be 2 or 3");
    if (p_ <= n_) throw std::domain_error("hat_h: p > n required");
    const double g2 = mean_trace_pinv_pow(2);
    if (!(g2 > 0.0)) throw DegeneracyError("tr[(S^+)^2]", "hat_h: degenerate sample covariance");
    if (k == 2) return 1.0 / (cn_ * g2);
    const double g3 = mean_trace_pinv_pow(3);
    return g3 / (cn_ * cn_ * g2 * g2 * g2);
}

double PluginContext::hat_d(int k, const WeightMatrix& theta, double t) const {
    if (t < 0.0) throw std::invalid_argument("hat_d: t >= 0 required");
    if (k == 0) {
        if (t == 0.0) return trace_null_proj_theta(theta);
        return t * trace_ridge_pow_theta(t, 1, theta);
    }
    if (t == 0.0) {
        if (p_ <= n_) throw std::domain_error("hat_d: the t = 0 family requires p > n");
        const double g2 = mean_trace_pinv_pow(2);
        if (!(g2 > 0.0)) throw DegeneracyError("tr[(S^+)^2]", "hat_d: degenerate sample covariance");
        switch (k) {
            case 1:
                return trace_pinv_pow_theta(1, theta) / (cn_ * g2);
            case 2: {
                const double g3 = mean_trace_pinv_pow(3);
                return (trace_pinv_pow_theta(1, theta) * g3 - g2 * trace_pinv_pow_theta(2, theta)) /
                       (cn_ * cn_ * g2 * g2 * g2);
            }
            case 3: {
                // d_3 inverts the third-moment identity s_3 = -(1/6)v''' d_1 + v' v'' d_2 - v'^3 d_3 with the
                // hatted inputs; the plugged-in s_3 is tr[(S^+)^3 Theta].
                const double v1 = -cn_ * mean_trace_pinv_pow(2);
                const double v2 = 2.0 * cn_ * mean_trace_pinv_pow(3);
                const double v3 = -6.0 * cn_ * mean_trace_pinv_pow(4);
                const double d1 = hat_d(1, theta, 0.0);
                const double d2 = hat_d(2, theta, 0.0);
                return (v1 * v2 * d2 - v3 / 6.0 * d1 - trace_pinv_pow_theta(3, theta)) /
                       (v1 * v1 * v1);
            }
            default:
                throw std::invalid_argument("hat_d: k must lie in {0,1,2,3} at t = 0");
        }
    }
    if (k == 1) {
        const double d0 = hat_d(0, theta, t);
        const double num = t * trace_ridge_pow_theta(t, 2, theta) - d0 / t;
        const double den = cn_ * (mean_trace_ridge_pow(t, 2) - std::pow(t, -2) * null_fraction());
        return -num / den;
    }
    throw std::invalid_argument("hat_d: unsupported (k, t) combination");
}

double PluginContext::hat_q(int order, const WeightMatrix& theta) const {
    if (order == 1) return trace_pow_theta(1, theta);
    if (order == 2) {
        return trace_pow_theta(2, theta) - cn_ * mean_trace_pow(1) * trace_pow_theta(1, theta);
    }
    throw std::invalid_argument("hat_q: order must be 1 or 2");
}

Eigen::MatrixXd PluginContext::dense_covariance() const {
    return vecs_ * eigs_.asDiagonal() * vecs_.transpose();
}

PluginContext PluginContext::dof_matched() const {
    if (n_ < 2) throw std::logic_error("dof_matched: n >= 2 required");
    const double kappa = static_cast<double>(n_) / static_cast<double>(n_ - 1);
    PluginContext out(*this);
    out.n_ = n_ - 1;
    out.cn_ = static_cast<double>(p_) / static_cast<double>(out.n_);
    out.eigs_ *= kappa;
    out.cut_ *= kappa;
    return out;
}

Eigen::MatrixXd PluginContext::dense_inverse(InverseKind kind, double t) const {
    const Eigen::Index r = eigs_.size();
    Eigen::VectorXd f(r);
    switch (kind) {
        case InverseKind::MoorePenrose:
            for (Eigen::Index i = 0; i < r; ++i) f[i] = (eigs_[i] > cut_) ? 1.0 / eigs_[i] : 0.0;
            return vecs_ * f.asDiagonal() * vecs_.transpose();
        case InverseKind::MPR: {
            if (t <= 0.0) throw std::invalid_argument("dense_inverse: t > 0 required for MPR");
            for (Eigen::Index i = 0; i < r; ++i) {
                const double dt = eigs_[i] + t;
                f[i] = eigs_[i] / (dt * dt);
            }
            return vecs_ * f.asDiagonal() * vecs_.transpose();
        }
        case InverseKind::Ridge: {
            if (t <= 0.0) throw std::invalid_argument("dense_inverse: t > 0 required for Ridge");
            for (Eigen::Index i = 0; i < r; ++i) f[i] = 1.0 / (eigs_[i] + t) - 1.0 / t;
            Eigen::MatrixXd m = vecs_ * f.asDiagonal() * vecs_.transpose();
            m.diagonal().array() += 1.0 / t;
            return m;
        }
        case InverseKind::Ordinary: {
            if (rank_ < p_) throw std::domain_error("dense_inverse: Ordinary inverse of a singular S");
            for (Eigen::Index i = 0; i < r; ++i) f[i] = 1.0 / eigs_[i];
            return vecs_ * f.asDiagonal() * vecs_.transpose();
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace pseudoshrink
