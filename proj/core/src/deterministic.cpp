#include "pseudoshrink/deterministic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pseudoshrink/bell.hpp"
#include "pseudoshrink/errors.hpp"

namespace pseudoshrink {

namespace {

constexpr int kMaxOrder = 8;

double fact(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= static_cast<double>(i);
    return f;
}

double binom(int n, int k) { return fact(n) / (fact(k) * fact(n - k)); }

// B_{m,k} over a derivative stack laid out as values[0] = f, values[j] = f^(j)
double bell_over(const std::vector<double>& derivs, int m, int k) {
    return bell_partial(m, k, std::span<const double>(derivs.data() + 1,
                                                      static_cast<std::size_t>(m - k + 1)));
}

// residual of the v-equation: (1/p) tr[(v Sigma + I)^{-1}] - (c-1+tv)/c
double v_residual(double v, double t, double cn, const Eigen::VectorXd& lam) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) acc += 1.0 / (v * lam[i] + 1.0);
    acc /= static_cast<double>(lam.size());
    return acc - (cn - 1.0 + t * v) / cn;
}

// g_k = (1/p) tr{[Sigma (v Sigma + I)^{-1}]^k}
double gk_value(double v, int k, const Eigen::VectorXd& lam) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        acc += std::pow(lam[i] / (v * lam[i] + 1.0), k);
    }
    return acc / static_cast<double>(lam.size());
}

// sum_i f(lambda_i) * (q_i^T Theta q_i) with q_i the model's eigenvectors
template <typename F>
double weighted_spectral_sum(F&& f, const WeightMatrix& theta, const SpectralModel& model) {
    const Eigen::Index p = model.p();
    if (theta.p() != p) throw std::invalid_argument("weight matrix dimension mismatch");
    const Eigen::VectorXd& lam = model.eigenvalues();

    switch (theta.form()) {
        case WeightMatrix::Form::ScaledIdentity: {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < p; ++i) acc += f(lam[i]);
            return theta.scale() * acc;
        }
        case WeightMatrix::Form::LowRank: {
            double acc = 0.0;
            for (std::size_t jv = 0; jv < theta.vectors().size(); ++jv) {
                const Eigen::VectorXd proj = model.has_basis()
                                                 ? (model.basis().transpose() * theta.vectors()[jv]).eval()
                                                 : theta.vectors()[jv];
                double q = 0.0;
                for (Eigen::Index i = 0; i < p; ++i) q += f(lam[i]) * proj[i] * proj[i];
                acc += theta.coeffs()[jv] * q;
            }
            return acc;
        }
        case WeightMatrix::Form::Dense: {
            double acc = 0.0;
            if (model.has_basis()) {
                const Eigen::MatrixXd w = theta.dense_matrix() * model.basis();
                for (Eigen::Index i = 0; i < p; ++i) {
                    acc += f(lam[i]) * model.basis().col(i).dot(w.col(i));
                }
            } else {
                for (Eigen::Index i = 0; i < p; ++i) acc += f(lam[i]) * theta.dense_matrix()(i, i);
            }
            return acc;
        }
    }
    throw std::logic_error("unreachable");
}

// tr(Sigma^k Theta); k may be negative
double sigma_power_trace(int k, const WeightMatrix& theta, const SpectralModel& model) {
    return weighted_spectral_sum([k](double l) { return std::pow(l, k); }, theta, model);
}

void check_stack_v(const DerivativeStack& stack) {
    if (stack.regime != StackRegime::VOverOne && stack.regime != StackRegime::VGeneral) {
        throw std::invalid_argument("operation requires a v-regime derivative stack");
    }
}

// D_m(t,Theta) = sum_{k=1}^m ((-1)^{m+k} k!/m!) d_k(t,Theta) B_{m,k}(v', ..)
double dm_value(const DerivativeStack& stack, int m, const WeightMatrix& theta,
                const SpectralModel& model) {
    double acc = 0.0;
    for (int k = 1; k <= m; ++k) {
        const double sign = ((m + k) % 2 == 0) ? 1.0 : -1.0;
        acc += sign * fact(k) / fact(m) * dk_weighted(stack, k, theta, model) *
               bell_over(stack.values, m, k);
    }
    return acc;
}

struct OrdinaryStacks {
    std::vector<double> w;       // w[0] = w(0), w[j] = w^(j)(0)
    std::vector<double> w_tilde; // w_tilde[0] = 0, w_tilde[j] = w~^(j)(0)
};

// mean_inv_pow(k) must return (1/p) tr(Sigma^{-k})
template <typename MeanInvPow>
OrdinaryStacks ordinary_stacks(int order, double cn, MeanInvPow&& mean_inv_pow) {
    if (cn <= 0.0 || cn >= 1.0) throw std::domain_error("ordinary-inverse stacks require c_n in (0,1)");
    OrdinaryStacks s;
    s.w.resize(static_cast<std::size_t>(order) + 1);
    s.w_tilde.resize(static_cast<std::size_t>(order) + 1);
    const double omc = 1.0 - cn;
    s.w[0] = omc;
    s.w_tilde[0] = 0.0;
    if (order >= 1) {
        s.w_tilde[1] = 1.0 / omc;
        s.w[1] = cn / omc * mean_inv_pow(1);
    }
    for (int j = 2; j <= order; ++j) {
        double wt = 0.0;
        for (int k = 1; k <= j - 1; ++k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            wt += sign * fact(k) / std::pow(omc, k + 1) * bell_over(s.w, j - 1, k);
        }
        s.w_tilde[static_cast<std::size_t>(j)] = static_cast<double>(j) * wt;

        double wj = 0.0;
        for (int k = 1; k <= j; ++k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            wj += sign * fact(k) * mean_inv_pow(k) * bell_over(s.w_tilde, j, k);
        }
        s.w[static_cast<std::size_t>(j)] = -cn * wj;
    }
    return s;
}

template <typename MeanPow>
std::vector<double> samplecov_stack(int order, double cn, MeanPow&& mean_pow) {
    std::vector<double> u(static_cast<std::size_t>(order) + 1, 0.0);
    if (order >= 1) u[1] = 1.0;
    for (int j = 2; j <= order; ++j) {
        double acc = 0.0;
        for (int k = 1; k <= j - 1; ++k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            acc += sign * fact(k) * mean_pow(k) * bell_over(u, j - 1, k);
        }
        u[static_cast<std::size_t>(j)] = static_cast<double>(j) * cn * acc;
    }
    return u;
}

// v(t) stack for Sigma = I, from the closed forms only (no fixed-point solve)
std::vector<double> identity_v_stack(double t, double cn, int order) {
    const double v = identity_v(t, cn);
    std::vector<double> s(static_cast<std::size_t>(order) + 1);
    s[0] = v;
    auto h = [&](int k) { return std::pow(v, -k) - cn * std::pow(v + 1.0, -k); };
    if (order >= 1) s[1] = -1.0 / h(2);
    for (int j = 2; j <= order; ++j) {
        double acc = 0.0;
        for (int k = 2; k <= j; ++k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            acc += sign * fact(k) * h(k + 1) * bell_over(s, j, k);
        }
        s[static_cast<std::size_t>(j)] = -s[1] * acc;
    }
    return s;
}

}  // namespace

Family parse_family(const std::string& tag) {
    if (tag == "mp") return Family::MoorePenrose;
    if (tag == "ridge") return Family::Ridge;
    if (tag == "mpr") return Family::MPR;
    if (tag == "samplecov") return Family::SampleCov;
    if (tag == "ordinary") return Family::Ordinary;
    throw std::invalid_argument("unknown family tag: " + tag);
}

std::string family_name(Family f) {
    switch (f) {
        case Family::MoorePenrose: return "mp";
        case Family::Ridge: return "ridge";
        case Family::MPR: return "mpr";
        case Family::SampleCov: return "samplecov";
        case Family::Ordinary: return "ordinary";
    }
    return "?";
}

double solve_v(double t, double cn, const SpectralModel& model, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("solve_v: tol > 0 required");
    if (t < 0.0) throw std::invalid_argument("solve_v: t >= 0 required");
    if (t == 0.0 && cn <= 1.0) throw std::domain_error("solve_v: t = 0 requires c_n > 1");
    if (cn <= 0.0) throw std::domain_error("solve_v: c_n > 0 required");
    const Eigen::VectorXd& lam = model.eigenvalues();

    // residual is strictly decreasing in v and positive at v = 0
    double lo = 0.0;
    double hi = 1.0;
    int doublings = 0;
    while (v_residual(hi, t, cn, lam) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 200) throw ConvergenceError("solve_v: no sign change after 200 doublings");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;  // interval at machine resolution
        if (v_residual(mid, t, cn, lam) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double v = 0.5 * (lo + hi);
    if (std::abs(v_residual(v, t, cn, lam)) > tol) {
        throw ConvergenceError("solve_v: residual above tolerance after bisection");
    }
    return v;
}

DerivativeStack v_derivatives(double t, int order, double cn, const SpectralModel& model,
                              double tol) {
    if (order < 0 || order > kMaxOrder) {
        throw std::invalid_argument("v_derivatives: order must lie in [0, 8]");
    }
    DerivativeStack s;
    s.regime = (t == 0.0) ? StackRegime::VOverOne : StackRegime::VGeneral;
    s.t = t;
    s.order = order;
    s.cn = cn;
    s.values.resize(static_cast<std::size_t>(order) + 1);
    const double v = solve_v(t, cn, model, tol);
    s.values[0] = v;
    if (order == 0) return s;

    std::vector<double> h(static_cast<std::size_t>(order) + 2, 0.0);
    for (int k = 2; k <= order + 1; ++k) {
        h[static_cast<std::size_t>(k)] = std::pow(v, -k) - cn * gk_value(v, k, model.eigenvalues());
    }
    s.values[1] = -1.0 / h[2];
    for (int j = 2; j <= order; ++j) {
        double acc = 0.0;
        for (int k = 2; k <= j; ++k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            acc += sign * fact(k) * h[static_cast<std::size_t>(k + 1)] * bell_over(s.values, j, k);
        }
        s.values[static_cast<std::size_t>(j)] = -s.values[1] * acc;
    }
    return s;
}

DerivativeStack u_derivatives(int order, double cn, const SpectralModel& model) {
    if (order < 0 || order > kMaxOrder + 1) {
        throw std::invalid_argument("u_derivatives: order must lie in [0, 9]");
    }
    if (cn <= 0.0) throw std::domain_error("u_derivatives: c_n > 0 required");
    DerivativeStack s;
    s.regime = StackRegime::USampleCov;
    s.t = 0.0;
    s.order = order;
    s.cn = cn;
    s.values = samplecov_stack(order, cn, [&](int k) { return model.mean_eigen_pow(k); });
    return s;
}

DerivativeStack w_derivatives(int order, double cn, const SpectralModel& model) {
    if (order < 0 || order > kMaxOrder + 1) {
        throw std::invalid_argument("w_derivatives: order must lie in [0, 9]");
    }
    DerivativeStack s;
    s.regime = StackRegime::WUnderOne;
    s.t = 0.0;
    s.order = order;
    s.cn = cn;
    s.values = ordinary_stacks(order, cn, [&](int k) { return model.mean_eigen_pow(-k); }).w;
    return s;
}

double dk_weighted(const DerivativeStack& stack, int k, const WeightMatrix& theta,
                   const SpectralModel& model) {
    check_stack_v(stack);
    if (k < 0) throw std::invalid_argument("dk_weighted: k >= 0 required");
    if (k == 0 && stack.regime == StackRegime::VOverOne) {
        throw std::invalid_argument("dk_weighted: k = 0 exists only in the t > 0 family");
    }
    const double v = stack.values[0];
    return weighted_spectral_sum(
        [v, k](double l) { return std::pow(l, k) / std::pow(v * l + 1.0, k + 1); }, theta, model);
}

double hk_value(const DerivativeStack& stack, int k, const SpectralModel& model) {
    check_stack_v(stack);
    if (k < 1) throw std::invalid_argument("hk_value: k >= 1 required");
    const double v = stack.values[0];
    return std::pow(v, -k) - stack.cn * gk_value(v, k, model.eigenvalues());
}

double ridge_limit_direct(int m, double t, const WeightMatrix& theta, double cn,
                          const SpectralModel& model, double tol) {
    if (m < 0) throw std::invalid_argument("ridge moment index m >= 0 required");
    if (t <= 0.0) throw std::domain_error("ridge moments require t > 0");
    const DerivativeStack stack = v_derivatives(t, m, cn, model, tol);
    double acc = std::pow(t, -(m + 1)) * dk_weighted(stack, 0, theta, model);
    for (int l = 1; l <= m; ++l) {
        double inner = 0.0;
        for (int k = 1; k <= l; ++k) {
            const double sign = ((l + k) % 2 == 0) ? 1.0 : -1.0;
            inner += sign * fact(k) / fact(l) * dk_weighted(stack, k, theta, model) *
                     bell_over(stack.values, l, k);
        }
        acc += std::pow(t, -(m - l) - 1) * inner;
    }
    return acc;
}

double ridge_limit_recursive(int m, double t, const WeightMatrix& theta, double cn,
                             const SpectralModel& model, double tol) {
    if (m < 0) throw std::invalid_argument("ridge moment index m >= 0 required");
    if (t <= 0.0) throw std::domain_error("ridge moments require t > 0");
    const DerivativeStack stack = v_derivatives(t, m, cn, model, tol);
    double s = dk_weighted(stack, 0, theta, model) / t;  // s~_1
    for (int j = 1; j <= m; ++j) {
        s = (s + dm_value(stack, j, theta, model)) / t;
    }
    return s;
}

double mpr_limit_binomial(int m, double t, const WeightMatrix& theta, double cn,
                          const SpectralModel& model, double tol) {
    if (m < 1 || m > 4) throw std::invalid_argument("MPR moment index m must lie in [1, 4]");
    if (t <= 0.0) throw std::domain_error("MPR moments require t > 0");
    double acc = 0.0;
    for (int k = 0; k <= m; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        acc += sign * std::pow(t, k) * binom(m, k) *
               ridge_limit_direct(m + k - 1, t, theta, cn, model, tol);
    }
    return acc;
}

double mpr_limit_dform(int m, double t, const WeightMatrix& theta, double cn,
                       const SpectralModel& model, double tol) {
    if (m < 1 || m > 4) throw std::invalid_argument("MPR moment index m must lie in [1, 4]");
    if (t < 0.0) throw std::domain_error("MPR moments require t >= 0");
    const int max_order = 2 * m - 1;
    const DerivativeStack stack = v_derivatives(t, max_order, cn, model, tol);
    double acc = -dm_value(stack, m, theta, model);
    for (int k = 2; k <= m; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        double inner = 0.0;
        for (int j = 1; j <= k - 1; ++j) {
            inner += std::pow(t, j) * dm_value(stack, m + j, theta, model);
        }
        acc += sign * binom(m, k) * inner;
    }
    return acc;
}

MomentLimit limit_moment(Family family, int m, double t, const WeightMatrix& theta, double cn,
                         const SpectralModel& model, double tol) {
    MomentLimit out;
    out.family = family;
    out.m = m;
    out.t = t;

    switch (family) {
        case Family::MoorePenrose: {
            if (cn <= 1.0) throw std::domain_error("Moore-Penrose moments require c_n > 1");
            if (t != 0.0) throw std::domain_error("Moore-Penrose moments live at t = 0");
            if (m < 1 || m > kMaxOrder) throw std::invalid_argument("mp moment order must lie in [1, 8]");
            const DerivativeStack stack = v_derivatives(0.0, m, cn, model, tol);
            double acc = 0.0;
            for (int k = 1; k <= m; ++k) {
                const double sign = ((m + k + 1) % 2 == 0) ? 1.0 : -1.0;
                const double dk = dk_weighted(stack, k, theta, model);
                out.d_components.push_back(dk);
                acc += sign * fact(k) / fact(m) * dk * bell_over(stack.values, m, k);
            }
            for (int k = 2; k <= m + 1; ++k) out.h_components.push_back(hk_value(stack, k, model));
            out.value = acc;
            return out;
        }
        case Family::Ridge: {
            if (cn <= 0.0) throw std::domain_error("ridge moments require c_n > 0");
            if (t <= 0.0) throw std::domain_error("ridge moments require t > 0");
            if (m < 0 || m > kMaxOrder) throw std::invalid_argument("ridge moment index must lie in [0, 8]");
            const DerivativeStack stack = v_derivatives(t, std::max(m, 1), cn, model, tol);
            for (int k = 0; k <= m; ++k) out.d_components.push_back(dk_weighted(stack, k, theta, model));
            out.value = ridge_limit_direct(m, t, theta, cn, model, tol);
            return out;
        }
        case Family::MPR: {
            if (cn <= 0.0) throw std::domain_error("MPR moments require c_n > 0");
            if (t <= 0.0) throw std::domain_error("MPR moments require t > 0");
            const DerivativeStack stack = v_derivatives(t, 1, cn, model, tol);
            out.d_components.push_back(dk_weighted(stack, 1, theta, model));
            out.value = mpr_limit_dform(m, t, theta, cn, model, tol);
            return out;
        }
        case Family::SampleCov: {
            if (cn <= 0.0) throw std::domain_error("sample-covariance moments require c_n > 0");
            if (m < 1 || m > kMaxOrder) throw std::invalid_argument("samplecov moment order must lie in [1, 8]");
            const DerivativeStack u = u_derivatives(m, cn, model);
            double acc = 0.0;
            for (int k = 1; k <= m; ++k) {
                const double sign = ((m + k) % 2 == 0) ? 1.0 : -1.0;
                const double trk = sigma_power_trace(k, theta, model);
                out.d_components.push_back(trk);
                acc += sign * fact(k) / fact(m) * trk * bell_over(u.values, m, k);
            }
            out.value = acc;
            return out;
        }
        case Family::Ordinary: {
            if (cn <= 0.0 || cn >= 1.0) throw std::domain_error("ordinary-inverse moments require c_n < 1");
            if (t != 0.0) throw std::domain_error("ordinary-inverse moments live at t = 0");
            if (m < 0 || m > kMaxOrder - 1) {
                throw std::invalid_argument("ordinary moment index must lie in [0, 7]");
            }
            if (m == 0) {
                out.d_components.push_back(sigma_power_trace(-1, theta, model));
                out.value = out.d_components[0] / (1.0 - cn);
                return out;
            }
            const OrdinaryStacks st =
                ordinary_stacks(m + 1, cn, [&](int k) { return model.mean_eigen_pow(-k); });
            double acc = 0.0;
            for (int k = 1; k <= m + 1; ++k) {
                const double sign = (k % 2 == 0) ? 1.0 : -1.0;
                const double td = sigma_power_trace(-k, theta, model);
                out.d_components.push_back(td);
                acc += sign * fact(k) * td * bell_over(st.w_tilde, m + 1, k);
            }
            const double lead = ((m + 1) % 2 == 0) ? 1.0 : -1.0;
            out.value = lead / fact(m + 1) * acc;
            return out;
        }
    }
    throw std::logic_error("unreachable");
}

double identity_v(double t, double cn) {
    if (cn <= 0.0) throw std::domain_error("identity_v: c_n > 0 required");
    if (t < 0.0) throw std::invalid_argument("identity_v: t >= 0 required");
    if (t == 0.0 && cn <= 1.0) throw std::domain_error("identity_v: t = 0 requires c_n > 1");
    const double a = cn - 1.0 + t;
    return 2.0 / (a + std::sqrt(a * a + 4.0 * t));
}

double identity_w(double t, double cn) {
    if (cn <= 0.0 || cn >= 1.0) throw std::domain_error("identity_w: c_n in (0,1) required");
    if (t < 0.0) throw std::invalid_argument("identity_w: t >= 0 required");
    const double a = 1.0 - cn - t;
    return 0.5 * (a + std::sqrt(a * a + 4.0 * t));
}

double identity_closed_form(Family family, int m, double t, double cn) {
    switch (family) {
        case Family::MoorePenrose: {
            if (cn <= 1.0) throw std::domain_error("mp closed form requires c_n > 1");
            if (m < 1 || m > kMaxOrder) throw std::invalid_argument("mp moment order must lie in [1, 8]");
            const auto s = identity_v_stack(0.0, cn, m - 1);
            const double sign = ((m - 1) % 2 == 0) ? 1.0 : -1.0;
            return sign * s[static_cast<std::size_t>(m - 1)] / (fact(m - 1) * cn);
        }
        case Family::Ridge: {
            if (t <= 0.0) throw std::domain_error("ridge closed form requires t > 0");
            if (cn <= 0.0) throw std::domain_error("ridge closed form requires c_n > 0");
            if (m < 0 || m > kMaxOrder) throw std::invalid_argument("ridge moment index must lie in [0, 8]");
            const auto s = identity_v_stack(t, cn, m);
            const double sign = (m % 2 == 0) ? 1.0 : -1.0;
            return std::pow(t, -(m + 1)) * (cn - 1.0) / cn +
                   sign * s[static_cast<std::size_t>(m)] / (fact(m) * cn);
        }
        case Family::MPR: {
            if (t <= 0.0) throw std::domain_error("MPR closed form requires t > 0");
            if (cn <= 0.0) throw std::domain_error("MPR closed form requires c_n > 0");
            if (m < 1 || m > 4) throw std::invalid_argument("MPR moment index must lie in [1, 4]");
            const auto s = identity_v_stack(t, cn, 2 * m - 1);
            const double lead = ((m - 1) % 2 == 0) ? 1.0 : -1.0;
            double acc = 0.0;
            for (int k = 0; k <= m; ++k) {
                acc += binom(m, k) * s[static_cast<std::size_t>(m + k - 1)] / fact(m + k - 1) *
                       std::pow(t, k);
            }
            return lead / cn * acc;
        }
        case Family::SampleCov: {
            if (cn <= 0.0) throw std::domain_error("samplecov closed form requires c_n > 0");
            if (m < 1 || m > kMaxOrder) throw std::invalid_argument("samplecov moment order must lie in [1, 8]");
            const auto u = samplecov_stack(m + 1, cn, [](int) { return 1.0; });
            const double sign = (m % 2 == 0) ? 1.0 : -1.0;
            return sign * u[static_cast<std::size_t>(m + 1)] / (fact(m + 1) * cn);
        }
        case Family::Ordinary: {
            if (cn <= 0.0 || cn >= 1.0) throw std::domain_error("ordinary closed form requires c_n < 1");
            if (m < 0 || m > kMaxOrder - 1) {
                throw std::invalid_argument("ordinary moment index must lie in [0, 7]");
            }
            const auto st = ordinary_stacks(m + 1, cn, [](int) { return 1.0; });
            const double sign = (m % 2 == 0) ? 1.0 : -1.0;
            return sign * st.w[static_cast<std::size_t>(m + 1)] / (fact(m + 1) * cn);
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace pseudoshrink
