#include "pseudoshrink/precision_shrinkage.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pseudoshrink/errors.hpp"

namespace pseudoshrink {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_identity(const Eigen::MatrixXd& m) {
    return m.isIdentity(0.0);
}

WeightMatrix scaled_theta(const Eigen::MatrixXd& pi0, double scale) {
    // Theta = scale * Pi_0, specialised when Pi_0 = I
    if (is_identity(pi0)) return WeightMatrix::scaled_identity(pi0.rows(), scale);
    return WeightMatrix::dense(scale * pi0);
}

WeightMatrix scaled_theta_sq(const Eigen::MatrixXd& pi0, double scale) {
    // Theta = scale * Pi_0^2
    if (is_identity(pi0)) return WeightMatrix::scaled_identity(pi0.rows(), scale);
    return WeightMatrix::dense(scale * (pi0 * pi0));
}

// shared quantities of the three bona-fide constructions
struct CommonHats {
    double q1_pi;    // q-hat_1(Pi_0/p) = (1/p) tr(S Pi_0)
    double q2_pi2;   // q-hat_2(Pi_0^2/p)
    double tr_s_p;   // (1/p) tr S
    double tr_pi_p;  // (1/p) tr Pi_0
};

CommonHats common_hats(const PluginContext& ctx, const Eigen::MatrixXd& pi0) {
    const double inv_p = 1.0 / static_cast<double>(ctx.p());
    const WeightMatrix w_pi = scaled_theta(pi0, inv_p);
    const WeightMatrix w_pi2 = scaled_theta_sq(pi0, inv_p);
    CommonHats h;
    h.q1_pi = ctx.hat_q(1, w_pi);
    h.q2_pi2 = ctx.hat_q(2, w_pi2);
    h.tr_s_p = ctx.mean_trace_pow(1);
    h.tr_pi_p = pi0.trace() * inv_p;
    return h;
}

struct MpHats {
    double alpha, beta;
    double d1_sig, d1_sig2pi, s2_sig2;  // reused by the MPR t = 0 profile
    double v1;
};

MpHats mp_intensities(const PluginContext& ctx, const Eigen::MatrixXd& pi0) {
    if (ctx.p() <= ctx.n()) throw std::domain_error("MP shrinkage requires p > n");
    const double cn = ctx.cn();
    const double inv_p = 1.0 / static_cast<double>(ctx.p());
    const WeightMatrix w_i = WeightMatrix::scaled_identity(ctx.p(), inv_p);
    const WeightMatrix w_pi = scaled_theta(pi0, inv_p);
    CommonHats ch = common_hats(ctx, pi0);
    // For a covariance with m degrees of freedom, E tr(S^2 Theta) carries the
    // exact factor (1 + 1/m) on tr(Sigma^2 Theta) once q-hat_2's subtraction
    // removes the (tr Sigma)^2 part. The MP alpha numerator is a ~2% residual
    // of q-scaled products, so that factor alone doubles alpha; take it out.
    const double m = static_cast<double>(ctx.n());
    ch.q2_pi2 *= m / (m + 1.0);

    const double v0 = ctx.hat_v_derivative(0, 0.0);
    const double h2 = ctx.hat_h(2);
    const double h3 = ctx.hat_h(3);
    const double d1_i = ctx.hat_d(1, w_i, 0.0);
    const double d2_i = ctx.hat_d(2, w_i, 0.0);
    const double d1_pi = ctx.hat_d(1, w_pi, 0.0);
    // for Pi_0 = I the limit d_0(0, I/p) = (c_n - 1)/c_n holds exactly (the
    // v-equation), preferable to the projection trace here;
    // the plug-in projection carries a 1/n rank artifact that the alpha
    // numerator's cancellation would amplify
    const double d0_pi =
        is_identity(pi0) ? (cn - 1.0) / cn : ctx.hat_d(0, w_pi, 0.0);

    const double d1_sig = (1.0 / v0) * (1.0 / (cn * v0) - d1_i);
    const double d1_sig2 = (1.0 / (v0 * v0)) * (ch.tr_s_p + d1_i - 2.0 / (cn * v0));
    const double d1_sig2pi = (1.0 / (v0 * v0)) * (ch.q1_pi + d1_pi) -
                             (2.0 / (v0 * v0 * v0)) * (ch.tr_pi_p - d0_pi);
    const double d2_sig2 = (1.0 / v0) * d1_sig2 - (1.0 / (v0 * v0)) * (d1_sig - d2_i);

    // a estimates -h2^2 * s_2(Sigma^2/p), so the shared denominator
    // a q2 + d1(0,Sigma^2 Pi0/p)^2 = -h2^2 (s_2 q_2 - s_1^2) is negative
    // whenever the Cauchy-Schwarz gap is open; zero marks S^+ ∝ Pi_0.
    const double a = d2_sig2 - d1_sig2 * h3 / h2;
    const double den_b = a * ch.q2_pi2 + d1_sig2pi * d1_sig2pi;
    if (!(den_b < 0.0)) {
        throw DegeneracyError("mp shrinkage denominator",
                              "bona_fide_precision: degenerate MP intensity denominator");
    }
    MpHats out;
    out.alpha = (d1_sig * ch.q2_pi2 - d1_sig2pi * ch.q1_pi) / (-(1.0 / h2) * den_b);
    out.beta = (a * ch.q1_pi + d1_sig * d1_sig2pi) / den_b;
    out.d1_sig = d1_sig;
    out.d1_sig2pi = d1_sig2pi;
    // s-hat_2(Sigma^2/p) = -([v']^2 d_2(Sigma^2/p) - v''/2 d_1(Sigma^2/p))
    const double v1 = ctx.hat_v_derivative(1, 0.0);
    const double v2 = ctx.hat_v_derivative(2, 0.0);
    out.s2_sig2 = -(v1 * v1 * d2_sig2 - 0.5 * v2 * d1_sig2);
    out.v1 = v1;
    return out;
}

struct RidgeHats {
    double alpha, beta;
};

struct RidgeChain {
    double d0_sig, d0_sig2, d0_sig2pi, d1_sig2, v1;
};

RidgeChain ridge_chain(const PluginContext& ctx, const Eigen::MatrixXd& pi0, double t,
                       const CommonHats& ch) {
    const double cn = ctx.cn();
    const double inv_p = 1.0 / static_cast<double>(ctx.p());
    const WeightMatrix w_i = WeightMatrix::scaled_identity(ctx.p(), inv_p);
    const WeightMatrix w_pi = scaled_theta(pi0, inv_p);

    const double vt = ctx.hat_v_derivative(0, t);
    const double d0_pi = ctx.hat_d(0, w_pi, t);
    const double d1_i = ctx.hat_d(1, w_i, t);

    RidgeChain r;
    r.v1 = ctx.hat_v_derivative(1, t);
    r.d0_sig = 1.0 / (cn * vt) - t / cn;
    r.d0_sig2 = (1.0 / vt) * (ch.tr_s_p - 1.0 / (cn * vt) + t / cn);
    r.d0_sig2pi = (1.0 / vt) * ch.q1_pi - (1.0 / (vt * vt)) * (ch.tr_pi_p - d0_pi);
    r.d1_sig2 = (1.0 / (vt * vt)) * (ch.tr_s_p + d1_i - 2.0 / (cn * vt) + 2.0 * t / cn);
    return r;
}

RidgeHats ridge_intensities(const PluginContext& ctx, const Eigen::MatrixXd& pi0, double t) {
    const CommonHats ch = common_hats(ctx, pi0);
    const RidgeChain r = ridge_chain(ctx, pi0, t, ch);
    const double e = r.d0_sig2 / t + r.v1 * r.d1_sig2;
    const double den = e * ch.q2_pi2 - r.d0_sig2pi * r.d0_sig2pi / t;
    if (!(den > 0.0)) {
        throw DegeneracyError("ridge shrinkage denominator",
                              "bona_fide_precision: degenerate ridge intensity denominator");
    }
    RidgeHats out;
    out.alpha = (r.d0_sig * ch.q2_pi2 - r.d0_sig2pi * ch.q1_pi) / den;
    out.beta = (e * ch.q1_pi - r.d0_sig * r.d0_sig2pi / t) / den;
    return out;
}

struct MprChain {
    double v1;
    double d1_sig, d1_sig2pi;
    double s2_grave;  // s-grave-hat_2(t, Sigma^2/p)
};

MprChain mpr_chain(const PluginContext& ctx, const Eigen::MatrixXd& pi0, double t,
                   const CommonHats& ch) {
    const double cn = ctx.cn();
    const double inv_p = 1.0 / static_cast<double>(ctx.p());
    const WeightMatrix w_pi = scaled_theta(pi0, inv_p);

    const double vt = ctx.hat_v_derivative(0, t);
    const double v1 = ctx.hat_v_derivative(1, t);
    const double v2 = ctx.hat_v_derivative(2, t);
    const double v3 = ctx.hat_v_derivative(3, t);
    const double d0_pi = ctx.hat_d(0, w_pi, t);
    const double d1_pi = ctx.hat_d(1, w_pi, t);
    const RidgeChain rc = ridge_chain(ctx, pi0, t, ch);

    MprChain m;
    m.v1 = v1;
    m.d1_sig = (std::pow(vt, -2) + 1.0 / v1) / cn;
    const double d1_sig2 = (1.0 / vt) * (rc.d0_sig2 - m.d1_sig);
    m.d1_sig2pi = (1.0 / vt) * rc.d0_sig2pi + (1.0 / (vt * vt)) * d1_pi -
                  (1.0 / std::pow(vt, 3)) * (ch.tr_pi_p - d0_pi);
    const double d2_sig2 =
        (1.0 / vt) * (d1_sig2 - (1.0 / cn) * (std::pow(vt, -3) + v2 / (2.0 * std::pow(v1, 3))));
    const double d3_sig2 =
        (1.0 / vt) * (d2_sig2 - (1.0 / cn) * (std::pow(vt, -4) + 0.5 * v2 * v2 / std::pow(v1, 5) -
                                              v3 / (6.0 * std::pow(v1, 4))));
    m.s2_grave = -(v1 * v1 * d2_sig2 - 0.5 * v2 * d1_sig2) +
                 t * (v3 / 6.0 * d1_sig2 - v1 * v2 * d2_sig2 + std::pow(v1, 3) * d3_sig2);
    return m;
}

Eigen::MatrixXd assemble(const Eigen::MatrixXd& base, double alpha, double beta,
                         const Eigen::MatrixXd& pi0) {
    Eigen::MatrixXd est = alpha * base;
    est.noalias() += beta * pi0;
    return est;
}

}  // namespace

PrecisionMethod parse_precision_method(const std::string& tag) {
    if (tag == "mp") return PrecisionMethod::MP;
    if (tag == "ridge") return PrecisionMethod::Ridge;
    if (tag == "mpr") return PrecisionMethod::MPR;
    if (tag == "eb") return PrecisionMethod::EmpiricalBayes;
    if (tag == "or") return PrecisionMethod::OptimalRidge;
    if (tag == "oracle_nl") return PrecisionMethod::OracleNL;
    throw std::invalid_argument("unknown precision method: " + tag);
}

std::string precision_method_name(PrecisionMethod m) {
    switch (m) {
        case PrecisionMethod::MP: return "mp";
        case PrecisionMethod::Ridge: return "ridge";
        case PrecisionMethod::MPR: return "mpr";
        case PrecisionMethod::EmpiricalBayes: return "eb";
        case PrecisionMethod::OptimalRidge: return "or";
        case PrecisionMethod::OracleNL: return "oracle_nl";
    }
    return "?";
}

OracleIntensities oracle_intensities(const GeneralizedInverse& g, const SpectralModel& sigma,
                                     const Eigen::MatrixXd& pi0) {
    const Eigen::MatrixXd sd = sigma.dense();
    const Eigen::MatrixXd gd = g.dense();
    const Eigen::MatrixXd gs = gd * sd;
    const Eigen::MatrixXd spi = sd * pi0;

    const double t1 = gs.trace();
    const double fro2 = gs.squaredNorm();
    const double norm_spi = spi.norm();
    if (!(norm_spi > 0.0)) throw std::invalid_argument("oracle_intensities: Sigma Pi_0 vanishes");
    const double t2 = (gs * spi).trace() / norm_spi;
    const double t3 = spi.trace() / norm_spi;

    const double den = fro2 - t2 * t2;
    if (!(den > 1e-12 * fro2)) {
        throw DegeneracyError("||G Sigma||_F^2 - tr^2(G Sigma^2 Pi_0 / ||Sigma Pi_0||)",
                              "oracle_intensities: generalized inverse proportional to the target");
    }
    OracleIntensities out;
    out.alpha = (t1 - t3 * t2) / den;
    out.beta = (t3 * fro2 - t1 * t2) / (den * norm_spi);
    out.objective = (t1 - t2 * t3) * (t1 - t2 * t3) / den;
    return out;
}

TStarResult search_tstar(const std::function<double(double)>& objective_of_t) {
    constexpr int kGrid = 64;
    const double ulo = 0.01;
    const double uhi = std::atan(1.0) * 2.0 - 0.01;  // pi/2 - 0.01

    auto eval = [&](double u) {
        const double val = objective_of_t(std::tan(u));
        return std::isfinite(val) ? val : -kInf;
    };

    std::vector<double> us(kGrid), vals(kGrid);
    int best = -1;
    double vmax = -kInf, vmin = kInf;
    for (int i = 0; i < kGrid; ++i) {
        us[static_cast<std::size_t>(i)] = ulo + (uhi - ulo) * i / (kGrid - 1);
        const double v = eval(us[static_cast<std::size_t>(i)]);
        vals[static_cast<std::size_t>(i)] = v;
        if (v > vmax) {
            vmax = v;
            best = i;
        }
        if (v < vmin) vmin = v;
    }
    if (best < 0 || vmax == -kInf) {
        throw SearchError("search_tstar: objective non-finite on the whole grid");
    }

    TStarResult out;
    if (vmin != -kInf && vmax - vmin <= 1e-12 * std::max(1.0, std::abs(vmax))) {
        out.u_star = 0.5 * (ulo + uhi);
        out.t_star = std::tan(out.u_star);
        out.objective = vmax;
        out.flat = true;
        return out;
    }

    double a = us[static_cast<std::size_t>(std::max(best - 1, 0))];
    double b = us[static_cast<std::size_t>(std::min(best + 1, kGrid - 1))];
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = eval(x1);
    double f2 = eval(x2);
    while (b - a > 1e-6) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = eval(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = eval(x1);
        }
    }
    out.u_star = 0.5 * (a + b);
    out.t_star = std::tan(out.u_star);
    out.objective = eval(out.u_star);
    out.flat = false;
    return out;
}

namespace {

// ratio mapping the plain 1/n covariance to the d.o.f.-matched view; chains
// are evaluated on the matched view with t scaled by kappa, and intensities
// mapped back with 1/kappa (the matched inverse is 1/kappa times the plain
// one at the matched t)
double dof_kappa(const PluginContext& ctx) {
    return static_cast<double>(ctx.n()) / static_cast<double>(ctx.n() - 1);
}

double ridge_profile_matched(const PluginContext& matched, const Eigen::MatrixXd& pi0, double t) {
    if (t <= 0.0) return -kInf;
    const CommonHats ch = common_hats(matched, pi0);
    const RidgeChain r = ridge_chain(matched, pi0, t, ch);
    const double den = (r.d0_sig2 + t * r.v1 * r.d1_sig2) * ch.q2_pi2 - r.d0_sig2pi * r.d0_sig2pi;
    const double num = r.d0_sig * ch.q2_pi2 - r.d0_sig2pi * ch.q1_pi;
    return num * num / (den * ch.q2_pi2);
}

double mpr_profile_matched(const PluginContext& matched, const Eigen::MatrixXd& pi0, double t) {
    if (t <= 0.0) return -kInf;
    const CommonHats ch = common_hats(matched, pi0);
    const MprChain m = mpr_chain(matched, pi0, t, ch);
    const double den = m.s2_grave * ch.q2_pi2 - m.v1 * m.v1 * m.d1_sig2pi * m.d1_sig2pi;
    const double num = m.d1_sig * ch.q2_pi2 - m.d1_sig2pi * ch.q1_pi;
    return m.v1 * m.v1 * num * num / (den * ch.q2_pi2);
}

double mpr_profile_zero_matched(const PluginContext& matched, const Eigen::MatrixXd& pi0) {
    const CommonHats ch = common_hats(matched, pi0);
    const MpHats mp = mp_intensities(matched, pi0);
    const double den = mp.s2_sig2 * ch.q2_pi2 - mp.v1 * mp.v1 * mp.d1_sig2pi * mp.d1_sig2pi;
    const double num = mp.d1_sig * ch.q2_pi2 - mp.d1_sig2pi * ch.q1_pi;
    return mp.v1 * mp.v1 * num * num / (den * ch.q2_pi2);
}

}  // namespace

double estimated_ridge_profile(const PluginContext& ctx, const Eigen::MatrixXd& pi0, double t) {
    const double kappa = dof_kappa(ctx);
    return ridge_profile_matched(ctx.dof_matched(), pi0, kappa * t);
}

double estimated_mpr_profile(const PluginContext& ctx, const Eigen::MatrixXd& pi0, double t) {
    const double kappa = dof_kappa(ctx);
    return mpr_profile_matched(ctx.dof_matched(), pi0, kappa * t);
}

double estimated_mpr_profile_at_zero(const PluginContext& ctx, const Eigen::MatrixXd& pi0) {
    return mpr_profile_zero_matched(ctx.dof_matched(), pi0);
}

PrecisionShrinkagePlan bona_fide_precision(const PluginContext& ctx, PrecisionMethod method,
                                           const Eigen::MatrixXd& pi0, std::optional<double> t) {
    if (pi0.rows() != ctx.p() || pi0.cols() != ctx.p()) {
        throw std::invalid_argument("bona_fide_precision: Pi_0 dimension mismatch");
    }
    PrecisionShrinkagePlan plan;
    plan.method = method;

    switch (method) {
        case PrecisionMethod::MP: {
            // assemble on the d.o.f.-matched view; the reported alpha is
            // rescaled so that estimate = alpha S^+ + beta Pi_0 with S^+ of
            // the plain 1/n sample covariance
            const PluginContext matched = ctx.dof_matched();
            const MpHats h = mp_intensities(matched, pi0);
            plan.alpha = h.alpha * static_cast<double>(matched.n()) / static_cast<double>(ctx.n());
            plan.beta = h.beta;
            plan.t_star = 0.0;
            plan.estimate =
                assemble(ctx.dense_inverse(InverseKind::MoorePenrose), plan.alpha, plan.beta, pi0);
            break;
        }
        case PrecisionMethod::Ridge: {
            const double kappa = dof_kappa(ctx);
            const PluginContext matched = ctx.dof_matched();
            double tm;  // tuning parameter in matched units
            if (t) {
                if (*t <= 0.0) throw std::invalid_argument("bona_fide_precision: t > 0 required for ridge");
                tm = kappa * *t;
            } else {
                const TStarResult r = search_tstar(
                    [&](double tt) { return ridge_profile_matched(matched, pi0, tt); });
                tm = r.t_star;
                plan.flat_objective = r.flat;
            }
            const RidgeHats h = ridge_intensities(matched, pi0, tm);
            plan.alpha = h.alpha / kappa;
            plan.beta = h.beta;
            plan.t_star = tm / kappa;
            plan.estimate =
                assemble(ctx.dense_inverse(InverseKind::Ridge, plan.t_star), plan.alpha, plan.beta, pi0);
            break;
        }
        case PrecisionMethod::MPR: {
            const double kappa = dof_kappa(ctx);
            const PluginContext matched = ctx.dof_matched();
            double tm;
            bool searched = false;
            if (t) {
                if (*t <= 0.0) throw std::invalid_argument("bona_fide_precision: t > 0 required for MPR");
                tm = kappa * *t;
            } else {
                const TStarResult r = search_tstar(
                    [&](double tt) { return mpr_profile_matched(matched, pi0, tt); });
                tm = r.t_star;
                plan.flat_objective = r.flat;
                searched = true;
            }
            if (searched && ctx.p() > ctx.n()) {
                const double at_zero = mpr_profile_zero_matched(matched, pi0);
                const double at_t = mpr_profile_matched(matched, pi0, tm);
                if (!(at_t > at_zero)) {
                    plan = bona_fide_precision(ctx, PrecisionMethod::MP, pi0);
                    plan.method = PrecisionMethod::MPR;
                    plan.fell_back_to_mp = true;
                    plan.alpha_out_of_range = plan.alpha < 0.0 || plan.alpha > 1.0;
                    return plan;
                }
            }
            const CommonHats ch = common_hats(matched, pi0);
            const MprChain m = mpr_chain(matched, pi0, tm, ch);
            const double den = m.s2_grave * ch.q2_pi2 - m.v1 * m.v1 * m.d1_sig2pi * m.d1_sig2pi;
            if (!(den > 0.0)) {
                throw DegeneracyError("mpr shrinkage denominator",
                                      "bona_fide_precision: degenerate MPR intensity denominator");
            }
            plan.alpha =
                (-m.v1 * m.d1_sig * ch.q2_pi2 + m.v1 * m.d1_sig2pi * ch.q1_pi) / den / kappa;
            plan.beta = (m.s2_grave * ch.q1_pi - m.v1 * m.v1 * m.d1_sig * m.d1_sig2pi) / den;
            plan.t_star = tm / kappa;
            plan.estimate =
                assemble(ctx.dense_inverse(InverseKind::MPR, plan.t_star), plan.alpha, plan.beta, pi0);
            break;
        }
        default:
            throw std::invalid_argument("bona_fide_precision: method must be mp, ridge, or mpr");
    }
    plan.alpha_out_of_range = plan.alpha < 0.0 || plan.alpha > 1.0;
    return plan;
}

PrecisionShrinkagePlan bona_fide_precision(const ObservationMatrix& y, PrecisionMethod method,
                                           const Eigen::MatrixXd& pi0, std::optional<double> t) {
    return bona_fide_precision(PluginContext::from_data(y), method, pi0, t);
}

PrecisionShrinkagePlan empirical_bayes_precision(const Eigen::MatrixXd& s, Eigen::Index n) {
    const Eigen::Index p = s.rows();
    Eigen::MatrixXd m = static_cast<double>(n - 1) * s;
    m.diagonal().array() += s.trace();
    PrecisionShrinkagePlan plan;
    plan.method = PrecisionMethod::EmpiricalBayes;
    plan.estimate = static_cast<double>(p) * m.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    return plan;
}

double optimal_ridge_a1(const Eigen::MatrixXd& s, double lambda) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    const Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) acc += lambda / (d[i] + lambda);
    return 1.0 - acc / static_cast<double>(d.size());
}

PrecisionShrinkagePlan optimal_ridge_precision(const Eigen::MatrixXd& s, Eigen::Index n) {
    const Eigen::Index p = s.rows();
    const double cn = static_cast<double>(p) / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    const Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0);

    auto a1 = [&](double lam) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < p; ++i) acc += lam / (d[i] + lam);
        return 1.0 - acc / static_cast<double>(p);
    };
    auto a2 = [&](double lam) {
        double acc1 = 0.0, acc2 = 0.0;
        for (Eigen::Index i = 0; i < p; ++i) {
            const double r = lam / (d[i] + lam);
            acc1 += r;
            acc2 += r * r;
        }
        return (acc1 - acc2) / static_cast<double>(p);
    };
    auto r1 = [&](double lam) {
        const double a = a1(lam);
        return a / (1.0 - cn * a);
    };
    auto r2 = [&](double lam) {
        const double a = a1(lam);
        const double den = 1.0 - cn * a;
        return a / std::pow(den, 3) - a2(lam) / std::pow(den, 4);
    };
    auto objective = [&](double lam) {
        const double a = a1(lam);
        if (1.0 - cn * a <= 1e-10) return -kInf;
        const double rr2 = r2(lam);
        if (!(rr2 > 0.0)) return -kInf;
        const double rr1 = r1(lam);
        return rr1 * rr1 / rr2;  // maximizing this minimizes 1 - R1^2/R2
    };

    const TStarResult r = search_tstar(objective);
    const double lam = r.t_star;
    const double alpha = r1(lam) / r2(lam);

    PrecisionShrinkagePlan plan;
    plan.method = PrecisionMethod::OptimalRidge;
    plan.alpha = alpha;
    plan.t_star = lam;
    plan.flat_objective = r.flat;
    Eigen::VectorXd inv = (d.array() + lam).inverse();
    plan.estimate = alpha * (es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose());
    return plan;
}

PrecisionShrinkagePlan oracle_nl_precision(const Eigen::MatrixXd& s, const SpectralModel& sigma) {
    if (s.rows() != sigma.p()) throw std::invalid_argument("oracle_nl_precision: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    const Eigen::MatrixXd sd = sigma.dense();
    const Eigen::MatrixXd su = sd * es.eigenvectors();

    const Eigen::Index p = s.rows();
    Eigen::VectorXd inv_d(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double num = es.eigenvectors().col(i).dot(su.col(i));  // u^T Sigma u
        const double den = su.col(i).squaredNorm();                  // u^T Sigma^2 u
        inv_d[i] = num / den;
    }
    PrecisionShrinkagePlan plan;
    plan.method = PrecisionMethod::OracleNL;
    plan.estimate = es.eigenvectors() * inv_d.asDiagonal() * es.eigenvectors().transpose();
    return plan;
}

}  // namespace pseudoshrink
