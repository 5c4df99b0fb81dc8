#include "pseudoshrink/gmv_shrinkage.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pseudoshrink/errors.hpp"
#include "pseudoshrink/precision_shrinkage.hpp"  // search_tstar

namespace pseudoshrink {

namespace {

// alpha is inverted only when den-hat exceeds this many target variances
constexpr double kGmvDiscriminationThreshold = 2.0;

void check_target(const Eigen::VectorXd& b, Eigen::Index p) {
    if (b.size() != p) throw std::invalid_argument("gmv: target length mismatch");
    if (std::abs(b.sum() - 1.0) > 1e-8) {
        throw std::invalid_argument("gmv: target weights must sum to one");
    }
}

PortfolioWeights combine(const Eigen::VectorXd& w, const Eigen::VectorXd& b, double alpha,
                         std::string method) {
    PortfolioWeights out;
    out.weights = alpha * w + (1.0 - alpha) * b;
    out.method = std::move(method);
    out.alpha = alpha;
    out.target = b;
    out.alpha_out_of_range = alpha < 0.0 || alpha > 1.0;
    return out;
}

}  // namespace

PortfolioWeights true_gmv(const SpectralModel& sigma) {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sigma.p());
    const Eigen::VectorXd si1 = sigma.dense_inverse() * ones;
    PortfolioWeights out;
    out.weights = si1 / si1.sum();
    out.method = "true_gmv";
    return out;
}

double gmv_variance(const SpectralModel& sigma) {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sigma.p());
    return 1.0 / ones.dot(sigma.dense_inverse() * ones);
}

PortfolioWeights plugin_weights(const GeneralizedInverse& g) {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.vectors.rows());
    const Eigen::VectorXd g1 = g.dense() * ones;
    const double denom = g1.sum();
    if (std::abs(denom) < 1e-12) {
        throw DegeneracyError("1^T G 1", "plugin_weights: normalizer vanished");
    }
    PortfolioWeights out;
    out.weights = g1 / denom;
    out.method = "plugin";
    return out;
}

PortfolioWeights plugin_weights(const PluginContext& ctx, InverseKind kind, double t) {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ctx.p());
    Eigen::VectorXd g1;
    switch (kind) {
        case InverseKind::MoorePenrose:
            g1 = ctx.pinv_times(ones);
            break;
        default:
            g1 = ctx.dense_inverse(kind, t) * ones;
            break;
    }
    const double denom = g1.sum();
    if (std::abs(denom) < 1e-12) {
        throw DegeneracyError("1^T G 1", "plugin_weights: normalizer vanished");
    }
    PortfolioWeights out;
    out.weights = g1 / denom;
    out.method = "plugin";
    return out;
}

OracleAlpha oracle_alpha(const Eigen::VectorXd& sample_weights, const SpectralModel& sigma,
                         const Eigen::VectorXd& b) {
    check_target(b, sigma.p());
    if (sample_weights.size() != sigma.p()) {
        throw std::invalid_argument("oracle_alpha: weight length mismatch");
    }
    const Eigen::MatrixXd sd = sigma.dense();
    const Eigen::VectorXd diff = b - sample_weights;
    const double den = diff.dot(sd * diff);
    const double bsb = b.dot(sd * b);
    if (!(den > 1e-14 * std::max(1.0, bsb))) {
        throw DegeneracyError("(b - w)^T Sigma (b - w)",
                              "oracle_alpha: sample weights coincide with the target");
    }
    OracleAlpha out;
    const double num = b.dot(sd * diff);
    out.alpha = num / den;
    out.objective = num * num / (den * bsb);
    return out;
}

double plugin_variance_limit_mp(const PluginContext& ctx, const WeightMatrix& theta) {
    // Consistent estimator of lim tr(S^+ Sigma S^+ Theta): the O(1) Laurent
    // coefficient in t of the two-resolvent equivalent
    //   tr((S+tI)^{-1} Sigma (S+tI)^{-1} Theta)  ->  t^{-2} G(t),
    //   G(t) = (-v'(t)/v(t)^2) tr[Sigma (v(t) Sigma + I)^{-2} Theta]
    //        = (-v'(t)/v(t)^2) d_1(t, Theta),
    // i.e. (1/2) G''(0). Differentiating the chain v -> d_k turns G''(0) into
    // a combination of v-hat derivatives up to order three and the
    // d-hat_1, d-hat_2, d-hat_3 (d/dv of d_k(v) brings in d_{k+1}).
    // Expanding G''(0) through those plug-ins and collecting the raw
    // Moore-Penrose trace statistics a_m = tr[(S^+)^m Theta] and
    // g_m = (1/p) tr[(S^+)^m] cancels every g_4 term, leaving
    //   z-hat = c^{-2} [ (3 g2^2/g1^4 - 2 g3/g1^3) a1 - (4 g2/g1^3) a2
    //                    + (3/g1^2) a3 ],
    // which avoids the sample-level cancellations that make the d-hat_3
    // route unstable.
    const double cn = ctx.cn();
    const double g1 = ctx.mean_trace_pinv_pow(1);
    const double g2 = ctx.mean_trace_pinv_pow(2);
    const double g3 = ctx.mean_trace_pinv_pow(3);
    const double a1 = ctx.trace_pinv_pow_theta(1, theta);
    const double a2 = ctx.trace_pinv_pow_theta(2, theta);
    const double a3 = ctx.trace_pinv_pow_theta(3, theta);

    return ((3.0 * g2 * g2 / std::pow(g1, 4) - 2.0 * g3 / std::pow(g1, 3)) * a1 -
            (4.0 * g2 / std::pow(g1, 3)) * a2 + (3.0 / (g1 * g1)) * a3) /
           (cn * cn);
}

PortfolioWeights bona_fide_alpha_mp(const PluginContext& ctx, const Eigen::VectorXd& b) {
    check_target(b, ctx.p());
    if (ctx.p() <= ctx.n()) throw std::domain_error("bona_fide_alpha_mp: p > n required");
    const Eigen::Index p = ctx.p();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(p);

    // Theta = 1 b^T enters through its symmetrization; 1 1^T / p is rank one.
    const WeightMatrix theta_1b = WeightMatrix::symmetrized_outer(ones, b);
    const WeightMatrix theta_11 = WeightMatrix::low_rank({ones}, {1.0 / static_cast<double>(p)});

    const double v0 = ctx.hat_v_derivative(0, 0.0);
    const double v1 = ctx.hat_v_derivative(1, 0.0);
    const double d1_11 = ctx.hat_d(1, theta_11, 0.0);
    const double d1_1b = ctx.hat_d(1, theta_1b, 0.0);
    const double d0_1b = ctx.hat_d(0, theta_1b, 0.0);

    // p b' Sigma w_{S+}: a ratio of d-hat functionals
    const double d1_1b_sigma = (1.0 / v0) * ((1.0 / v0) * (1.0 - d0_1b) - d1_1b);
    const double ratio = d1_1b_sigma / d1_11;

    // p w' Sigma w: numerator from the two-resolvent limit, normalizer from
    // (1/p) 1' S^+ 1 -> (-v'(0)) d_1(11'/p)
    const double z_num = plugin_variance_limit_mp(ctx, theta_11);
    const double m1 = -v1 * d1_11;
    const double t_term = z_num / (m1 * m1);

    const double p_bsb = static_cast<double>(p) * ctx.quad_pow(b, b, 1);
    const double den = p_bsb - 2.0 * ratio + t_term;

    // den estimates p (b-w)' Sigma (b-w) >= 0. When its estimate falls below
    // a couple of target variances, alpha is not identified at the plug-in
    // noise level (the same regime the oracle treats as "any alpha gives the
    // same portfolio"), so hold the target and flag. The population ratio
    // den / (p b' Sigma b) stays well above the threshold at singular designs
    // because the plug-in portfolio variance diverges as c grows past one.
    const PortfolioWeights wplug = plugin_weights(ctx, InverseKind::MoorePenrose);
    if (!(den > kGmvDiscriminationThreshold * p_bsb)) {
        PortfolioWeights out = combine(wplug.weights, b, 0.0, "mp_bona_fide");
        out.alpha_indeterminate = true;
        return out;
    }
    const double alpha = (p_bsb - ratio) / den;
    return combine(wplug.weights, b, alpha, "mp_bona_fide");
}

PortfolioWeights bona_fide_alpha_mp(const ObservationMatrix& y, const Eigen::VectorXd& b) {
    return bona_fide_alpha_mp(PluginContext::from_data(y), b);
}

double reflexive_alpha_from_r(double r_hat, double cn) {
    const double cm1 = cn - 1.0;
    return cm1 * r_hat / (cm1 * cm1 + cn + cm1 * r_hat);
}

PortfolioWeights reflexive_weights(const PluginContext& ctx, const Eigen::VectorXd& b) {
    check_target(b, ctx.p());
    if (ctx.p() <= ctx.n()) throw std::domain_error("reflexive_weights: p > n required");
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ctx.p());
    const double cn = ctx.cn();
    const double bsb = ctx.quad_pow(b, b, 1);
    const double one_pinv_one = ctx.quad_pinv(ones, ones, 1);
    const double r_hat = cn * (cn - 1.0) * bsb * one_pinv_one - 1.0;
    const double alpha = reflexive_alpha_from_r(r_hat, cn);
    const PortfolioWeights wplug = plugin_weights(ctx, InverseKind::MoorePenrose);
    return combine(wplug.weights, b, alpha, "reflexive");
}

PortfolioWeights double_shrinkage_weights(const PluginContext& ctx, const Eigen::VectorXd& b) {
    check_target(b, ctx.p());
    const Eigen::Index p = ctx.p();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(p);
    const double cn = ctx.cn();
    const double bsb = ctx.quad_pow(b, b, 1);

    struct Parts {
        double a = 0.0, bq = 0.0, one_r1 = 0.0;
    };
    auto parts = [&](double eta) -> Parts {
        const double one_r1 = ctx.quad_ridge(eta, ones, ones, 1);
        const double one_r2 = ctx.quad_ridge(eta, ones, ones, 2);
        const double b_r1 = ctx.quad_ridge(eta, b, ones, 1);
        const double tr_r1 = ctx.mean_trace_ridge_pow(eta, 1);
        const double tr_r2 = ctx.mean_trace_ridge_pow(eta, 2);
        const double vhat = 1.0 - cn * (1.0 - eta * tr_r1);
        const double d1 = (1.0 + eta) / vhat * (1.0 - eta * b_r1);
        const double d2 = (1.0 + eta) * (1.0 + eta) / vhat * (one_r1 - eta * one_r2);
        const double v1 = vhat * cn * (tr_r1 - eta * tr_r2);
        const double v2 = 1.0 - 1.0 / vhat + eta * v1 / (vhat * vhat);
        Parts out;
        out.one_r1 = one_r1;
        out.a = (1.0 / (1.0 + eta)) / bsb * d1 / one_r1;
        out.bq = (1.0 / ((1.0 + eta) * (1.0 + eta))) / bsb * (1.0 - v2) * d2 / (one_r1 * one_r1);
        return out;
    };
    auto alpha_at = [&](double eta) {
        const Parts q = parts(eta);
        const double den = 1.0 - 2.0 * q.a + q.bq;
        return (den > 0.0) ? (1.0 - q.a) / den : std::numeric_limits<double>::quiet_NaN();
    };
    auto profile = [&](double eta) {
        // search eta in [0.1, 10] (the scale of the spectrum); outside
        // it the small-eta estimates are dominated by the near-vanishing
        // v-hat(eta, 0). The estimated profile is also unbounded where the
        // ridge portfolio becomes indistinguishable from the target (large
        // eta), so the search is restricted to the convex-combination
        // feasible region alpha(eta) in [0, 1].
        if (eta < 0.1 || eta > 10.0) return -std::numeric_limits<double>::infinity();
        const Parts q = parts(eta);
        const double den = 1.0 - 2.0 * q.a + q.bq;
        if (!(den > 0.0)) return -std::numeric_limits<double>::infinity();
        const double alpha = (1.0 - q.a) / den;
        if (alpha < 0.0 || alpha > 1.0) return -std::numeric_limits<double>::infinity();
        return (1.0 - q.a) * (1.0 - q.a) / den;
    };

    double eta;
    double alpha;
    try {
        const TStarResult r = search_tstar(profile);
        eta = r.t_star;
        alpha = alpha_at(eta);
    } catch (const SearchError&) {
        eta = 0.0;
        alpha = std::numeric_limits<double>::quiet_NaN();
    }
    if (!(std::isfinite(alpha) && alpha >= 0.0 && alpha <= 1.0)) {
        // refinement ended outside the feasible region; rescan the grid
        double best = -std::numeric_limits<double>::infinity();
        eta = 0.0;
        for (int i = 0; i < 64; ++i) {
            const double u = 0.01 + (std::atan(1.0) * 2.0 - 0.02) * i / 63.0;
            const double cand = std::tan(u);
            const double val = profile(cand);
            if (std::isfinite(val) && val > best) {
                best = val;
                eta = cand;
            }
        }
        if (eta == 0.0) {
            // no feasible eta: hold the target
            PortfolioWeights out = combine(b, b, 0.0, "double_shrinkage");
            out.alpha_indeterminate = true;
            return out;
        }
        alpha = alpha_at(eta);
    }
    const Eigen::VectorXd ridge1 = ctx.dense_inverse(InverseKind::Ridge, eta) * ones;
    PortfolioWeights out = combine(ridge1 / ridge1.sum(), b, alpha, "double_shrinkage");
    out.eta = eta;
    return out;
}

double rosv(const Eigen::VectorXd& w, const SpectralModel& sigma) {
    if (w.size() != sigma.p()) throw std::invalid_argument("rosv: weight length mismatch");
    const double var = w.dot(sigma.dense() * w);
    return var / gmv_variance(sigma) - 1.0;
}

}  // namespace pseudoshrink
