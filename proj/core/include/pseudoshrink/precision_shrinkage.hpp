#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>

#include "pseudoshrink/generalized_inverse.hpp"
#include "pseudoshrink/plugin.hpp"
#include "pseudoshrink/spectral_model.hpp"

namespace pseudoshrink {

enum class PrecisionMethod { MP, Ridge, MPR, EmpiricalBayes, OptimalRidge, OracleNL };

PrecisionMethod parse_precision_method(const std::string& tag);
std::string precision_method_name(PrecisionMethod m);

/// alpha * S^{#}(t*) + beta * Pi_0 (the benchmark estimators reuse the struct
/// with their own parameter meanings, see each constructor).
struct PrecisionShrinkagePlan {
    PrecisionMethod method = PrecisionMethod::MP;
    double alpha = 1.0;
    double beta = 0.0;
    double t_star = 0.0;
    Eigen::MatrixXd estimate;
    bool alpha_out_of_range = false;  // advisory: alpha outside [0, 1]
    bool fell_back_to_mp = false;     // MPR t-search preferred t = 0
    bool flat_objective = false;      // t-search hit a flat objective
};

struct OracleIntensities {
    double alpha = 0.0;
    double beta = 0.0;
    double objective = 0.0;  // L^2_{F;n,2}
};

/// Loss-minimizing (alpha*, beta*) for alpha G + beta Pi_0 against the known
/// Sigma, plus the t-profile objective. Oracle only: consumes Sigma itself.
OracleIntensities oracle_intensities(const GeneralizedInverse& g, const SpectralModel& sigma,
                                     const Eigen::MatrixXd& pi0);

struct TStarResult {
    double t_star = 0.0;
    double u_star = 0.0;
    double objective = 0.0;
    bool flat = false;
};

/// Maximizes objective(tan u) over u in (0.01, pi/2 - 0.01): 64-point grid,
/// then golden-section refinement to |du| < 1e-6. Non-finite values are
/// treated as -inf; a flat grid returns its midpoint, flagged.
TStarResult search_tstar(const std::function<double(double)>& objective_of_t);

/// Fully data-driven shrinkage plans (methods MP, Ridge, MPR). When t is
/// absent for Ridge/MPR the estimated loss profile is maximized over t; an
/// MPR search falls back to the Moore-Penrose plan when t = 0 wins.
PrecisionShrinkagePlan bona_fide_precision(const PluginContext& ctx, PrecisionMethod method,
                                           const Eigen::MatrixXd& pi0,
                                           std::optional<double> t = std::nullopt);
PrecisionShrinkagePlan bona_fide_precision(const ObservationMatrix& y, PrecisionMethod method,
                                           const Eigen::MatrixXd& pi0,
                                           std::optional<double> t = std::nullopt);

/// Estimated loss profiles behind the t-searches (exposed for diagnostics).
double estimated_ridge_profile(const PluginContext& ctx, const Eigen::MatrixXd& pi0, double t);
double estimated_mpr_profile(const PluginContext& ctx, const Eigen::MatrixXd& pi0, double t);
double estimated_mpr_profile_at_zero(const PluginContext& ctx, const Eigen::MatrixXd& pi0);

// ---- benchmark estimators ----

/// p ((n-1) S + tr(S) I)^{-1}
PrecisionShrinkagePlan empirical_bayes_precision(const Eigen::MatrixXd& s, Eigen::Index n);

/// alpha_OR (S + beta_OR I)^{-1}; beta_OR minimizes the estimated loss
/// 1 - R1^2/R2 (lambda values with 1 - c_n a1 <= 1e-10 are excluded).
/// The plan stores alpha_OR in `alpha` and beta_OR in `t_star`.
PrecisionShrinkagePlan optimal_ridge_precision(const Eigen::MatrixXd& s, Eigen::Index n);

/// a_1(lambda) = 1 - (1/p) tr[(S/lambda + I)^{-1}], the optimal-ridge
/// building block.
double optimal_ridge_a1(const Eigen::MatrixXd& s, double lambda);

/// Inverse of the oracle nonlinear covariance shrinkage: sample eigenvectors
/// u_i with eigenvalues u_i^T Sigma u_i / u_i^T Sigma^2 u_i.
PrecisionShrinkagePlan oracle_nl_precision(const Eigen::MatrixXd& s, const SpectralModel& sigma);

}  // namespace pseudoshrink
