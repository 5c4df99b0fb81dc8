#pragma once

#include <Eigen/Core>
#include <string>

#include "pseudoshrink/generalized_inverse.hpp"
#include "pseudoshrink/plugin.hpp"
#include "pseudoshrink/spectral_model.hpp"

namespace pseudoshrink {

struct PortfolioWeights {
    Eigen::VectorXd weights;
    std::string method;
    double alpha = 1.0;              // shrinkage intensity toward the target
    double eta = 0.0;                // ridge tuning (double shrinkage only)
    Eigen::VectorXd target;          // b (empty when no target is involved)
    bool alpha_out_of_range = false; // advisory: alpha outside [0, 1]
    bool alpha_indeterminate = false;  // estimated discrimination below noise
                                       // floor: alpha set to 0, target held
};

/// w_GMV = Sigma^{-1} 1 / (1^T Sigma^{-1} 1)
PortfolioWeights true_gmv(const SpectralModel& sigma);

/// V_GMV = 1 / (1^T Sigma^{-1} 1)
double gmv_variance(const SpectralModel& sigma);

/// w = G 1 / (1^T G 1)
PortfolioWeights plugin_weights(const GeneralizedInverse& g);
PortfolioWeights plugin_weights(const PluginContext& ctx, InverseKind kind, double t = 0.0);

struct OracleAlpha {
    double alpha = 0.0;
    double objective = 0.0;  // L_{n;2}
};

/// Out-of-sample-variance-minimizing alpha for alpha w + (1-alpha) b with
/// Sigma known (oracle).
OracleAlpha oracle_alpha(const Eigen::VectorXd& sample_weights, const SpectralModel& sigma,
                         const Eigen::VectorXd& b);

/// Consistent data-driven alpha for the Moore-Penrose plug-in
/// weights; requires p > n and b^T 1 = 1.
PortfolioWeights bona_fide_alpha_mp(const PluginContext& ctx, const Eigen::VectorXd& b);
PortfolioWeights bona_fide_alpha_mp(const ObservationMatrix& y, const Eigen::VectorXd& b);

/// Benchmarks: the reflexive-inverse shrinkage and the double (ridge)
/// shrinkage with eta chosen by the tan-substitution search.
PortfolioWeights reflexive_weights(const PluginContext& ctx, const Eigen::VectorXd& b);
PortfolioWeights double_shrinkage_weights(const PluginContext& ctx, const Eigen::VectorXd& b);

/// alpha-hat of the reflexive estimator as a function of its R-hat statistic.
double reflexive_alpha_from_r(double r_hat, double cn);

/// rOSV(w) = w^T Sigma w / V_GMV - 1
double rosv(const Eigen::VectorXd& w, const SpectralModel& sigma);

}  // namespace pseudoshrink
