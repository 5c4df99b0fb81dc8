#pragma once

#include <string>
#include <vector>

#include "pseudoshrink/spectral_model.hpp"
#include "pseudoshrink/weight_matrix.hpp"

namespace pseudoshrink {

/// Which deterministic-equivalent family a moment belongs to. MoorePenrose
/// and Ordinary live at t = 0 (c > 1 resp. c < 1); Ridge and MPR need t > 0;
/// SampleCov covers tr(S^m Theta) for any c > 0.
enum class Family { MoorePenrose, Ridge, MPR, SampleCov, Ordinary };

Family parse_family(const std::string& tag);
std::string family_name(Family f);

enum class StackRegime { VOverOne, VGeneral, WUnderOne, USampleCov };

/// v(t) (or w/u analogue) together with derivatives up to `order`.
/// values[0] is the function value, values[j] the j-th derivative.
struct DerivativeStack {
    StackRegime regime;
    double t = 0.0;
    int order = 0;
    double cn = 0.0;
    std::vector<double> values;

    double v(int j) const { return values[static_cast<std::size_t>(j)]; }
};

/// Solves (1/p) tr[(v Sigma + I)^{-1}] = (c_n - 1 + t v)/c_n for v > 0 by
/// bracketing bisection (the residual is strictly monotone in v). Bisection
/// runs to machine precision on v; `tol` is the guaranteed residual bound.
double solve_v(double t, double cn, const SpectralModel& model, double tol = 1e-12);

/// v(t), v'(t), ..., v^(order)(t) via the Bell-polynomial recursion.
DerivativeStack v_derivatives(double t, int order, double cn, const SpectralModel& model,
                              double tol = 1e-12);

/// u(0)=0, u'(0)=1, ..., u^(order)(0): the sample-covariance analogue.
DerivativeStack u_derivatives(int order, double cn, const SpectralModel& model);

/// w(0)=1-c_n, w'(0), ..., w^(order)(0): the ordinary-inverse analogue (c_n < 1).
DerivativeStack w_derivatives(int order, double cn, const SpectralModel& model);

/// d_k(t, Theta) = tr{(v Sigma + I)^{-1} [Sigma (v Sigma + I)^{-1}]^k Theta}.
/// k = 0 is defined only in the t-parameterized (ridge) family; requesting it
/// with a t = 0 Moore-Penrose stack is an argument error.
double dk_weighted(const DerivativeStack& stack, int k, const WeightMatrix& theta,
                   const SpectralModel& model);

/// h_k = v^{-k} - c_n (1/p) tr{[Sigma (v Sigma + I)^{-1}]^k}.
double hk_value(const DerivativeStack& stack, int k, const SpectralModel& model);

struct MomentLimit {
    Family family = Family::MoorePenrose;
    int m = 0;       // family-specific index, see limit_moment
    double t = 0.0;
    double value = 0.0;
    std::vector<double> d_components;  // the d_k (or analogous) values used
    std::vector<double> h_components;  // the h_k values used (v families)
};

/// Deterministic equivalent of the weighted trace moment.
///   MoorePenrose: tr((S^+)^m Theta),        m >= 1, c_n > 1
///   Ridge:        tr((S^-(t))^{m+1} Theta), m >= 0, t > 0
///   MPR:          tr((S^±(t))^m Theta),     1 <= m <= 4, t > 0
///   SampleCov:    tr(S^m Theta),            m >= 1
///   Ordinary:     tr(S^{-(m+1)} Theta),     m >= 0, c_n < 1
MomentLimit limit_moment(Family family, int m, double t, const WeightMatrix& theta, double cn,
                         const SpectralModel& model, double tol = 1e-12);

/// Two algebraic routes to the MPR limit; limit_moment uses the D-form,
/// which stays stable as t -> 0.
double mpr_limit_binomial(int m, double t, const WeightMatrix& theta, double cn,
                          const SpectralModel& model, double tol = 1e-12);
double mpr_limit_dform(int m, double t, const WeightMatrix& theta, double cn,
                       const SpectralModel& model, double tol = 1e-12);

/// Direct sum vs one-step recursion for the ridge moment (same index m as
/// limit_moment's Ridge family).
double ridge_limit_direct(int m, double t, const WeightMatrix& theta, double cn,
                          const SpectralModel& model, double tol = 1e-12);
double ridge_limit_recursive(int m, double t, const WeightMatrix& theta, double cn,
                             const SpectralModel& model, double tol = 1e-12);

/// Sigma = I closed forms: the coefficient multiplying tr(Theta), computed
/// from the explicit formulas alone (no fixed-point solve). Index m follows
/// limit_moment's convention per family.
double identity_closed_form(Family family, int m, double t, double cn);

/// Closed-form v(t) and w(t) for Sigma = I.
double identity_v(double t, double cn);
double identity_w(double t, double cn);

}  // namespace pseudoshrink
