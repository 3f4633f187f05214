// Linear value-function approximation: feature matrices, least-squares
// weight fits against exact policy evaluation, and the lower-bound check for
// the approximate DR value over a discretized ambiguity set.
#pragma once

#include "wdr/robust_dp.hpp"

namespace wdr {

/// Dense feature matrix, row s = Phi(s)^T; columns must be linearly
/// independent (relative singular-value threshold 1e-10).
struct FeatureMatrix {
    long num_states;
    long m;
    numvec phi; // row-major |S| x m

    prec_t at(long s, long k) const { return phi[static_cast<size_t>(s * m + k)]; }
};

struct WeightVector {
    numvec w;
};

/// Fitted weights with the pointwise residual Phi w - v and its l2 norm.
struct FitResult {
    WeightVector weights;
    numvec residual;
    prec_t residual_norm;
};

/// \throws structural_error on dimension mismatch or column rank deficiency
void validate(const FeatureMatrix& phi, const TabularMdp& mdp);

/**
 * Least-squares projection of the exact policy value onto the feature span:
 * w = argmin ||Phi w - v_p^pi||_2 with v_p^pi from the direct linear solve.
 * tol bounds the accepted Bellman residual of that solve.
 *
 * \throws structural_error on rank deficiency
 */
FitResult fit_weights(const TabularMdp& mdp, const TransitionModel& p, const Policy& pi,
                      const FeatureMatrix& phi, prec_t tol);

/**
 * One evaluation of the approximate-value lower bound at radius
 * spec.scalar_radius: lhs is the transport-LP minimum of Phi(s)^T w over the
 * grid ambiguity set, rhs_mean the empirical average of the fitted values,
 * eta the empirical secant slope (rhs_mean - lhs)/alpha.
 */
struct ApproxDrReport {
    long state;
    prec_t alpha;
    prec_t lhs;
    prec_t rhs_mean;
    prec_t eta;
    bool pass;
};

ApproxDrReport approx_dr_check(const TabularMdp& mdp, const Policy& pi,
                               const EmpiricalDistribution& emp, const AmbiguitySpec& spec,
                               const FeatureMatrix& phi, long s,
                               const std::vector<TransitionModel>& oracle_grid);

/**
 * approx_dr_check across an ascending alpha grid. The combined pass flag
 * additionally requires lhs to be non-increasing in alpha within 1e-9 and
 * every eta finite.
 */
std::pair<std::vector<ApproxDrReport>, bool> approx_dr_sweep(
    const TabularMdp& mdp, const Policy& pi, const EmpiricalDistribution& emp,
    GroundNorm norm, const numvec& alphas, const FeatureMatrix& phi, long s,
    const std::vector<TransitionModel>& oracle_grid);

} // namespace wdr
