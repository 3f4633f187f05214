// The regularized value function, the explicit Lipschitz constant
// L = beta*gamma*Rmax/(1-gamma)^2 behind it, the sandwich-inequality
// certifier and the simulation-lemma checker.
#pragma once

#include "wdr/robust_dp.hpp"

namespace wdr {

/// Norm-compatibility constant beta and the derived L value.
struct RegularizationConstant {
    prec_t beta;
    prec_t l_value;
};

/**
 * Full sandwich evaluation at one state: empirical mean of the atom values,
 * dual lower bound, oracle upper bound, regularized value and the empirical
 * slope (empirical_mean - dr_upper)/alpha standing in for the
 * non-computable kappa. vacuous marks bounds below the -Rmax/(1-gamma)
 * value floor; they stay PASS-eligible but carry no information.
 */
struct SandwichReport {
    long state;
    prec_t alpha;
    prec_t empirical_mean;
    prec_t dr_lower;
    prec_t dr_upper;
    prec_t reg_value;
    prec_t l_value;
    prec_t kappa_estimate;
    bool pass;
    bool vacuous;
};

struct SimulationLemmaReport {
    prec_t lhs;
    prec_t rhs;
    bool pass;
};

/// \throws parameter_error when the discount is not strictly below one
RegularizationConstant lipschitz_constant(const TabularMdp& mdp, GroundNorm norm);

/**
 * Per state, mean of the atom values minus l_value*alpha; affine decreasing
 * in alpha with slope exactly -l_value.
 *
 * \throws parameter_error on an empty list or negative alpha
 */
ValueTable regularized_value(const std::vector<ValueTable>& values_per_atom,
                             const RegularizationConstant& l, prec_t alpha);

/**
 * Assembles the sandwich chain
 * empirical_mean >= dr_upper >= dr_lower >= reg_value at state s, with the
 * oracle evaluated on the provided support grid and the dual on the default
 * multiplier grid. PASS iff every link holds within 1e-9 slack.
 */
SandwichReport sandwich_check(const TabularMdp& mdp, const Policy& pi,
                              const EmpiricalDistribution& emp, const AmbiguitySpec& spec,
                              long s, const std::vector<TransitionModel>& oracle_grid);

/// Negative-control overload: the same chain evaluated with an explicit L in
/// place of the computed constant; l_override = 0 with alpha > 0 and
/// non-constant values must FAIL.
SandwichReport sandwich_check(const TabularMdp& mdp, const Policy& pi,
                              const EmpiricalDistribution& emp, const AmbiguitySpec& spec,
                              long s, const std::vector<TransitionModel>& oracle_grid,
                              prec_t l_override);

/// Overload with a caller-supplied multiplier grid for the dual.
SandwichReport sandwich_check(const TabularMdp& mdp, const Policy& pi,
                              const EmpiricalDistribution& emp, const AmbiguitySpec& spec,
                              long s, const std::vector<TransitionModel>& oracle_grid,
                              const numvec& lambda_grid);

/**
 * Checks max_s |v_p(s) - v_q(s)| against
 * gamma*Rmax*max_s ||p_s - q_s||_{inf,1} / (1-gamma)^2 (max-over-states
 * reading of the norm on the right-hand side).
 */
SimulationLemmaReport simulation_lemma_check(const TabularMdp& mdp, const Policy& pi,
                                             const TransitionModel& p,
                                             const TransitionModel& q);

} // namespace wdr
