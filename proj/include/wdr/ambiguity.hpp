// Ground norms on transition models, finitely supported distributions over
// models, the exact discrete Wasserstein distance between them and the
// Wasserstein ambiguity ball.
#pragma once

#include "wdr/mdp.hpp"

namespace wdr {

/**
 * Norm on the space of transition tensors used as the ground metric.
 *  L1_PRODUCT  entrywise l1 over the whole tensor
 *  L2_PRODUCT  entrywise l2 (Frobenius) over the whole tensor
 *  SUP_ONE     sum over states of max_a row-l1, built from ||.||_{inf,1}
 */
enum class GroundNorm { L1_PRODUCT, L2_PRODUCT, SUP_ONE };

/// Per-row restriction of a ground norm, used by the rowwise inner solvers.
/// SUP_ONE restricted to a single row coincides with l1.
enum class RowNorm { L1, L2 };

RowNorm rowwise(GroundNorm norm);

/// Norm of the difference p - q.
prec_t ground_distance(const TransitionModel& p, const TransitionModel& q,
                       GroundNorm norm);

/// max_a row-l1 distance of the state-s blocks, the ||.||_{inf,1} seminorm
/// of the difference restricted to one state.
prec_t sup_one_state_dist(const TransitionModel& p, const TransitionModel& q, long s);

/// max over states of sup_one_state_dist; the quantity the simulation lemma
/// bounds value differences by.
prec_t max_sup_one_dist(const TransitionModel& p, const TransitionModel& q);

/**
 * Published norm-equivalence constant beta with
 * sum_s ||p_s - q_s||_{inf,1} <= beta * ||p - q|| for the given ground norm.
 * L1_PRODUCT and SUP_ONE admit beta = 1; L2_PRODUCT needs beta = |S|
 * (max_a row-l1 <= sqrt(|S|) * per-state l2, then Cauchy-Schwarz over states;
 * tight for sign-alternating single-action rows).
 */
prec_t norm_equivalence_beta(GroundNorm norm, long num_states);

/// Finitely supported distribution over transition models.
struct DiscreteModelDistribution {
    std::vector<TransitionModel> atoms;
    numvec weights;
};

/// Uniform mixture of n estimated models, the Dirac-mixture empirical
/// distribution; duplicates are kept as distinct atoms.
struct EmpiricalDistribution {
    std::vector<TransitionModel> atoms;

    size_t size() const { return atoms.size(); }
};

/**
 * Ambiguity ball description: ground norm, the scalar radius of the single
 * trajectory-level ball and per-state radii for the rectangular operators.
 * For the additive ground norms the scalar radius aggregates per-state radii
 * by summation (see aggregate_radius).
 */
struct AmbiguitySpec {
    GroundNorm norm;
    prec_t scalar_radius;
    numvec radius_per_state;
};

/// \throws structural_error on dimension mismatch, parameter_error when the
/// weights are not a probability vector within STOCHASTIC_TOL
void validate(const DiscreteModelDistribution& mu);

/// \throws parameter_error when models is empty
EmpiricalDistribution build_empirical(std::vector<TransitionModel> models);

/// Uniform-weight view of an empirical distribution.
DiscreteModelDistribution as_distribution(const EmpiricalDistribution& emp);

/// Spec with the same radius at every state and scalar radius aggregated by
/// summation.
AmbiguitySpec uniform_spec(GroundNorm norm, prec_t alpha_per_state, long num_states);

/// Sum of per-state radii, the scalar-radius aggregation rule for the
/// additive ground norms.
prec_t aggregate_radius(const numvec& radius_per_state);

/**
 * Exact 1-Wasserstein distance between two finitely supported model
 * distributions under the ground norm, computed by the transportation LP.
 */
prec_t wasserstein_discrete(const DiscreteModelDistribution& mu,
                            const DiscreteModelDistribution& nu, GroundNorm norm);

/// Membership in the ball around the empirical center with feasibility slack
/// 1e-10; an infinite scalar radius short-circuits to true.
bool in_ball(const DiscreteModelDistribution& mu, const AmbiguitySpec& spec,
             const EmpiricalDistribution& center);

} // namespace wdr
