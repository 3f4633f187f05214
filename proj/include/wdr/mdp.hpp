// Tabular MDP model and the classical dynamic-programming operations
// (Bellman backup, policy evaluation, greedy improvement, value iteration).
#pragma once

#include <utility>

#include "wdr/common.hpp"

namespace wdr {

/**
 * Finite discounted MDP without its transition kernel. Rewards are indexed
 * s * num_actions + a and bounded by r_max; discount is in [0, 1).
 */
struct TabularMdp {
    long num_states = 0;
    long num_actions = 0;
    numvec rewards;
    prec_t discount = 0.0;
    prec_t r_max = 1.0;

    prec_t reward(long s, long a) const {
        return rewards[static_cast<size_t>(s * num_actions + a)];
    }
};

/**
 * Dense transition kernel for a TabularMdp. Row (s, a) is the distribution
 * over successor states, laid out (s * num_actions + a) * num_states + s'.
 * Every row must sum to one within STOCHASTIC_TOL and be nonnegative.
 */
struct TransitionModel {
    long num_states = 0;
    long num_actions = 0;
    numvec probs;

    size_t row_offset(long s, long a) const {
        return static_cast<size_t>((s * num_actions + a) * num_states);
    }
    const prec_t* row(long s, long a) const { return probs.data() + row_offset(s, a); }
    prec_t* row(long s, long a) { return probs.data() + row_offset(s, a); }
    numvec row_copy(long s, long a) const {
        const auto off = row_offset(s, a);
        return numvec(probs.begin() + off, probs.begin() + off + num_states);
    }
};

/// Deterministic stationary policy; action[s] is the action taken in s.
struct Policy {
    indvec action;
};

/// State-indexed value function.
using ValueTable = numvec;

/// \throws structural_error or parameter_error when a field is out of range
void validate(const TabularMdp& mdp);

/// Checks dimensions against the mdp and row-stochasticity within tol.
void validate(const TransitionModel& p, const TabularMdp& mdp,
              prec_t tol = STOCHASTIC_TOL);

void validate(const Policy& pi, const TabularMdp& mdp);

/// Kernel with every row uniform over successors; the default estimation
/// fallback and a convenient neutral element in tests.
TransitionModel uniform_model(long num_states, long num_actions);

/**
 * One application of the policy Bellman operator:
 * (T v)(s) = r(s, pi(s)) + gamma * sum_s' p(s, pi(s), s') v(s').
 */
ValueTable bellman_apply(const TabularMdp& mdp, const TransitionModel& p,
                         const Policy& pi, const ValueTable& v);

/**
 * Fixed point of the policy Bellman operator by iteration. Stops when the
 * sup-norm step falls below tol * (1 - gamma) / gamma, which bounds the
 * distance to the true fixed point by tol; the result satisfies
 * ||v - T v||_inf <= (1 + gamma) * tol.
 *
 * \throws parameter_error when tol <= 0
 */
ValueTable evaluate_policy(const TabularMdp& mdp, const TransitionModel& p,
                           const Policy& pi, prec_t tol);

/// Same fixed point through the direct linear solve (I - gamma P_pi) v = r_pi;
/// exact up to roundoff and used as the second route in cross-checks.
ValueTable evaluate_policy_direct(const TabularMdp& mdp, const TransitionModel& p,
                                  const Policy& pi);

/// Greedy policy for v; ties resolve to the lowest action index.
Policy greedy_improve(const TabularMdp& mdp, const TransitionModel& p,
                      const ValueTable& v);

/// Classical value iteration to tolerance tol; returns the value table and
/// its greedy policy.
std::pair<ValueTable, Policy> value_iteration(const TabularMdp& mdp,
                                              const TransitionModel& p, prec_t tol);

} // namespace wdr
