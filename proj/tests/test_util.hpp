// Shared fixtures for the test binaries: tiny deterministic MDPs and random
// instance generators built on the library RNG.
#pragma once

#include "wdr/mdp.hpp"
#include "wdr/rng.hpp"

namespace testutil {

using namespace wdr;

/// 1-state 1-action MDP with reward r and discount gamma.
inline TabularMdp single_state(prec_t r, prec_t gamma) {
    TabularMdp m;
    m.num_states = 1;
    m.num_actions = 1;
    m.rewards = {r};
    m.discount = gamma;
    m.r_max = std::max(std::abs(r), 1e-12);
    return m;
}

inline TransitionModel single_state_model() {
    TransitionModel p;
    p.num_states = 1;
    p.num_actions = 1;
    p.probs = {1.0};
    return p;
}

/// Deterministic 2-state chain: s0 -> s1 -> s1, one action,
/// rewards r(s0) = 0, r(s1) = 1.
inline TabularMdp chain_mdp(prec_t gamma) {
    TabularMdp m;
    m.num_states = 2;
    m.num_actions = 1;
    m.rewards = {0.0, 1.0};
    m.discount = gamma;
    m.r_max = 1.0;
    return m;
}

inline TransitionModel chain_model() {
    TransitionModel p;
    p.num_states = 2;
    p.num_actions = 1;
    p.probs = {0.0, 1.0, 0.0, 1.0};
    return p;
}

inline TransitionModel random_model(Rng& rng, long S, long A) {
    TransitionModel p;
    p.num_states = S;
    p.num_actions = A;
    p.probs.reserve(static_cast<size_t>(S) * A * S);
    for (long s = 0; s < S; ++s)
        for (long a = 0; a < A; ++a) {
            const numvec row = rng.dirichlet(static_cast<size_t>(S));
            p.probs.insert(p.probs.end(), row.begin(), row.end());
        }
    return p;
}

inline TabularMdp random_mdp(Rng& rng, long S, long A, prec_t gamma,
                             prec_t r_max = 1.0) {
    TabularMdp m;
    m.num_states = S;
    m.num_actions = A;
    m.discount = gamma;
    m.r_max = r_max;
    m.rewards.reserve(static_cast<size_t>(S) * A);
    for (long i = 0; i < S * A; ++i)
        m.rewards.push_back(rng.uniform(-r_max, r_max));
    return m;
}

inline Policy random_policy(Rng& rng, long S, long A) {
    Policy pi;
    pi.action.reserve(static_cast<size_t>(S));
    for (long s = 0; s < S; ++s)
        pi.action.push_back(static_cast<long>(rng.uniform_index(static_cast<size_t>(A))));
    return pi;
}

inline numvec random_values(Rng& rng, long S, prec_t lo, prec_t hi) {
    numvec v(static_cast<size_t>(S));
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

} // namespace testutil
