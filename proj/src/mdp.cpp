#include "wdr/mdp.hpp"

#include <limits>

namespace wdr {

void validate(const TabularMdp& mdp) {
    if (mdp.num_states < 1 || mdp.num_actions < 1)
        throw structural_error("mdp needs at least one state and one action");
    if (!(mdp.discount >= 0 && mdp.discount < 1))
        throw parameter_error("discount must lie in [0, 1)");
    if (!(mdp.r_max > 0)) throw parameter_error("r_max must be positive");
    if (mdp.rewards.size() != static_cast<size_t>(mdp.num_states * mdp.num_actions))
        throw structural_error("reward table size does not match |S| * |A|");
    for (size_t i = 0; i < mdp.rewards.size(); ++i)
        if (std::abs(mdp.rewards[i]) > mdp.r_max)
            throw structural_error("reward at flat index " + std::to_string(i) +
                                   " exceeds r_max");
}

void validate(const TransitionModel& p, const TabularMdp& mdp, prec_t tol) {
    if (p.num_states != mdp.num_states || p.num_actions != mdp.num_actions)
        throw structural_error("transition model dimensions do not match the mdp");
    if (p.probs.size() !=
        static_cast<size_t>(p.num_states * p.num_actions * p.num_states))
        throw structural_error("transition tensor size does not match |S|*|A|*|S|");
    for (long s = 0; s < p.num_states; ++s)
        for (long a = 0; a < p.num_actions; ++a) {
            const prec_t* row = p.row(s, a);
            prec_t sum = 0;
            for (long sn = 0; sn < p.num_states; ++sn) {
                if (row[sn] < -tol)
                    throw structural_error("negative probability in row (" +
                                           std::to_string(s) + "," + std::to_string(a) + ")");
                sum += row[sn];
            }
            if (std::abs(sum - 1.0) > tol)
                throw structural_error("row (" + std::to_string(s) + "," +
                                       std::to_string(a) + ") sums to " +
                                       std::to_string(sum) + ", not 1");
        }
}

void validate(const Policy& pi, const TabularMdp& mdp) {
    if (pi.action.size() != static_cast<size_t>(mdp.num_states))
        throw structural_error("policy length does not match |S|");
    for (long s = 0; s < mdp.num_states; ++s)
        if (pi.action[s] < 0 || pi.action[s] >= mdp.num_actions)
            throw structural_error("policy action out of range at state " +
                                   std::to_string(s));
}

TransitionModel uniform_model(long num_states, long num_actions) {
    TransitionModel p{num_states, num_actions,
                      numvec(static_cast<size_t>(num_states * num_actions * num_states),
                             1.0 / static_cast<prec_t>(num_states))};
    return p;
}

ValueTable bellman_apply(const TabularMdp& mdp, const TransitionModel& p,
                         const Policy& pi, const ValueTable& v) {
    validate(pi, mdp);
    if (p.num_states != mdp.num_states || p.num_actions != mdp.num_actions)
        throw structural_error("transition model dimensions do not match the mdp");
    if (v.size() != static_cast<size_t>(mdp.num_states))
        throw structural_error("value table length does not match |S|");
    ValueTable out(v.size());
    for (long s = 0; s < mdp.num_states; ++s) {
        const prec_t* row = p.row(s, pi.action[s]);
        prec_t cont = 0;
        for (long sn = 0; sn < mdp.num_states; ++sn) cont += row[sn] * v[sn];
        out[s] = mdp.reward(s, pi.action[s]) + mdp.discount * cont;
    }
    return out;
}

ValueTable evaluate_policy(const TabularMdp& mdp, const TransitionModel& p,
                           const Policy& pi, prec_t tol) {
    if (!(tol > 0)) throw parameter_error("tolerance must be positive");
    validate(pi, mdp);
    const prec_t gamma = mdp.discount;
    // step threshold that certifies ||v - v*||_inf <= tol
    const prec_t threshold =
        gamma > 0 ? tol * (1 - gamma) / gamma : std::numeric_limits<prec_t>::infinity();
    ValueTable v(static_cast<size_t>(mdp.num_states), 0.0);
    for (long iter = 0; iter < 100'000'000; ++iter) {
        ValueTable next = bellman_apply(mdp, p, pi, v);
        const prec_t step = linf_dist(next, v);
        v = std::move(next);
        if (step <= threshold) return v;
    }
    throw structural_error("policy evaluation did not converge");
}

ValueTable evaluate_policy_direct(const TabularMdp& mdp, const TransitionModel& p,
                                  const Policy& pi) {
    validate(pi, mdp);
    const size_t n = static_cast<size_t>(mdp.num_states);
    std::vector<numvec> a(n, numvec(n, 0.0));
    numvec b(n);
    for (long s = 0; s < mdp.num_states; ++s) {
        const prec_t* row = p.row(s, pi.action[s]);
        for (long sn = 0; sn < mdp.num_states; ++sn)
            a[s][sn] = (s == sn ? 1.0 : 0.0) - mdp.discount * row[sn];
        b[s] = mdp.reward(s, pi.action[s]);
    }
    return solve_dense(std::move(a), std::move(b));
}

Policy greedy_improve(const TabularMdp& mdp, const TransitionModel& p,
                      const ValueTable& v) {
    if (v.size() != static_cast<size_t>(mdp.num_states))
        throw structural_error("value table length does not match |S|");
    Policy pi{indvec(static_cast<size_t>(mdp.num_states), 0)};
    for (long s = 0; s < mdp.num_states; ++s) {
        prec_t best = -std::numeric_limits<prec_t>::infinity();
        for (long a = 0; a < mdp.num_actions; ++a) {
            const prec_t* row = p.row(s, a);
            prec_t q = mdp.reward(s, a);
            for (long sn = 0; sn < mdp.num_states; ++sn)
                q += mdp.discount * row[sn] * v[sn];
            // strict improvement keeps the lowest action on ties
            if (q > best) {
                best = q;
                pi.action[s] = a;
            }
        }
    }
    return pi;
}

std::pair<ValueTable, Policy> value_iteration(const TabularMdp& mdp,
                                              const TransitionModel& p, prec_t tol) {
    if (!(tol > 0)) throw parameter_error("tolerance must be positive");
    const prec_t gamma = mdp.discount;
    const prec_t threshold =
        gamma > 0 ? tol * (1 - gamma) / gamma : std::numeric_limits<prec_t>::infinity();
    ValueTable v(static_cast<size_t>(mdp.num_states), 0.0);
    for (long iter = 0; iter < 100'000'000; ++iter) {
        ValueTable next(v.size());
        for (long s = 0; s < mdp.num_states; ++s) {
            prec_t best = -std::numeric_limits<prec_t>::infinity();
            for (long a = 0; a < mdp.num_actions; ++a) {
                const prec_t* row = p.row(s, a);
                prec_t q = mdp.reward(s, a);
                for (long sn = 0; sn < mdp.num_states; ++sn)
                    q += gamma * row[sn] * v[sn];
                best = std::max(best, q);
            }
            next[s] = best;
        }
        const prec_t step = linf_dist(next, v);
        v = std::move(next);
        if (step <= threshold) break;
    }
    return {v, greedy_improve(mdp, p, v)};
}

} // namespace wdr
