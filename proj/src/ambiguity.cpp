#include "wdr/ambiguity.hpp"

#include <limits>

#include "wdr/lp.hpp"

namespace wdr {

RowNorm rowwise(GroundNorm norm) {
    return norm == GroundNorm::L2_PRODUCT ? RowNorm::L2 : RowNorm::L1;
}

static void check_same_dims(const TransitionModel& p, const TransitionModel& q) {
    if (p.num_states != q.num_states || p.num_actions != q.num_actions ||
        p.probs.size() != q.probs.size())
        throw structural_error("transition models have mismatched dimensions");
}

prec_t ground_distance(const TransitionModel& p, const TransitionModel& q,
                       GroundNorm norm) {
    check_same_dims(p, q);
    switch (norm) {
    case GroundNorm::L1_PRODUCT: {
        prec_t s = 0;
        for (size_t i = 0; i < p.probs.size(); ++i) s += std::abs(p.probs[i] - q.probs[i]);
        return s;
    }
    case GroundNorm::L2_PRODUCT: {
        prec_t s = 0;
        for (size_t i = 0; i < p.probs.size(); ++i) {
            const prec_t d = p.probs[i] - q.probs[i];
            s += d * d;
        }
        return std::sqrt(s);
    }
    case GroundNorm::SUP_ONE: {
        prec_t total = 0;
        for (long s = 0; s < p.num_states; ++s) total += sup_one_state_dist(p, q, s);
        return total;
    }
    }
    throw parameter_error("unknown ground norm");
}

prec_t sup_one_state_dist(const TransitionModel& p, const TransitionModel& q, long s) {
    check_same_dims(p, q);
    prec_t worst = 0;
    for (long a = 0; a < p.num_actions; ++a) {
        const prec_t *pr = p.row(s, a), *qr = q.row(s, a);
        prec_t l1 = 0;
        for (long sn = 0; sn < p.num_states; ++sn) l1 += std::abs(pr[sn] - qr[sn]);
        worst = std::max(worst, l1);
    }
    return worst;
}

prec_t max_sup_one_dist(const TransitionModel& p, const TransitionModel& q) {
    prec_t worst = 0;
    for (long s = 0; s < p.num_states; ++s)
        worst = std::max(worst, sup_one_state_dist(p, q, s));
    return worst;
}

prec_t norm_equivalence_beta(GroundNorm norm, long num_states) {
    switch (norm) {
    case GroundNorm::L1_PRODUCT: return 1.0;
    case GroundNorm::SUP_ONE: return 1.0;
    case GroundNorm::L2_PRODUCT: return static_cast<prec_t>(num_states);
    }
    throw parameter_error("unknown ground norm");
}

void validate(const DiscreteModelDistribution& mu) {
    if (mu.atoms.empty()) throw parameter_error("model distribution has no atoms");
    if (mu.weights.size() != mu.atoms.size())
        throw structural_error("atom and weight counts differ");
    prec_t total = 0;
    for (prec_t w : mu.weights) {
        if (w < 0) throw parameter_error("negative atom weight");
        total += w;
    }
    if (std::abs(total - 1.0) > STOCHASTIC_TOL)
        throw parameter_error("atom weights must sum to one");
    for (size_t i = 1; i < mu.atoms.size(); ++i) check_same_dims(mu.atoms[0], mu.atoms[i]);
}

EmpiricalDistribution build_empirical(std::vector<TransitionModel> models) {
    if (models.empty()) throw parameter_error("empirical distribution needs atoms");
    for (size_t i = 1; i < models.size(); ++i) check_same_dims(models[0], models[i]);
    return EmpiricalDistribution{std::move(models)};
}

DiscreteModelDistribution as_distribution(const EmpiricalDistribution& emp) {
    const prec_t w = 1.0 / static_cast<prec_t>(emp.atoms.size());
    return DiscreteModelDistribution{emp.atoms, numvec(emp.atoms.size(), w)};
}

AmbiguitySpec uniform_spec(GroundNorm norm, prec_t alpha_per_state, long num_states) {
    if (alpha_per_state < 0) throw parameter_error("negative radius");
    numvec radii(static_cast<size_t>(num_states), alpha_per_state);
    return AmbiguitySpec{norm, aggregate_radius(radii), std::move(radii)};
}

prec_t aggregate_radius(const numvec& radius_per_state) {
    prec_t total = 0;
    for (prec_t r : radius_per_state) {
        if (r < 0) throw parameter_error("negative radius");
        total += r;
    }
    return total;
}

prec_t wasserstein_discrete(const DiscreteModelDistribution& mu,
                            const DiscreteModelDistribution& nu, GroundNorm norm) {
    validate(mu);
    validate(nu);
    check_same_dims(mu.atoms[0], nu.atoms[0]);
    std::vector<numvec> cost(mu.atoms.size(), numvec(nu.atoms.size()));
    for (size_t i = 0; i < mu.atoms.size(); ++i)
        for (size_t j = 0; j < nu.atoms.size(); ++j)
            cost[i][j] = ground_distance(mu.atoms[i], nu.atoms[j], norm);
    return transport_cost(mu.weights, nu.weights, cost);
}

bool in_ball(const DiscreteModelDistribution& mu, const AmbiguitySpec& spec,
             const EmpiricalDistribution& center) {
    if (spec.scalar_radius < 0) throw parameter_error("negative radius");
    if (std::isinf(spec.scalar_radius)) return true;
    const prec_t dist = wasserstein_discrete(mu, as_distribution(center), spec.norm);
    return dist <= spec.scalar_radius + 1e-10;
}

} // namespace wdr
