#include "wdr/regularization.hpp"

#include <cmath>

namespace wdr {

RegularizationConstant lipschitz_constant(const TabularMdp& mdp, GroundNorm norm) {
    validate(mdp);
    if (mdp.discount >= 1.0)
        throw parameter_error("discount must be strictly below one");
    RegularizationConstant out;
    out.beta = norm_equivalence_beta(norm, mdp.num_states);
    const prec_t om = 1.0 - mdp.discount;
    out.l_value = out.beta * mdp.discount * mdp.r_max / (om * om);
    return out;
}

ValueTable regularized_value(const std::vector<ValueTable>& values_per_atom,
                             const RegularizationConstant& l, prec_t alpha) {
    if (values_per_atom.empty())
        throw parameter_error("regularized_value needs at least one value table");
    if (alpha < 0.0) throw parameter_error("alpha must be nonnegative");
    const size_t ns = values_per_atom.front().size();
    ValueTable out(ns, 0.0);
    for (const auto& v : values_per_atom) {
        if (v.size() != ns)
            throw structural_error("value tables disagree on length");
        for (size_t s = 0; s < ns; ++s) out[s] += v[s];
    }
    const prec_t n = static_cast<prec_t>(values_per_atom.size());
    for (size_t s = 0; s < ns; ++s) out[s] = out[s] / n - l.l_value * alpha;
    return out;
}

namespace {

SandwichReport assemble_sandwich(const TabularMdp& mdp, const Policy& pi,
                                 const EmpiricalDistribution& emp,
                                 const AmbiguitySpec& spec, long s,
                                 const std::vector<TransitionModel>& oracle_grid,
                                 prec_t l_value, const numvec& lambda_grid) {
    if (s < 0 || s >= mdp.num_states) throw structural_error("state index out of range");
    const prec_t alpha = spec.scalar_radius;
    numvec atom_values(emp.size());
    for (size_t i = 0; i < emp.size(); ++i)
        atom_values[i] =
            evaluate_policy_direct(mdp, emp.atoms[i], pi)[static_cast<size_t>(s)];

    SandwichReport r;
    r.state = s;
    r.alpha = alpha;
    r.l_value = l_value;
    r.empirical_mean = mean(atom_values);
    r.dr_lower = dr_value_dual(mdp, pi, emp, spec, s, lambda_grid).value;
    r.dr_upper = dr_value_oracle(mdp, pi, emp, spec, s, oracle_grid);
    r.reg_value = r.empirical_mean - l_value * alpha;
    r.kappa_estimate =
        alpha > 0.0 ? std::max((r.empirical_mean - r.dr_upper) / alpha, 0.0) : 0.0;
    const prec_t slack = 1e-9;
    r.pass = (r.empirical_mean >= r.dr_upper - slack) &&
             (r.dr_upper >= r.dr_lower - slack) && (r.dr_lower >= r.reg_value - slack) &&
             (r.kappa_estimate <= l_value + slack);
    r.vacuous = r.reg_value < -mdp.r_max / (1.0 - mdp.discount);
    return r;
}

} // namespace

SandwichReport sandwich_check(const TabularMdp& mdp, const Policy& pi,
                              const EmpiricalDistribution& emp, const AmbiguitySpec& spec,
                              long s, const std::vector<TransitionModel>& oracle_grid) {
    return assemble_sandwich(mdp, pi, emp, spec, s, oracle_grid,
                             lipschitz_constant(mdp, spec.norm).l_value,
                             default_lambda_grid(mdp, spec.norm));
}

SandwichReport sandwich_check(const TabularMdp& mdp, const Policy& pi,
                              const EmpiricalDistribution& emp, const AmbiguitySpec& spec,
                              long s, const std::vector<TransitionModel>& oracle_grid,
                              prec_t l_override) {
    return assemble_sandwich(mdp, pi, emp, spec, s, oracle_grid, l_override,
                             default_lambda_grid(mdp, spec.norm));
}

SandwichReport sandwich_check(const TabularMdp& mdp, const Policy& pi,
                              const EmpiricalDistribution& emp, const AmbiguitySpec& spec,
                              long s, const std::vector<TransitionModel>& oracle_grid,
                              const numvec& lambda_grid) {
    return assemble_sandwich(mdp, pi, emp, spec, s, oracle_grid,
                             lipschitz_constant(mdp, spec.norm).l_value, lambda_grid);
}

SimulationLemmaReport simulation_lemma_check(const TabularMdp& mdp, const Policy& pi,
                                             const TransitionModel& p,
                                             const TransitionModel& q) {
    validate(mdp);
    validate(pi, mdp);
    validate(p, mdp);
    validate(q, mdp);
    const ValueTable vp = evaluate_policy_direct(mdp, p, pi);
    const ValueTable vq = evaluate_policy_direct(mdp, q, pi);
    SimulationLemmaReport r;
    r.lhs = linf_dist(vp, vq);
    const prec_t om = 1.0 - mdp.discount;
    r.rhs = mdp.discount * mdp.r_max * max_sup_one_dist(p, q) / (om * om);
    r.pass = r.lhs <= r.rhs + 1e-9;
    return r;
}

} // namespace wdr
