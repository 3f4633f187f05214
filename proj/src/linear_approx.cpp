#include "wdr/linear_approx.hpp"

#include "wdr/lp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

namespace wdr {

void validate(const FeatureMatrix& phi, const TabularMdp& mdp) {
    if (phi.num_states != mdp.num_states)
        throw structural_error("feature matrix row count does not match |S|");
    if (phi.m < 1 || phi.m > phi.num_states)
        throw structural_error("feature dimension must lie in [1, |S|]");
    if (phi.phi.size() != static_cast<size_t>(phi.num_states * phi.m))
        throw structural_error("feature matrix storage size mismatch");
    Eigen::Map<const Eigen::Matrix<prec_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        mat(phi.phi.data(), phi.num_states, phi.m);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(sv.size() - 1) < 1e-10 * sv(0))
        throw structural_error("feature columns are rank deficient");
}

FitResult fit_weights(const TabularMdp& mdp, const TransitionModel& p, const Policy& pi,
                      const FeatureMatrix& phi, prec_t tol) {
    if (!(tol > 0.0)) throw parameter_error("tol must be positive");
    validate(phi, mdp);
    validate(p, mdp);
    const ValueTable v = evaluate_policy_direct(mdp, p, pi);
    // the direct solve is exact up to roundoff; verify its Bellman residual
    const ValueTable tv = bellman_apply(mdp, p, pi, v);
    if (linf_dist(tv, v) > tol)
        throw structural_error("policy evaluation residual exceeds tol");

    Eigen::Map<const Eigen::Matrix<prec_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        mat(phi.phi.data(), phi.num_states, phi.m);
    Eigen::Map<const Eigen::VectorXd> vv(v.data(), static_cast<long>(v.size()));
    Eigen::VectorXd w = mat.colPivHouseholderQr().solve(vv);
    Eigen::VectorXd res = mat * w - vv;

    FitResult out;
    out.weights.w.assign(w.data(), w.data() + w.size());
    out.residual.assign(res.data(), res.data() + res.size());
    out.residual_norm = res.norm();
    return out;
}

namespace {

prec_t feature_value(const FeatureMatrix& phi, long s, const numvec& w) {
    prec_t acc = 0.0;
    for (long k = 0; k < phi.m; ++k) acc += phi.at(s, k) * w[static_cast<size_t>(k)];
    return acc;
}

} // namespace

ApproxDrReport approx_dr_check(const TabularMdp& mdp, const Policy& pi,
                               const EmpiricalDistribution& emp, const AmbiguitySpec& spec,
                               const FeatureMatrix& phi, long s,
                               const std::vector<TransitionModel>& oracle_grid) {
    validate(mdp);
    validate(pi, mdp);
    validate(phi, mdp);
    if (emp.atoms.empty()) throw parameter_error("empirical distribution has no atoms");
    if (oracle_grid.empty()) throw parameter_error("support grid must be nonempty");
    if (s < 0 || s >= mdp.num_states) throw structural_error("state index out of range");
    if (spec.scalar_radius < 0.0) throw parameter_error("radius must be nonnegative");

    const size_t n = emp.size();
    const size_t g = oracle_grid.size();
    const prec_t alpha = spec.scalar_radius;
    const prec_t fit_tol = 1e-6;

    numvec values(g);
    for (size_t j = 0; j < g; ++j)
        values[j] = feature_value(
            phi, s, fit_weights(mdp, oracle_grid[j], pi, phi, fit_tol).weights.w);

    numvec atom_fitted(n);
    std::vector<numvec> dist(n, numvec(g));
    sizvec home(n);
    for (size_t i = 0; i < n; ++i) {
        atom_fitted[i] = feature_value(
            phi, s, fit_weights(mdp, emp.atoms[i], pi, phi, fit_tol).weights.w);
        size_t hj = 0;
        for (size_t j = 0; j < g; ++j) {
            dist[i][j] = ground_distance(emp.atoms[i], oracle_grid[j], spec.norm);
            if (dist[i][j] < dist[i][hj]) hj = j;
        }
        if (dist[i][hj] > 1e-9)
            throw parameter_error("support grid missing empirical atom " +
                                  std::to_string(i));
        home[i] = hj;
    }

    ApproxDrReport r;
    r.state = s;
    r.alpha = alpha;
    r.rhs_mean = mean(atom_fitted);
    if (alpha == 0.0) {
        prec_t acc = 0.0;
        for (size_t i = 0; i < n; ++i) acc += values[home[i]];
        r.lhs = acc / static_cast<prec_t>(n);
        r.eta = 0.0;
    } else {
        const numvec weights(n, 1.0 / static_cast<prec_t>(n));
        r.lhs = budget_transport_min(weights, values, dist, alpha, home);
        r.eta = (r.rhs_mean - r.lhs) / alpha;
    }
    r.pass = std::isfinite(r.eta) && r.eta >= -1e-9 &&
             r.lhs >= r.rhs_mean - r.eta * alpha - 1e-9;
    return r;
}

std::pair<std::vector<ApproxDrReport>, bool> approx_dr_sweep(
    const TabularMdp& mdp, const Policy& pi, const EmpiricalDistribution& emp,
    GroundNorm norm, const numvec& alphas, const FeatureMatrix& phi, long s,
    const std::vector<TransitionModel>& oracle_grid) {
    if (alphas.empty()) throw parameter_error("alpha grid must be nonempty");
    for (size_t k = 1; k < alphas.size(); ++k)
        if (alphas[k] < alphas[k - 1])
            throw parameter_error("alpha grid must be sorted ascending");

    std::vector<ApproxDrReport> reports;
    bool pass = true;
    for (prec_t alpha : alphas) {
        AmbiguitySpec spec{norm, alpha, {}};
        reports.push_back(approx_dr_check(mdp, pi, emp, spec, phi, s, oracle_grid));
        pass = pass && reports.back().pass;
        if (reports.size() > 1)
            pass = pass && (reports.back().lhs <=
                            reports[reports.size() - 2].lhs + 1e-9);
    }
    return {std::move(reports), pass};
}

} // namespace wdr
