#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_util.hpp"
#include "wdr/linear_approx.hpp"
#include "wdr/oracles.hpp"
#include "wdr/regularization.hpp"

#include <cmath>

using namespace wdr;
using namespace testutil;

namespace {

AmbiguitySpec make_spec(GroundNorm norm, prec_t alpha, long S) {
    return AmbiguitySpec{norm, alpha, numvec(static_cast<size_t>(S), alpha)};
}

FeatureMatrix identity_features(long S) {
    FeatureMatrix phi;
    phi.num_states = S;
    phi.m = S;
    phi.phi.assign(static_cast<size_t>(S * S), 0.0);
    for (long s = 0; s < S; ++s) phi.phi[static_cast<size_t>(s * S + s)] = 1.0;
    return phi;
}

} // namespace

TEST_CASE("feature matrix validation") {
    Rng rng(263);
    const TabularMdp m = random_mdp(rng, 3, 2, 0.9);

    CHECK_NOTHROW(validate(identity_features(3), m));

    FeatureMatrix wrong_rows = identity_features(2);
    CHECK_THROWS_AS(validate(wrong_rows, m), structural_error);

    // two identical columns are rank deficient
    FeatureMatrix dup;
    dup.num_states = 3;
    dup.m = 2;
    dup.phi = {1.0, 1.0, 2.0, 2.0, 3.0, 3.0};
    CHECK_THROWS_AS(validate(dup, m), structural_error);

    FeatureMatrix wide;
    wide.num_states = 3;
    wide.m = 4;
    wide.phi.assign(12, 1.0);
    CHECK_THROWS_AS(validate(wide, m), structural_error);
}

TEST_CASE("fit_weights closed forms") {
    Rng rng(269);
    const TabularMdp m = random_mdp(rng, 3, 2, 0.9);
    const TransitionModel p = random_model(rng, 3, 2);
    const Policy pi = random_policy(rng, 3, 2);
    const ValueTable v = evaluate_policy_direct(m, p, pi);

    SUBCASE("identity features reproduce the value exactly") {
        const FitResult fit = fit_weights(m, p, pi, identity_features(3), 1e-9);
        REQUIRE(fit.weights.w.size() == 3);
        for (size_t s = 0; s < 3; ++s) {
            CHECK(fit.weights.w[s] == doctest::Approx(v[s]).epsilon(1e-10));
            CHECK(std::abs(fit.residual[s]) <= 1e-9);
        }
        CHECK(fit.residual_norm <= 1e-9);
    }
    SUBCASE("all-ones column fits the mean") {
        FeatureMatrix ones;
        ones.num_states = 3;
        ones.m = 1;
        ones.phi = {1.0, 1.0, 1.0};
        const FitResult fit = fit_weights(m, p, pi, ones, 1e-9);
        const prec_t vbar = mean(v);
        CHECK(fit.weights.w[0] == doctest::Approx(vbar).epsilon(1e-10));
        prec_t centered = 0.0;
        for (size_t s = 0; s < 3; ++s) {
            CHECK(fit.residual[s] == doctest::Approx(vbar - v[s]).epsilon(1e-9));
            centered += (v[s] - vbar) * (v[s] - vbar);
        }
        CHECK(fit.residual_norm == doctest::Approx(std::sqrt(centered)).epsilon(1e-9));
    }
    SUBCASE("duplicate state rows average the shared coordinate") {
        FeatureMatrix dup;
        dup.num_states = 3;
        dup.m = 2;
        dup.phi = {1.0, 0.0, 1.0, 0.0, 0.0, 1.0};
        const FitResult fit = fit_weights(m, p, pi, dup, 1e-9);
        CHECK(fit.weights.w[0] == doctest::Approx(0.5 * (v[0] + v[1])).epsilon(1e-10));
        CHECK(fit.weights.w[1] == doctest::Approx(v[2]).epsilon(1e-10));
        const prec_t half_gap = 0.5 * std::abs(v[0] - v[1]);
        CHECK(std::abs(fit.residual[0]) == doctest::Approx(half_gap).epsilon(1e-9));
        CHECK(std::abs(fit.residual[1]) == doctest::Approx(half_gap).epsilon(1e-9));
        CHECK(std::abs(fit.residual[2]) <= 1e-9);
    }
    SUBCASE("rank deficiency is rejected") {
        FeatureMatrix bad;
        bad.num_states = 3;
        bad.m = 2;
        bad.phi = {1.0, 2.0, 2.0, 4.0, 3.0, 6.0};
        CHECK_THROWS_AS(fit_weights(m, p, pi, bad, 1e-9), structural_error);
    }
    SUBCASE("nonpositive tol is rejected") {
        CHECK_THROWS_AS(fit_weights(m, p, pi, identity_features(3), 0.0),
                        parameter_error);
    }
}

TEST_CASE("fit_weights residual is orthogonal to the feature span") {
    Rng rng(271);
    for (int rep = 0; rep < 20; ++rep) {
        const long S = 3 + static_cast<long>(rng.uniform_index(2));
        const TabularMdp m = random_mdp(rng, S, 2, 0.9);
        const TransitionModel p = random_model(rng, S, 2);
        const Policy pi = random_policy(rng, S, 2);
        FeatureMatrix phi;
        phi.num_states = S;
        phi.m = 2;
        phi.phi.resize(static_cast<size_t>(S * 2));
        for (long s = 0; s < S; ++s) {
            phi.phi[static_cast<size_t>(s * 2)] = 1.0;
            phi.phi[static_cast<size_t>(s * 2 + 1)] = rng.uniform(-1.0, 1.0);
        }
        const FitResult fit = fit_weights(m, p, pi, phi, 1e-9);
        for (long k = 0; k < 2; ++k) {
            prec_t ip = 0.0;
            for (long s = 0; s < S; ++s)
                ip += phi.at(s, k) * fit.residual[static_cast<size_t>(s)];
            CHECK(std::abs(ip) <= 1e-9);
        }
    }
}

TEST_CASE("approx_dr_check with identity features reduces to the sandwich oracle") {
    Rng rng(277);
    const TabularMdp m = random_mdp(rng, 3, 2, 0.9);
    std::vector<TransitionModel> atoms{random_model(rng, 3, 2),
                                       random_model(rng, 3, 2)};
    const EmpiricalDistribution emp = build_empirical(atoms);
    const Policy pi = random_policy(rng, 3, 2);
    const auto grid = single_row_perturbation_grid(emp, m, pi, {0.5, 1.0});
    const FeatureMatrix phi = identity_features(3);
    for (prec_t alpha : {0.0, 0.05, 0.2}) {
        const AmbiguitySpec spec = make_spec(GroundNorm::L1_PRODUCT, alpha, 3);
        for (long s = 0; s < 3; ++s) {
            const ApproxDrReport ar = approx_dr_check(m, pi, emp, spec, phi, s, grid);
            const SandwichReport sr = sandwich_check(m, pi, emp, spec, s, grid);
            CHECK(ar.lhs == doctest::Approx(sr.dr_upper).epsilon(1e-9));
            CHECK(ar.rhs_mean == doctest::Approx(sr.empirical_mean).epsilon(1e-9));
            CHECK(ar.pass);
            if (alpha == 0.0) CHECK(ar.lhs == doctest::Approx(ar.rhs_mean).epsilon(1e-12));
        }
    }
}

TEST_CASE("approx_dr_sweep on reduced features") {
    Rng rng(281);
    const TabularMdp m = random_mdp(rng, 3, 2, 0.9);
    std::vector<TransitionModel> atoms{random_model(rng, 3, 2),
                                       random_model(rng, 3, 2)};
    const EmpiricalDistribution emp = build_empirical(atoms);
    const Policy pi = random_policy(rng, 3, 2);
    const auto grid = single_row_perturbation_grid(emp, m, pi, {0.5, 1.0});
    FeatureMatrix phi;
    phi.num_states = 3;
    phi.m = 2;
    phi.phi = {1.0, 0.0, 1.0, 0.5, 1.0, 1.0};
    const numvec alphas{0.0, 0.05, 0.1, 0.2};
    const auto [reports, ok] = approx_dr_sweep(m, pi, emp, GroundNorm::L1_PRODUCT,
                                               alphas, phi, 0, grid);
    CHECK(ok);
    REQUIRE(reports.size() == alphas.size());
    prec_t prev = 1e100;
    for (size_t k = 0; k < reports.size(); ++k) {
        CHECK(reports[k].alpha == alphas[k]);
        CHECK(reports[k].pass);
        CHECK(std::isfinite(reports[k].eta));
        if (reports[k].alpha > 0.0) CHECK(reports[k].eta >= -1e-9);
        CHECK(reports[k].lhs <= prev + 1e-9);
        prev = reports[k].lhs;
    }
}

TEST_CASE("approx_dr_sweep input validation") {
    Rng rng(283);
    const TabularMdp m = random_mdp(rng, 3, 2, 0.9);
    const EmpiricalDistribution emp = build_empirical({random_model(rng, 3, 2)});
    const Policy pi = random_policy(rng, 3, 2);
    const auto grid = single_row_perturbation_grid(emp, m, pi, {1.0});
    const FeatureMatrix phi = identity_features(3);
    CHECK_THROWS_AS(approx_dr_sweep(m, pi, emp, GroundNorm::L1_PRODUCT, {}, phi, 0, grid),
                    parameter_error);
    CHECK_THROWS_AS(approx_dr_sweep(m, pi, emp, GroundNorm::L1_PRODUCT, {0.2, 0.1},
                                    phi, 0, grid),
                    parameter_error);
    const AmbiguitySpec spec = make_spec(GroundNorm::L1_PRODUCT, 0.1, 3);
    CHECK_THROWS_AS(approx_dr_check(m, pi, emp, spec, phi, 5, grid), structural_error);
    CHECK_THROWS_AS(approx_dr_check(m, pi, emp, spec, phi, 0, {}), parameter_error);
}
