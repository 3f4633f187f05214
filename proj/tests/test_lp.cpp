#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wdr/lp.hpp"
#include "wdr/rng.hpp"

#include <optional>

using namespace wdr;

TEST_CASE("revised simplex solves a two-column toy problem") {
    // min x0 + 2 x1 subject to x0 + x1 = 1; start from the costlier basis
    auto column = [](uint64_t id) {
        return SimplexColumn{{1.0}, id == 0 ? 1.0 : 2.0};
    };
    auto price = [&](const numvec& y) -> std::optional<PricedCandidate> {
        const prec_t rc = 1.0 - y[0];
        if (rc < -1e-12) return PricedCandidate{0, rc};
        return std::nullopt;
    };
    const prec_t opt = revised_simplex_min({1.0}, {1}, column, price);
    CHECK(opt == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transport_cost degenerate cases") {
    CHECK(transport_cost({1.0}, {1.0}, {{0.0}}) == doctest::Approx(0.0));
    CHECK(transport_cost({1.0}, {1.0}, {{3.5}}) == doctest::Approx(3.5));
    // uniform over {x, y} against a Dirac at x with d(y, x) = c
    CHECK(transport_cost({0.5, 0.5}, {1.0}, {{0.0}, {4.0}}) ==
          doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("transport_cost identity coupling when marginals match") {
    CHECK(transport_cost({0.5, 0.5}, {0.5, 0.5}, {{0.0, 1.0}, {1.0, 0.0}}) ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("transport_cost separable costs give a closed form") {
    // cost(i,j) = base_i + j makes every feasible plan cost
    // sum_i base_i supply_i + sum_j j demand_j = 2.8 + 1.1
    const prec_t c = transport_cost({0.4, 0.6}, {0.3, 0.3, 0.4},
                                    {{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}});
    CHECK(c == doctest::Approx(3.9).epsilon(1e-12));
}

TEST_CASE("transport_cost hand-solved 2x2 instance") {
    // supply (0.7, 0.3) to demand (0.3, 0.7) with cost [[0,2],[1,0]]:
    // keep 0.3 on the diagonal, ship 0.4 from row 0 to column 1
    const prec_t c = transport_cost({0.7, 0.3}, {0.3, 0.7}, {{0.0, 2.0}, {1.0, 0.0}});
    CHECK(c == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("transport_cost validates marginals") {
    CHECK_THROWS_AS(transport_cost({0.5, 0.4}, {0.9}, {{0.0}, {1.0}}), parameter_error);
    CHECK_THROWS_AS(transport_cost({0.5, -0.5}, {0.0}, {{0.0}, {1.0}}), parameter_error);
    CHECK_THROWS_AS(transport_cost({}, {1.0}, {}), parameter_error);
    CHECK_THROWS_AS(transport_cost({1.0}, {1.0}, {{0.0, 1.0}}), structural_error);
}

TEST_CASE("transport_cost agrees with exhaustive search on random 2x2") {
    Rng rng(23);
    for (int rep = 0; rep < 50; ++rep) {
        const prec_t s0 = rng.uniform(0.05, 0.95);
        const prec_t d0 = rng.uniform(0.05, 0.95);
        std::vector<numvec> cost{{rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)},
                                 {rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)}};
        // one free variable x00 in [max(0, s0+d0-1), min(s0, d0)]
        const prec_t lo = std::max(0.0, s0 + d0 - 1.0);
        const prec_t hi = std::min(s0, d0);
        prec_t best = 1e100;
        for (int k = 0; k <= 1000; ++k) {
            const prec_t x00 = lo + (hi - lo) * k / 1000.0;
            const prec_t x01 = s0 - x00;
            const prec_t x10 = d0 - x00;
            const prec_t x11 = 1.0 - s0 - d0 + x00;
            best = std::min(best, cost[0][0] * x00 + cost[0][1] * x01 +
                                      cost[1][0] * x10 + cost[1][1] * x11);
        }
        const prec_t c = transport_cost({s0, 1.0 - s0}, {d0, 1.0 - d0}, cost);
        CHECK(c <= best + 1e-9);
        CHECK(c >= best - 1e-4); // grid is a superset-restricted search
    }
}

TEST_CASE("budget_transport_min zero budget keeps the home coupling") {
    CHECK(budget_transport_min({1.0}, {5.0}, {{0.0}}, 0.0, {0}) ==
          doctest::Approx(5.0));
    CHECK(budget_transport_min({1.0}, {1.0, 0.0}, {{0.0, 2.0}}, 0.0, {0}) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("budget_transport_min partial and full moves") {
    // moving mass from value 1 to value 0 at distance 2 under budget 1
    CHECK(budget_transport_min({1.0}, {1.0, 0.0}, {{0.0, 2.0}}, 1.0, {0}) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(budget_transport_min({1.0}, {1.0, 0.0}, {{0.0, 2.0}}, 2.0, {0}) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(budget_transport_min({1.0}, {1.0, 0.0}, {{0.0, 2.0}}, 5.0, {0}) ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("budget_transport_min allocates budget to the best slope") {
    // atom A at column 0 (value 2), atom B at column 1 (value 1), target
    // column 2 (value 0); A reaches it at distance 1, B at distance 4
    const std::vector<numvec> dist{{0.0, 5.0, 1.0}, {5.0, 0.0, 4.0}};
    const numvec values{2.0, 1.0, 0.0};
    const numvec w{0.5, 0.5};
    CHECK(budget_transport_min(w, values, dist, 0.5, {0, 1}) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(budget_transport_min(w, values, dist, 0.25, {0, 1}) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(budget_transport_min(w, values, dist, 0.0, {0, 1}) ==
          doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("budget_transport_min input validation") {
    CHECK_THROWS_AS(budget_transport_min({1.0}, {1.0}, {{0.0}}, -0.1, {0}),
                    parameter_error);
    CHECK_THROWS_AS(budget_transport_min({1.0}, {1.0}, {{0.5}}, 1.0, {0}),
                    parameter_error); // home column at nonzero distance
    CHECK_THROWS_AS(budget_transport_min({1.0}, {1.0, 1.0}, {{0.0}}, 1.0, {0}),
                    structural_error);
}

TEST_CASE("budget_transport_min is monotone in the budget") {
    Rng rng(29);
    for (int rep = 0; rep < 20; ++rep) {
        const size_t g = 4;
        numvec values(g), w{0.5, 0.5};
        for (auto& x : values) x = rng.uniform(-2.0, 2.0);
        std::vector<numvec> dist(2, numvec(g));
        for (size_t i = 0; i < 2; ++i)
            for (size_t j = 0; j < g; ++j) dist[i][j] = rng.uniform(0.5, 3.0);
        dist[0][0] = 0.0;
        dist[1][1] = 0.0;
        prec_t prev = budget_transport_min(w, values, dist, 0.0, {0, 1});
        for (prec_t b : {0.2, 0.5, 1.0, 3.0, 10.0}) {
            const prec_t cur = budget_transport_min(w, values, dist, b, {0, 1});
            CHECK(cur <= prev + 1e-10);
            prev = cur;
        }
        // unlimited budget reaches the global minimum value
        prec_t vmin = values[0];
        for (prec_t x : values) vmin = std::min(vmin, x);
        CHECK(prev == doctest::Approx(vmin).epsilon(1e-9));
    }
}
