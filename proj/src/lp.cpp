#include "wdr/lp.hpp"

namespace wdr {

namespace {
constexpr prec_t RC_TOL = 1e-10;    // reduced cost threshold for optimality
constexpr prec_t PIVOT_TOL = 1e-11; // minimum pivot magnitude in the ratio test
} // namespace

prec_t revised_simplex_min(
    const numvec& rhs, std::vector<uint64_t> basis,
    const std::function<SimplexColumn(uint64_t)>& column,
    const std::function<std::optional<PricedCandidate>(const numvec&)>& price) {
    const size_t m = rhs.size();
    if (basis.size() != m)
        throw structural_error("initial basis size does not match constraint count");

    std::vector<SimplexColumn> bcols;
    bcols.reserve(m);
    for (uint64_t id : basis) bcols.push_back(column(id));

    const long max_iters = 200'000;
    for (long iter = 0; iter < max_iters; ++iter) {
        // basis matrix (row major) and primal basic solution
        std::vector<numvec> b_rows(m, numvec(m));
        for (size_t k = 0; k < m; ++k)
            for (size_t r = 0; r < m; ++r) b_rows[r][k] = bcols[k].a[r];
        numvec x = solve_dense(b_rows, rhs);

        // duals: one equation a_k . y = cost_k per basis column
        std::vector<numvec> bt_rows(m, numvec(m));
        numvec cb(m);
        for (size_t k = 0; k < m; ++k) {
            bt_rows[k] = bcols[k].a;
            cb[k] = bcols[k].cost;
        }
        numvec y = solve_dense(std::move(bt_rows), cb);

        auto cand = price(y);
        if (!cand || cand->reduced_cost >= -RC_TOL) {
            prec_t obj = 0;
            for (size_t k = 0; k < m; ++k) obj += bcols[k].cost * std::max(x[k], 0.0);
            return obj;
        }

        SimplexColumn entering = column(cand->id);
        for (size_t r = 0; r < m; ++r)
            for (size_t k = 0; k < m; ++k) b_rows[r][k] = bcols[k].a[r];
        numvec u = solve_dense(std::move(b_rows), entering.a);

        // ratio test; ties resolve to the smallest basis position
        prec_t best_ratio = 0;
        long leave = -1;
        for (size_t k = 0; k < m; ++k) {
            if (u[k] > PIVOT_TOL) {
                const prec_t ratio = std::max(x[k], 0.0) / u[k];
                if (leave < 0 || ratio < best_ratio - 1e-15) {
                    best_ratio = ratio;
                    leave = static_cast<long>(k);
                }
            }
        }
        if (leave < 0) throw structural_error("lp is unbounded");
        basis[leave] = cand->id;
        bcols[leave] = std::move(entering);
    }
    throw structural_error("simplex iteration limit exceeded");
}

prec_t transport_cost(const numvec& supply, const numvec& demand,
                      const std::vector<numvec>& cost) {
    const size_t n = supply.size(), md = demand.size();
    if (n == 0 || md == 0) throw parameter_error("empty marginal");
    if (cost.size() != n) throw structural_error("cost matrix row count mismatch");
    for (const auto& row : cost)
        if (row.size() != md) throw structural_error("cost matrix column count mismatch");
    prec_t ssum = 0, dsum = 0;
    for (prec_t w : supply) {
        if (w < 0) throw parameter_error("negative supply weight");
        ssum += w;
    }
    for (prec_t w : demand) {
        if (w < 0) throw parameter_error("negative demand weight");
        dsum += w;
    }
    if (std::abs(ssum - 1.0) > STOCHASTIC_TOL || std::abs(dsum - 1.0) > STOCHASTIC_TOL)
        throw parameter_error("marginal weights must sum to one");

    // one demand constraint is redundant; drop the last one
    const size_t rows = n + md - 1;
    numvec rhs(rows);
    for (size_t i = 0; i < n; ++i) rhs[i] = supply[i];
    for (size_t j = 0; j + 1 < md; ++j) rhs[n + j] = demand[j];

    auto make_column = [&](uint64_t id) {
        const size_t i = static_cast<size_t>(id) / md, j = static_cast<size_t>(id) % md;
        SimplexColumn col{numvec(rows, 0.0), cost[i][j]};
        col.a[i] = 1.0;
        if (j + 1 < md) col.a[n + j] = 1.0;
        return col;
    };

    auto price = [&](const numvec& y) -> std::optional<PricedCandidate> {
        PricedCandidate best{0, 0.0};
        bool found = false;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < md; ++j) {
                const prec_t rc =
                    cost[i][j] - y[i] - (j + 1 < md ? y[n + j] : 0.0);
                if (rc < best.reduced_cost) {
                    best = {static_cast<uint64_t>(i * md + j), rc};
                    found = true;
                }
            }
        if (!found) return std::nullopt;
        return best;
    };

    // northwest-corner walk yields a feasible spanning-tree basis
    std::vector<uint64_t> basis;
    basis.reserve(rows);
    numvec srem = supply, drem = demand;
    size_t i = 0, j = 0;
    while (true) {
        basis.push_back(static_cast<uint64_t>(i * md + j));
        const prec_t x = std::min(srem[i], drem[j]);
        srem[i] -= x;
        drem[j] -= x;
        if (i + 1 == n && j + 1 == md) break;
        if (srem[i] <= drem[j] && i + 1 < n)
            ++i;
        else if (j + 1 < md)
            ++j;
        else
            ++i;
    }
    assert(basis.size() == rows);

    return revised_simplex_min(rhs, std::move(basis), make_column, price);
}

prec_t budget_transport_min(const numvec& weights, const numvec& values,
                            const std::vector<numvec>& dist, prec_t budget,
                            const sizvec& home) {
    const size_t n = weights.size(), g = values.size();
    if (n == 0 || g == 0) throw parameter_error("empty atom set or point set");
    if (budget < 0) throw parameter_error("negative transport budget");
    if (dist.size() != n || home.size() != n)
        throw structural_error("distance matrix or home index size mismatch");
    for (const auto& row : dist)
        if (row.size() != g) throw structural_error("distance matrix column mismatch");
    std::vector<numvec> d = dist;
    for (size_t i = 0; i < n; ++i) {
        if (home[i] >= g) throw structural_error("home index out of range");
        if (d[i][home[i]] > 1e-9)
            throw parameter_error("home column must coincide with its atom");
        d[i][home[i]] = 0.0; // identity coupling must cost exactly nothing
    }

    const size_t rows = n + 1;
    numvec rhs(rows);
    for (size_t i = 0; i < n; ++i) {
        if (weights[i] < 0) throw parameter_error("negative atom weight");
        rhs[i] = weights[i];
    }
    rhs[n] = budget;

    const uint64_t slack_id = static_cast<uint64_t>(n) * g;
    auto make_column = [&](uint64_t id) {
        SimplexColumn col{numvec(rows, 0.0), 0.0};
        if (id == slack_id) {
            col.a[n] = 1.0;
            return col;
        }
        const size_t i = static_cast<size_t>(id) / g, j = static_cast<size_t>(id) % g;
        col.a[i] = 1.0;
        col.a[n] = d[i][j];
        col.cost = values[j];
        return col;
    };

    auto price = [&](const numvec& y) -> std::optional<PricedCandidate> {
        const prec_t theta = y[n];
        PricedCandidate best{slack_id, -theta};
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < g; ++j) {
                const prec_t rc = values[j] - y[i] - theta * d[i][j];
                if (rc < best.reduced_cost) best = {static_cast<uint64_t>(i * g + j), rc};
            }
        if (best.reduced_cost >= -RC_TOL) return std::nullopt;
        return best;
    };

    std::vector<uint64_t> basis;
    basis.reserve(rows);
    for (size_t i = 0; i < n; ++i)
        basis.push_back(static_cast<uint64_t>(i * g + home[i]));
    basis.push_back(slack_id);

    return revised_simplex_min(rhs, std::move(basis), make_column, price);
}

} // namespace wdr
