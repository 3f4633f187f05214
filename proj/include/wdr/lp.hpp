// Small dense linear-programming kernel. Two problem shapes are needed:
// the exact transportation problem behind the discrete Wasserstein distance
// and the budgeted value-transport LP behind the discretized-ambiguity
// oracles. Both run on one revised primal simplex engine; columns are
// supplied through callbacks so the oracle can price product grids with
// millions of implicit columns without materializing them.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "wdr/common.hpp"

namespace wdr {

/// One simplex column: constraint coefficients and objective cost.
struct SimplexColumn {
    numvec a;
    prec_t cost;
};

/// Candidate entering column found by a pricer: id and reduced cost.
struct PricedCandidate {
    uint64_t id;
    prec_t reduced_cost;
};

/**
 * Minimizes c^T x over {A x = rhs, x >= 0} by the revised primal simplex
 * method, starting from a caller-supplied feasible basis.
 *
 * \param rhs          right-hand side, one entry per constraint row
 * \param basis        ids of an initial feasible basis (size = rows)
 * \param column       materializes the column for an id
 * \param price        given duals y, returns a column with negative reduced
 *                     cost (ideally the most negative) or nullopt at optimality
 * \return optimal objective value
 * \throws structural_error on unboundedness or iteration blowup
 */
prec_t revised_simplex_min(
    const numvec& rhs, std::vector<uint64_t> basis,
    const std::function<SimplexColumn(uint64_t)>& column,
    const std::function<std::optional<PricedCandidate>(const numvec&)>& price);

/**
 * Exact optimal-transport cost between two finitely supported distributions:
 * min sum_ij cost[i][j] x_ij with row marginals supply and column marginals
 * demand. Both marginals must sum to one within STOCHASTIC_TOL.
 */
prec_t transport_cost(const numvec& supply, const numvec& demand,
                      const std::vector<numvec>& cost);

/**
 * Budgeted value transport over an explicit point set:
 *   min sum_ij x_ij value[j]
 *   s.t. sum_j x_ij = weight_i,  sum_ij dist[i][j] x_ij <= budget,  x >= 0.
 * home[i] must be a column with dist[i][home[i]] == 0 so the identity
 * coupling seeds the basis.
 */
prec_t budget_transport_min(const numvec& weights, const numvec& values,
                            const std::vector<numvec>& dist, prec_t budget,
                            const sizvec& home);

} // namespace wdr
