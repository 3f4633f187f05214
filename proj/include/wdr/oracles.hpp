// Brute-force verifiers used by the property tests: simplex grid search for
// the inner row minimizations, exhaustive policy enumeration, and structured
// model grids for the transport-feasibility LP oracle. Correct and slow on
// purpose; hard size guards refuse anything outside desk scale.
#pragma once

#include "wdr/ambiguity.hpp"
#include "wdr/mdp.hpp"

namespace wdr {

/// Uniform lattice over the probability simplex.
struct SimplexGrid {
    long dimension;
    prec_t step;
};

void validate(const SimplexGrid& grid);

/// Number of lattice points without materializing them.
size_t simplex_grid_size(const SimplexGrid& grid);

/// Materializes all lattice points (compositions of 1/step into `dimension`
/// nonnegative parts, scaled by step). Refuses dimension > 4.
std::vector<numvec> simplex_grid_points(const SimplexGrid& grid);

/**
 * Grid minimum of ⟨q,v⟩ + lambda·‖q − p̂‖ over lattice points q. The scan is
 * exact over the grid (per-slice breakpoint candidates for the l1 penalty,
 * integer ternary search for l2), so the result is the true grid minimum and
 * therefore an upper bound on the continuous minimum.
 *
 * \throws size_guard_error when grid.dimension > 4
 */
prec_t grid_inner_min(const numvec& v, const numvec& p_hat_row, prec_t lambda,
                      RowNorm norm, const SimplexGrid& grid);

/// All deterministic stationary policies in lexicographic order, state 0 most
/// significant, action 0 first. Refuses |A|^|S| > 10^4.
std::vector<Policy> enumerate_policies(const TabularMdp& mdp);

/**
 * Structured support grid for the transport LP oracle: the empirical atoms
 * themselves plus, for every atom, state and receiving successor, copies with
 * the policy row pushed toward that successor by each fraction in
 * `fractions` (row := (1-f)·row + f·e_r). Atoms come first so the grid always
 * contains the ball centers.
 */
std::vector<TransitionModel> single_row_perturbation_grid(
    const EmpiricalDistribution& emp, const TabularMdp& mdp, const Policy& pi,
    const numvec& fractions);

} // namespace wdr
