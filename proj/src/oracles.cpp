#include "wdr/oracles.hpp"

#include <cassert>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace wdr {

void validate(const SimplexGrid& grid) {
    if (grid.dimension < 1)
        throw parameter_error("simplex grid dimension must be positive");
    if (!(grid.step > 0.0) || grid.step > 1.0)
        throw parameter_error("simplex grid step must lie in (0, 1]");
    const long k = std::lround(1.0 / grid.step);
    if (k < 1 || std::abs(static_cast<prec_t>(k) * grid.step - 1.0) > 1e-9)
        throw parameter_error("simplex grid step must divide 1 evenly");
}

static long grid_resolution(const SimplexGrid& grid) {
    validate(grid);
    if (grid.dimension > 4)
        throw size_guard_error("simplex grid refused: dimension " +
                               std::to_string(grid.dimension) + " exceeds 4");
    return std::lround(1.0 / grid.step);
}

size_t simplex_grid_size(const SimplexGrid& grid) {
    const long k = grid_resolution(grid);
    // C(k + d - 1, d - 1) compositions
    size_t count = 1;
    for (long i = 1; i < grid.dimension; ++i)
        count = count * static_cast<size_t>(k + i) / static_cast<size_t>(i);
    return count;
}

std::vector<numvec> simplex_grid_points(const SimplexGrid& grid) {
    const long k = grid_resolution(grid);
    const size_t total = simplex_grid_size(grid);
    if (total > 5000000)
        throw size_guard_error("simplex grid refused: " + std::to_string(total) +
                               " points exceed the 5e6 cap");
    std::vector<numvec> points;
    points.reserve(total);
    std::vector<long> c(static_cast<size_t>(grid.dimension), 0);
    // recursive composition walk, last coordinate absorbs the remainder
    std::function<void(long, long)> rec = [&](long pos, long rem) {
        if (pos == grid.dimension - 1) {
            c[static_cast<size_t>(pos)] = rem;
            numvec q(c.size());
            for (size_t i = 0; i < c.size(); ++i)
                q[i] = static_cast<prec_t>(c[i]) * grid.step;
            points.push_back(std::move(q));
            return;
        }
        for (long t = 0; t <= rem; ++t) {
            c[static_cast<size_t>(pos)] = t;
            rec(pos + 1, rem - t);
        }
    };
    rec(0, k);
    assert(points.size() == total);
    return points;
}

namespace {

prec_t eval_obj(const long* c, long d, prec_t step, const numvec& v,
                const numvec& p, prec_t lambda, RowNorm norm) {
    prec_t dotv = 0.0, pen1 = 0.0, pen2 = 0.0;
    for (long i = 0; i < d; ++i) {
        const prec_t qi = static_cast<prec_t>(c[i]) * step;
        dotv += qi * v[static_cast<size_t>(i)];
        const prec_t diff = qi - p[static_cast<size_t>(i)];
        pen1 += std::abs(diff);
        pen2 += diff * diff;
    }
    return dotv + lambda * (norm == RowNorm::L1 ? pen1 : std::sqrt(pen2));
}

/**
 * Exact minimum over the final two coordinates with the prefix of c fixed and
 * rem mass left for them. For l1 the slice objective is piecewise linear in
 * the split with at most two breakpoints, so endpoints plus breakpoint
 * neighbors suffice; for l2 it is convex, so integer ternary search is exact.
 */
prec_t slice_min(std::vector<long>& c, long d, long rem, prec_t step,
                 const numvec& v, const numvec& p, prec_t lambda, RowNorm norm) {
    const long a = d - 2, b = d - 1;
    auto at = [&](long ca) {
        c[static_cast<size_t>(a)] = ca;
        c[static_cast<size_t>(b)] = rem - ca;
        return eval_obj(c.data(), d, step, v, p, lambda, norm);
    };
    prec_t best = std::numeric_limits<prec_t>::infinity();
    if (norm == RowNorm::L1) {
        long cand[6];
        int nc = 0;
        cand[nc++] = 0;
        cand[nc++] = rem;
        const prec_t bps[2] = {p[static_cast<size_t>(a)] / step,
                               static_cast<prec_t>(rem) - p[static_cast<size_t>(b)] / step};
        for (prec_t bp : bps) {
            const long f = static_cast<long>(std::floor(bp));
            if (f >= 0 && f <= rem) cand[nc++] = f;
            if (f + 1 >= 0 && f + 1 <= rem) cand[nc++] = f + 1;
        }
        for (int i = 0; i < nc; ++i) best = std::min(best, at(cand[i]));
    } else {
        long lo = 0, hi = rem;
        while (hi - lo > 3) {
            const long m1 = lo + (hi - lo) / 3;
            const long m2 = hi - (hi - lo) / 3;
            if (at(m1) <= at(m2))
                hi = m2;
            else
                lo = m1;
        }
        for (long ca = lo; ca <= hi; ++ca) best = std::min(best, at(ca));
    }
    return best;
}

} // namespace

prec_t grid_inner_min(const numvec& v, const numvec& p_hat_row, prec_t lambda,
                      RowNorm norm, const SimplexGrid& grid) {
    const long k = grid_resolution(grid);
    const long d = grid.dimension;
    if (static_cast<long>(v.size()) != d || static_cast<long>(p_hat_row.size()) != d)
        throw structural_error("grid_inner_min: vector lengths do not match the grid dimension");
    if (lambda < 0.0)
        throw parameter_error("lambda must be nonnegative");

    std::vector<long> c(static_cast<size_t>(d), 0);
    if (d == 1) {
        c[0] = k;
        return eval_obj(c.data(), d, grid.step, v, p_hat_row, lambda, norm);
    }
    prec_t best = std::numeric_limits<prec_t>::infinity();
    if (d == 2) {
        best = slice_min(c, d, k, grid.step, v, p_hat_row, lambda, norm);
    } else if (d == 3) {
        for (long c0 = 0; c0 <= k; ++c0) {
            c[0] = c0;
            best = std::min(best,
                            slice_min(c, d, k - c0, grid.step, v, p_hat_row, lambda, norm));
        }
    } else {
        for (long c0 = 0; c0 <= k; ++c0) {
            c[0] = c0;
            for (long c1 = 0; c1 + c0 <= k; ++c1) {
                c[1] = c1;
                best = std::min(best, slice_min(c, d, k - c0 - c1, grid.step, v,
                                                p_hat_row, lambda, norm));
            }
        }
    }
    return best;
}

std::vector<Policy> enumerate_policies(const TabularMdp& mdp) {
    validate(mdp);
    size_t total = 1;
    for (long s = 0; s < mdp.num_states; ++s) {
        total *= static_cast<size_t>(mdp.num_actions);
        if (total > 10000)
            throw size_guard_error("policy enumeration refused: |A|^|S| exceeds 1e4");
    }
    std::vector<Policy> out;
    out.reserve(total);
    Policy pi;
    pi.action.assign(static_cast<size_t>(mdp.num_states), 0);
    while (true) {
        out.push_back(pi);
        // odometer with state |S|-1 least significant keeps lexicographic order
        long pos = mdp.num_states - 1;
        while (pos >= 0) {
            if (++pi.action[static_cast<size_t>(pos)] < mdp.num_actions) break;
            pi.action[static_cast<size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    assert(out.size() == total);
    return out;
}

std::vector<TransitionModel> single_row_perturbation_grid(
    const EmpiricalDistribution& emp, const TabularMdp& mdp, const Policy& pi,
    const numvec& fractions) {
    validate(pi, mdp);
    for (prec_t f : fractions)
        if (f < 0.0 || f > 1.0)
            throw parameter_error("perturbation fractions must lie in [0, 1]");
    std::vector<TransitionModel> grid = emp.atoms;
    for (const auto& atom : emp.atoms) {
        for (long x = 0; x < mdp.num_states; ++x) {
            const long ax = pi.action[static_cast<size_t>(x)];
            for (long r = 0; r < mdp.num_states; ++r) {
                for (prec_t f : fractions) {
                    TransitionModel m = atom;
                    prec_t* row = m.row(x, ax);
                    for (long sn = 0; sn < mdp.num_states; ++sn)
                        row[sn] *= (1.0 - f);
                    row[r] += f;
                    grid.push_back(std::move(m));
                }
            }
        }
    }
    return grid;
}

} // namespace wdr
