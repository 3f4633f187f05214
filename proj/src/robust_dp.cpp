#include "wdr/robust_dp.hpp"

#include "wdr/lp.hpp"
#include "wdr/oracles.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>

namespace wdr {

UncertaintySet UncertaintySet::norm_ball(TransitionModel center, numvec radius_per_sa,
                                         RowNorm norm) {
    for (prec_t r : radius_per_sa)
        if (!(r >= 0.0))
            throw structural_error("infeasible row set: negative radius");
    UncertaintySet u;
    u.kind = Kind::NORM_BALL;
    u.center = std::move(center);
    u.radius_per_sa = std::move(radius_per_sa);
    u.norm = norm;
    return u;
}

UncertaintySet UncertaintySet::norm_ball(TransitionModel center, prec_t radius,
                                         RowNorm norm) {
    const size_t nrows =
        static_cast<size_t>(center.num_states) * static_cast<size_t>(center.num_actions);
    return norm_ball(std::move(center), numvec(nrows, radius), norm);
}

UncertaintySet UncertaintySet::finite(std::vector<TransitionModel> atoms) {
    if (atoms.empty()) throw structural_error("infeasible row set: no atoms");
    UncertaintySet u;
    u.kind = Kind::FINITE;
    u.atoms = std::move(atoms);
    return u;
}

void validate(const UncertaintySet& u, const TabularMdp& mdp) {
    if (u.kind == UncertaintySet::Kind::NORM_BALL) {
        validate(u.center, mdp);
        const size_t nrows =
            static_cast<size_t>(mdp.num_states) * static_cast<size_t>(mdp.num_actions);
        if (u.radius_per_sa.size() != nrows)
            throw structural_error("uncertainty set needs one radius per (s,a) row");
        for (prec_t r : u.radius_per_sa)
            if (!(r >= 0.0))
                throw structural_error("infeasible row set: negative radius");
    } else {
        if (u.atoms.empty())
            throw structural_error("infeasible row set: no atoms");
        for (const auto& p : u.atoms) validate(p, mdp);
    }
}

// ---------------------------------------------------------------------------
// inner row problems

namespace {

/// Euclidean projection of y onto the probability simplex (sort-based).
numvec project_simplex(const numvec& y) {
    const size_t d = y.size();
    numvec u = y;
    std::sort(u.begin(), u.end(), std::greater<prec_t>());
    prec_t css = 0.0, theta = 0.0;
    [[maybe_unused]] size_t rho = 0;
    for (size_t i = 0; i < d; ++i) {
        css += u[i];
        const prec_t t = (css - 1.0) / static_cast<prec_t>(i + 1);
        if (u[i] - t > 0.0) {
            rho = i + 1;
            theta = t;
        }
    }
    assert(rho > 0);
    numvec q(d);
    for (size_t i = 0; i < d; ++i) q[i] = std::max(0.0, y[i] - theta);
    return q;
}

} // namespace

std::pair<numvec, prec_t> inner_min_linear(const numvec& v, const numvec& p_hat_row,
                                           prec_t lambda, RowNorm norm) {
    if (lambda < 0.0) throw parameter_error("lambda must be nonnegative");
    if (v.size() != p_hat_row.size())
        throw structural_error("value and row lengths differ");
    if (v.empty()) throw structural_error("empty row");

    if (norm == RowNorm::L1) {
        size_t smin = 0;
        for (size_t i = 1; i < v.size(); ++i)
            if (v[i] < v[smin]) smin = i;
        numvec q = p_hat_row;
        for (size_t i = 0; i < v.size(); ++i) {
            if (i == smin) continue;
            if (v[i] - v[smin] > 2.0 * lambda) {
                q[smin] += q[i];
                q[i] = 0.0;
            }
        }
        return {q, dot(q, v) + lambda * l1_dist(q, p_hat_row)};
    }

    // l2: the norm penalty is non-smooth at q = p_hat, where descent schemes
    // stall. For any t > 0 the simplex projection of p_hat - v/t solves the
    // quadratic-penalty problem min <q,v> + (t/2)*||q - p_hat||^2, whose KKT
    // system coincides with the norm-penalized one exactly when
    // t*||q(t) - p_hat|| = lambda. That force function is continuous and
    // non-decreasing in t, so a bisection finds the matching multiplier;
    // every probe is feasible and the best evaluated candidate (plus p_hat
    // and the vertices) is returned, so the result upper-bounds the true
    // minimum in all cases and matches it to bisection accuracy.
    const size_t d = v.size();
    auto fval = [&](const numvec& q) {
        prec_t sq = 0.0;
        for (size_t i = 0; i < d; ++i) {
            const prec_t diff = q[i] - p_hat_row[i];
            sq += diff * diff;
        }
        return dot(q, v) + lambda * std::sqrt(sq);
    };
    numvec qbest = p_hat_row;
    prec_t fbest = dot(p_hat_row, v);
    auto consider = [&](numvec q) {
        const prec_t f = fval(q);
        if (f < fbest) {
            fbest = f;
            qbest = std::move(q);
        }
    };
    for (size_t j = 0; j < d; ++j) {
        numvec e(d, 0.0);
        e[j] = 1.0;
        consider(std::move(e));
    }
    if (lambda > 0.0) {
        auto force = [&](prec_t t) {
            numvec y(d);
            for (size_t i = 0; i < d; ++i) y[i] = p_hat_row[i] - v[i] / t;
            numvec q = project_simplex(y);
            prec_t sq = 0.0;
            for (size_t i = 0; i < d; ++i) {
                const prec_t diff = q[i] - p_hat_row[i];
                sq += diff * diff;
            }
            const prec_t f = t * std::sqrt(sq);
            consider(std::move(q));
            return f;
        };
        prec_t lo = 1e-9, hi = 1e9;
        if (force(hi) > lambda) {
            for (int it = 0; it < 120; ++it) {
                const prec_t mid = std::sqrt(lo * hi);
                if (force(mid) >= lambda)
                    hi = mid;
                else
                    lo = mid;
            }
        }
    }
    return {qbest, fbest};
}

std::pair<numvec, prec_t> inner_min_budget(const numvec& v, const numvec& center_row,
                                           prec_t radius, RowNorm norm) {
    if (!(radius >= 0.0)) throw structural_error("infeasible row set: negative radius");
    if (v.size() != center_row.size())
        throw structural_error("value and row lengths differ");
    const size_t d = v.size();

    if (norm == RowNorm::L1) {
        numvec q = center_row;
        size_t t = 0;
        for (size_t i = 1; i < d; ++i)
            if (v[i] < v[t]) t = i;
        prec_t budget = radius / 2.0; // movable probability mass
        const sizvec asc = sort_indexes_ascending(v);
        for (size_t k = d; k-- > 0 && budget > 0.0;) {
            const size_t j = asc[k]; // largest values first
            if (j == t) continue;
            const prec_t m = std::min(q[j], budget);
            q[j] -= m;
            q[t] += m;
            budget -= m;
        }
        return {q, dot(q, v)};
    }

    // l2: Lagrangian bisection on the penalty multiplier. The penalized
    // solution's distance to the center decreases in lambda but can jump
    // across the target radius, so every out-of-ball probe is also scaled
    // back onto the sphere along its segment to the center; at the critical
    // multiplier the whole segment is penalty-optimal, which makes the
    // scaled point primal-optimal. All candidates are feasible, so the
    // result always upper-bounds the true minimum.
    auto l2dist = [&](const numvec& q) {
        prec_t sq = 0.0;
        for (size_t i = 0; i < d; ++i) {
            const prec_t diff = q[i] - center_row[i];
            sq += diff * diff;
        }
        return std::sqrt(sq);
    };
    size_t t = 0;
    for (size_t i = 1; i < d; ++i)
        if (v[i] < v[t]) t = i;
    numvec vertex(d, 0.0);
    vertex[t] = 1.0;
    if (l2dist(vertex) <= radius + 1e-12) return {vertex, v[t]};

    numvec qbest = center_row;
    prec_t fbest = dot(center_row, v);
    auto consider = [&](numvec q) {
        const prec_t f = dot(q, v);
        if (f < fbest) {
            fbest = f;
            qbest = std::move(q);
        }
    };
    auto scaled_onto_sphere = [&](const numvec& q, prec_t r) {
        numvec s(d);
        const prec_t c = radius / r;
        for (size_t i = 0; i < d; ++i)
            s[i] = center_row[i] + c * (q[i] - center_row[i]);
        return s;
    };
    for (size_t j = 0; j < d; ++j) {
        numvec e(d, 0.0);
        e[j] = 1.0;
        const prec_t r = l2dist(e);
        if (r <= radius)
            consider(std::move(e));
        else if (radius > 0.0)
            consider(scaled_onto_sphere(e, r));
    }
    const prec_t range = *std::max_element(v.begin(), v.end()) -
                         *std::min_element(v.begin(), v.end());
    prec_t lo = 0.0;
    prec_t hi = (std::sqrt(static_cast<prec_t>(d)) + 2.0) * range + 1.0;
    for (int it = 0; it < 100; ++it) {
        const prec_t lam = 0.5 * (lo + hi);
        auto [q, fpen] = inner_min_linear(v, center_row, lam, RowNorm::L2);
        (void)fpen;
        const prec_t r = l2dist(q);
        if (r <= radius) {
            consider(std::move(q));
            hi = lam;
        } else {
            consider(scaled_onto_sphere(q, r));
            lo = lam;
        }
    }
    return {qbest, fbest};
}

// ---------------------------------------------------------------------------
// trajectory-level inner infimum

namespace {

/// Policy-row system: value v and the columns of (I - gamma P_pi)^{-1}.
struct PolicySystem {
    ValueTable v;
    std::vector<numvec> bcol; // bcol[x] = B e_x
};

PolicySystem build_system(const TabularMdp& mdp, const TransitionModel& p,
                          const Policy& pi) {
    const long S = mdp.num_states;
    std::vector<numvec> a(static_cast<size_t>(S), numvec(static_cast<size_t>(S)));
    numvec rpi(static_cast<size_t>(S));
    for (long x = 0; x < S; ++x) {
        const prec_t* row = p.row(x, pi.action[static_cast<size_t>(x)]);
        for (long c = 0; c < S; ++c)
            a[static_cast<size_t>(x)][static_cast<size_t>(c)] =
                (x == c ? 1.0 : 0.0) - mdp.discount * row[c];
        rpi[static_cast<size_t>(x)] = mdp.reward(x, pi.action[static_cast<size_t>(x)]);
    }
    PolicySystem sys;
    sys.v = solve_dense(a, rpi);
    sys.bcol.resize(static_cast<size_t>(S));
    for (long x = 0; x < S; ++x) {
        numvec e(static_cast<size_t>(S), 0.0);
        e[static_cast<size_t>(x)] = 1.0;
        sys.bcol[static_cast<size_t>(x)] = solve_dense(a, e);
    }
    return sys;
}

/// Ground cost of moving the policy rows of p away from the atom.
prec_t policy_cost(const TransitionModel& p, const TransitionModel& atom,
                   const Policy& pi, RowNorm norm) {
    prec_t acc = 0.0;
    for (long x = 0; x < p.num_states; ++x) {
        const long ax = pi.action[static_cast<size_t>(x)];
        const prec_t* a = p.row(x, ax);
        const prec_t* b = atom.row(x, ax);
        prec_t r = 0.0;
        for (long sn = 0; sn < p.num_states; ++sn) {
            const prec_t diff = a[sn] - b[sn];
            r += (norm == RowNorm::L1) ? std::abs(diff) : diff * diff;
        }
        acc += r;
    }
    return norm == RowNorm::L1 ? acc : std::sqrt(acc);
}

struct DescentResult {
    prec_t best;
    TransitionModel model;
};

/**
 * Exact line search of F along q(t) = q_old + t*(target - q_old) for one
 * policy row, using the Sherman-Morrison value update
 * v_t(s0) = v(s0) + cA t / (1 - cC t). For the l1 penalty the candidates are
 * the endpoints, the penalty kinks and the stationary points of each smooth
 * piece; for l2 a golden-section plus coarse scan.
 */
std::pair<prec_t, prec_t> segment_best(const numvec& q_old, const numvec& target,
                                       const numvec& atom_row, const numvec& v,
                                       const numvec& w, long s0, prec_t gamma,
                                       prec_t lambda, RowNorm norm, prec_t c_other) {
    const size_t d = q_old.size();
    numvec delta(d), off(d);
    prec_t maxd = 0.0;
    for (size_t i = 0; i < d; ++i) {
        delta[i] = target[i] - q_old[i];
        off[i] = q_old[i] - atom_row[i];
        maxd = std::max(maxd, std::abs(delta[i]));
    }
    const prec_t v_s0 = v[static_cast<size_t>(s0)];
    if (maxd < 1e-15) return {0.0, v_s0 + lambda * (c_other + 0.0)};

    const prec_t cA = gamma * w[static_cast<size_t>(s0)] * dot(delta, v);
    const prec_t cC = gamma * dot(delta, w);

    auto pen_row = [&](prec_t t) {
        if (norm == RowNorm::L1) {
            prec_t p1 = 0.0;
            for (size_t i = 0; i < d; ++i) p1 += std::abs(off[i] + t * delta[i]);
            return c_other + p1;
        }
        prec_t sq = c_other * c_other;
        for (size_t i = 0; i < d; ++i) {
            const prec_t e = off[i] + t * delta[i];
            sq += e * e;
        }
        return std::sqrt(sq);
    };
    auto fpred = [&](prec_t t) {
        const prec_t den = 1.0 - cC * t;
        const prec_t val = v_s0 + (std::abs(den) > 1e-14 ? cA * t / den : cA * t * 1e14);
        return val + lambda * pen_row(t);
    };

    numvec cand = {0.0, 1.0};
    if (norm == RowNorm::L1) {
        numvec kinks;
        for (size_t i = 0; i < d; ++i) {
            if (std::abs(delta[i]) < 1e-14) continue;
            const prec_t tk = -off[i] / delta[i];
            if (tk > 1e-12 && tk < 1.0 - 1e-12) kinks.push_back(tk);
        }
        std::sort(kinks.begin(), kinks.end());
        for (prec_t tk : kinks) cand.push_back(tk);
        numvec bounds = {0.0};
        bounds.insert(bounds.end(), kinks.begin(), kinks.end());
        bounds.push_back(1.0);
        for (size_t b = 0; b + 1 < bounds.size(); ++b) {
            const prec_t mid = 0.5 * (bounds[b] + bounds[b + 1]);
            prec_t slope = 0.0;
            for (size_t i = 0; i < d; ++i)
                slope += delta[i] * ((off[i] + mid * delta[i]) >= 0.0 ? 1.0 : -1.0);
            const prec_t ls = lambda * slope;
            if (std::abs(ls) < 1e-300) continue;
            const prec_t rhs = -cA / ls;
            if (rhs <= 0.0) continue;
            const prec_t rt = std::sqrt(rhs);
            if (std::abs(cC) > 1e-14) {
                for (prec_t root : {(1.0 - rt) / cC, (1.0 + rt) / cC})
                    if (root > bounds[b] + 1e-12 && root < bounds[b + 1] - 1e-12)
                        cand.push_back(root);
            }
        }
    } else {
        for (int k = 1; k < 16; ++k) cand.push_back(static_cast<prec_t>(k) / 16.0);
        // golden refinement
        const prec_t invphi = 0.6180339887498949;
        prec_t a = 0.0, b = 1.0;
        prec_t c1 = b - invphi * (b - a), c2 = a + invphi * (b - a);
        prec_t f1 = fpred(c1), f2 = fpred(c2);
        for (int k = 0; k < 48; ++k) {
            if (f1 <= f2) {
                b = c2;
                c2 = c1;
                f2 = f1;
                c1 = b - invphi * (b - a);
                f1 = fpred(c1);
            } else {
                a = c1;
                c1 = c2;
                f1 = f2;
                c2 = a + invphi * (b - a);
                f2 = fpred(c2);
            }
        }
        cand.push_back(c1);
        cand.push_back(c2);
    }

    prec_t tbest = 0.0, fbest = std::numeric_limits<prec_t>::infinity();
    for (prec_t t : cand) {
        const prec_t f = fpred(t);
        if (f < fbest) {
            fbest = f;
            tbest = t;
        }
    }
    return {tbest, fbest};
}

DescentResult descend(const TabularMdp& mdp, const Policy& pi,
                      const TransitionModel& atom, long s0, prec_t lambda, RowNorm norm,
                      TransitionModel start) {
    const long S = mdp.num_states;
    TransitionModel p = std::move(start);
    PolicySystem sys = build_system(mdp, p, pi);
    prec_t fcur = sys.v[static_cast<size_t>(s0)] + lambda * policy_cost(p, atom, pi, norm);
    DescentResult best{fcur, p};

    for (int sweep = 0; sweep < 100; ++sweep) {
        bool changed = false;
        for (long x = 0; x < S; ++x) {
            const long ax = pi.action[static_cast<size_t>(x)];
            const numvec q_old = p.row_copy(x, ax);
            const numvec atom_row = atom.row_copy(x, ax);
            const numvec& w = sys.bcol[static_cast<size_t>(x)];

            // cost contribution of the other rows
            prec_t c_other;
            if (norm == RowNorm::L1) {
                c_other = policy_cost(p, atom, pi, norm) - l1_dist(q_old, atom_row);
                c_other = std::max(c_other, 0.0);
            } else {
                prec_t tot = 0.0, own = 0.0;
                for (long y = 0; y < S; ++y) {
                    const long ay = pi.action[static_cast<size_t>(y)];
                    const prec_t* a = p.row(y, ay);
                    const prec_t* b = atom.row(y, ay);
                    prec_t r = 0.0;
                    for (long sn = 0; sn < S; ++sn) {
                        const prec_t diff = a[sn] - b[sn];
                        r += diff * diff;
                    }
                    tot += r;
                    if (y == x) own = r;
                }
                c_other = std::sqrt(std::max(tot - own, 0.0));
            }

            // candidate target rows
            std::vector<numvec> targets;
            targets.push_back(atom_row);
            for (long j = 0; j < S; ++j) {
                numvec e(static_cast<size_t>(S), 0.0);
                e[static_cast<size_t>(j)] = 1.0;
                targets.push_back(std::move(e));
            }
            const prec_t occ = mdp.discount * w[static_cast<size_t>(s0)];
            if (occ > 1e-13) {
                targets.push_back(
                    inner_min_linear(sys.v, atom_row, lambda / occ, norm).first);
            }

            prec_t best_pred = fcur - 1e-13;
            numvec best_row;
            for (const auto& tgt : targets) {
                auto [t, fp] = segment_best(q_old, tgt, atom_row, sys.v, w, s0,
                                            mdp.discount, lambda, norm, c_other);
                if (fp < best_pred) {
                    best_pred = fp;
                    best_row.resize(q_old.size());
                    for (size_t i = 0; i < q_old.size(); ++i)
                        best_row[i] = q_old[i] + t * (tgt[i] - q_old[i]);
                }
            }
            if (!best_row.empty()) {
                prec_t* row = p.row(x, ax);
                for (long sn = 0; sn < S; ++sn)
                    row[sn] = best_row[static_cast<size_t>(sn)];
                sys = build_system(mdp, p, pi);
                fcur = sys.v[static_cast<size_t>(s0)] +
                       lambda * policy_cost(p, atom, pi, norm);
                if (fcur < best.best) {
                    best.best = fcur;
                    best.model = p;
                }
                changed = true;
            }
        }
        if (!changed) break;
    }
    return best;
}

/**
 * Feasible model kept from an earlier descent together with its value and
 * ground cost, so its penalized objective at any other multiplier is the
 * affine map v_s0 + lambda*cost with no further solves.
 */
struct PoolEntry {
    prec_t v_s0;
    prec_t cost;
    TransitionModel model;
};

/// Max abs difference over the policy rows; pooled models differ only there.
prec_t policy_row_gap(const TransitionModel& a, const TransitionModel& b,
                      const Policy& pi) {
    prec_t g = 0.0;
    for (long x = 0; x < a.num_states; ++x) {
        const long ax = pi.action[static_cast<size_t>(x)];
        const prec_t* ra = a.row(x, ax);
        const prec_t* rb = b.row(x, ax);
        for (long sn = 0; sn < a.num_states; ++sn)
            g = std::max(g, std::abs(ra[sn] - rb[sn]));
    }
    return g;
}

void pool_add(std::vector<PoolEntry>& pool, DescentResult r, prec_t lambda,
              const TransitionModel& atom, const Policy& pi, RowNorm norm) {
    const prec_t cost = policy_cost(r.model, atom, pi, norm);
    const prec_t v_s0 = r.best - lambda * cost;
    for (const auto& e : pool)
        if (policy_row_gap(e.model, r.model, pi) < 1e-10) return;
    if (pool.size() >= 24) {
        size_t worst = 0;
        prec_t wv = -std::numeric_limits<prec_t>::infinity();
        for (size_t k = 0; k < pool.size(); ++k) {
            const prec_t val = pool[k].v_s0 + lambda * pool[k].cost;
            if (val > wv) {
                wv = val;
                worst = k;
            }
        }
        if (v_s0 + lambda * cost >= wv) return;
        pool[worst] = PoolEntry{v_s0, cost, std::move(r.model)};
        return;
    }
    pool.push_back(PoolEntry{v_s0, cost, std::move(r.model)});
}

/**
 * Best visited point of the trajectory inner problem at one multiplier over
 * a multistart set: the atom and every vertex model when base_starts is set,
 * plus warm starts drawn from the pool (pool_starts < 0 takes the whole
 * pool, otherwise the best pool_starts entries ranked by their penalized
 * objective at this multiplier). Without a pool the unpenalized worst case
 * is chained in as an extra start to keep the call self-contained.
 */
DescentResult inner_best(const TabularMdp& mdp, const Policy& pi,
                         const TransitionModel& atom, long s, prec_t lambda,
                         RowNorm norm, const std::vector<PoolEntry>* pool,
                         long pool_starts, bool base_starts) {
    const long S = mdp.num_states;
    std::optional<DescentResult> best;
    auto run = [&](TransitionModel start) {
        DescentResult r = descend(mdp, pi, atom, s, lambda, norm, std::move(start));
        if (!best || r.best < best->best) best = std::move(r);
    };
    if (base_starts) {
        run(atom);
        if (pool == nullptr && lambda > 0.0) {
            DescentResult rob = descend(mdp, pi, atom, s, 0.0, norm, atom);
            run(std::move(rob.model));
        }
        for (long j = 0; j < S; ++j) {
            TransitionModel m = atom;
            for (long x = 0; x < S; ++x) {
                prec_t* row = m.row(x, pi.action[static_cast<size_t>(x)]);
                for (long sn = 0; sn < S; ++sn) row[sn] = (sn == j) ? 1.0 : 0.0;
            }
            run(std::move(m));
        }
    }
    if (pool != nullptr && !pool->empty() && pool_starts != 0) {
        std::vector<size_t> order(pool->size());
        std::iota(order.begin(), order.end(), size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) {
            return (*pool)[x].v_s0 + lambda * (*pool)[x].cost <
                   (*pool)[y].v_s0 + lambda * (*pool)[y].cost;
        });
        const size_t take =
            pool_starts < 0 ? pool->size()
                            : std::min(pool->size(), static_cast<size_t>(pool_starts));
        for (size_t k = 0; k < take; ++k) run((*pool)[order[k]].model);
    }
    assert(best.has_value());
    return std::move(*best);
}

} // namespace

prec_t trajectory_inner_infimum(const TabularMdp& mdp, const Policy& pi,
                                const TransitionModel& atom, long s, prec_t lambda,
                                RowNorm norm) {
    if (lambda < 0.0) throw parameter_error("lambda must be nonnegative");
    if (s < 0 || s >= mdp.num_states) throw structural_error("state index out of range");
    return inner_best(mdp, pi, atom, s, lambda, norm, nullptr, 0, true).best;
}

// ---------------------------------------------------------------------------
// dual evaluation

namespace {

void check_lambda_grid(const numvec& grid) {
    if (grid.empty()) throw parameter_error("lambda grid must be nonempty");
    if (grid.front() < 0.0)
        throw parameter_error("lambda grid entries must be nonnegative");
    for (size_t i = 1; i < grid.size(); ++i)
        if (grid[i] < grid[i - 1])
            throw parameter_error("lambda grid must be sorted ascending");
}

prec_t lipschitz_l(const TabularMdp& mdp, GroundNorm norm) {
    const prec_t beta = norm_equivalence_beta(norm, mdp.num_states);
    const prec_t om = 1.0 - mdp.discount;
    return beta * mdp.discount * mdp.r_max / (om * om);
}

prec_t state_alpha(const AmbiguitySpec& spec, long s, long num_states) {
    if (spec.radius_per_state.empty()) return spec.scalar_radius;
    if (static_cast<long>(spec.radius_per_state.size()) != num_states)
        throw structural_error("radius_per_state length does not match |S|");
    return spec.radius_per_state[static_cast<size_t>(s)];
}

/**
 * Exact sup over lambda of the one-step dual for rowwise l1. Each atom's
 * inner value is piecewise linear in lambda with kinks shared across atoms at
 * (v(s') - min v)/2, so the concave dual attains its sup on the kink set
 * (plus 0 and any caller-supplied multipliers).
 */
prec_t onestep_dual_l1(const std::vector<const prec_t*>& rows, const numvec& v,
                       prec_t alpha, const numvec& extras) {
    const size_t n = rows.size();
    const size_t d = v.size();
    prec_t vmin = v[0];
    for (prec_t x : v) vmin = std::min(vmin, x);

    numvec dots(n, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t c = 0; c < d; ++c) dots[i] += rows[i][c] * v[c];

    numvec cands = {0.0};
    for (size_t c = 0; c < d; ++c) cands.push_back((v[c] - vmin) / 2.0);
    for (prec_t lam : extras)
        if (lam >= 0.0) cands.push_back(lam);

    prec_t best = -std::numeric_limits<prec_t>::infinity();
    for (prec_t lam : cands) {
        prec_t acc = 0.0;
        for (size_t i = 0; i < n; ++i) {
            prec_t drop = 0.0;
            for (size_t c = 0; c < d; ++c) {
                const prec_t gap = v[c] - vmin - 2.0 * lam;
                if (gap > 0.0) drop += rows[i][c] * gap;
            }
            acc += dots[i] - drop;
        }
        best = std::max(best, acc / static_cast<prec_t>(n) - lam * alpha);
    }
    return best;
}

prec_t onestep_dual_rows(const std::vector<const prec_t*>& rows, const numvec& v,
                         prec_t alpha, const numvec& extras, RowNorm rn) {
    if (rn == RowNorm::L1) return onestep_dual_l1(rows, v, alpha, extras);

    // l2: concave in lambda, golden-section over the effective range
    const size_t n = rows.size();
    const size_t d = v.size();
    prec_t vmin = v[0], vmax = v[0];
    for (prec_t x : v) {
        vmin = std::min(vmin, x);
        vmax = std::max(vmax, x);
    }
    auto g = [&](prec_t lam) {
        prec_t acc = 0.0;
        for (size_t i = 0; i < n; ++i) {
            numvec row(rows[i], rows[i] + d);
            acc += inner_min_linear(v, row, lam, RowNorm::L2).second;
        }
        return acc / static_cast<prec_t>(n) - lam * alpha;
    };
    prec_t best = -std::numeric_limits<prec_t>::infinity();
    auto probe = [&](prec_t lam) {
        const prec_t val = g(lam);
        best = std::max(best, val);
        return val;
    };
    prec_t a = 0.0, b = vmax - vmin + 1e-9;
    for (prec_t lam : extras)
        if (lam >= 0.0) {
            probe(lam);
            b = std::max(b, lam);
        }
    const prec_t invphi = 0.6180339887498949;
    probe(a);
    probe(b);
    prec_t c1 = b - invphi * (b - a), c2 = a + invphi * (b - a);
    prec_t f1 = probe(c1), f2 = probe(c2);
    for (int k = 0; k < 48; ++k) {
        if (f1 >= f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - invphi * (b - a);
            f1 = probe(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + invphi * (b - a);
            f2 = probe(c2);
        }
    }
    return best;
}

} // namespace

numvec default_lambda_grid(const TabularMdp& mdp, GroundNorm norm) {
    validate(mdp);
    const prec_t l = lipschitz_l(mdp, norm);
    if (l <= 0.0) return {0.0};
    return {0.0, l};
}

DualEvaluation dr_value_dual(const TabularMdp& mdp, const Policy& pi,
                             const EmpiricalDistribution& emp, const AmbiguitySpec& spec,
                             long s, const numvec& lambda_grid) {
    validate(mdp);
    validate(pi, mdp);
    if (emp.atoms.empty()) throw parameter_error("empirical distribution has no atoms");
    if (s < 0 || s >= mdp.num_states) throw structural_error("state index out of range");
    if (spec.scalar_radius < 0.0) throw parameter_error("radius must be nonnegative");
    check_lambda_grid(lambda_grid);
    for (const auto& atom : emp.atoms) validate(atom, mdp);

    const size_t n = emp.size();
    const RowNorm rn = rowwise(spec.norm);
    const prec_t alpha = spec.scalar_radius;

    numvec atom_values(n);
    for (size_t i = 0; i < n; ++i)
        atom_values[i] =
            evaluate_policy_direct(mdp, emp.atoms[i], pi)[static_cast<size_t>(s)];

    if (alpha == 0.0) {
        // degenerate ball: the ambiguity set collapses to the center
        return {lipschitz_l(mdp, spec.norm), mean(atom_values), atom_values};
    }

    // Minimizer models found at one multiplier warm-start the descent at the
    // next, and each pooled model caps the inner value at every multiplier
    // through its affine objective v_s0 + lambda*cost. Seeded with the
    // unpenalized worst case so every evaluation can chain from it.
    std::vector<std::vector<PoolEntry>> pools(n);
    for (size_t i = 0; i < n; ++i) {
        DescentResult rob = descend(mdp, pi, emp.atoms[i], s, 0.0, rn, emp.atoms[i]);
        pool_add(pools[i], std::move(rob), 0.0, emp.atoms[i], pi, rn);
    }
    // the atom itself is always feasible at zero cost
    auto envelope = [&](size_t i, prec_t lam) {
        prec_t low = atom_values[i];
        for (const auto& e : pools[i]) low = std::min(low, e.v_s0 + lam * e.cost);
        return low;
    };

    std::map<prec_t, std::pair<prec_t, numvec>> memo;
    auto eval_with = [&](prec_t lam, long pool_starts, bool base_starts) -> prec_t {
        numvec inners(n);
        for (size_t i = 0; i < n; ++i) {
            DescentResult r = inner_best(mdp, pi, emp.atoms[i], s, lam, rn, &pools[i],
                                         pool_starts, base_starts);
            inners[i] = std::min(r.best, envelope(i, lam));
            pool_add(pools[i], std::move(r), lam, emp.atoms[i], pi, rn);
        }
        const prec_t val = mean(inners) - lam * alpha;
        memo[lam] = std::make_pair(val, std::move(inners));
        return val;
    };
    auto eval = [&](prec_t lam) -> prec_t {
        auto it = memo.find(lam);
        if (it != memo.end()) return it->second.first;
        return eval_with(lam, 2, true);
    };

    for (prec_t lam : lambda_grid) eval(lam);
    prec_t a = lambda_grid.front(), b = lambda_grid.back();
    if (b > a) {
        const prec_t invphi = 0.6180339887498949;
        prec_t c1 = b - invphi * (b - a), c2 = a + invphi * (b - a);
        prec_t f1 = eval(c1), f2 = eval(c2);
        for (int k = 0; k < 48; ++k) {
            if (f1 >= f2) {
                b = c2;
                c2 = c1;
                f2 = f1;
                c1 = b - invphi * (b - a);
                f1 = eval(c1);
            } else {
                a = c1;
                c1 = c2;
                f1 = f2;
                c2 = a + invphi * (b - a);
                f2 = eval(c2);
            }
        }
    }

    // Each descent only upper-bounds its inner infimum, so the running
    // maximum over multipliers can overshoot where the descent under-solved.
    // Re-cap every evaluated multiplier with the final pool envelopes and
    // re-solve the leader from every pooled start until the leader survives
    // its own refinement; both steps only lower the estimates.
    std::vector<prec_t> refined;
    const size_t rounds = memo.size() + 1;
    for (size_t round = 0; round < rounds; ++round) {
        prec_t lead_lam = lambda_grid.front();
        prec_t lead_val = -std::numeric_limits<prec_t>::infinity();
        for (auto& [lam, entry] : memo) {
            numvec& inners = entry.second;
            prec_t acc = 0.0;
            for (size_t i = 0; i < n; ++i) {
                inners[i] = std::min(inners[i], envelope(i, lam));
                acc += inners[i];
            }
            entry.first = acc / static_cast<prec_t>(n) - lam * alpha;
            if (entry.first > lead_val) {
                lead_val = entry.first;
                lead_lam = lam;
            }
        }
        if (std::find(refined.begin(), refined.end(), lead_lam) != refined.end())
            break;
        refined.push_back(lead_lam);
        eval_with(lead_lam, -1, false);
    }

    prec_t best_lam = lambda_grid.front();
    prec_t best_val = -std::numeric_limits<prec_t>::infinity();
    for (const auto& [lam, entry] : memo) {
        if (entry.first > best_val) {
            best_val = entry.first;
            best_lam = lam;
        }
    }
    return {best_lam, best_val, memo.at(best_lam).second};
}

// ---------------------------------------------------------------------------
// rectangular DR operators

ValueTable dr_bellman_apply(const TabularMdp& mdp, const Policy& pi,
                            const EmpiricalDistribution& emp, const AmbiguitySpec& spec,
                            const ValueTable& v, const numvec& lambda_grid) {
    validate(mdp);
    validate(pi, mdp);
    if (emp.atoms.empty()) throw parameter_error("empirical distribution has no atoms");
    if (static_cast<long>(v.size()) != mdp.num_states)
        throw structural_error("value table length does not match |S|");
    check_lambda_grid(lambda_grid);

    const size_t n = emp.size();
    const RowNorm rn = rowwise(spec.norm);
    ValueTable out(v.size());
    std::vector<const prec_t*> rows(n);
    for (long s = 0; s < mdp.num_states; ++s) {
        const long a = pi.action[static_cast<size_t>(s)];
        const prec_t alpha_s = state_alpha(spec, s, mdp.num_states);
        if (alpha_s < 0.0) throw parameter_error("radius must be nonnegative");
        for (size_t i = 0; i < n; ++i) rows[i] = emp.atoms[i].row(s, a);
        const prec_t inner = onestep_dual_rows(rows, v, alpha_s, lambda_grid, rn);
        out[static_cast<size_t>(s)] = mdp.reward(s, a) + mdp.discount * inner;
    }
    return out;
}

ValueTable dr_policy_evaluation(const TabularMdp& mdp, const Policy& pi,
                                const EmpiricalDistribution& emp,
                                const AmbiguitySpec& spec, prec_t tol) {
    if (!(tol > 0.0)) throw parameter_error("tol must be positive");
    validate(mdp);
    const prec_t thresh = mdp.discount > 0.0
                              ? tol * (1.0 - mdp.discount) / mdp.discount
                              : std::numeric_limits<prec_t>::infinity();
    ValueTable v(static_cast<size_t>(mdp.num_states), 0.0);
    const numvec grid = {0.0};
    for (long it = 0; it < 10000000; ++it) {
        ValueTable next = dr_bellman_apply(mdp, pi, emp, spec, v, grid);
        const prec_t diff = linf_dist(next, v);
        v = std::move(next);
        if (diff <= thresh) return v;
    }
    throw structural_error("dr_policy_evaluation failed to converge");
}

Policy dr_greedy_improve(const TabularMdp& mdp, const EmpiricalDistribution& emp,
                         const AmbiguitySpec& spec, const ValueTable& v) {
    validate(mdp);
    if (emp.atoms.empty()) throw parameter_error("empirical distribution has no atoms");
    const size_t n = emp.size();
    const RowNorm rn = rowwise(spec.norm);
    Policy pi;
    pi.action.assign(static_cast<size_t>(mdp.num_states), 0);
    std::vector<const prec_t*> rows(n);
    const numvec extras = {0.0};
    for (long s = 0; s < mdp.num_states; ++s) {
        const prec_t alpha_s = state_alpha(spec, s, mdp.num_states);
        prec_t best = -std::numeric_limits<prec_t>::infinity();
        for (long a = 0; a < mdp.num_actions; ++a) {
            for (size_t i = 0; i < n; ++i) rows[i] = emp.atoms[i].row(s, a);
            const prec_t q = mdp.reward(s, a) +
                             mdp.discount * onestep_dual_rows(rows, v, alpha_s, extras, rn);
            if (q > best) {
                best = q;
                pi.action[static_cast<size_t>(s)] = a;
            }
        }
    }
    return pi;
}

std::pair<ValueTable, Policy> dr_policy_iteration(const TabularMdp& mdp,
                                                  const EmpiricalDistribution& emp,
                                                  const AmbiguitySpec& spec, prec_t tol) {
    Policy pi;
    pi.action.assign(static_cast<size_t>(mdp.num_states), 0);
    ValueTable v;
    for (int it = 0; it < 200; ++it) {
        v = dr_policy_evaluation(mdp, pi, emp, spec, tol);
        Policy next = dr_greedy_improve(mdp, emp, spec, v);
        if (next.action == pi.action) break;
        pi = std::move(next);
    }
    return {v, pi};
}

// ---------------------------------------------------------------------------
// robust (uncertainty-set) operators

namespace {

prec_t robust_inner(const TabularMdp& mdp, const UncertaintySet& u, long s, long a,
                    const ValueTable& v) {
    if (u.kind == UncertaintySet::Kind::FINITE) {
        prec_t best = std::numeric_limits<prec_t>::infinity();
        for (const auto& atom : u.atoms) {
            const prec_t* row = atom.row(s, a);
            prec_t d = 0.0;
            for (long sn = 0; sn < mdp.num_states; ++sn)
                d += row[sn] * v[static_cast<size_t>(sn)];
            best = std::min(best, d);
        }
        return best;
    }
    const prec_t radius = u.radius_per_sa[static_cast<size_t>(s * mdp.num_actions + a)];
    return inner_min_budget(v, u.center.row_copy(s, a), radius, u.norm).second;
}

} // namespace

ValueTable robust_bellman_apply(const TabularMdp& mdp, const UncertaintySet& u,
                                const ValueTable& v) {
    validate(mdp);
    validate(u, mdp);
    if (static_cast<long>(v.size()) != mdp.num_states)
        throw structural_error("value table length does not match |S|");
    ValueTable out(v.size());
    for (long s = 0; s < mdp.num_states; ++s) {
        prec_t best = -std::numeric_limits<prec_t>::infinity();
        for (long a = 0; a < mdp.num_actions; ++a)
            best = std::max(best,
                            mdp.reward(s, a) + mdp.discount * robust_inner(mdp, u, s, a, v));
        out[static_cast<size_t>(s)] = best;
    }
    return out;
}

ValueTable robust_policy_evaluation(const TabularMdp& mdp, const UncertaintySet& u,
                                    const Policy& pi, prec_t tol) {
    if (!(tol > 0.0)) throw parameter_error("tol must be positive");
    validate(mdp);
    validate(u, mdp);
    validate(pi, mdp);
    const prec_t thresh = mdp.discount > 0.0
                              ? tol * (1.0 - mdp.discount) / mdp.discount
                              : std::numeric_limits<prec_t>::infinity();
    ValueTable v(static_cast<size_t>(mdp.num_states), 0.0);
    for (long it = 0; it < 10000000; ++it) {
        ValueTable next(v.size());
        for (long s = 0; s < mdp.num_states; ++s) {
            const long a = pi.action[static_cast<size_t>(s)];
            next[static_cast<size_t>(s)] =
                mdp.reward(s, a) + mdp.discount * robust_inner(mdp, u, s, a, v);
        }
        const prec_t diff = linf_dist(next, v);
        v = std::move(next);
        if (diff <= thresh) return v;
    }
    throw structural_error("robust_policy_evaluation failed to converge");
}

std::pair<ValueTable, Policy> robust_value_iteration(const TabularMdp& mdp,
                                                     const UncertaintySet& u, prec_t tol) {
    if (!(tol > 0.0)) throw parameter_error("tol must be positive");
    validate(mdp);
    validate(u, mdp);
    const prec_t thresh = mdp.discount > 0.0
                              ? tol * (1.0 - mdp.discount) / mdp.discount
                              : std::numeric_limits<prec_t>::infinity();
    ValueTable v(static_cast<size_t>(mdp.num_states), 0.0);
    for (long it = 0; it < 10000000; ++it) {
        ValueTable next = robust_bellman_apply(mdp, u, v);
        const prec_t diff = linf_dist(next, v);
        v = std::move(next);
        if (diff <= thresh) break;
    }
    Policy pi;
    pi.action.assign(static_cast<size_t>(mdp.num_states), 0);
    for (long s = 0; s < mdp.num_states; ++s) {
        prec_t best = -std::numeric_limits<prec_t>::infinity();
        for (long a = 0; a < mdp.num_actions; ++a) {
            const prec_t q =
                mdp.reward(s, a) + mdp.discount * robust_inner(mdp, u, s, a, v);
            if (q > best) {
                best = q;
                pi.action[static_cast<size_t>(s)] = a;
            }
        }
    }
    return {v, pi};
}

// ---------------------------------------------------------------------------
// transport-LP oracles

prec_t dr_value_oracle(const TabularMdp& mdp, const Policy& pi,
                       const EmpiricalDistribution& emp, const AmbiguitySpec& spec,
                       long s, const std::vector<TransitionModel>& support_grid) {
    validate(mdp);
    validate(pi, mdp);
    if (emp.atoms.empty()) throw parameter_error("empirical distribution has no atoms");
    if (support_grid.empty()) throw parameter_error("support grid must be nonempty");
    if (s < 0 || s >= mdp.num_states) throw structural_error("state index out of range");
    if (spec.scalar_radius < 0.0) throw parameter_error("radius must be nonnegative");

    const size_t n = emp.size();
    const size_t g = support_grid.size();
    numvec values(g);
    for (size_t j = 0; j < g; ++j) {
        validate(support_grid[j], mdp, 1e-9);
        values[j] =
            evaluate_policy_direct(mdp, support_grid[j], pi)[static_cast<size_t>(s)];
    }
    std::vector<numvec> dist(n, numvec(g));
    sizvec home(n);
    for (size_t i = 0; i < n; ++i) {
        size_t hj = 0;
        for (size_t j = 0; j < g; ++j) {
            dist[i][j] = ground_distance(emp.atoms[i], support_grid[j], spec.norm);
            if (dist[i][j] < dist[i][hj]) hj = j;
        }
        if (dist[i][hj] > 1e-9)
            throw parameter_error("support grid missing empirical atom " +
                                  std::to_string(i));
        home[i] = hj;
    }
    if (spec.scalar_radius == 0.0) {
        prec_t acc = 0.0;
        for (size_t i = 0; i < n; ++i) acc += values[home[i]];
        return acc / static_cast<prec_t>(n);
    }
    const numvec weights(n, 1.0 / static_cast<prec_t>(n));
    return budget_transport_min(weights, values, dist, spec.scalar_radius, home);
}

prec_t dr_value_oracle_dense(const TabularMdp& mdp, const Policy& pi,
                             const EmpiricalDistribution& emp, const AmbiguitySpec& spec,
                             long s, prec_t step) {
    validate(mdp);
    validate(pi, mdp);
    if (emp.atoms.empty()) throw parameter_error("empirical distribution has no atoms");
    if (s < 0 || s >= mdp.num_states) throw structural_error("state index out of range");
    if (spec.scalar_radius < 0.0) throw parameter_error("radius must be nonnegative");
    for (const auto& atom : emp.atoms) validate(atom, mdp);

    const long S = mdp.num_states;
    const size_t n = emp.size();
    const RowNorm rn = rowwise(spec.norm);
    const prec_t alpha = spec.scalar_radius;

    const std::vector<numvec> lattice = simplex_grid_points(SimplexGrid{S, step});
    const size_t G = lattice.size();
    size_t T = 1;
    for (long x = 0; x < S; ++x) {
        if (T > 4000000 / G + 1) throw size_guard_error("dense oracle grid too large");
        T *= G;
    }
    if (T > 4000000)
        throw size_guard_error("dense oracle refused: " + std::to_string(T) +
                               " lattice combinations exceed the 4e6 cap");

    numvec atom_values(n);
    for (size_t i = 0; i < n; ++i)
        atom_values[i] =
            evaluate_policy_direct(mdp, emp.atoms[i], pi)[static_cast<size_t>(s)];
    if (alpha == 0.0) return mean(atom_values);

    numvec rpi(static_cast<size_t>(S));
    for (long x = 0; x < S; ++x)
        rpi[static_cast<size_t>(x)] = mdp.reward(x, pi.action[static_cast<size_t>(x)]);

    // value of every lattice combination (policy rows only matter)
    numvec vtab(T);
    {
        std::vector<size_t> digit(static_cast<size_t>(S), 0);
        prec_t m[4][5];
        for (size_t j = 0; j < T; ++j) {
            for (long x = 0; x < S; ++x) {
                const numvec& row = lattice[digit[static_cast<size_t>(x)]];
                for (long c = 0; c < S; ++c)
                    m[x][c] = (x == c ? 1.0 : 0.0) - mdp.discount * row[static_cast<size_t>(c)];
                m[x][S] = rpi[static_cast<size_t>(x)];
            }
            // gaussian elimination on the stack copy
            for (long col = 0; col < S; ++col) {
                long piv = col;
                for (long r = col + 1; r < S; ++r)
                    if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
                if (piv != col)
                    for (long c = col; c <= S; ++c) std::swap(m[piv][c], m[col][c]);
                for (long r = col + 1; r < S; ++r) {
                    const prec_t f = m[r][col] / m[col][col];
                    if (f == 0.0) continue;
                    for (long c = col; c <= S; ++c) m[r][c] -= f * m[col][c];
                }
            }
            prec_t x4[4] = {0.0, 0.0, 0.0, 0.0};
            for (long r = S; r-- > 0;) {
                prec_t acc = m[r][S];
                for (long c = r + 1; c < S; ++c) acc -= m[r][c] * x4[c];
                x4[r] = acc / m[r][r];
            }
            vtab[j] = x4[s];
            for (long x = S; x-- > 0;) {
                if (++digit[static_cast<size_t>(x)] < G) break;
                digit[static_cast<size_t>(x)] = 0;
            }
        }
    }

    // per-atom distance of every combination (rowwise distances are additive
    // for l1; l2 combines by the root of summed squares)
    std::vector<numvec> rowdist(n, numvec(static_cast<size_t>(S) * G));
    for (size_t i = 0; i < n; ++i) {
        for (long x = 0; x < S; ++x) {
            const numvec arow = emp.atoms[i].row_copy(x, pi.action[static_cast<size_t>(x)]);
            for (size_t t = 0; t < G; ++t) {
                prec_t d = 0.0;
                for (long c = 0; c < S; ++c) {
                    const prec_t diff = lattice[t][static_cast<size_t>(c)] -
                                        arow[static_cast<size_t>(c)];
                    d += (rn == RowNorm::L1) ? std::abs(diff) : diff * diff;
                }
                rowdist[i][static_cast<size_t>(x) * G + t] = d;
            }
        }
    }
    std::vector<numvec> dtab(n, numvec(T));
    {
        std::vector<size_t> digit(static_cast<size_t>(S), 0);
        for (size_t j = 0; j < T; ++j) {
            for (size_t i = 0; i < n; ++i) {
                prec_t acc = 0.0;
                for (long x = 0; x < S; ++x)
                    acc += rowdist[i][static_cast<size_t>(x) * G +
                                      digit[static_cast<size_t>(x)]];
                dtab[i][j] = (rn == RowNorm::L1) ? acc : std::sqrt(acc);
            }
            for (long x = S; x-- > 0;) {
                if (++digit[static_cast<size_t>(x)] < G) break;
                digit[static_cast<size_t>(x)] = 0;
            }
        }
    }

    // column ids: atom i owns T lattice columns plus its self column at t = T
    const uint64_t per_atom = static_cast<uint64_t>(T) + 1;
    const uint64_t slack_id = static_cast<uint64_t>(n) * per_atom;

    numvec rhs(n + 1, 1.0 / static_cast<prec_t>(n));
    rhs[n] = alpha;
    std::vector<uint64_t> basis;
    for (size_t i = 0; i < n; ++i)
        basis.push_back(static_cast<uint64_t>(i) * per_atom + T);
    basis.push_back(slack_id);

    auto column = [&](uint64_t id) -> SimplexColumn {
        SimplexColumn col;
        col.a.assign(n + 1, 0.0);
        if (id == slack_id) {
            col.a[n] = 1.0;
            col.cost = 0.0;
            return col;
        }
        const size_t i = static_cast<size_t>(id / per_atom);
        const size_t t = static_cast<size_t>(id % per_atom);
        col.a[i] = 1.0;
        if (t == T) {
            col.cost = atom_values[i];
        } else {
            col.a[n] = dtab[i][t];
            col.cost = vtab[t];
        }
        return col;
    };
    auto price = [&](const numvec& y) -> std::optional<PricedCandidate> {
        prec_t best_rc = -1e-9;
        uint64_t best_id = 0;
        bool found = false;
        const prec_t theta = y[n];
        if (-theta < best_rc) {
            best_rc = -theta;
            best_id = slack_id;
            found = true;
        }
        for (size_t i = 0; i < n; ++i) {
            const prec_t rc_self = atom_values[i] - y[i];
            if (rc_self < best_rc) {
                best_rc = rc_self;
                best_id = static_cast<uint64_t>(i) * per_atom + T;
                found = true;
            }
            const prec_t yi = y[i];
            const prec_t* dv = dtab[i].data();
            for (size_t t = 0; t < T; ++t) {
                const prec_t rc = vtab[t] - theta * dv[t] - yi;
                if (rc < best_rc) {
                    best_rc = rc;
                    best_id = static_cast<uint64_t>(i) * per_atom + t;
                    found = true;
                }
            }
        }
        if (!found) return std::nullopt;
        return PricedCandidate{best_id, best_rc};
    };
    return revised_simplex_min(rhs, basis, column, price);
}

} // namespace wdr
