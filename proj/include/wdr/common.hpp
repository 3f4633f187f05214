// Shared scalar types, exception classes and small numeric helpers used
// across the library.
#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace wdr {

using prec_t = double;
using numvec = std::vector<prec_t>;
using indvec = std::vector<long>;
using sizvec = std::vector<size_t>;

/// Caller passed a value outside the documented domain (negative radius,
/// empty grid, discount out of range, ...).
class parameter_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input data violates a structural requirement (dimension mismatch,
/// non-stochastic row, index out of range, rank deficiency, ...).
class structural_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An oracle refused the request because the instance exceeds its hard
/// size guard. Oracles are certification tools, not production solvers.
class size_guard_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr prec_t STOCHASTIC_TOL = 1e-12;

inline prec_t linf_dist(const numvec& a, const numvec& b) {
    assert(a.size() == b.size());
    prec_t d = 0;
    for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

inline prec_t l1_dist(const numvec& a, const numvec& b) {
    assert(a.size() == b.size());
    prec_t d = 0;
    for (size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

inline prec_t dot(const numvec& a, const numvec& b) {
    assert(a.size() == b.size());
    prec_t s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline prec_t mean(const numvec& a) {
    assert(!a.empty());
    prec_t s = 0;
    for (prec_t x : a) s += x;
    return s / static_cast<prec_t>(a.size());
}

/**
 * Solves the dense square system A x = b by Gaussian elimination with
 * partial pivoting. Intended for the small systems that appear in policy
 * evaluation (|S| <= a few dozen); A is row-major, modified in place.
 *
 * \throws structural_error when the matrix is numerically singular
 */
inline numvec solve_dense(std::vector<numvec> a, numvec b) {
    const size_t n = b.size();
    assert(a.size() == n);
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300)
            throw structural_error("singular linear system");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (size_t r = col + 1; r < n; ++r) {
            const prec_t f = a[r][col] / a[col][col];
            if (f == 0) continue;
            for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    numvec x(n);
    for (size_t ri = n; ri-- > 0;) {
        prec_t s = b[ri];
        for (size_t c = ri + 1; c < n; ++c) s -= a[ri][c] * x[c];
        x[ri] = s / a[ri][ri];
    }
    return x;
}

/// Indexes of v sorted so that v[idx[0]] <= v[idx[1]] <= ...; ties keep the
/// lower index first, which makes every greedy mass shift deterministic.
inline sizvec sort_indexes_ascending(const numvec& v) {
    sizvec idx(v.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&v](size_t a, size_t b) { return v[a] < v[b]; });
    return idx;
}

} // namespace wdr
