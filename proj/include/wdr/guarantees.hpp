// Finite-sample radius schedule and the Monte Carlo out-of-sample coverage
// experiment: train a DR policy on per-episode estimates, certify it with
// the DR value, and check the certificate against the exact mixture
// performance under the generating distribution.
#pragma once

#include "wdr/ambiguity.hpp"
#include "wdr/mdp.hpp"

#include <cstdint>

namespace wdr {

/**
 * Radius schedule alpha_s(n_s, eps): c0 below the sample threshold
 * C = (1/c2)·log(c1/eps), then c0·((1/(n_s·c2))·log(c1/eps))^(1/max(m,2)).
 * m is the |S|·|A| dimension parameter; m = 2 is unsupported.
 */
struct RadiusSchedule {
    prec_t c0;
    prec_t c1;
    prec_t c2;
    prec_t epsilon;
    long m;

    prec_t threshold() const;
};

/// \throws parameter_error on nonpositive constants, eps outside (0,1) or m = 2
void validate(const RadiusSchedule& schedule);

/// \throws parameter_error when n_s < 0 or the schedule is invalid
prec_t radius(const RadiusSchedule& schedule, long n_s);

struct OosTrialResult {
    long trial_id;
    ValueTable certificate;        // DR value of the trained policy
    ValueTable true_performance;   // exact mixture value of that policy
    indvec policy;
    bool covered;                  // true_performance >= certificate - 1e-9 everywhere
};

struct OosReport {
    long trials;
    long covered_count;
    prec_t coverage;
    prec_t wilson_lo;
    prec_t wilson_hi;
    std::vector<OosTrialResult> results;
};

/// Wilson 95% score interval for covered successes out of trials.
std::pair<prec_t, prec_t> wilson_interval(long covered, long trials,
                                          prec_t z = 1.959963984540054);

/**
 * Seeded coverage experiment. Per trial: sample one model per episode from
 * true_mu, roll episodes with uniformly random actions and start states,
 * estimate a model per episode (uniform fallback for unvisited rows), set
 * per-state radii from the schedule and the per-state transition counts,
 * train a policy by DR policy iteration under the l1 ground norm, then
 * compare its DR-value certificate against the exact mixture performance.
 * Trials run in parallel over `threads` workers; trial t draws every sample
 * from the substream (seed, t), so the report is identical for any thread
 * count.
 *
 * \throws parameter_error on trials < 1, empty episodes or a schedule whose
 *         m does not equal |S|·|A|
 */
OosReport oos_experiment(const DiscreteModelDistribution& true_mu, const TabularMdp& mdp,
                         const RadiusSchedule& schedule, long n_episodes,
                         long episode_len, long trials, uint64_t seed,
                         long threads = 1);

} // namespace wdr
