// Per-episode transition-model estimation from logged transitions: visit
// counts, tabular and kernel-weighted row estimates, per-state sample counts.
#pragma once

#include "wdr/mdp.hpp"

namespace wdr {

/// One logged transition.
struct LoggedTransition {
    long s;
    long a;
    long s_next;
};

/// Ordered transitions of one episode.
struct EpisodeLog {
    long episode_id;
    std::vector<LoggedTransition> transitions;
};

/// Dense visit-count tensor n(s,a,s') for one episode (or a merged batch).
struct CountTensor {
    long num_states;
    long num_actions;
    std::vector<long> counts;

    size_t flat(long s, long a, long sn) const {
        return static_cast<size_t>((s * num_actions + a) * num_states + sn);
    }
    long at(long s, long a, long sn) const { return counts[flat(s, a, sn)]; }
};

/// Successor-weighting kernel psi_a(s, s'); all weights nonnegative.
struct KernelSpec {
    long num_states;
    long num_actions;
    numvec weights; // (a, s, s') -> psi_a(s, s')

    prec_t at(long a, long s, long sn) const {
        return weights[static_cast<size_t>((a * num_states + s) * num_states + sn)];
    }
};

/// Tallies the log into a count tensor.
/// \throws structural_error on an out-of-range index, naming it
CountTensor count_transitions(const EpisodeLog& log, const TabularMdp& dims);

/// Elementwise sum of two count tensors.
CountTensor merge_counts(const CountTensor& a, const CountTensor& b);

/**
 * Tabular row estimate p(s'|s,a) = n(s,a,s') / sum_s'' n(s,a,s'').
 * Rows with zero total count copy the fallback row, which keeps every
 * estimate a valid transition model.
 */
TransitionModel estimate_tabular(const CountTensor& counts,
                                 const TransitionModel& fallback);

/**
 * Kernel-weighted row estimate
 * p(s'|s,a) = psi_a(s,s') n(s,a,s') / sum_s'' psi_a(s,s'') n(s,a,s'').
 * Zero-denominator rows copy the fallback row. The uniform kernel reproduces
 * estimate_tabular exactly.
 *
 * \throws parameter_error on a negative kernel weight
 */
TransitionModel estimate_kernel(const CountTensor& counts, const KernelSpec& kernel,
                                const TransitionModel& fallback);

/// n_s = total transitions observed out of state s across all tensors.
std::vector<long> per_state_sample_counts(const std::vector<CountTensor>& counts);

} // namespace wdr
