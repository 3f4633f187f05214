#include "wdr/estimation.hpp"

#include <cassert>
#include <string>

namespace wdr {

CountTensor count_transitions(const EpisodeLog& log, const TabularMdp& dims) {
    CountTensor out;
    out.num_states = dims.num_states;
    out.num_actions = dims.num_actions;
    out.counts.assign(
        static_cast<size_t>(dims.num_states) * dims.num_actions * dims.num_states, 0);
    for (size_t k = 0; k < log.transitions.size(); ++k) {
        const auto& t = log.transitions[k];
        if (t.s < 0 || t.s >= dims.num_states)
            throw structural_error("episode " + std::to_string(log.episode_id) +
                                   " transition " + std::to_string(k) +
                                   ": state index " + std::to_string(t.s) +
                                   " out of range");
        if (t.a < 0 || t.a >= dims.num_actions)
            throw structural_error("episode " + std::to_string(log.episode_id) +
                                   " transition " + std::to_string(k) +
                                   ": action index " + std::to_string(t.a) +
                                   " out of range");
        if (t.s_next < 0 || t.s_next >= dims.num_states)
            throw structural_error("episode " + std::to_string(log.episode_id) +
                                   " transition " + std::to_string(k) +
                                   ": successor index " + std::to_string(t.s_next) +
                                   " out of range");
        ++out.counts[out.flat(t.s, t.a, t.s_next)];
    }
    return out;
}

CountTensor merge_counts(const CountTensor& a, const CountTensor& b) {
    if (a.num_states != b.num_states || a.num_actions != b.num_actions)
        throw structural_error("count tensors disagree on dimensions");
    CountTensor out = a;
    for (size_t i = 0; i < out.counts.size(); ++i)
        out.counts[i] += b.counts[i];
    return out;
}

TransitionModel estimate_tabular(const CountTensor& counts,
                                 const TransitionModel& fallback) {
    if (fallback.num_states != counts.num_states ||
        fallback.num_actions != counts.num_actions)
        throw structural_error("fallback model dimensions do not match the counts");
    TransitionModel out;
    out.num_states = counts.num_states;
    out.num_actions = counts.num_actions;
    out.probs.assign(fallback.probs.size(), 0.0);
    for (long s = 0; s < counts.num_states; ++s) {
        for (long a = 0; a < counts.num_actions; ++a) {
            long total = 0;
            for (long sn = 0; sn < counts.num_states; ++sn)
                total += counts.at(s, a, sn);
            prec_t* row = out.row(s, a);
            if (total == 0) {
                const prec_t* frow = fallback.row(s, a);
                for (long sn = 0; sn < counts.num_states; ++sn)
                    row[sn] = frow[sn];
            } else {
                for (long sn = 0; sn < counts.num_states; ++sn)
                    row[sn] = static_cast<prec_t>(counts.at(s, a, sn)) /
                              static_cast<prec_t>(total);
            }
        }
    }
    return out;
}

TransitionModel estimate_kernel(const CountTensor& counts, const KernelSpec& kernel,
                                const TransitionModel& fallback) {
    if (kernel.num_states != counts.num_states ||
        kernel.num_actions != counts.num_actions)
        throw structural_error("kernel dimensions do not match the counts");
    if (fallback.num_states != counts.num_states ||
        fallback.num_actions != counts.num_actions)
        throw structural_error("fallback model dimensions do not match the counts");
    for (prec_t w : kernel.weights)
        if (w < 0.0)
            throw parameter_error("kernel weights must be nonnegative");

    TransitionModel out;
    out.num_states = counts.num_states;
    out.num_actions = counts.num_actions;
    out.probs.assign(fallback.probs.size(), 0.0);
    for (long s = 0; s < counts.num_states; ++s) {
        for (long a = 0; a < counts.num_actions; ++a) {
            prec_t denom = 0.0;
            for (long sn = 0; sn < counts.num_states; ++sn)
                denom += kernel.at(a, s, sn) * static_cast<prec_t>(counts.at(s, a, sn));
            prec_t* row = out.row(s, a);
            if (denom <= 0.0) {
                const prec_t* frow = fallback.row(s, a);
                for (long sn = 0; sn < counts.num_states; ++sn)
                    row[sn] = frow[sn];
            } else {
                for (long sn = 0; sn < counts.num_states; ++sn)
                    row[sn] = kernel.at(a, s, sn) *
                              static_cast<prec_t>(counts.at(s, a, sn)) / denom;
            }
        }
    }
    return out;
}

std::vector<long> per_state_sample_counts(const std::vector<CountTensor>& counts) {
    if (counts.empty()) return {};
    const long ns = counts.front().num_states;
    std::vector<long> out(static_cast<size_t>(ns), 0);
    for (const auto& c : counts) {
        if (c.num_states != ns || c.num_actions != counts.front().num_actions)
            throw structural_error("count tensors disagree on dimensions");
        for (long s = 0; s < ns; ++s) {
            long total = 0;
            for (long a = 0; a < c.num_actions; ++a)
                for (long sn = 0; sn < ns; ++sn)
                    total += c.at(s, a, sn);
            out[static_cast<size_t>(s)] += total;
        }
    }
    return out;
}

} // namespace wdr
