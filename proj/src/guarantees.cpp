#include "wdr/guarantees.hpp"

#include "wdr/estimation.hpp"
#include "wdr/rng.hpp"
#include "wdr/robust_dp.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace wdr {

prec_t RadiusSchedule::threshold() const { return std::log(c1 / epsilon) / c2; }

void validate(const RadiusSchedule& schedule) {
    if (!(schedule.c0 > 0.0)) throw parameter_error("schedule constant c0 must be positive");
    if (!(schedule.c1 > 0.0)) throw parameter_error("schedule constant c1 must be positive");
    if (!(schedule.c2 > 0.0)) throw parameter_error("schedule constant c2 must be positive");
    if (!(schedule.epsilon > 0.0) || !(schedule.epsilon < 1.0))
        throw parameter_error("epsilon must lie in (0, 1)");
    if (schedule.m < 1) throw parameter_error("dimension parameter m must be positive");
    if (schedule.m == 2)
        throw parameter_error("dimension parameter m = 2 is unsupported");
}

prec_t radius(const RadiusSchedule& schedule, long n_s) {
    validate(schedule);
    if (n_s < 0) throw parameter_error("sample count must be nonnegative");
    const prec_t logterm = std::log(schedule.c1 / schedule.epsilon);
    const prec_t thresh = logterm / schedule.c2;
    if (static_cast<prec_t>(n_s) < thresh) return schedule.c0;
    const prec_t inner = logterm / (static_cast<prec_t>(n_s) * schedule.c2);
    const prec_t expo = 1.0 / static_cast<prec_t>(std::max<long>(schedule.m, 2));
    return schedule.c0 * std::pow(inner, expo);
}

std::pair<prec_t, prec_t> wilson_interval(long covered, long trials, prec_t z) {
    if (trials < 1) throw parameter_error("trials must be positive");
    if (covered < 0 || covered > trials)
        throw parameter_error("covered count out of range");
    const prec_t t = static_cast<prec_t>(trials);
    const prec_t p = static_cast<prec_t>(covered) / t;
    const prec_t z2 = z * z;
    const prec_t denom = 1.0 + z2 / t;
    const prec_t center = (p + z2 / (2.0 * t)) / denom;
    const prec_t half =
        z * std::sqrt(p * (1.0 - p) / t + z2 / (4.0 * t * t)) / denom;
    return {std::max(center - half, 0.0), std::min(center + half, 1.0)};
}

namespace {

OosTrialResult run_trial(const DiscreteModelDistribution& true_mu, const TabularMdp& mdp,
                         const RadiusSchedule& schedule, long n_episodes,
                         long episode_len, uint64_t seed, long trial) {
    Rng rng = Rng::substream(seed, static_cast<uint64_t>(trial));
    const long S = mdp.num_states;
    const long A = mdp.num_actions;
    const TransitionModel fallback = uniform_model(S, A);

    std::vector<CountTensor> tensors;
    std::vector<TransitionModel> estimates;
    tensors.reserve(static_cast<size_t>(n_episodes));
    estimates.reserve(static_cast<size_t>(n_episodes));
    for (long e = 0; e < n_episodes; ++e) {
        const size_t j = rng.categorical(true_mu.weights);
        const TransitionModel& model = true_mu.atoms[j];
        EpisodeLog log;
        log.episode_id = e;
        long s = static_cast<long>(rng.uniform_index(static_cast<size_t>(S)));
        for (long t = 0; t < episode_len; ++t) {
            const long a = static_cast<long>(rng.uniform_index(static_cast<size_t>(A)));
            const numvec row = model.row_copy(s, a);
            const long sn = static_cast<long>(rng.categorical(row));
            log.transitions.push_back({s, a, sn});
            s = sn;
        }
        CountTensor counts = count_transitions(log, mdp);
        estimates.push_back(estimate_tabular(counts, fallback));
        tensors.push_back(std::move(counts));
    }

    const std::vector<long> n_s = per_state_sample_counts(tensors);
    numvec alpha_s(static_cast<size_t>(S));
    for (long s = 0; s < S; ++s)
        alpha_s[static_cast<size_t>(s)] = radius(schedule, n_s[static_cast<size_t>(s)]);
    const AmbiguitySpec spec{GroundNorm::L1_PRODUCT, aggregate_radius(alpha_s), alpha_s};
    const EmpiricalDistribution emp = build_empirical(std::move(estimates));

    auto [certificate, pi] = dr_policy_iteration(mdp, emp, spec, 1e-8);

    ValueTable true_perf(static_cast<size_t>(S), 0.0);
    for (size_t j = 0; j < true_mu.atoms.size(); ++j) {
        const ValueTable vj = evaluate_policy_direct(mdp, true_mu.atoms[j], pi);
        for (size_t s = 0; s < true_perf.size(); ++s)
            true_perf[s] += true_mu.weights[j] * vj[s];
    }

    OosTrialResult r;
    r.trial_id = trial;
    r.certificate = std::move(certificate);
    r.true_performance = std::move(true_perf);
    r.policy = pi.action;
    prec_t worst = 0.0;
    for (size_t s = 0; s < r.certificate.size(); ++s)
        worst = std::min(worst, r.true_performance[s] - r.certificate[s]);
    r.covered = worst >= -1e-9;
    return r;
}

} // namespace

OosReport oos_experiment(const DiscreteModelDistribution& true_mu, const TabularMdp& mdp,
                         const RadiusSchedule& schedule, long n_episodes,
                         long episode_len, long trials, uint64_t seed, long threads) {
    validate(mdp);
    validate(true_mu);
    for (const auto& atom : true_mu.atoms) validate(atom, mdp);
    validate(schedule);
    if (schedule.m != mdp.num_states * mdp.num_actions)
        throw parameter_error("schedule dimension m must equal |S|*|A|");
    if (trials < 1) throw parameter_error("trials must be positive");
    if (n_episodes < 1) throw parameter_error("n_episodes must be positive");
    if (episode_len < 1) throw parameter_error("episode_len must be positive");

    OosReport report;
    report.trials = trials;
    report.results.resize(static_cast<size_t>(trials));

    const long nthreads = std::max<long>(1, std::min<long>(threads, trials));
    std::atomic<long> next{0};
    auto worker = [&]() {
        while (true) {
            const long t = next.fetch_add(1);
            if (t >= trials) break;
            report.results[static_cast<size_t>(t)] =
                run_trial(true_mu, mdp, schedule, n_episodes, episode_len, seed, t);
        }
    };
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (long k = 0; k < nthreads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    report.covered_count = 0;
    for (const auto& r : report.results)
        if (r.covered) ++report.covered_count;
    report.coverage =
        static_cast<prec_t>(report.covered_count) / static_cast<prec_t>(trials);
    auto [lo, hi] = wilson_interval(report.covered_count, trials);
    report.wilson_lo = lo;
    report.wilson_hi = hi;
    return report;
}

} // namespace wdr
