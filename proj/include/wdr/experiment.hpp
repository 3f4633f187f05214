// Experiment orchestration: JSON config loading and validation, the four
// experiment runners (sandwich, approx, oos, robust-vi), deterministic
// JSON-lines result emission with an optional CSV projection, and episode
// CSV ingestion.
#pragma once

#include "wdr/estimation.hpp"
#include "wdr/guarantees.hpp"
#include "wdr/linear_approx.hpp"
#include "wdr/regularization.hpp"

#include <iosfwd>
#include <string>

namespace wdr {

/// Parsed and partially defaulted experiment description. validate() checks
/// cross-field consistency; every error names the offending config field.
struct ExperimentConfig {
    std::string kind; // sandwich | approx | oos | robust-vi
    uint64_t seed = 1;
    std::string out_path;
    std::string csv_path;
    prec_t tol = 1e-9;
    long threads = 1;

    TabularMdp mdp;
    GroundNorm norm = GroundNorm::L1_PRODUCT;

    bool has_policy = false;
    Policy policy;

    std::vector<TransitionModel> atoms; // explicit empirical atoms
    long random_atoms = 0;              // or: sample this many..
    uint64_t atoms_seed = 0;            // ..with this seed

    numvec alpha_grid;
    numvec lambda_grid;      // empty -> default {0, L}
    numvec oracle_fractions; // structured support grid resolution
    std::vector<long> report_states; // empty -> all states
    long csv_state = 0;

    std::vector<numvec> feature_rows; // approx: phi[s][k]

    RadiusSchedule schedule{2.0, 2.0, 0.5, 0.1, 0};
    DiscreteModelDistribution true_mu;
    long n_episodes = 0;
    long episode_len = 0;
    long trials = 0;
    prec_t min_coverage = 0.0;

    prec_t robust_radius = 0.0;
    RowNorm robust_norm = RowNorm::L1;

    std::string digest; // FNV-1a of the config file bytes
};

/// Parses the config file. Parse failures and type errors surface as
/// parameter_error with the config line number.
ExperimentConfig load_config(const std::string& path);

/// \throws parameter_error naming the offending field
void validate(const ExperimentConfig& cfg);

/**
 * Runs the configured experiment, appending one JSON record per line to
 * cfg.out_path (and the alpha-sweep CSV projection to cfg.csv_path when
 * set). Progress and wall-clock timing go to log only, so the result files
 * are byte-identical across re-runs. Returns 0 iff every asserted invariant
 * passed.
 */
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

/**
 * Reads an episode CSV with header `episode,s,a,s_next` into per-episode
 * logs, ascending by episode id.
 *
 * \throws parameter_error on a malformed row (with its row number),
 *         structural_error on an out-of-range index (naming the index)
 */
std::vector<EpisodeLog> ingest_episodes(const std::string& csv_path,
                                        const TabularMdp& dims);

/// 16-hex-digit FNV-1a digest of a byte string.
std::string fnv1a_digest(const std::string& bytes);

/// Serializes the MDP in the config file's "mdp" section schema.
std::string write_mdp_spec(const TabularMdp& mdp);

/// Parses text produced by write_mdp_spec; the pair round-trips exactly.
/// \throws parameter_error on parse or schema errors
TabularMdp read_mdp_spec(const std::string& text);

} // namespace wdr
