// Command line front end: `run` executes a configured experiment, `validate`
// checks a config without running it, `ingest` summarizes an episode CSV.
#include "wdr/experiment.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Wasserstein distributionally robust MDP experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::string csv_override;
    long seed_override = -1;
    long threads_override = 0;

    CLI::App* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("config", config_path, "JSON experiment config")->required();
    run->add_option("--out", out_override, "override the JSONL output path");
    run->add_option("--csv-out", csv_override, "override the CSV output path");
    run->add_option("--seed", seed_override, "override the config seed");
    run->add_option("--threads", threads_override, "override the worker count");

    CLI::App* check = app.add_subcommand("validate", "check a config and exit");
    check->add_option("config", config_path, "JSON experiment config")->required();

    std::string episodes_path;
    std::string dims;
    CLI::App* ingest = app.add_subcommand("ingest", "summarize an episode CSV");
    ingest->add_option("episodes", episodes_path, "episode CSV with header episode,s,a,s_next")
        ->required();
    ingest->add_option("--dims", dims, "state and action counts as SxA")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) {
            const size_t x = dims.find('x');
            long S = 0, A = 0;
            try {
                if (x == std::string::npos) throw std::invalid_argument("missing x");
                S = std::stol(dims.substr(0, x));
                A = std::stol(dims.substr(x + 1));
            } catch (const std::exception&) {
                throw wdr::parameter_error("--dims must look like 3x2");
            }
            if (S < 1 || A < 1)
                throw wdr::parameter_error("--dims entries must be positive");
            wdr::TabularMdp shell;
            shell.num_states = S;
            shell.num_actions = A;
            shell.rewards.assign(static_cast<size_t>(S) * A, 0.0);
            shell.discount = 0.0;
            shell.r_max = 1.0;
            const auto logs = wdr::ingest_episodes(episodes_path, shell);
            wdr::CountTensor counts;
            counts.num_states = S;
            counts.num_actions = A;
            counts.counts.assign(static_cast<size_t>(S) * A * S, 0);
            for (const auto& lg : logs)
                counts = wdr::merge_counts(counts, wdr::count_transitions(lg, shell));
            long total = 0;
            for (long c : counts.counts) total += c;
            std::cout << "episodes: " << logs.size() << "\n"
                      << "transitions: " << total << "\n";
            for (long s = 0; s < S; ++s) {
                long per_state = 0;
                for (long a = 0; a < A; ++a)
                    for (long sn = 0; sn < S; ++sn)
                        per_state += counts.at(s, a, sn);
                std::cout << "state " << s << ": " << per_state << " samples\n";
            }
            return 0;
        }

        wdr::ExperimentConfig cfg = wdr::load_config(config_path);
        if (!out_override.empty()) cfg.out_path = out_override;
        if (!csv_override.empty()) cfg.csv_path = csv_override;
        if (seed_override >= 0) cfg.seed = static_cast<uint64_t>(seed_override);
        if (threads_override > 0) cfg.threads = threads_override;

        if (check->parsed()) {
            wdr::validate(cfg);
            wdr::validate(cfg.mdp);
            std::cout << "config ok (digest " << cfg.digest << ")\n";
            return 0;
        }
        return wdr::run_experiment(cfg, std::cout);
    } catch (const wdr::parameter_error& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const wdr::structural_error& e) {
        std::cerr << "structural error: " << e.what() << "\n";
        return 4;
    } catch (const wdr::size_guard_error& e) {
        std::cerr << "size guard: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
