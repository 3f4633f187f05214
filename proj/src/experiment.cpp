#include "wdr/experiment.hpp"

#include "wdr/oracles.hpp"
#include "wdr/rng.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace wdr {

using nlohmann::json;

std::string fnv1a_digest(const std::string& bytes) {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// config loading

namespace {

long line_of_byte(const std::string& text, size_t byte) {
    long line = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
    throw parameter_error("config field " + field + " " + what);
}

const json& require(const json& j, const std::string& key, const std::string& prefix) {
    auto it = j.find(key);
    if (it == j.end()) field_error(prefix + key, "is missing");
    return *it;
}

prec_t as_num(const json& j, const std::string& field) {
    if (!j.is_number()) field_error(field, "must be a number");
    return j.get<prec_t>();
}

long as_int(const json& j, const std::string& field) {
    if (!j.is_number_integer()) field_error(field, "must be an integer");
    return j.get<long>();
}

std::string as_str(const json& j, const std::string& field) {
    if (!j.is_string()) field_error(field, "must be a string");
    return j.get<std::string>();
}

numvec as_numvec(const json& j, const std::string& field) {
    if (!j.is_array()) field_error(field, "must be an array of numbers");
    numvec out;
    for (const auto& x : j) out.push_back(as_num(x, field));
    return out;
}

GroundNorm parse_norm(const std::string& s, const std::string& field) {
    if (s == "l1_product") return GroundNorm::L1_PRODUCT;
    if (s == "l2_product") return GroundNorm::L2_PRODUCT;
    if (s == "sup_one") return GroundNorm::SUP_ONE;
    field_error(field, "must be one of l1_product, l2_product, sup_one");
}

TabularMdp parse_mdp_section(const json& jm) {
    TabularMdp m;
    m.num_states = as_int(require(jm, "num_states", "mdp."), "mdp.num_states");
    m.num_actions = as_int(require(jm, "num_actions", "mdp."), "mdp.num_actions");
    m.discount = as_num(require(jm, "discount", "mdp."), "mdp.discount");
    m.r_max = as_num(require(jm, "r_max", "mdp."), "mdp.r_max");
    const json& jr = require(jm, "rewards", "mdp.");
    if (!jr.is_array() || static_cast<long>(jr.size()) != m.num_states)
        field_error("mdp.rewards", "must be an array of |S| rows");
    for (const auto& row : jr) {
        const numvec r = as_numvec(row, "mdp.rewards");
        if (static_cast<long>(r.size()) != m.num_actions)
            field_error("mdp.rewards", "rows must have |A| entries");
        m.rewards.insert(m.rewards.end(), r.begin(), r.end());
    }
    return m;
}

TransitionModel parse_model(const json& j, long S, long A, const std::string& field) {
    if (!j.is_array() || static_cast<long>(j.size()) != S)
        field_error(field, "must be an array of |S| per-state blocks");
    TransitionModel m;
    m.num_states = S;
    m.num_actions = A;
    m.probs.assign(static_cast<size_t>(S) * A * S, 0.0);
    for (long s = 0; s < S; ++s) {
        const json& block = j[static_cast<size_t>(s)];
        if (!block.is_array() || static_cast<long>(block.size()) != A)
            field_error(field, "state block must hold |A| rows");
        for (long a = 0; a < A; ++a) {
            const numvec row = as_numvec(block[static_cast<size_t>(a)], field);
            if (static_cast<long>(row.size()) != S)
                field_error(field, "rows must have |S| entries");
            prec_t* dst = m.row(s, a);
            for (long sn = 0; sn < S; ++sn) dst[sn] = row[static_cast<size_t>(sn)];
        }
    }
    return m;
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parameter_error("cannot open config file " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw parameter_error("config parse error at line " +
                              std::to_string(line_of_byte(text, e.byte)) + ": " +
                              e.what());
    }
    if (!j.is_object()) throw parameter_error("config root must be an object");

    ExperimentConfig cfg;
    cfg.digest = fnv1a_digest(text);
    cfg.kind = as_str(require(j, "experiment", ""), "experiment");
    if (j.contains("seed")) cfg.seed = static_cast<uint64_t>(as_int(j["seed"], "seed"));
    if (j.contains("out")) cfg.out_path = as_str(j["out"], "out");
    if (j.contains("csv_out")) cfg.csv_path = as_str(j["csv_out"], "csv_out");
    if (j.contains("tol")) cfg.tol = as_num(j["tol"], "tol");
    if (j.contains("threads")) cfg.threads = as_int(j["threads"], "threads");

    cfg.mdp = parse_mdp_section(require(j, "mdp", ""));

    if (j.contains("ground_norm"))
        cfg.norm = parse_norm(as_str(j["ground_norm"], "ground_norm"), "ground_norm");

    if (j.contains("policy")) {
        const json& jp = j["policy"];
        if (!jp.is_array()) field_error("policy", "must be an array of action indices");
        for (const auto& a : jp) cfg.policy.action.push_back(as_int(a, "policy"));
        cfg.has_policy = true;
    }

    if (j.contains("atoms")) {
        const json& ja = j["atoms"];
        if (!ja.is_array()) field_error("atoms", "must be an array of transition models");
        for (size_t i = 0; i < ja.size(); ++i)
            cfg.atoms.push_back(parse_model(ja[i], cfg.mdp.num_states,
                                            cfg.mdp.num_actions,
                                            "atoms[" + std::to_string(i) + "]"));
    }
    if (j.contains("random_atoms")) {
        const json& jra = j["random_atoms"];
        cfg.random_atoms = as_int(require(jra, "count", "random_atoms."),
                                  "random_atoms.count");
        cfg.atoms_seed = static_cast<uint64_t>(
            as_int(require(jra, "seed", "random_atoms."), "random_atoms.seed"));
    }

    if (j.contains("alpha_grid")) cfg.alpha_grid = as_numvec(j["alpha_grid"], "alpha_grid");
    if (j.contains("lambda_grid"))
        cfg.lambda_grid = as_numvec(j["lambda_grid"], "lambda_grid");
    cfg.oracle_fractions = {0.25, 0.5, 1.0};
    if (j.contains("oracle")) {
        const json& jo = j["oracle"];
        if (jo.contains("fractions"))
            cfg.oracle_fractions = as_numvec(jo["fractions"], "oracle.fractions");
    }
    if (j.contains("states")) {
        const json& js = j["states"];
        if (!js.is_array()) field_error("states", "must be an array of state indices");
        for (const auto& s : js) cfg.report_states.push_back(as_int(s, "states"));
    }
    if (j.contains("csv_state")) cfg.csv_state = as_int(j["csv_state"], "csv_state");

    if (j.contains("features")) {
        const json& jf = j["features"];
        if (!jf.is_array()) field_error("features", "must be an array of rows");
        for (const auto& row : jf) cfg.feature_rows.push_back(as_numvec(row, "features"));
    }

    if (j.contains("schedule")) {
        const json& js = j["schedule"];
        cfg.schedule.c0 = as_num(require(js, "c0", "schedule."), "schedule.c0");
        cfg.schedule.c1 = as_num(require(js, "c1", "schedule."), "schedule.c1");
        cfg.schedule.c2 = as_num(require(js, "c2", "schedule."), "schedule.c2");
    }
    if (j.contains("epsilon")) cfg.schedule.epsilon = as_num(j["epsilon"], "epsilon");
    cfg.schedule.m = cfg.mdp.num_states * cfg.mdp.num_actions;

    if (j.contains("true_mu")) {
        const json& jt = j["true_mu"];
        cfg.true_mu.weights = as_numvec(require(jt, "weights", "true_mu."),
                                        "true_mu.weights");
        const json& ja = require(jt, "atoms", "true_mu.");
        if (!ja.is_array()) field_error("true_mu.atoms", "must be an array");
        for (size_t i = 0; i < ja.size(); ++i)
            cfg.true_mu.atoms.push_back(
                parse_model(ja[i], cfg.mdp.num_states, cfg.mdp.num_actions,
                            "true_mu.atoms[" + std::to_string(i) + "]"));
    }
    if (j.contains("oos")) {
        const json& jo = j["oos"];
        cfg.n_episodes = as_int(require(jo, "n_episodes", "oos."), "oos.n_episodes");
        cfg.episode_len = as_int(require(jo, "episode_len", "oos."), "oos.episode_len");
        cfg.trials = as_int(require(jo, "trials", "oos."), "oos.trials");
    }
    if (j.contains("min_coverage"))
        cfg.min_coverage = as_num(j["min_coverage"], "min_coverage");

    if (j.contains("robust")) {
        const json& jr = j["robust"];
        cfg.robust_radius = as_num(require(jr, "radius", "robust."), "robust.radius");
        if (jr.contains("row_norm")) {
            const std::string rn = as_str(jr["row_norm"], "robust.row_norm");
            if (rn == "l1")
                cfg.robust_norm = RowNorm::L1;
            else if (rn == "l2")
                cfg.robust_norm = RowNorm::L2;
            else
                field_error("robust.row_norm", "must be l1 or l2");
        }
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// validation

void validate(const ExperimentConfig& cfg) {
    if (cfg.kind != "sandwich" && cfg.kind != "approx" && cfg.kind != "oos" &&
        cfg.kind != "robust-vi")
        field_error("experiment", "must be one of sandwich, approx, oos, robust-vi");
    if (cfg.mdp.num_states < 1) field_error("mdp.num_states", "must be positive");
    if (cfg.mdp.num_actions < 1) field_error("mdp.num_actions", "must be positive");
    if (!(cfg.mdp.discount >= 0.0) || cfg.mdp.discount >= 1.0)
        field_error("mdp.discount", "must lie in [0, 1)");
    if (!(cfg.mdp.r_max > 0.0)) field_error("mdp.r_max", "must be positive");
    for (prec_t r : cfg.mdp.rewards)
        if (std::abs(r) > cfg.mdp.r_max)
            field_error("mdp.rewards", "entries must be bounded by r_max");
    if (!(cfg.tol > 0.0)) field_error("tol", "must be positive");
    if (cfg.threads < 1) field_error("threads", "must be positive");
    if (cfg.out_path.empty()) field_error("out", "is missing");

    const long S = cfg.mdp.num_states;
    const long A = cfg.mdp.num_actions;
    auto check_states = [&](const std::vector<long>& states, const char* field) {
        for (long s : states)
            if (s < 0 || s >= S) field_error(field, "holds an out-of-range state index");
    };

    if (cfg.kind == "sandwich" || cfg.kind == "approx") {
        if (!cfg.has_policy) field_error("policy", "is missing");
        if (static_cast<long>(cfg.policy.action.size()) != S)
            field_error("policy", "must list one action per state");
        for (long a : cfg.policy.action)
            if (a < 0 || a >= A) field_error("policy", "holds an out-of-range action");
        if (cfg.atoms.empty() && cfg.random_atoms < 1)
            field_error("atoms", "or random_atoms.count is required");
        for (size_t i = 0; i < cfg.atoms.size(); ++i) {
            try {
                validate(cfg.atoms[i], cfg.mdp, 1e-9);
            } catch (const std::exception& e) {
                field_error("atoms[" + std::to_string(i) + "]", e.what());
            }
        }
        if (cfg.alpha_grid.empty()) field_error("alpha_grid", "is missing");
        for (size_t k = 0; k < cfg.alpha_grid.size(); ++k) {
            if (cfg.alpha_grid[k] < 0.0)
                field_error("alpha_grid", "entries must be nonnegative");
            if (k > 0 && cfg.alpha_grid[k] < cfg.alpha_grid[k - 1])
                field_error("alpha_grid", "must be sorted ascending");
        }
        if (cfg.oracle_fractions.empty())
            field_error("oracle.fractions", "must be nonempty");
        for (prec_t f : cfg.oracle_fractions)
            if (f < 0.0 || f > 1.0)
                field_error("oracle.fractions", "entries must lie in [0, 1]");
        check_states(cfg.report_states, "states");
        if (cfg.csv_state < 0 || cfg.csv_state >= S)
            field_error("csv_state", "is out of range");
        for (size_t k = 1; k < cfg.lambda_grid.size(); ++k)
            if (cfg.lambda_grid[k] < cfg.lambda_grid[k - 1])
                field_error("lambda_grid", "must be sorted ascending");
        if (!cfg.lambda_grid.empty() && cfg.lambda_grid.front() < 0.0)
            field_error("lambda_grid", "entries must be nonnegative");
    }
    if (cfg.kind == "approx") {
        if (cfg.feature_rows.empty()) field_error("features", "is missing");
        if (static_cast<long>(cfg.feature_rows.size()) != S)
            field_error("features", "must have one row per state");
        const size_t m = cfg.feature_rows.front().size();
        if (m < 1) field_error("features", "rows must be nonempty");
        for (const auto& row : cfg.feature_rows)
            if (row.size() != m) field_error("features", "rows must share one length");
    }
    if (cfg.kind == "oos") {
        if (cfg.true_mu.atoms.empty()) field_error("true_mu", "is missing");
        try {
            validate(cfg.true_mu);
            for (const auto& atom : cfg.true_mu.atoms) validate(atom, cfg.mdp, 1e-9);
        } catch (const std::exception& e) {
            field_error("true_mu", e.what());
        }
        if (cfg.trials < 1) field_error("oos.trials", "must be positive");
        if (cfg.n_episodes < 1) field_error("oos.n_episodes", "must be positive");
        if (cfg.episode_len < 1) field_error("oos.episode_len", "must be positive");
        try {
            validate(cfg.schedule);
        } catch (const std::exception& e) {
            field_error("schedule", e.what());
        }
        if (cfg.min_coverage < 0.0 || cfg.min_coverage > 1.0)
            field_error("min_coverage", "must lie in [0, 1]");
    }
    if (cfg.kind == "robust-vi") {
        if (cfg.atoms.empty() && cfg.random_atoms < 1)
            field_error("atoms", "or random_atoms.count is required");
        if (cfg.robust_radius < 0.0) field_error("robust.radius", "must be nonnegative");
    }
}

// ---------------------------------------------------------------------------
// serialization helpers

namespace {

std::string fmt(prec_t x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_vec(const numvec& v) {
    std::string out = "[";
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += fmt(v[i]);
    }
    return out + "]";
}

std::string fmt_ivec(const indvec& v) {
    std::string out = "[";
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out + "]";
}

const char* fmt_bool(bool b) { return b ? "true" : "false"; }

const char* norm_name(GroundNorm n) {
    switch (n) {
    case GroundNorm::L1_PRODUCT: return "l1_product";
    case GroundNorm::L2_PRODUCT: return "l2_product";
    default: return "sup_one";
    }
}

void write_header(std::ofstream& out, const ExperimentConfig& cfg) {
    out << "{\"record\":\"run_header\",\"experiment\":\"" << cfg.kind
        << "\",\"digest\":\"" << cfg.digest << "\",\"seed\":" << cfg.seed
        << ",\"ground_norm\":\"" << norm_name(cfg.norm) << "\""
        << ",\"metadata\":{"
        << "\"aggregate_radius\":\"sum of per-state radii\","
        << "\"lambda_search\":\"grid plus golden-section within the grid span\","
        << "\"simulation_lemma_norm\":\"max over states\","
        << "\"oos_policy\":\"trained on trial data, then evaluated\","
        << "\"weight_fit\":\"least-squares projection of exact values\"}}\n";
}

std::vector<TransitionModel> build_atoms(const ExperimentConfig& cfg) {
    if (!cfg.atoms.empty()) return cfg.atoms;
    std::vector<TransitionModel> atoms;
    Rng rng = Rng::substream(cfg.atoms_seed, 0xA70345ULL);
    const long S = cfg.mdp.num_states, A = cfg.mdp.num_actions;
    for (long i = 0; i < cfg.random_atoms; ++i) {
        TransitionModel m;
        m.num_states = S;
        m.num_actions = A;
        m.probs.reserve(static_cast<size_t>(S) * A * S);
        for (long s = 0; s < S; ++s)
            for (long a = 0; a < A; ++a) {
                const numvec row = rng.dirichlet(static_cast<size_t>(S));
                m.probs.insert(m.probs.end(), row.begin(), row.end());
            }
        atoms.push_back(std::move(m));
    }
    return atoms;
}

std::vector<long> states_to_report(const ExperimentConfig& cfg) {
    if (!cfg.report_states.empty()) return cfg.report_states;
    std::vector<long> all(static_cast<size_t>(cfg.mdp.num_states));
    for (long s = 0; s < cfg.mdp.num_states; ++s) all[static_cast<size_t>(s)] = s;
    return all;
}

int run_sandwich(const ExperimentConfig& cfg, std::ofstream& out, std::ostream& log) {
    const EmpiricalDistribution emp = build_empirical(build_atoms(cfg));
    const Policy& pi = cfg.policy;
    const auto grid =
        single_row_perturbation_grid(emp, cfg.mdp, pi, cfg.oracle_fractions);
    const numvec lgrid = cfg.lambda_grid.empty()
                             ? default_lambda_grid(cfg.mdp, cfg.norm)
                             : cfg.lambda_grid;
    const std::vector<long> states = states_to_report(cfg);

    std::ofstream csv;
    if (!cfg.csv_path.empty()) {
        csv.open(cfg.csv_path, std::ios::binary);
        if (!csv) throw parameter_error("cannot open csv_out path " + cfg.csv_path);
        csv << "alpha,empirical_mean,dr_lower,dr_upper,reg_value\n";
    }

    bool all_pass = true;
    for (prec_t alpha : cfg.alpha_grid) {
        const AmbiguitySpec spec{
            cfg.norm, alpha,
            numvec(static_cast<size_t>(cfg.mdp.num_states), alpha)};
        for (long s : states) {
            const SandwichReport r = sandwich_check(cfg.mdp, pi, emp, spec, s, grid, lgrid);
            all_pass = all_pass && r.pass;
            out << "{\"record\":\"sandwich_report\",\"alpha\":" << fmt(r.alpha)
                << ",\"state\":" << r.state << ",\"empirical_mean\":"
                << fmt(r.empirical_mean) << ",\"dr_lower\":" << fmt(r.dr_lower)
                << ",\"dr_upper\":" << fmt(r.dr_upper) << ",\"reg_value\":"
                << fmt(r.reg_value) << ",\"l_value\":" << fmt(r.l_value)
                << ",\"kappa_estimate\":" << fmt(r.kappa_estimate) << ",\"pass\":"
                << fmt_bool(r.pass) << ",\"vacuous\":" << fmt_bool(r.vacuous) << "}\n";
            if (csv.is_open() && s == cfg.csv_state)
                csv << fmt(r.alpha) << "," << fmt(r.empirical_mean) << ","
                    << fmt(r.dr_lower) << "," << fmt(r.dr_upper) << ","
                    << fmt(r.reg_value) << "\n";
        }
    }
    log << "sandwich: " << cfg.alpha_grid.size() * states.size() << " reports, "
        << (all_pass ? "all PASS" : "FAIL present") << "\n";
    return all_pass ? 0 : 3;
}

int run_approx(const ExperimentConfig& cfg, std::ofstream& out, std::ostream& log) {
    const EmpiricalDistribution emp = build_empirical(build_atoms(cfg));
    const Policy& pi = cfg.policy;
    const auto grid =
        single_row_perturbation_grid(emp, cfg.mdp, pi, cfg.oracle_fractions);
    FeatureMatrix phi;
    phi.num_states = cfg.mdp.num_states;
    phi.m = static_cast<long>(cfg.feature_rows.front().size());
    for (const auto& row : cfg.feature_rows)
        phi.phi.insert(phi.phi.end(), row.begin(), row.end());

    bool all_pass = true;
    for (long s : states_to_report(cfg)) {
        auto [reports, pass] =
            approx_dr_sweep(cfg.mdp, pi, emp, cfg.norm, cfg.alpha_grid, phi, s, grid);
        all_pass = all_pass && pass;
        for (const auto& r : reports)
            out << "{\"record\":\"approx_report\",\"state\":" << r.state
                << ",\"alpha\":" << fmt(r.alpha) << ",\"lhs\":" << fmt(r.lhs)
                << ",\"rhs_mean\":" << fmt(r.rhs_mean) << ",\"eta\":" << fmt(r.eta)
                << ",\"pass\":" << fmt_bool(r.pass) << "}\n";
        out << "{\"record\":\"approx_sweep\",\"state\":" << s
            << ",\"pass\":" << fmt_bool(pass) << "}\n";
    }
    log << "approx: " << (all_pass ? "all PASS" : "FAIL present") << "\n";
    return all_pass ? 0 : 3;
}

int run_oos(const ExperimentConfig& cfg, std::ofstream& out, std::ostream& log) {
    const OosReport rep =
        oos_experiment(cfg.true_mu, cfg.mdp, cfg.schedule, cfg.n_episodes,
                       cfg.episode_len, cfg.trials, cfg.seed, cfg.threads);
    for (const auto& t : rep.results)
        out << "{\"record\":\"oos_trial\",\"trial\":" << t.trial_id
            << ",\"covered\":" << fmt_bool(t.covered) << ",\"policy\":"
            << fmt_ivec(t.policy) << ",\"certificate\":" << fmt_vec(t.certificate)
            << ",\"true_performance\":" << fmt_vec(t.true_performance) << "}\n";
    const bool pass = rep.coverage >= cfg.min_coverage;
    out << "{\"record\":\"oos_summary\",\"trials\":" << rep.trials
        << ",\"covered_count\":" << rep.covered_count << ",\"coverage\":"
        << fmt(rep.coverage) << ",\"wilson_lo\":" << fmt(rep.wilson_lo)
        << ",\"wilson_hi\":" << fmt(rep.wilson_hi) << ",\"min_coverage\":"
        << fmt(cfg.min_coverage) << ",\"pass\":" << fmt_bool(pass) << "}\n";
    log << "oos: coverage " << rep.coverage << " over " << rep.trials << " trials\n";
    return pass ? 0 : 3;
}

int run_robust_vi(const ExperimentConfig& cfg, std::ofstream& out, std::ostream& log) {
    const std::vector<TransitionModel> atoms = build_atoms(cfg);
    const TransitionModel& center = atoms.front();
    const UncertaintySet u =
        UncertaintySet::norm_ball(center, cfg.robust_radius, cfg.robust_norm);
    auto [v, pi] = robust_value_iteration(cfg.mdp, u, cfg.tol);
    auto [vnom, pinom] = value_iteration(cfg.mdp, center, cfg.tol);
    (void)pinom;
    bool pass = true;
    for (size_t s = 0; s < v.size(); ++s)
        pass = pass && v[s] <= vnom[s] + 2.0 * cfg.tol + 1e-9;
    out << "{\"record\":\"robust_vi_report\",\"radius\":" << fmt(cfg.robust_radius)
        << ",\"value\":" << fmt_vec(v) << ",\"policy\":" << fmt_ivec(pi.action)
        << ",\"nominal_value\":" << fmt_vec(vnom) << ",\"pass\":" << fmt_bool(pass)
        << "}\n";
    log << "robust-vi: " << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 3;
}

} // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
    validate(cfg);
    validate(cfg.mdp);
    const auto start = std::chrono::steady_clock::now();

    std::ofstream out(cfg.out_path, std::ios::binary);
    if (!out) throw parameter_error("cannot open out path " + cfg.out_path);
    write_header(out, cfg);

    int code;
    if (cfg.kind == "sandwich")
        code = run_sandwich(cfg, out, log);
    else if (cfg.kind == "approx")
        code = run_approx(cfg, out, log);
    else if (cfg.kind == "oos")
        code = run_oos(cfg, out, log);
    else
        code = run_robust_vi(cfg, out, log);

    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    log << "wall clock: " << ms << " ms (not serialized)\n";
    return code;
}

// ---------------------------------------------------------------------------
// episode ingestion

std::vector<EpisodeLog> ingest_episodes(const std::string& csv_path,
                                        const TabularMdp& dims) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw parameter_error("cannot open episode file " + csv_path);
    std::string line;
    if (!std::getline(in, line))
        throw parameter_error("episode file is empty (expected a header row)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "episode,s,a,s_next")
        throw parameter_error("episode file header must be episode,s,a,s_next");

    std::map<long, EpisodeLog> logs;
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        long vals[4];
        size_t pos = 0;
        bool ok = true;
        for (int k = 0; k < 4 && ok; ++k) {
            const size_t next = line.find(',', pos);
            const std::string tok = line.substr(
                pos, next == std::string::npos ? std::string::npos : next - pos);
            try {
                size_t used = 0;
                vals[k] = std::stol(tok, &used);
                ok = used == tok.size() && !tok.empty();
            } catch (const std::exception&) {
                ok = false;
            }
            if (k < 3) {
                if (next == std::string::npos)
                    ok = false;
                else
                    pos = next + 1;
            } else if (next != std::string::npos) {
                ok = false; // trailing columns
            }
        }
        if (!ok)
            throw parameter_error("row " + std::to_string(row) + " is malformed");
        if (vals[1] < 0 || vals[1] >= dims.num_states)
            throw structural_error("row " + std::to_string(row) + ": state index " +
                                   std::to_string(vals[1]) + " out of range [0, " +
                                   std::to_string(dims.num_states) + ")");
        if (vals[2] < 0 || vals[2] >= dims.num_actions)
            throw structural_error("row " + std::to_string(row) + ": action index " +
                                   std::to_string(vals[2]) + " out of range [0, " +
                                   std::to_string(dims.num_actions) + ")");
        if (vals[3] < 0 || vals[3] >= dims.num_states)
            throw structural_error("row " + std::to_string(row) + ": successor index " +
                                   std::to_string(vals[3]) + " out of range [0, " +
                                   std::to_string(dims.num_states) + ")");
        EpisodeLog& lg = logs[vals[0]];
        lg.episode_id = vals[0];
        lg.transitions.push_back({vals[1], vals[2], vals[3]});
    }
    std::vector<EpisodeLog> out;
    out.reserve(logs.size());
    for (auto& [id, lg] : logs) out.push_back(std::move(lg));
    return out;
}

std::string write_mdp_spec(const TabularMdp& mdp) {
    json jm;
    jm["num_states"] = mdp.num_states;
    jm["num_actions"] = mdp.num_actions;
    jm["discount"] = mdp.discount;
    jm["r_max"] = mdp.r_max;
    json rows = json::array();
    for (long s = 0; s < mdp.num_states; ++s) {
        json row = json::array();
        for (long a = 0; a < mdp.num_actions; ++a) row.push_back(mdp.reward(s, a));
        rows.push_back(std::move(row));
    }
    jm["rewards"] = std::move(rows);
    return jm.dump(2);
}

TabularMdp read_mdp_spec(const std::string& text) {
    json jm;
    try {
        jm = json::parse(text);
    } catch (const json::parse_error& e) {
        throw parameter_error("mdp spec parse error at line " +
                              std::to_string(line_of_byte(text, e.byte)) + ": " +
                              e.what());
    }
    return parse_mdp_section(jm);
}

} // namespace wdr
