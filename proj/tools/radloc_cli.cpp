#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "radloc/scenario_io.hpp"

namespace {

using namespace radloc;

std::ofstream open_or_die(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write file: " + path);
    return out;
}

int cmd_generate(const std::string& out_path, const CityOptions& opt) {
    const Scenario scn = generate_city(opt);
    save_scenario(scn, out_path);
    std::cout << "wrote " << out_path << " (" << scn.geometry.buildings.size()
              << " buildings, " << scn.detectors.size() << " detectors)\n";
    return 0;
}

int cmd_simulate(const std::string& scenario_path, uint64_t seed, int replicates,
                 const std::string& out_path) {
    const Scenario scn = load_scenario(scenario_path);
    if (!scn.has_true_source)
        throw std::invalid_argument("scenario has no true source to simulate from");
    Rng rng(seed, uint64_t{1} << 32);
    const ObservationSet obs = simulate_observations(scn, scn.true_source, replicates, rng);
    auto out = open_or_die(out_path);
    out << "detector,replicate,count\n";
    for (int d = 0; d < obs.n_det; ++d)
        for (int r = 0; r < obs.n_rep; ++r)
            out << d << ',' << r << ',' << obs.at(d, r) << '\n';
    std::cout << "wrote " << out_path << '\n';
    return 0;
}

ExperimentConfig assemble_config(const std::string& experiment_path,
                                 const std::string& scenario_path,
                                 const std::string& method, int n_seeds,
                                 uint64_t base_seed, uint64_t obs_seed, long max_evals,
                                 std::optional<double> target,
                                 const std::string& output_dir) {
    ExperimentConfig cfg;
    if (!experiment_path.empty()) cfg = load_experiment(experiment_path);
    if (!scenario_path.empty()) cfg.scenario_path = scenario_path;
    if (!method.empty()) cfg.method = parse_method(method);
    if (n_seeds > 0) cfg.n_seeds = n_seeds;
    if (base_seed != 0) cfg.base_seed = base_seed;
    if (obs_seed != 0) cfg.observation_seed = obs_seed;
    if (max_evals > 0) cfg.stopping.max_evaluations = max_evals;
    if (target) cfg.stopping.target_objective = *target;
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (cfg.scenario_path.empty())
        throw std::invalid_argument("no scenario given (flag or experiment file)");
    return cfg;
}

int cmd_run(const ExperimentConfig& cfg, const std::string& out_path,
            const std::string& trace_path) {
    const Scenario scn = load_scenario(cfg.scenario_path);
    auto out = open_or_die(out_path);
    OptResult trace;
    run_experiment(scn, cfg, out, trace_path.empty() ? nullptr : &trace);
    if (!trace_path.empty()) {
        auto tout = open_or_die(trace_path);
        write_trace_csv(trace, tout);
    }
    std::cout << "wrote " << out_path << '\n';
    return 0;
}

int cmd_diagnose(const std::string& chains_path, const std::string& out_path) {
    const ChainSet cs = read_chains_csv(chains_path);
    auto out = open_or_die(out_path);
    out << "statistic,coordinate,value\n";
    const char* names[3] = {"x", "y", "s0"};
    for (int coord = 0; coord < 3; ++coord) {
        std::vector<double> first_chain;
        for (long it = 0; it < cs.n_iterations; ++it)
            first_chain.push_back(cs.at(0, it)[coord]);
        const GewekeResult g = geweke(first_chain);
        out << "geweke_z," << names[coord] << ',' << g.z << '\n';
        out << "geweke_score," << names[coord] << ',' << g.score << '\n';
        if (cs.n_chains >= 2) {
            std::vector<std::vector<double>> per_chain(cs.n_chains);
            for (int c = 0; c < cs.n_chains; ++c)
                for (long it = 0; it < cs.n_iterations; ++it)
                    per_chain[c].push_back(cs.at(c, it)[coord]);
            out << "gelman_rubin_r," << names[coord] << ','
                << gelman_rubin(per_chain).r << '\n';
        }
    }
    std::cout << "wrote " << out_path << '\n';
    return 0;
}

int cmd_report(const std::vector<std::string>& results, const std::string& out_path,
               const std::string& chains_path, const std::string& histograms_path) {
    if (results.empty()) throw std::invalid_argument("report needs at least one results file");
    std::vector<std::vector<RunRecord>> sets;
    for (const std::string& p : results) sets.push_back(read_results_csv(p));
    auto out = open_or_die(out_path);
    write_comparison(sets, out);
    if (!chains_path.empty()) {
        if (histograms_path.empty())
            throw std::invalid_argument("--chains needs --histograms for the output path");
        const ChainSet cs = read_chains_csv(chains_path);
        auto hout = open_or_die(histograms_path);
        write_histograms_csv(cs, hout);
    }
    std::cout << "wrote " << out_path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Point gamma-source localization in a 2D urban domain"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Create a synthetic city scenario file");
    std::string gen_out = "scenario.json";
    CityOptions city;
    bool no_truth = false;
    gen->add_option("-o,--out", gen_out, "Output scenario path");
    gen->add_option("--seed", city.seed, "Generator seed");
    gen->add_option("--buildings", city.n_buildings, "Number of buildings");
    gen->add_option("--detectors", city.n_detectors, "Number of detectors");
    gen->add_option("--width", city.width, "Domain width (m)");
    gen->add_option("--height", city.height, "Domain height (m)");
    gen->add_option("--background", city.background, "Background rate (counts/s)");
    gen->add_flag("--no-true-source", no_truth, "Omit the embedded true source");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Draw Poisson counts from a scenario");
    std::string sim_scn, sim_out = "counts.csv";
    uint64_t sim_seed = 1;
    int sim_reps = 1;
    sim->add_option("-s,--scenario", sim_scn, "Scenario file")->required();
    sim->add_option("--seed", sim_seed, "Observation seed");
    sim->add_option("--replicates", sim_reps, "Counting intervals per detector");
    sim->add_option("-o,--out", sim_out, "Output counts CSV");

    // optimize / sample share flags
    std::string run_scn, run_exp, run_method, run_out = "results.csv";
    std::string run_trace, run_dir;
    int run_seeds = 0;
    uint64_t run_base = 0, run_obs = 0;
    long run_maxev = 0;
    double run_target = 0.0;
    bool has_target = false;
    auto add_run_flags = [&](CLI::App* c) {
        c->add_option("-s,--scenario", run_scn, "Scenario file");
        c->add_option("-e,--experiment", run_exp, "Experiment config JSON");
        c->add_option("-m,--method", run_method, "Method name");
        c->add_option("--seeds", run_seeds, "Number of seeds");
        c->add_option("--base-seed", run_base, "First seed value");
        c->add_option("--obs-seed", run_obs, "Observation dataset seed");
        c->add_option("--max-evals", run_maxev, "Model-run budget per seed");
        c->add_option("--target", run_target, "Target objective for early stop")
            ->each([&](const std::string&) { has_target = true; });
        c->add_option("-o,--out", run_out, "Results CSV path");
        c->add_option("--output-dir", run_dir, "Directory for sampler artifacts");
    };
    auto* opt = app.add_subcommand("optimize", "Run a global/hybrid/simplex optimizer");
    add_run_flags(opt);
    opt->add_option("--trace", run_trace, "Per-iteration trace CSV (first seed)");
    auto* smp = app.add_subcommand("sample", "Run a posterior sampler (dram | dream)");
    add_run_flags(smp);

    // diagnose
    auto* dia = app.add_subcommand("diagnose", "Convergence diagnostics for a chain CSV");
    std::string dia_chains, dia_out = "diagnostics.csv";
    dia->add_option("-c,--chains", dia_chains, "Chain CSV from a sampler run")->required();
    dia->add_option("-o,--out", dia_out, "Diagnostics CSV path");

    // report
    auto* rep = app.add_subcommand("report", "Merge results files into a comparison table");
    std::vector<std::string> rep_results;
    std::string rep_out = "comparison.csv", rep_chains, rep_hist;
    rep->add_option("-r,--results", rep_results, "Results CSV files");
    rep->add_option("-o,--out", rep_out, "Comparison table path");
    rep->add_option("--chains", rep_chains, "Chain CSV to histogram");
    rep->add_option("--histograms", rep_hist, "Histogram CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) {
            city.with_true_source = !no_truth;
            return cmd_generate(gen_out, city);
        }
        if (sim->parsed()) return cmd_simulate(sim_scn, sim_seed, sim_reps, sim_out);
        if (opt->parsed() || smp->parsed()) {
            ExperimentConfig cfg = assemble_config(
                run_exp, run_scn, run_method, run_seeds, run_base, run_obs, run_maxev,
                has_target ? std::optional<double>(run_target) : std::nullopt, run_dir);
            const bool sampler = is_sampler(cfg.method);
            if (smp->parsed() && !sampler)
                throw std::invalid_argument("sample expects dram or dream, got " +
                                            method_name(cfg.method));
            if (opt->parsed() && sampler)
                throw std::invalid_argument("optimize does not run samplers, use sample");
            return cmd_run(cfg, run_out, run_trace);
        }
        if (dia->parsed()) return cmd_diagnose(dia_chains, dia_out);
        if (rep->parsed()) return cmd_report(rep_results, rep_out, rep_chains, rep_hist);
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
