#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "radloc/hybrid.hpp"
#include "radloc/mcmc.hpp"

namespace radloc {

/// Knobs for the synthetic-city generator. Defaults match the reference
/// scenario committed under data/.
struct CityOptions {
    double width = 250.0;   // m
    double height = 180.0;  // m
    int n_buildings = 30;
    int n_detectors = 10;
    double min_detector_spacing = 60.0;  // m, pairwise
    double detector_clearance = 6.0;     // m of open air around each sensor
    double source_clearance = 12.0;      // m kept free around the true source
    double mfp_lo = 1.0;
    double mfp_hi = 5.0;
    double background = 300.0;  // counts/s
    uint64_t seed = 0;
    bool with_true_source = true;
    SourceParams true_source{158.0, 98.0, 3.219e9};
};

Scenario generate_city(const CityOptions& opt);

std::string scenario_to_json(const Scenario& scn);
Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scn, const std::string& path);

enum class Method { SA, PS, GA, SAIF, PSIF, GAIF, DRAM, DREAM, NelderMead };

Method parse_method(const std::string& name);  // throws invalid_argument
std::string method_name(Method m);
bool is_sampler(Method m);

struct ExperimentConfig {
    std::string scenario_path;
    Method method = Method::SAIF;
    int n_seeds = 10;
    uint64_t base_seed = 1;
    int n_replicates = 1;       // observation columns per detector
    uint64_t observation_seed = 1;  // one measured dataset shared by all runs
    std::string output_dir = ".";
    StoppingCriteria stopping;
    SAConfig sa;
    PSConfig ps;
    GAConfig ga;
    IFConfig local;
    SubdomainSpec subdomain;
    DRAMConfig dram;
    DREAMConfig dream;
};

ExperimentConfig experiment_from_json(const std::string& text);
ExperimentConfig load_experiment(const std::string& path);

/// One optimizer/sampler invocation under a specific seed.
struct RunRecord {
    std::string scenario;
    std::string method;
    uint64_t seed = 0;
    SourceParams estimate;
    double objective = 0.0;
    double error_x = 0.0;  // m, NaN without a true source
    double error_y = 0.0;
    double rel_error_s0 = 0.0;
    long n_evaluations = 0;
    double wall_time_s = 0.0;
};

/// Runs every seed of the experiment, writes per-seed CSV rows plus a
/// median/mean summary row to `out`, and drops sampler artifacts (chain
/// CSV, R-statistic trace) into output_dir. Returns the per-seed records.
/// When first_trace is given, the first seed's optimizer trace lands there.
std::vector<RunRecord> run_experiment(const Scenario& scn, const ExperimentConfig& cfg,
                                      std::ostream& out, OptResult* first_trace = nullptr);

/// Inverse of export_chains_csv; burn-in information is not stored in the
/// CSV, so the result reports every row as retained.
ChainSet read_chains_csv(const std::string& path);

/// Rows from a results CSV produced by run_experiment (summary excluded).
std::vector<RunRecord> read_results_csv(const std::string& path);

/// Merged per-method comparison table: median errors and eval counts.
void write_comparison(const std::vector<std::vector<RunRecord>>& result_sets,
                      std::ostream& out);

/// Per-iteration trace series (best J, mean J, coordinate spread) as CSV.
void write_trace_csv(const OptResult& result, std::ostream& out);

/// 50-bin histograms of the retained samples, one block of rows per
/// coordinate; counts per column sum to the retained sample count.
void write_histograms_csv(const ChainSet& chains, std::ostream& out, int n_bins = 50);

}  // namespace radloc
