#include "radloc/scenario_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace radloc {

using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<Point2> make_rectangle(double cx, double cy, double hw, double hh,
                                   double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    std::vector<Point2> v;
    for (auto [dx, dy] : {std::pair{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}})
        v.push_back({cx + c * dx - s * dy, cy + s * dx + c * dy});
    return v;
}

bool inside_bounds(const std::vector<Point2>& v, double w, double h, double margin) {
    for (const Point2& p : v)
        if (p.x < margin || p.x > w - margin || p.y < margin || p.y > h - margin)
            return false;
    return true;
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

bool polygon_clears_point(const std::vector<Point2>& poly, const Point2& p, double r) {
    if (point_in_polygon(p, poly)) return false;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i)
        if (point_segment_distance(p, poly[i], poly[(i + 1) % n]) < r) return false;
    return true;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Scenario generate_city(const CityOptions& opt) {
    if (opt.n_buildings < 0) throw std::invalid_argument("generate_city: n_buildings < 0");
    Scenario scn;
    scn.geometry.width = opt.width;
    scn.geometry.height = opt.height;
    scn.geometry.air_sigma_t = 9.3e-3;
    scn.background = opt.background;
    scn.feasible_box.upper[0] = opt.width;
    scn.feasible_box.upper[1] = opt.height;
    scn.rng_seed = opt.seed;
    scn.has_true_source = opt.with_true_source;
    scn.true_source = opt.true_source;

    Rng rng(opt.seed, 17);
    constexpr int kMaxAttempts = 10000;

    // Detectors first: uniform draws kept apart by the pairwise spacing so
    // the network spreads over the whole block.
    int attempts = 0;
    while (static_cast<int>(scn.detectors.size()) < opt.n_detectors) {
        if (++attempts > kMaxAttempts)
            throw std::runtime_error("generate_city: detector placement stalled, placed " +
                                     std::to_string(scn.detectors.size()) + " of " +
                                     std::to_string(opt.n_detectors) + " detectors");
        Point2 p{rng.uniform(0.0, opt.width), rng.uniform(0.0, opt.height)};
        bool spaced = true;
        for (const Detector& d : scn.detectors)
            if (distance(p, d.position) < opt.min_detector_spacing) {
                spaced = false;
                break;
            }
        if (spaced) scn.detectors.push_back(Detector{p});
    }

    // Buildings keep clear of the sensors and the source: every detector
    // gets open air around its position and no footprint hugs the source.
    attempts = 0;
    auto& buildings = scn.geometry.buildings;
    while (static_cast<int>(buildings.size()) < opt.n_buildings) {
        if (++attempts > kMaxAttempts)
            throw std::runtime_error("generate_city: packing stalled after 10000 attempts, placed " +
                                     std::to_string(buildings.size()) + " of " +
                                     std::to_string(opt.n_buildings) + " buildings");
        const double hw = 0.5 * rng.uniform(8.0, 22.0);
        const double hh = 0.5 * rng.uniform(8.0, 22.0);
        const double cx = rng.uniform(0.0, opt.width);
        const double cy = rng.uniform(0.0, opt.height);
        // Half the footprints stay axis aligned, the rest get a free rotation.
        const double angle = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 1.5707963267948966);
        Building cand{make_rectangle(cx, cy, hw, hh, angle), 0.0};
        if (!inside_bounds(cand.vertices, opt.width, opt.height, 1.0)) continue;
        if (scn.has_true_source &&
            !polygon_clears_point(cand.vertices,
                                  {scn.true_source.x, scn.true_source.y},
                                  opt.source_clearance))
            continue;
        bool clear = true;
        for (const Detector& d : scn.detectors)
            if (!polygon_clears_point(cand.vertices, d.position, opt.detector_clearance)) {
                clear = false;
                break;
            }
        // A one-metre buffer keeps distinct footprints from sharing edges.
        Building grown{make_rectangle(cx, cy, hw + 1.0, hh + 1.0, angle), 0.0};
        for (const Building& b : buildings) {
            if (!clear) break;
            if (!polygons_interior_disjoint(grown.vertices, b.vertices)) clear = false;
        }
        if (clear) buildings.push_back(std::move(cand));
    }
    if (!buildings.empty()) assign_cross_sections(buildings, opt.mfp_lo, opt.mfp_hi, rng);
    validate(scn.geometry);
    return scn;
}

std::string scenario_to_json(const Scenario& scn) {
    json j;
    j["schema_version"] = 1;
    j["provenance"] = "synthetic";
    json dom;
    dom["width_m"] = scn.geometry.width;
    dom["height_m"] = scn.geometry.height;
    dom["air_sigma_t_per_m"] = scn.geometry.air_sigma_t;
    dom["buildings"] = json::array();
    for (const Building& b : scn.geometry.buildings) {
        json jb;
        jb["sigma_t_per_m"] = b.sigma_t;
        jb["vertices_m"] = json::array();
        for (const Point2& p : b.vertices) jb["vertices_m"].push_back({p.x, p.y});
        dom["buildings"].push_back(std::move(jb));
    }
    j["domain"] = std::move(dom);
    j["detectors"] = json::array();
    for (const Detector& d : scn.detectors) {
        json jd;
        jd["position_m"] = {d.position.x, d.position.y};
        jd["face_area_m2"] = d.face_area;
        jd["efficiency"] = d.efficiency;
        jd["dwell_time_s"] = d.dwell_time;
        j["detectors"].push_back(std::move(jd));
    }
    j["background_cps"] = scn.background;
    j["feasible_box"]["lower"] = scn.feasible_box.lower;
    j["feasible_box"]["upper"] = scn.feasible_box.upper;
    j["intensity_scale"] = scn.intensity_scale;
    if (scn.has_true_source) {
        j["true_source"]["x_m"] = scn.true_source.x;
        j["true_source"]["y_m"] = scn.true_source.y;
        j["true_source"]["s0_decays_per_s"] = scn.true_source.s0;
    }
    j["rng_seed"] = scn.rng_seed;
    return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
    const json j = json::parse(text);
    if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
        throw std::invalid_argument("scenario: missing or unsupported schema_version");
    Scenario scn;
    const json& dom = j.at("domain");
    scn.geometry.width = dom.at("width_m").get<double>();
    scn.geometry.height = dom.at("height_m").get<double>();
    scn.geometry.air_sigma_t = dom.at("air_sigma_t_per_m").get<double>();
    for (const json& jb : dom.at("buildings")) {
        Building b;
        b.sigma_t = jb.at("sigma_t_per_m").get<double>();
        for (const json& jp : jb.at("vertices_m"))
            b.vertices.push_back({jp.at(0).get<double>(), jp.at(1).get<double>()});
        scn.geometry.buildings.push_back(std::move(b));
    }
    for (const json& jd : j.at("detectors")) {
        Detector d;
        d.position = {jd.at("position_m").at(0).get<double>(),
                      jd.at("position_m").at(1).get<double>()};
        d.face_area = jd.at("face_area_m2").get<double>();
        d.efficiency = jd.at("efficiency").get<double>();
        d.dwell_time = jd.at("dwell_time_s").get<double>();
        scn.detectors.push_back(d);
    }
    scn.background = j.at("background_cps").get<double>();
    for (int i = 0; i < 3; ++i) {
        scn.feasible_box.lower[i] = j.at("feasible_box").at("lower").at(i).get<double>();
        scn.feasible_box.upper[i] = j.at("feasible_box").at("upper").at(i).get<double>();
    }
    scn.intensity_scale = j.at("intensity_scale").get<double>();
    if (j.contains("true_source")) {
        scn.has_true_source = true;
        scn.true_source.x = j.at("true_source").at("x_m").get<double>();
        scn.true_source.y = j.at("true_source").at("y_m").get<double>();
        scn.true_source.s0 = j.at("true_source").at("s0_decays_per_s").get<double>();
    }
    scn.rng_seed = j.at("rng_seed").get<uint64_t>();
    validate(scn.geometry);
    return scn;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return scenario_from_json(ss.str());
}

void save_scenario(const Scenario& scn, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scenario file: " + path);
    out << scenario_to_json(scn);
}

Method parse_method(const std::string& name) {
    if (name == "sa") return Method::SA;
    if (name == "ps") return Method::PS;
    if (name == "ga") return Method::GA;
    if (name == "sa+if") return Method::SAIF;
    if (name == "ps+if") return Method::PSIF;
    if (name == "ga+if") return Method::GAIF;
    if (name == "dram") return Method::DRAM;
    if (name == "dream") return Method::DREAM;
    if (name == "nelder-mead") return Method::NelderMead;
    throw std::invalid_argument("unknown method: " + name);
}

std::string method_name(Method m) {
    switch (m) {
        case Method::SA: return "sa";
        case Method::PS: return "ps";
        case Method::GA: return "ga";
        case Method::SAIF: return "sa+if";
        case Method::PSIF: return "ps+if";
        case Method::GAIF: return "ga+if";
        case Method::DRAM: return "dram";
        case Method::DREAM: return "dream";
        case Method::NelderMead: return "nelder-mead";
    }
    return "?";
}

bool is_sampler(Method m) { return m == Method::DRAM || m == Method::DREAM; }

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_stopping(const json& j, StoppingCriteria& s) {
    maybe(j, "max_evaluations", s.max_evaluations);
    if (j.contains("target_objective")) s.target_objective = j.at("target_objective").get<double>();
    maybe(j, "stall_window", s.stall_window);
    maybe(j, "stall_tolerance", s.stall_tolerance);
}

}  // namespace

ExperimentConfig experiment_from_json(const std::string& text) {
    const json j = json::parse(text);
    ExperimentConfig cfg;
    maybe(j, "scenario", cfg.scenario_path);
    if (j.contains("method")) cfg.method = parse_method(j.at("method").get<std::string>());
    maybe(j, "n_seeds", cfg.n_seeds);
    maybe(j, "base_seed", cfg.base_seed);
    maybe(j, "n_replicates", cfg.n_replicates);
    maybe(j, "observation_seed", cfg.observation_seed);
    maybe(j, "output_dir", cfg.output_dir);
    if (j.contains("stopping")) parse_stopping(j.at("stopping"), cfg.stopping);
    if (j.contains("sa")) {
        const json& s = j.at("sa");
        maybe(s, "initial_temperatures", cfg.sa.initial_temperatures);
        maybe(s, "reanneal_interval", cfg.sa.reanneal_interval);
        maybe(s, "cooling_base", cfg.sa.cooling_base);
        maybe(s, "n_starts", cfg.sa.n_starts);
    }
    if (j.contains("ps")) {
        const json& s = j.at("ps");
        maybe(s, "swarm_size", cfg.ps.swarm_size);
        maybe(s, "min_neighborhood", cfg.ps.min_neighborhood);
        maybe(s, "self_weight", cfg.ps.self_weight);
        maybe(s, "social_weight", cfg.ps.social_weight);
    }
    if (j.contains("ga")) {
        const json& s = j.at("ga");
        maybe(s, "population", cfg.ga.population);
        maybe(s, "elite_count", cfg.ga.elite_count);
        maybe(s, "crossover_count", cfg.ga.crossover_count);
        maybe(s, "mutation_count", cfg.ga.mutation_count);
    }
    if (j.contains("local")) {
        const json& s = j.at("local");
        maybe(s, "budget", cfg.local.budget);
        maybe(s, "maxit", cfg.local.maxit);
        maybe(s, "maxitarm", cfg.local.maxitarm);
    }
    if (j.contains("subdomain")) maybe(j.at("subdomain"), "half_widths", cfg.subdomain.half_widths);
    if (j.contains("dram")) {
        const json& s = j.at("dram");
        maybe(s, "n_iterations", cfg.dram.n_iterations);
        maybe(s, "burn_in", cfg.dram.burn_in);
        maybe(s, "adapt_interval", cfg.dram.adapt_interval);
        maybe(s, "dr_scale", cfg.dram.dr_scale);
    }
    if (j.contains("dream")) {
        const json& s = j.at("dream");
        maybe(s, "n_chains", cfg.dream.n_chains);
        maybe(s, "n_iterations", cfg.dream.n_iterations);
        maybe(s, "n_pairs", cfg.dream.n_pairs);
        maybe(s, "burn_in_fraction", cfg.dream.burn_in_fraction);
    }
    return cfg;
}

ExperimentConfig load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open experiment file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg = experiment_from_json(ss.str());
    if (!cfg.scenario_path.empty() && !std::filesystem::exists(cfg.scenario_path)) {
        // Allow paths relative to the experiment file itself.
        auto beside = std::filesystem::path(path).parent_path() / cfg.scenario_path;
        if (std::filesystem::exists(beside)) cfg.scenario_path = beside.string();
    }
    return cfg;
}

namespace {

const char* kResultsHeader =
    "scenario,method,seed,estimate_x,estimate_y,estimate_s0,objective,"
    "error_x,error_y,rel_error_s0,n_evaluations,wall_time_s";

void write_record(std::ostream& out, const RunRecord& r, const std::string& scenario_tag,
                  const std::string& seed_field) {
    out << scenario_tag << ',' << r.method << ',' << seed_field << ','
        << fmt(r.estimate.x) << ',' << fmt(r.estimate.y) << ',' << fmt(r.estimate.s0)
        << ',' << fmt(r.objective) << ',' << fmt(r.error_x) << ',' << fmt(r.error_y)
        << ',' << fmt(r.rel_error_s0) << ',' << r.n_evaluations << ','
        << fmt(r.wall_time_s) << '\n';
}

RunRecord run_one(const Scenario& scn, const ExperimentConfig& cfg, uint64_t seed,
                  OptResult* trace_out) {
    if (!scn.has_true_source)
        throw std::invalid_argument("experiment needs a scenario with a true source");
    RunRecord rec;
    rec.method = method_name(cfg.method);
    rec.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();

    // One measured dataset per experiment: the counts depend on the
    // observation seed only, while per-run seeds drive the algorithms.
    // Stream id far above anything the optimizers split off for themselves,
    // so observation noise never shares a stream with algorithm draws.
    Rng obs_rng(cfg.observation_seed, uint64_t{1} << 32);
    const ObservationSet obs =
        simulate_observations(scn, scn.true_source, cfg.n_replicates, obs_rng);
    ObjectiveContext ctx(scn, obs);
    Rng alg_rng(seed, 2);

    switch (cfg.method) {
        case Method::SA:
        case Method::PS:
        case Method::GA: {
            OptResult r = cfg.method == Method::SA ? sa_run(ctx, cfg.sa, cfg.stopping, alg_rng)
                          : cfg.method == Method::PS
                              ? ps_run(ctx, cfg.ps, cfg.stopping, alg_rng)
                              : ga_run(ctx, cfg.ga, cfg.stopping, alg_rng);
            rec.estimate = r.best_theta;
            rec.objective = r.best_objective;
            if (trace_out) *trace_out = std::move(r);
            break;
        }
        case Method::SAIF:
        case Method::PSIF:
        case Method::GAIF: {
            HybridConfig h;
            h.method = cfg.method == Method::SAIF   ? GlobalMethod::SA
                       : cfg.method == Method::PSIF ? GlobalMethod::PS
                                                    : GlobalMethod::GA;
            h.sa = cfg.sa;
            h.ps = cfg.ps;
            h.ga = cfg.ga;
            h.stopping = cfg.stopping;
            h.local = cfg.local;
            h.subdomain = cfg.subdomain;
            HybridReport rep = hybrid_run(ctx, h, alg_rng);
            rec.estimate = rep.local_stage.best_theta;
            rec.objective = rep.local_stage.best_objective;
            if (trace_out) *trace_out = rep.global_stage;
            break;
        }
        case Method::NelderMead: {
            const FeasibleBox box = scaled_box(scn);
            Vec3 start;
            for (int i = 0; i < 3; ++i) start[i] = 0.5 * (box.lower[i] + box.upper[i]);
            const Vec3 best = nelder_mead(make_objective(ctx), start, box);
            rec.estimate = unscale(scn, best);
            rec.objective = neg_log_objective(ctx, best);
            break;
        }
        case Method::DRAM:
        case Method::DREAM: {
            ChainSet cs = cfg.method == Method::DRAM ? dram_sample(ctx, cfg.dram, alg_rng)
                                                     : dream_sample(ctx, cfg.dream, alg_rng);
            const double last_frac =
                cfg.method == Method::DREAM
                    ? 0.25
                    : 1.0 - static_cast<double>(cs.burn_in) / cs.n_iterations;
            const Vec3 mean = cs.posterior_mean(last_frac);
            rec.estimate = {mean[0], mean[1], mean[2]};
            rec.objective = neg_log_objective(ctx, scale_params(scn, rec.estimate));

            std::filesystem::create_directories(cfg.output_dir);
            const std::string stem = cfg.output_dir + "/" + rec.method + "_seed" +
                                     std::to_string(seed);
            std::ofstream chains(stem + "_chains.csv");
            export_chains_csv(cs, chains);
            if (cfg.method == Method::DREAM) {
                std::ofstream rs(stem + "_rstat.csv");
                rs << "iteration,r_x,r_y,r_s0\n";
                for (const auto& [it, r] : cs.r_stat_trace)
                    rs << it << ',' << fmt(r[0]) << ',' << fmt(r[1]) << ',' << fmt(r[2])
                       << '\n';
            }
            break;
        }
    }
    rec.n_evaluations = ctx.evaluations();
    rec.error_x = std::abs(rec.estimate.x - scn.true_source.x);
    rec.error_y = std::abs(rec.estimate.y - scn.true_source.y);
    rec.rel_error_s0 = std::abs(rec.estimate.s0 - scn.true_source.s0) / scn.true_source.s0;
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

}  // namespace

std::vector<RunRecord> run_experiment(const Scenario& scn, const ExperimentConfig& cfg,
                                      std::ostream& out, OptResult* first_trace) {
    if (cfg.n_seeds < 1) throw std::invalid_argument("n_seeds must be positive");
    const std::string tag = cfg.scenario_path.empty() ? "-" : cfg.scenario_path;
    out << kResultsHeader << '\n';
    std::vector<RunRecord> records;
    for (int k = 0; k < cfg.n_seeds; ++k) {
        RunRecord r = run_one(scn, cfg, cfg.base_seed + static_cast<uint64_t>(k),
                              k == 0 ? first_trace : nullptr);
        write_record(out, r, tag, std::to_string(r.seed));
        records.push_back(std::move(r));
    }

    RunRecord summary;
    summary.method = records.front().method;
    std::vector<double> ex, ey, es, ev, ox, oy, os, oj;
    double wall = 0.0;
    for (const RunRecord& r : records) {
        ox.push_back(r.estimate.x);
        oy.push_back(r.estimate.y);
        os.push_back(r.estimate.s0);
        oj.push_back(r.objective);
        ex.push_back(r.error_x);
        ey.push_back(r.error_y);
        es.push_back(r.rel_error_s0);
        ev.push_back(static_cast<double>(r.n_evaluations));
        wall += r.wall_time_s;
    }
    summary.estimate = {median(ox), median(oy), median(os)};
    summary.objective = median(oj);
    summary.error_x = median(ex);
    summary.error_y = median(ey);
    summary.rel_error_s0 = median(es);
    summary.n_evaluations = static_cast<long>(std::llround(median(ev)));
    summary.wall_time_s = wall / records.size();
    write_record(out, summary, tag, "median");
    return records;
}

std::vector<RunRecord> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open results file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader)
        throw std::invalid_argument("not a results CSV: " + path);
    std::vector<RunRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.size() != 12) throw std::invalid_argument("malformed results row: " + line);
        if (f[2] == "median") continue;
        RunRecord r;
        r.scenario = f[0];
        r.method = f[1];
        r.seed = std::stoull(f[2]);
        r.estimate = {std::stod(f[3]), std::stod(f[4]), std::stod(f[5])};
        r.objective = std::stod(f[6]);
        r.error_x = std::stod(f[7]);
        r.error_y = std::stod(f[8]);
        r.rel_error_s0 = std::stod(f[9]);
        r.n_evaluations = std::stol(f[10]);
        r.wall_time_s = std::stod(f[11]);
        out.push_back(std::move(r));
    }
    return out;
}

ChainSet read_chains_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open chains file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "chain,iteration,x,y,s0,log_posterior")
        throw std::invalid_argument("not a chains CSV: " + path);
    // Rows arrive chain-major, matching export order.
    ChainSet cs;
    cs.n_chains = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.size() != 6) throw std::invalid_argument("malformed chain row: " + line);
        cs.n_chains = std::max(cs.n_chains, std::stoi(f[0]) + 1);
        cs.samples.push_back({std::stod(f[2]), std::stod(f[3]), std::stod(f[4])});
        cs.log_posteriors.push_back(std::stod(f[5]));
    }
    if (cs.samples.empty()) throw std::invalid_argument("empty chains CSV: " + path);
    if (cs.samples.size() % cs.n_chains != 0)
        throw std::invalid_argument("ragged chains CSV: " + path);
    cs.n_iterations = static_cast<long>(cs.samples.size()) / cs.n_chains;
    cs.burn_in = 0;
    return cs;
}

void write_comparison(const std::vector<std::vector<RunRecord>>& result_sets,
                      std::ostream& out) {
    if (result_sets.empty()) throw std::invalid_argument("report: no result sets given");
    std::string scenario;
    for (const auto& set : result_sets)
        for (const RunRecord& r : set) {
            if (scenario.empty()) scenario = r.scenario;
            if (r.scenario != scenario)
                throw std::invalid_argument("report: results mix scenarios '" + scenario +
                                            "' and '" + r.scenario + "'");
        }
    out << "method,n_runs,median_error_x,median_error_y,median_rel_error_s0,"
           "median_n_evaluations,mean_wall_time_s\n";
    std::vector<std::string> order;
    for (const auto& set : result_sets)
        for (const RunRecord& r : set)
            if (std::find(order.begin(), order.end(), r.method) == order.end())
                order.push_back(r.method);
    for (const std::string& m : order) {
        std::vector<double> ex, ey, es, ev;
        double wall = 0.0;
        long n = 0;
        for (const auto& set : result_sets)
            for (const RunRecord& r : set)
                if (r.method == m) {
                    ex.push_back(r.error_x);
                    ey.push_back(r.error_y);
                    es.push_back(r.rel_error_s0);
                    ev.push_back(static_cast<double>(r.n_evaluations));
                    wall += r.wall_time_s;
                    ++n;
                }
        out << m << ',' << n << ',' << fmt(median(ex)) << ',' << fmt(median(ey)) << ','
            << fmt(median(es)) << ',' << std::llround(median(ev)) << ','
            << fmt(wall / n) << '\n';
    }
}

void write_trace_csv(const OptResult& result, std::ostream& out) {
    out << "iteration,best_objective,mean_objective,spread_x,spread_y,spread_s0\n";
    for (size_t i = 0; i < result.trace.size(); ++i) {
        const TracePoint& t = result.trace[i];
        out << i << ',' << fmt(t.best_objective) << ',' << fmt(t.mean_objective) << ','
            << fmt(t.spread[0]) << ',' << fmt(t.spread[1]) << ',' << fmt(t.spread[2])
            << '\n';
    }
}

void write_histograms_csv(const ChainSet& chains, std::ostream& out, int n_bins) {
    if (n_bins < 1) throw std::invalid_argument("histogram needs at least one bin");
    out << "coordinate,bin_lo,bin_hi,count\n";
    const char* names[3] = {"x", "y", "s0"};
    for (int coord = 0; coord < 3; ++coord) {
        std::vector<double> vals;
        for (int c = 0; c < chains.n_chains; ++c)
            for (long it = chains.burn_in; it < chains.n_iterations; ++it)
                vals.push_back(chains.at(c, it)[coord]);
        double lo = *std::min_element(vals.begin(), vals.end());
        double hi = *std::max_element(vals.begin(), vals.end());
        if (hi <= lo) hi = lo + 1.0;  // degenerate chain: one wide bin catches all
        const double width = (hi - lo) / n_bins;
        std::vector<long> counts(n_bins, 0);
        for (double v : vals) {
            int b = static_cast<int>((v - lo) / width);
            counts[std::clamp(b, 0, n_bins - 1)]++;
        }
        for (int b = 0; b < n_bins; ++b)
            out << names[coord] << ',' << fmt(lo + b * width) << ','
                << fmt(lo + (b + 1) * width) << ',' << counts[b] << '\n';
    }
}

}  // namespace radloc
