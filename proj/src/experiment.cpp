#include "paristf/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>

#include "paristf/csv.hpp"
#include "paristf/oracle/finite_diff.hpp"
#include "paristf/oracle/hmm_exact.hpp"
#include "paristf/oracle/kalman.hpp"
#include "paristf/parallel.hpp"

namespace paristf {

using nlohmann::json;

namespace {

Matrix matrix3(std::initializer_list<double> vals) {
    Matrix m(3, 3);
    std::copy(vals.begin(), vals.end(), m.a.begin());
    return m;
}

const Matrix& uniform3() {
    static const Matrix u = matrix3({1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3});
    return u;
}

const Matrix& diag_dominant3() {
    static const Matrix q = matrix3({0.6, 0.2, 0.2, 0.2, 0.6, 0.2, 0.2, 0.2, 0.6});
    return q;
}

const Matrix& skewed_emission3() {
    static const Matrix g = matrix3({0.7, 0.2, 0.1, 0.2, 0.6, 0.2, 0.1, 0.2, 0.7});
    return g;
}

}  // namespace

HmmSpec three_state_mixing_spec() {
    HmmSpec spec;
    spec.num_states = 3;
    spec.num_symbols = 3;
    spec.chi = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    spec.par.dim = 1;
    spec.par.lower = {0.01};
    spec.par.upper = {0.99};
    spec.par.eval = [](const Vec& th, Matrix& Q, Matrix& G) {
        Q = convex_mix(uniform3(), diag_dominant3(), th[0]);
        G = skewed_emission3();
    };
    spec.par.deriv = [](const Vec&, int, Matrix& dQ, Matrix& dG) {
        dQ = Matrix(3, 3);
        for (size_t i = 0; i < dQ.a.size(); ++i) dQ.a[i] = diag_dominant3().a[i] - uniform3().a[i];
        dG = Matrix(3, 3, 0.0);
    };
    return spec;
}

HmmSpec three_state_mixing_emission_spec() {
    HmmSpec spec = three_state_mixing_spec();
    spec.par.dim = 2;
    spec.par.lower = {0.01, 0.01};
    spec.par.upper = {0.99, 0.99};
    spec.par.eval = [](const Vec& th, Matrix& Q, Matrix& G) {
        Q = convex_mix(uniform3(), diag_dominant3(), th[0]);
        G = convex_mix(uniform3(), skewed_emission3(), th[1]);
    };
    spec.par.deriv = [](const Vec&, int k, Matrix& dQ, Matrix& dG) {
        dQ = Matrix(3, 3, 0.0);
        dG = Matrix(3, 3, 0.0);
        if (k == 0)
            for (size_t i = 0; i < dQ.a.size(); ++i) dQ.a[i] = diag_dominant3().a[i] - uniform3().a[i];
        else
            for (size_t i = 0; i < dG.a.size(); ++i) dG.a[i] = skewed_emission3().a[i] - uniform3().a[i];
    };
    return spec;
}

BuiltModel make_model(const json& mc) {
    BuiltModel out;
    const std::string kind = mc.at("kind").get<std::string>();
    out.kind = kind;
    if (kind == "lgssm") {
        LgssmSpec spec;
        spec.phi = mc.value("phi", 0.7);
        spec.state_var = mc.value("state_var", 1.0);
        spec.obs_var = mc.value("obs_var", 1.0);
        spec.estimate_phi = mc.value("estimate_phi", true);
        spec.estimate_state_var = mc.value("estimate_state_var", false);
        auto model = std::make_unique<LgssmModel>(spec);
        out.theta_star = model->nominal_theta();
        out.model = std::move(model);
    } else if (kind == "sv") {
        SvSpec spec;
        spec.phi = mc.value("phi", 0.8);
        spec.state_var = mc.value("state_var", 0.1);
        spec.beta2 = mc.value("beta2", 1.0);
        auto model = std::make_unique<SvModel>(spec);
        out.theta_star = model->nominal_theta();
        out.model = std::move(model);
    } else if (kind == "hmm3") {
        HmmSpec spec = three_state_mixing_spec();
        out.theta_star = {mc.value("theta", 0.5)};
        out.model = std::make_unique<HmmModel>(spec);
    } else if (kind == "hmm3e") {
        HmmSpec spec = three_state_mixing_emission_spec();
        out.theta_star = {mc.value("theta_q", 0.5), mc.value("theta_g", 0.7)};
        out.model = std::make_unique<HmmModel>(spec);
    } else if (kind == "slam") {
        SlamSpec spec;
        if (mc.contains("landmarks")) {
            spec.landmarks = mc.at("landmarks").get<Vec>();
        } else {
            spec.landmarks = {12.0, 6.0, 30.0, 12.0, 24.0, 30.0, 4.0, 24.0};
        }
        spec.landmark_count = static_cast<int>(spec.landmarks.size()) / 2;
        spec.fixed_landmarks = mc.value("fixed", std::vector<int>{0, 1});
        spec.motion_std_x = mc.value("motion_std_x", 0.25);
        spec.motion_std_y = mc.value("motion_std_y", 0.25);
        spec.motion_std_heading = mc.value("motion_std_heading", 3.0 * std::numbers::pi / 180.0);
        spec.obs_std_range = mc.value("obs_std_range", 0.25);
        spec.obs_std_bearing = mc.value("obs_std_bearing", std::numbers::pi / 180.0);
        spec.sensing_radius = mc.value("sensing_radius", 30.0);
        spec.fov_half_angle = mc.value("fov_half_angle", std::numbers::pi / 2.0);
        spec.commands = loop_commands(mc.value("straight_steps", 60), mc.value("turn_steps", 20),
                                      mc.value("step_len", 0.5));
        auto model = std::make_unique<SlamModel>(spec);
        out.theta_star = model->nominal_theta();
        out.truth["landmarks"] = spec.landmarks;
        out.truth["fixed"] = spec.fixed_landmarks;
        out.model = std::move(model);
    } else {
        throw ConfigError("unknown model kind: " + kind);
    }
    return out;
}

std::function<double(std::span<const double>)> make_test_function(const std::string& name) {
    if (name == "one") return [](std::span<const double>) { return 1.0; };
    if (name == "identity") return [](std::span<const double> x) { return x[0]; };
    if (name == "square") return [](std::span<const double> x) { return x[0] * x[0]; };
    if (name.rfind("coord:", 0) == 0) {
        const int k = std::stoi(name.substr(6));
        return [k](std::span<const double> x) { return x[static_cast<size_t>(k)]; };
    }
    if (name.rfind("indicator:", 0) == 0) {
        const int j = std::stoi(name.substr(10));
        return [j](std::span<const double> x) { return static_cast<int>(x[0]) == j ? 1.0 : 0.0; };
    }
    throw ConfigError("unknown test function: " + name);
}

ExperimentConfig parse_config(const json& j) {
    static const std::vector<std::string> known = {
        "schema", "mode",   "model",       "estimator",      "N",     "K",      "max_trials", "schedule",
        "T",      "replicates", "seed",    "outdir",         "zeta3_floor",     "clip_norm",  "test_functions",
        "start",  "threads", "checkpoint_out", "resume_from"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("unknown config key: " + it.key());

    ExperimentConfig c;
    if (j.value("schema", 1) != 1) throw ConfigError("unsupported config schema");
    c.mode = j.value("mode", std::string("rml"));
    if (c.mode != "rml" && c.mode != "tangent" && c.mode != "simulate")
        throw ConfigError("mode must be rml, tangent or simulate");
    if (!j.contains("model")) throw ConfigError("config needs a model block");
    c.model = j.at("model");
    c.estimator = j.value("estimator", std::string("paris"));
    if (c.estimator != "paris" && c.estimator != "ffbsm") throw ConfigError("estimator must be paris or ffbsm");
    c.particles = j.value("N", 100);
    c.precision = j.value("K", 2);
    c.max_trials = j.value("max_trials", 100);
    if (j.contains("schedule")) {
        c.schedule.a = j.at("schedule").value("a", 1.0);
        c.schedule.kappa = j.at("schedule").value("kappa", 0.6);
    }
    c.T = j.value("T", 100L);
    c.replicates = j.value("replicates", 1);
    c.seed = j.value("seed", 1ULL);
    c.outdir = j.value("outdir", std::string(""));
    c.zeta3_floor = j.value("zeta3_floor", 1e-12);
    c.clip_norm = j.value("clip_norm", 100.0);
    if (j.contains("test_functions")) c.test_functions = j.at("test_functions").get<std::vector<std::string>>();
    if (j.contains("start")) c.start = j.at("start");
    c.threads = j.value("threads", 1);

    c.checkpoint_out = j.value("checkpoint_out", std::string(""));
    c.resume_from = j.value("resume_from", std::string(""));

    if (c.particles < 1 || c.precision < 1 || c.T < 1 || c.replicates < 0 || c.threads < 1)
        throw ConfigError("N, K, T, threads must be >= 1 and replicates >= 0");
    if ((!c.checkpoint_out.empty() || !c.resume_from.empty()) && (c.mode != "rml" || c.replicates != 1))
        throw ConfigError("checkpointing requires mode=rml with a single replicate");
    for (const auto& f : c.test_functions) make_test_function(f);  // validate

    if (c.outdir.empty()) {
        const char* env = std::getenv(outdir_env_var);
        if (env && *env) c.outdir = env;
        else c.outdir = "out";
    }

    c.raw = json{{"schema", 1},
                 {"mode", c.mode},
                 {"model", c.model},
                 {"estimator", c.estimator},
                 {"N", c.particles},
                 {"K", c.precision},
                 {"max_trials", c.max_trials},
                 {"schedule", {{"a", c.schedule.a}, {"kappa", c.schedule.kappa}}},
                 {"T", c.T},
                 {"replicates", c.replicates},
                 {"seed", c.seed},
                 {"outdir", c.outdir},
                 {"zeta3_floor", c.zeta3_floor},
                 {"clip_norm", c.clip_norm},
                 {"test_functions", c.test_functions},
                 {"start", c.start},
                 {"threads", c.threads},
                 {"checkpoint_out", c.checkpoint_out},
                 {"resume_from", c.resume_from}};
    return c;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

namespace {

Vec start_theta(const BuiltModel& bm, const ExperimentConfig& cfg, int replicate) {
    const std::string kind = cfg.start.value("kind", std::string("uniform_box"));
    auto gen = RunRng{cfg.seed + static_cast<uint64_t>(replicate)}.at(0, 0, StreamTag::start);
    Vec theta = bm.theta_star;
    if (kind == "fixed") {
        if (cfg.start.contains("theta")) theta = cfg.start.at("theta").get<Vec>();
    } else if (kind == "uniform_box") {
        const double radius = cfg.start.value("radius", 0.2);
        for (auto& v : theta) v += radius * (2.0 * gen.uniform01() - 1.0);
    } else if (kind == "gauss") {
        const double sd = cfg.start.value("sd", 1.0);
        for (auto& v : theta) v += sd * draw_normal(gen);
    } else {
        throw ConfigError("unknown start kind: " + kind);
    }
    bm.model->clamp(theta);
    if (!bm.model->admissible(theta)) throw ConfigError("starting parameters inadmissible after projection");
    return theta;
}

void write_simulation(const std::filesystem::path& dir, const BuiltModel& bm, const Trajectory& traj,
                      std::vector<std::string>& csv_paths) {
    if (bm.kind == "slam") {
        CsvWriter states((dir / "sim_states.csv").string());
        states.header({"t", "x1", "x2", "x3"});
        for (long t = 0; t < traj.length(); ++t) {
            const auto x = traj.state(t);
            states.cell(t).cell(x[0]).cell(x[1]).cell(x[2]);
            states.end_row();
        }
        CsvWriter obs((dir / "sim_obs.csv").string());
        obs.header({"t", "landmark", "range", "bearing"});
        for (long t = 0; t < traj.length(); ++t)
            for (const auto& s : std::get<SlamScan>(traj.observations[static_cast<size_t>(t)])) {
                obs.cell(t).cell(s.id).cell(s.range).cell(s.bearing);
                obs.end_row();
            }
        csv_paths.push_back((dir / "sim_states.csv").string());
        csv_paths.push_back((dir / "sim_obs.csv").string());
        return;
    }
    CsvWriter sim((dir / "sim.csv").string());
    std::vector<std::string> hdr = {"t"};
    for (int k = 0; k < traj.state_dim; ++k) hdr.push_back("x" + std::to_string(k + 1));
    hdr.push_back("y");
    sim.header(hdr);
    for (long t = 0; t < traj.length(); ++t) {
        sim.cell(t);
        for (double v : traj.state(t)) sim.cell(v);
        const auto& y = traj.observations[static_cast<size_t>(t)];
        if (std::holds_alternative<double>(y)) sim.cell(std::get<double>(y));
        else sim.cell(std::get<int>(y));
        sim.end_row();
    }
    csv_paths.push_back((dir / "sim.csv").string());
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ReplicateResult run_rml_replicate(const ExperimentConfig& cfg, const BuiltModel& bm, const Trajectory& traj,
                                  int replicate, const std::filesystem::path& dir, int inner_threads) {
    const Model& model = *bm.model;
    const int d = model.param_dim();
    const uint64_t rep_seed = cfg.seed + static_cast<uint64_t>(replicate);

    RmlConfig rcfg;
    rcfg.backward.precision = cfg.precision;
    rcfg.backward.max_trials = cfg.max_trials;
    rcfg.updater = cfg.estimator == "paris" ? BackwardUpdater::paris : BackwardUpdater::ffbsm;
    rcfg.schedule = cfg.schedule;
    rcfg.zeta3_floor = cfg.zeta3_floor;
    rcfg.clip_norm = cfg.clip_norm;
    rcfg.threads = inner_threads;

    ReplicateResult res;
    res.replicate = replicate;
    res.csv_path = (dir / ("rml_rep" + std::to_string(replicate) + ".csv")).string();

    CsvWriter csv(res.csv_path);
    std::vector<std::string> hdr = {"t"};
    for (int k = 0; k < d; ++k) hdr.push_back("theta_" + std::to_string(k));
    for (int k = 0; k < d; ++k) hdr.push_back("zeta_" + std::to_string(k));
    hdr.insert(hdr.end(), {"zeta3", "gamma", "skipped", "clipped"});
    csv.header(hdr);

    RmlState st;
    if (!cfg.resume_from.empty()) {
        st = load_checkpoint(cfg.resume_from);
        if (st.cloud.size() != cfg.particles) throw ConfigError("resume: particle count differs from config");
        if (st.seed != rep_seed) throw ConfigError("resume: checkpoint seed differs from config");
        if (st.time() > cfg.T) throw ConfigError("resume: checkpoint is beyond the requested horizon");
    } else {
        Vec theta0 = start_theta(bm, cfg, replicate);
        st = rml_init(model, theta0, traj.observations[0], cfg.particles, rep_seed, rcfg);
    }

    auto write_row = [&](long t) {
        csv.cell(t);
        for (double v : st.theta) csv.cell(v);
        if (st.diag.last_zeta.empty())
            for (int k = 0; k < d; ++k) csv.cell(0.0);
        else
            for (double v : st.diag.last_zeta) csv.cell(v);
        csv.cell(st.diag.last_zeta3).cell(st.diag.last_gamma);
        csv.cell(st.diag.last_skipped ? 1L : 0L).cell(st.diag.last_clipped ? 1L : 0L);
        csv.end_row();
    };
    csv.cell(0L);
    for (double v : st.theta) csv.cell(v);
    for (int k = 0; k < d; ++k) csv.cell(0.0);
    csv.cell(0.0).cell(0.0).cell(0L).cell(0L);
    csv.end_row();

    std::vector<double> step_seconds;
    step_seconds.reserve(static_cast<size_t>(cfg.T));
    for (long t = 0; t < cfg.T; ++t) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            rml_step(st, traj.observations[static_cast<size_t>(t + 1)], model, rcfg);
        } catch (const Collapsed&) {
            res.collapsed = true;
            res.abort_step = t + 1;
            break;
        }
        const auto t1 = std::chrono::steady_clock::now();
        step_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
        write_row(st.time());
    }
    res.theta_final = st.theta;
    res.median_step_seconds = median_of(std::move(step_seconds));
    res.skip_events = st.diag.skip_events;
    res.clip_events = st.diag.clip_events;
    return res;
}

ReplicateResult run_tangent_replicate(const ExperimentConfig& cfg, const BuiltModel& bm, const Trajectory& traj,
                                      int replicate, const std::filesystem::path& dir, int inner_threads) {
    const Model& model = *bm.model;
    const int d = model.param_dim();
    const uint64_t rep_seed = cfg.seed + static_cast<uint64_t>(replicate);

    TangentStepConfig tcfg;
    tcfg.backward.precision = cfg.precision;
    tcfg.backward.max_trials = cfg.max_trials;
    tcfg.updater = cfg.estimator == "paris" ? BackwardUpdater::paris : BackwardUpdater::ffbsm;
    tcfg.threads = inner_threads;

    ReplicateResult res;
    res.replicate = replicate;
    res.csv_path = (dir / ("tangent_rep" + std::to_string(replicate) + ".csv")).string();

    std::vector<std::function<double(std::span<const double>)>> fns;
    for (const auto& name : cfg.test_functions) fns.push_back(make_test_function(name));

    CsvWriter csv(res.csv_path);
    std::vector<std::string> hdr = {"t"};
    for (int k = 0; k < d; ++k) hdr.push_back("tau_bar_" + std::to_string(k));
    for (const auto& name : cfg.test_functions)
        for (int k = 0; k < d; ++k) hdr.push_back(name + "_" + std::to_string(k));
    csv.header(hdr);

    TangentState ts = tangent_init(model, bm.theta_star, cfg.particles, RunRng{rep_seed}, inner_threads);
    auto write_row = [&]() {
        csv.cell(ts.time());
        for (double v : ts.tau_bar) csv.cell(v);
        for (auto& f : fns) {
            const Vec m = tangent_measure(ts, f);
            for (double v : m) csv.cell(v);
        }
        csv.end_row();
    };
    write_row();

    std::vector<double> step_seconds;
    step_seconds.reserve(static_cast<size_t>(cfg.T));
    for (long t = 0; t < cfg.T; ++t) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            tangent_step(ts, traj.observations[static_cast<size_t>(t)], model, bm.theta_star, tcfg,
                         RunRng{rep_seed});
        } catch (const Collapsed&) {
            res.collapsed = true;
            res.abort_step = t + 1;
            break;
        }
        const auto t1 = std::chrono::steady_clock::now();
        step_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
        write_row();
    }
    res.theta_final = ts.tau_bar;  // mean statistic stands in for a final estimate
    res.median_step_seconds = median_of(std::move(step_seconds));
    return res;
}

}  // namespace

RunArtifact run(const ExperimentConfig& cfg) {
    RunArtifact art;
    art.outdir = cfg.outdir;
    std::filesystem::create_directories(art.outdir);

    BuiltModel bm = make_model(cfg.model);
    bm.model->check_admissible(bm.theta_star);

    art.config_echo = cfg.raw;
    art.config_echo["theta_star"] = bm.theta_star;
    art.config_echo["version"] = version_string;
    if (!bm.truth.is_null()) art.config_echo["truth"] = bm.truth;
    {
        std::ofstream out(art.outdir / "config.json");
        out << art.config_echo.dump(2) << "\n";
    }

    auto data_gen = RunRng{cfg.seed}.at(0, 0, StreamTag::data);
    const Trajectory traj = simulate(*bm.model, bm.theta_star, cfg.T, data_gen);
    write_simulation(art.outdir, bm, traj, art.csv_paths);

    if (cfg.mode != "simulate" && cfg.replicates > 0) {
        art.replicates.resize(static_cast<size_t>(cfg.replicates));
        const bool rep_parallel = cfg.threads > 1 && cfg.replicates > 1;
        const int outer = rep_parallel ? cfg.threads : 1;
        const int inner = rep_parallel ? 1 : cfg.threads;
        parallel_for(cfg.replicates, outer, [&](int lo, int hi) {
            for (int r = lo; r < hi; ++r)
                art.replicates[static_cast<size_t>(r)] =
                    cfg.mode == "rml" ? run_rml_replicate(cfg, bm, traj, r, art.outdir, inner)
                                      : run_tangent_replicate(cfg, bm, traj, r, art.outdir, inner);
        });
        for (const auto& r : art.replicates) {
            art.csv_paths.push_back(r.csv_path);
            art.any_collapsed = art.any_collapsed || r.collapsed;
        }
    }

    // summary: final estimates, replicate variance, timing; recomputable
    // from the CSVs except the timings
    json reps = json::array();
    std::vector<double> medians;
    int completed = 0;
    for (const auto& r : art.replicates) {
        reps.push_back({{"replicate", r.replicate},
                        {"theta_final", r.theta_final},
                        {"collapsed", r.collapsed},
                        {"abort_step", r.abort_step},
                        {"median_step_seconds", r.median_step_seconds},
                        {"skip_events", r.skip_events},
                        {"clip_events", r.clip_events},
                        {"csv", std::filesystem::path(r.csv_path).filename().string()}});
        medians.push_back(r.median_step_seconds);
        if (!r.collapsed) ++completed;
    }
    json summary{{"schema", 1},
                 {"version", version_string},
                 {"mode", cfg.mode},
                 {"model_kind", bm.kind},
                 {"seed", cfg.seed},
                 {"theta_star", bm.theta_star},
                 {"replicates", reps},
                 {"collapsed_replicates", cfg.replicates - completed},
                 {"median_step_seconds", median_of(medians)}};
    if (cfg.mode == "rml" && completed >= 2) {
        const size_t d = bm.theta_star.size();
        Vec mean(d, 0.0), var(d, 0.0);
        for (const auto& r : art.replicates)
            if (!r.collapsed)
                for (size_t k = 0; k < d; ++k) mean[k] += r.theta_final[k];
        for (auto& v : mean) v /= completed;
        for (const auto& r : art.replicates)
            if (!r.collapsed)
                for (size_t k = 0; k < d; ++k) {
                    const double c = r.theta_final[k] - mean[k];
                    var[k] += c * c;
                }
        for (auto& v : var) v /= (completed - 1);
        summary["final_theta_mean"] = mean;
        summary["final_theta_variance"] = var;
    }
    art.summary = summary;
    {
        std::ofstream out(art.outdir / "summary.json");
        out << art.summary.dump(2) << "\n";
    }
    return art;
}

nlohmann::json compare(const ExperimentConfig& a, const ExperimentConfig& b) {
    if (a.model != b.model) throw ConfigError("compare: configs must share the model block");
    if (a.seed != b.seed) throw ConfigError("compare: configs must share the data seed");
    if (a.T != b.T) throw ConfigError("compare: configs must share T");
    if (a.outdir == b.outdir) throw ConfigError("compare: configs need distinct output directories");

    RunArtifact ra = run(a);
    RunArtifact rb = run(b);

    json pairs = json::array();
    const int n = std::min(a.replicates, b.replicates);
    for (int r = 0; r < n; ++r)
        pairs.push_back({{"replicate", r},
                         {"a_theta_final", ra.replicates[static_cast<size_t>(r)].theta_final},
                         {"b_theta_final", rb.replicates[static_cast<size_t>(r)].theta_final}});

    json report{{"schema", 1},
                {"a", ra.summary},
                {"b", rb.summary},
                {"paired_final_estimates", pairs}};
    if (ra.summary.contains("final_theta_variance") && rb.summary.contains("final_theta_variance")) {
        Vec va = ra.summary["final_theta_variance"].get<Vec>();
        Vec vb = rb.summary["final_theta_variance"].get<Vec>();
        Vec ratio(va.size(), 0.0);
        for (size_t k = 0; k < va.size(); ++k) ratio[k] = va[k] > 0.0 ? vb[k] / va[k] : 0.0;
        report["variance_ratio_b_over_a"] = ratio;
    }
    const double ma = ra.summary["median_step_seconds"].get<double>();
    const double mb = rb.summary["median_step_seconds"].get<double>();
    report["step_time_ratio_b_over_a"] = ma > 0.0 ? mb / ma : 0.0;
    return report;
}

std::vector<std::string> emit_plotdata(const RunArtifact& artifact) {
    const std::string path = (artifact.outdir / "plotdata.csv").string();
    CsvWriter out(path);
    out.header({"replicate", "t", "series", "value"});

    const bool slam_mse = artifact.config_echo.contains("truth") &&
                          artifact.config_echo.value("mode", std::string()) == "rml";
    Vec truth_theta;
    if (slam_mse) {
        const Vec landmarks = artifact.config_echo["truth"]["landmarks"].get<Vec>();
        const auto fixed = artifact.config_echo["truth"]["fixed"].get<std::vector<int>>();
        for (int id = 0; id < static_cast<int>(landmarks.size()) / 2; ++id) {
            if (std::find(fixed.begin(), fixed.end(), id) != fixed.end()) continue;
            truth_theta.push_back(landmarks[static_cast<size_t>(2 * id)]);
            truth_theta.push_back(landmarks[static_cast<size_t>(2 * id + 1)]);
        }
    }

    for (const auto& rep : artifact.replicates) {
        const CsvTable table = read_csv(rep.csv_path);
        const int tcol = table.col("t");
        for (const auto& row : table.rows) {
            const long t = static_cast<long>(row[static_cast<size_t>(tcol)]);
            for (size_t c = 0; c < table.columns.size(); ++c) {
                if (static_cast<int>(c) == tcol) continue;
                out.cell(static_cast<long>(rep.replicate)).cell(t).cell(table.columns[c]).cell(row[c]);
                out.end_row();
            }
            if (slam_mse) {
                double total = 0.0;
                const int pairs = static_cast<int>(truth_theta.size()) / 2;
                for (int p = 0; p < pairs; ++p) {
                    const double dx =
                        row[static_cast<size_t>(table.col("theta_" + std::to_string(2 * p)))] - truth_theta[static_cast<size_t>(2 * p)];
                    const double dy = row[static_cast<size_t>(table.col("theta_" + std::to_string(2 * p + 1)))] -
                                      truth_theta[static_cast<size_t>(2 * p + 1)];
                    const double mse = dx * dx + dy * dy;
                    total += mse;
                    out.cell(static_cast<long>(rep.replicate)).cell(t).cell("mse_landmark" + std::to_string(p)).cell(mse);
                    out.end_row();
                }
                if (pairs > 0) {
                    out.cell(static_cast<long>(rep.replicate)).cell(t).cell("mse_mean").cell(total / pairs);
                    out.end_row();
                }
            }
        }
    }
    return {path};
}

int oracle_check(bool verbose) {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok) {
        if (!ok) ++failures;
        if (verbose || !ok) std::printf("%s %s\n", ok ? "PASS" : "FAIL", name.c_str());
    };

    // analytic gradients vs central differences
    {
        SvModel sv(SvSpec{});
        Xoshiro256 gen(7);
        bool ok = true;
        for (int i = 0; i < 25 && ok; ++i) {
            const Vec th = {0.5 + 0.4 * gen.uniform01(), 0.05 + 0.3 * gen.uniform01(), 0.5 + gen.uniform01()};
            const double x = draw_normal(gen);
            const double xn = draw_normal(gen);
            const Observation y = draw_normal(gen);
            Vec analytic(3);
            sv.score_increment(th, 0, std::span(&x, 1), std::span(&xn, 1), y, analytic);
            const Vec fd = oracle::finite_diff(
                [&](const Vec& p) {
                    return sv.log_emission_density(p, 0, std::span(&x, 1), y) +
                           sv.log_transition_density(p, 0, std::span(&x, 1), std::span(&xn, 1));
                },
                th);
            for (int k = 0; k < 3; ++k) {
                const double scale = std::max(1.0, std::abs(fd[static_cast<size_t>(k)]));
                if (std::abs(analytic[static_cast<size_t>(k)] - fd[static_cast<size_t>(k)]) / scale > 1e-6) ok = false;
            }
        }
        check("sv score increment matches finite differences", ok);
    }

    // exact hmm tangent vs finite differences of the forward pass
    {
        HmmModel hmm(three_state_mixing_spec());
        Xoshiro256 gen(11);
        std::vector<Observation> ys;
        Vec th{0.55};
        auto traj = simulate(hmm, th, 30, gen);
        ys = traj.observations;
        auto exact = oracle::hmm_tangent_exact(hmm, th, ys);
        const Matrix fd = oracle::finite_diff_vec(
            [&](const Vec& p) { return oracle::hmm_forward(hmm, p, ys).back().predictor; }, th, 1e-6);
        bool ok = true;
        for (int j = 0; j < 3; ++j)
            if (std::abs(exact.back().tangent(0, j) - fd(0, j)) > 1e-8) ok = false;
        check("hmm exact tangent matches finite differences", ok);
    }

    // kalman log-likelihood vs a fine grid discretization
    {
        LgssmModel lg(LgssmSpec{0.7, 0.5, 0.4, true, false});
        Xoshiro256 gen(3);
        auto traj = simulate(lg, lg.nominal_theta(), 20, gen);
        const double exact = oracle::kalman_loglik(lg, lg.nominal_theta(), traj.observations);

        const int m = 400;
        const double sd = std::sqrt(lg.initial_var());
        const double lo = -6.0 * sd, hi = 6.0 * sd;
        const double w = (hi - lo) / m;
        Vec centers(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) centers[static_cast<size_t>(i)] = lo + (i + 0.5) * w;
        Matrix Q(m, m);
        Vec chi(static_cast<size_t>(m));
        double chi_sum = 0.0;
        for (int i = 0; i < m; ++i) {
            const double c = std::exp(-centers[static_cast<size_t>(i)] * centers[static_cast<size_t>(i)] /
                                      (2.0 * lg.initial_var()));
            chi[static_cast<size_t>(i)] = c;
            chi_sum += c;
            double rs = 0.0;
            for (int j = 0; j < m; ++j) {
                const double r = centers[static_cast<size_t>(j)] - 0.7 * centers[static_cast<size_t>(i)];
                Q(i, j) = std::exp(-r * r / (2.0 * 0.5));
                rs += Q(i, j);
            }
            for (int j = 0; j < m; ++j) Q(i, j) /= rs;
        }
        for (auto& c : chi) c /= chi_sum;
        std::vector<Vec> emis;
        for (const auto& y : traj.observations) {
            Vec g(static_cast<size_t>(m));
            for (int i = 0; i < m; ++i) {
                const double r = std::get<double>(y) - centers[static_cast<size_t>(i)];
                g[static_cast<size_t>(i)] = std::exp(-r * r / (2.0 * 0.4)) / std::sqrt(2.0 * std::numbers::pi * 0.4);
            }
            emis.push_back(std::move(g));
        }
        double grid_ll = 0.0;
        oracle::forward_pass(chi, Q, emis, &grid_ll);
        check("kalman log-likelihood matches grid discretization", std::abs(grid_ll - exact) < 1e-2);
    }

    return failures;
}

}  // namespace paristf
