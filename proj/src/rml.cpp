#include "paristf/rml.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "paristf/parallel.hpp"

namespace paristf {

double step_size(const StepSchedule& schedule, long t) {
    if (t < 1) throw ConfigError("step_size: t must be >= 1");
    // a = 0 freezes the parameters, turning an RML run into a plain tangent run
    if (!(schedule.a >= 0.0) || schedule.kappa <= 0.5 || schedule.kappa > 1.0)
        throw ConfigError("step_size: need a >= 0 and kappa in (1/2, 1]");
    return schedule.a * std::pow(static_cast<double>(t), -schedule.kappa);
}

ZetaResult zeta_hat(const ParticleCloud& cloud, const BackwardStatistics& stats, const Observation& y,
                    const Model& model, const Vec& theta, double zeta3_floor, int threads) {
    const int n = cloud.size();
    const int d = model.param_dim();
    if (stats.count != n) throw std::logic_error("zeta_hat: stats/cloud size mismatch");

    Vec tau_bar(static_cast<size_t>(d), 0.0);
    for (int i = 0; i < n; ++i) {
        const auto row = stats.row(i);
        for (int k = 0; k < d; ++k) tau_bar[static_cast<size_t>(k)] += row[static_cast<size_t>(k)];
    }
    for (auto& v : tau_bar) v /= n;

    // per-particle g and grad g, filled in parallel, reduced in index order
    std::vector<double> g(static_cast<size_t>(n));
    std::vector<double> gg(static_cast<size_t>(n) * std::max(1, d));
    parallel_for(n, threads, [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            g[static_cast<size_t>(i)] = model.emission_density(theta, cloud.t, cloud.state(i), y);
            if (d > 0)
                model.emission_grad(theta, cloud.t, cloud.state(i), y,
                                    {gg.data() + static_cast<size_t>(i) * d, static_cast<size_t>(d)});
        }
    });

    ZetaResult out;
    out.triple.z1.assign(static_cast<size_t>(d), 0.0);
    out.triple.z2.assign(static_cast<size_t>(d), 0.0);
    double z3 = 0.0;
    for (int i = 0; i < n; ++i) {
        z3 += g[static_cast<size_t>(i)];
        const auto row = stats.row(i);
        for (int k = 0; k < d; ++k) {
            out.triple.z1[static_cast<size_t>(k)] += gg[static_cast<size_t>(i) * d + k];
            out.triple.z2[static_cast<size_t>(k)] +=
                (row[static_cast<size_t>(k)] - tau_bar[static_cast<size_t>(k)]) * g[static_cast<size_t>(i)];
        }
    }
    for (auto& v : out.triple.z1) v /= n;
    for (auto& v : out.triple.z2) v /= n;
    out.triple.z3 = z3 / n;

    if (!(out.triple.z3 > zeta3_floor) || !std::isfinite(out.triple.z3))
        throw DegenerateLikelihood("zeta_hat: predictive likelihood estimate below floor at t=" +
                                   std::to_string(cloud.t));

    out.zeta.assign(static_cast<size_t>(d), 0.0);
    for (int k = 0; k < d; ++k)
        out.zeta[static_cast<size_t>(k)] =
            (out.triple.z1[static_cast<size_t>(k)] + out.triple.z2[static_cast<size_t>(k)]) / out.triple.z3;
    return out;
}

Vec project(const Model& model, Vec theta) {
    model.clamp(theta);
    return theta;
}

RmlState rml_init(const Model& model, const Vec& theta0, const Observation& y0, int N, uint64_t seed,
                  const RmlConfig& config) {
    model.check_admissible(theta0);
    RmlState s;
    s.theta = theta0;
    s.seed = seed;
    s.cloud = init_cloud(model, theta0, N, RunRng{seed}, config.threads);
    s.stats = BackwardStatistics::zeros(N, model.param_dim(), 0);
    s.tau_bar.assign(static_cast<size_t>(model.param_dim()), 0.0);
    s.pending_obs = y0;
    return s;
}

void rml_step(RmlState& state, const Observation& y_next, const Model& model, const RmlConfig& config) {
    const RunRng rng{state.seed};
    const Vec theta_t = state.theta;  // every quantity in this step uses theta_t

    TangentState ts;
    ts.cloud = std::move(state.cloud);
    ts.stats = std::move(state.stats);
    ts.tau_bar = std::move(state.tau_bar);

    TangentStepConfig step_cfg;
    step_cfg.backward = config.backward;
    step_cfg.updater = config.updater;
    step_cfg.threads = config.threads;
    tangent_step(ts, state.pending_obs, model, theta_t, step_cfg, rng);

    state.cloud = std::move(ts.cloud);
    state.stats = std::move(ts.stats);
    state.tau_bar = std::move(ts.tau_bar);
    state.pending_obs = y_next;

    const long t_next = state.cloud.t;
    const double gamma = step_size(config.schedule, t_next);
    state.diag.last_gamma = gamma;
    state.diag.last_skipped = false;
    state.diag.last_clipped = false;

    try {
        ZetaResult z = zeta_hat(state.cloud, state.stats, y_next, model, theta_t, config.zeta3_floor,
                                config.threads);
        state.diag.last_zeta = z.zeta;
        state.diag.last_zeta3 = z.triple.z3;

        Vec dir = z.zeta;
        if (config.clip_norm > 0.0) {
            double nrm = 0.0;
            for (double v : dir) nrm += v * v;
            nrm = std::sqrt(nrm);
            if (nrm > config.clip_norm) {
                for (auto& v : dir) v *= config.clip_norm / nrm;
                state.diag.last_clipped = true;
                ++state.diag.clip_events;
            }
        }
        Vec theta_next = theta_t;
        for (size_t k = 0; k < theta_next.size(); ++k) theta_next[k] += gamma * dir[k];
        state.theta = project(model, std::move(theta_next));
    } catch (const DegenerateLikelihood&) {
        state.diag.last_skipped = true;
        state.diag.last_zeta.assign(theta_t.size(), 0.0);
        state.diag.last_zeta3 = 0.0;
        ++state.diag.skip_events;
        // theta unchanged
    }
}

namespace {

using nlohmann::json;

json observation_to_json(const Observation& y) {
    json j;
    if (std::holds_alternative<double>(y)) {
        j["kind"] = "scalar";
        j["value"] = std::get<double>(y);
    } else if (std::holds_alternative<int>(y)) {
        j["kind"] = "symbol";
        j["value"] = std::get<int>(y);
    } else {
        j["kind"] = "scan";
        json arr = json::array();
        for (const auto& s : std::get<SlamScan>(y)) arr.push_back({{"id", s.id}, {"range", s.range}, {"bearing", s.bearing}});
        j["value"] = arr;
    }
    return j;
}

Observation observation_from_json(const json& j) {
    const std::string kind = j.at("kind");
    if (kind == "scalar") return j.at("value").get<double>();
    if (kind == "symbol") return j.at("value").get<int>();
    if (kind == "scan") {
        SlamScan scan;
        for (const auto& e : j.at("value")) {
            LandmarkSighting s;
            s.id = e.at("id").get<int>();
            s.range = e.at("range").get<double>();
            s.bearing = e.at("bearing").get<double>();
            scan.push_back(s);
        }
        return scan;
    }
    throw ConfigError("checkpoint: unknown observation kind " + kind);
}

}  // namespace

void save_checkpoint(const std::string& path, const RmlState& state) {
    json j;
    j["schema"] = 1;
    j["theta"] = state.theta;
    j["seed"] = state.seed;
    j["t"] = state.cloud.t;
    j["state_dim"] = state.cloud.state_dim;
    j["states"] = state.cloud.states;
    j["ancestors"] = state.cloud.ancestors;
    j["stats_dim"] = state.stats.dim;
    j["stats"] = state.stats.values;
    j["pending_obs"] = observation_to_json(state.pending_obs);
    j["diag"] = {{"skip_events", state.diag.skip_events}, {"clip_events", state.diag.clip_events}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write checkpoint: " + path);
    out << j.dump(2) << "\n";
}

RmlState load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read checkpoint: " + path);
    json j;
    in >> j;
    if (j.at("schema").get<int>() != 1) throw ConfigError("checkpoint: unsupported schema");
    RmlState s;
    s.theta = j.at("theta").get<Vec>();
    s.seed = j.at("seed").get<uint64_t>();
    s.cloud.t = j.at("t").get<long>();
    s.cloud.state_dim = j.at("state_dim").get<int>();
    s.cloud.states = j.at("states").get<std::vector<double>>();
    s.cloud.ancestors = j.at("ancestors").get<std::vector<int>>();
    s.stats.t = s.cloud.t;
    s.stats.dim = j.at("stats_dim").get<int>();
    s.stats.count = s.cloud.size();
    s.stats.values = j.at("stats").get<std::vector<double>>();
    s.tau_bar = smoothed_estimate(s.stats);
    s.pending_obs = observation_from_json(j.at("pending_obs"));
    s.diag.skip_events = j.at("diag").at("skip_events").get<long>();
    s.diag.clip_events = j.at("diag").at("clip_events").get<long>();
    return s;
}

}  // namespace paristf
