#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "paristf/experiment.hpp"

namespace {

using nlohmann::json;

struct Overrides {
    std::string config_path;
    long N = -1, K = -1, T = -1, replicates = -1, threads = -1;
    long long seed = -1;
    std::string estimator, outdir;
    bool plotdata = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "JSON experiment config")->required();
    cmd->add_option("--N", o.N, "particle count override");
    cmd->add_option("--K", o.K, "backward precision override");
    cmd->add_option("--T", o.T, "time horizon override");
    cmd->add_option("--replicates", o.replicates, "replicate count override");
    cmd->add_option("--seed", o.seed, "seed override");
    cmd->add_option("--estimator", o.estimator, "paris | ffbsm");
    cmd->add_option("--outdir", o.outdir, "output directory override");
    cmd->add_option("--threads", o.threads, "worker count override");
    cmd->add_flag("--plotdata", o.plotdata, "also emit tidy plot data");
}

paristf::ExperimentConfig build_config(const Overrides& o, const std::string& mode) {
    std::ifstream in(o.config_path);
    if (!in) throw paristf::ConfigError("cannot open config: " + o.config_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw paristf::ConfigError(std::string("config parse error: ") + e.what());
    }
    j["mode"] = mode;
    if (o.N >= 0) j["N"] = o.N;
    if (o.K >= 0) j["K"] = o.K;
    if (o.T >= 0) j["T"] = o.T;
    if (o.replicates >= 0) j["replicates"] = o.replicates;
    if (o.seed >= 0) j["seed"] = static_cast<uint64_t>(o.seed);
    if (!o.estimator.empty()) j["estimator"] = o.estimator;
    if (!o.outdir.empty()) j["outdir"] = o.outdir;
    if (o.threads >= 1) j["threads"] = o.threads;
    return paristf::parse_config(j);
}

int run_mode(const Overrides& o, const std::string& mode) {
    const auto cfg = build_config(o, mode);
    const auto artifact = paristf::run(cfg);
    if (o.plotdata) paristf::emit_plotdata(artifact);
    std::printf("artifacts in %s\n", artifact.outdir.string().c_str());
    if (artifact.any_collapsed) {
        std::fprintf(stderr, "run collapsed; see summary.json\n");
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"particle tangent filters and online recursive maximum likelihood"};
    app.require_subcommand(1);

    Overrides sim_o, tan_o, rml_o;
    auto* sim = app.add_subcommand("simulate", "simulate a trajectory and write it as CSV");
    add_common(sim, sim_o);
    auto* tan = app.add_subcommand("tangent", "run the tangent-filter estimator on simulated data");
    add_common(tan, tan_o);
    auto* rml = app.add_subcommand("rml", "run online recursive maximum likelihood");
    add_common(rml, rml_o);

    std::string cfg_a, cfg_b, report_path = "compare.json";
    auto* cmp = app.add_subcommand("compare", "paired study of two estimator configurations");
    cmp->add_option("--config-a", cfg_a, "first config")->required();
    cmp->add_option("--config-b", cfg_b, "second config")->required();
    cmp->add_option("--out", report_path, "report path");

    bool oc_verbose = false;
    auto* oc = app.add_subcommand("oracle-check", "exact-reference self-consistency checks");
    oc->add_flag("--verbose", oc_verbose, "print passing checks too");

    try {
        app.parse(argc, argv);
        if (sim->parsed()) return run_mode(sim_o, "simulate");
        if (tan->parsed()) return run_mode(tan_o, "tangent");
        if (rml->parsed()) return run_mode(rml_o, "rml");
        if (cmp->parsed()) {
            const auto a = paristf::load_config_file(cfg_a);
            const auto b = paristf::load_config_file(cfg_b);
            const json report = paristf::compare(a, b);
            std::ofstream out(report_path);
            out << report.dump(2) << "\n";
            std::cout << report.dump(2) << "\n";
            return 0;
        }
        if (oc->parsed()) {
            const int failures = paristf::oracle_check(oc_verbose || true);
            return failures == 0 ? 0 : 1;
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const paristf::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const paristf::Collapsed& e) {
        std::fprintf(stderr, "collapsed run: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
