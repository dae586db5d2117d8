#pragma once

#include <filesystem>
#include <memory>

#include <json.hpp>

#include "paristf/models/hmm.hpp"
#include "paristf/models/lgssm.hpp"
#include "paristf/models/slam.hpp"
#include "paristf/models/sv.hpp"
#include "paristf/rml.hpp"
#include "paristf/simulate.hpp"

namespace paristf {

inline constexpr const char* version_string = "0.1.0";
inline constexpr const char* outdir_env_var = "PARISTF_OUTDIR";

// Ready-made 3-state strongly mixing chains used by experiments and checks.
// The single parameter mixes the transition matrix towards a diagonally
// dominant one; the two-parameter variant also drives the emission table.
HmmSpec three_state_mixing_spec();
HmmSpec three_state_mixing_emission_spec();

struct BuiltModel {
    std::unique_ptr<Model> model;
    Vec theta_star;       // data-generating parameters in theta layout
    std::string kind;
    nlohmann::json truth;  // extra reference values (e.g. landmark positions)
};

BuiltModel make_model(const nlohmann::json& model_config);

// Full experiment description; mirrors the CLI flags. Unknown keys are
// rejected to keep config files honest.
struct ExperimentConfig {
    nlohmann::json raw;  // normalized echo, written next to the artifacts

    std::string mode = "rml";  // rml | tangent | simulate
    nlohmann::json model;
    std::string estimator = "paris";  // paris | ffbsm
    int particles = 100;
    int precision = 2;
    int max_trials = 100;
    StepSchedule schedule;
    long T = 100;
    int replicates = 1;
    uint64_t seed = 1;
    std::string outdir;
    double zeta3_floor = 1e-12;
    double clip_norm = 100.0;  // <= 0 disables
    std::vector<std::string> test_functions = {"identity"};
    nlohmann::json start = {{"kind", "uniform_box"}, {"radius", 0.2}};
    int threads = 1;
    std::string checkpoint_out;  // save the final estimator state (rml, single replicate)
    std::string resume_from;     // continue from a saved state instead of initializing
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

struct ReplicateResult {
    int replicate = 0;
    Vec theta_final;
    bool collapsed = false;
    long abort_step = -1;
    double median_step_seconds = 0.0;
    long skip_events = 0;
    long clip_events = 0;
    std::string csv_path;
};

struct RunArtifact {
    std::filesystem::path outdir;
    nlohmann::json config_echo;
    std::vector<std::string> csv_paths;
    nlohmann::json summary;
    std::vector<ReplicateResult> replicates;
    bool any_collapsed = false;
};

// Simulate -> estimator loop -> artifacts, deterministic given the seed.
RunArtifact run(const ExperimentConfig& config);

// Paired study of two runs sharing model, data seed and T; reports final
// estimates, replicate variances, their ratios and the wall-time ratio.
nlohmann::json compare(const ExperimentConfig& a, const ExperimentConfig& b);

// Tidy long-format CSV (replicate, t, series, value) derived from the
// per-step CSVs of an artifact; SLAM runs also get per-landmark MSE series.
std::vector<std::string> emit_plotdata(const RunArtifact& artifact);

// Named test functions: one, identity, square, coord:<k>, indicator:<j>.
std::function<double(std::span<const double>)> make_test_function(const std::string& name);

// Oracle self-consistency suite (gradients vs finite differences, exact
// recursions vs brute force); returns the number of failed checks and
// prints one line per check.
int oracle_check(bool verbose);

}  // namespace paristf
