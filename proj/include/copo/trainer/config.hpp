#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace copo::trainer {

enum class Algorithm { ipo, mfpo_concat, mfpo_mean, mfpo_mean_cf, copo, curriculum };

Algorithm parse_algorithm(const std::string& name);  // throws on unknown name
const char* algorithm_name(Algorithm a);

// Every knob of one training run. Defaults are the reference operating
// point; parse() rejects unknown keys so config typos fail loudly.
struct RunConfig {
    std::string scene;  // scene file path or builtin name
    Algorithm algorithm = Algorithm::copo;

    double clip_eps = 0.2;
    double kl_coeff = 1.0;
    double lr = 3e-4;
    int kp_epochs = 5;
    int kphi_epochs = 5;
    int minibatch = 512;
    int batch_env_steps = 1024;
    double gamma = 0.99;         // individual + neighborhood streams
    double gamma_global = 1.0;
    double gae_lambda = 0.95;
    double neighbor_radius = 10.0;
    double lcf_lr = 1e-4;
    double lcf_init_mean = 0.0;  // radians
    double lcf_init_std = 0.1;
    bool lcf_update = true;
    int horizon = 1000;
    bool feed_phi_to_policy = false;
    double entropy_coeff = 0.0;
    bool advantage_norm = true;
    std::vector<int> hidden = {256, 256};
    double log_std_init = -1.0;  // exploration noise that still leaves the mean action usable
    int agent_count = 0;  // 0 = scene's target
    int mfpo_k = 4;
    double mfpo_radius = 10.0;

    std::vector<std::uint64_t> seeds = {0};
    std::string out_dir = "runs";
    int checkpoint_every = 10;  // iterations
    long long max_env_steps = 1000000;
    int workers = 1;

    // parse key=value text; `overrides` are extra key=value pairs applied
    // after the file, e.g. from the command line
    static RunConfig parse(const std::string& text, const std::string& source_name,
                           const std::vector<std::string>& overrides = {});
    static RunConfig parse_file(const std::string& path,
                                const std::vector<std::string>& overrides = {});

    std::string serialize() const;
    void validate() const;  // throws on out-of-range values
};

}  // namespace copo::trainer
