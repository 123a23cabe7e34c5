// Single entry point for training, evaluation, trajectory plotting and the
// numeric self-checks. Exit codes: 0 ok, 2 bad configuration or arguments,
// 3 runtime failure, 4 failed gradient check.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "copo/check/gradcheck.hpp"
#include "copo/env/scene.hpp"
#include "copo/env/simulator.hpp"
#include "copo/eval/density.hpp"
#include "copo/eval/evaluate.hpp"
#include "copo/kernels/kernels.hpp"
#include "copo/net/checkpoint.hpp"
#include "copo/trainer/trainer.hpp"
#include "copo/util/ini.hpp"

namespace fs = std::filesystem;
using namespace copo;

namespace {

constexpr int kOk = 0;
constexpr int kUsageError = 2;
constexpr int kRuntimeError = 3;
constexpr int kCheckFailed = 4;

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? v : fallback;
}

// A scene is referenced either by path or by the bare name of a bundled
// file under scenes/.
env::SceneSpec resolve_scene(const std::string& ref) {
    if (fs::exists(ref)) return env::load_scene(ref);
    const fs::path bundled = fs::path("scenes") / (ref + ".ini");
    if (fs::exists(bundled)) return env::load_scene(bundled.string());
    throw ParseError(ref, 0, "scene not found (also tried " + bundled.string() + ")");
}

struct TrainArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::string out_dir;  // overrides the config when set
    bool fresh = false;
};

int cmd_train(const TrainArgs& args) {
    trainer::RunConfig cfg = trainer::RunConfig::parse_file(args.config, args.overrides);
    if (!args.out_dir.empty()) {
        cfg.out_dir = args.out_dir;
    } else if (cfg.out_dir == "runs") {  // built-in default: let the environment refine it
        cfg.out_dir = env_or("COPO_OUT_DIR", cfg.out_dir);
    }
    cfg.validate();
    if (cfg.scene.empty()) throw ParseError(args.config, 0, "config sets no scene");
    const env::SceneSpec scene = resolve_scene(cfg.scene);

    for (const std::uint64_t seed : cfg.seeds) {
        const fs::path run_dir = fs::path(cfg.out_dir) /
                                 (std::string(trainer::algorithm_name(cfg.algorithm)) + "_seed" +
                                  std::to_string(seed));
        fs::create_directories(run_dir);

        const fs::path cfg_copy = run_dir / "config.cfg";
        if (!fs::exists(cfg_copy)) {
            std::ofstream out(cfg_copy);
            out << cfg.serialize();
        }

        trainer::Trainer tr(scene, cfg, seed);
        const fs::path latest = run_dir / "latest.ckpt";
        if (!args.fresh && fs::exists(latest)) {
            tr.load_checkpoint(latest.string());
            std::printf("[seed %llu] resumed at iteration %d (%lld env steps)\n",
                        static_cast<unsigned long long>(seed), tr.iteration(),
                        tr.env_steps());
        }

        const fs::path metrics = run_dir / "metrics.csv";
        const bool fresh_metrics = !fs::exists(metrics) || fs::file_size(metrics) == 0;
        std::ofstream mf(metrics, std::ios::app);
        if (!mf) throw std::runtime_error("cannot open " + metrics.string());
        if (fresh_metrics) mf << trainer::IterationStats::csv_header() << '\n';

        while (!tr.finished()) {
            const trainer::IterationStats s = tr.train_iteration();
            mf << s.csv_row() << '\n';
            mf.flush();
            std::printf(
                "[seed %llu] iter %4d  steps %8lld  success %.3f  crashes %3.0f  kl %.4f  "
                "phi (%.4f, %.4f)\n",
                static_cast<unsigned long long>(seed), s.iteration, s.env_steps,
                s.success_rate, s.safety, s.mean_kl, s.phi_mu, s.phi_sigma);
            std::fflush(stdout);
            if (tr.iteration() % cfg.checkpoint_every == 0 || tr.finished()) {
                char name[32];
                std::snprintf(name, sizeof(name), "ckpt_%06d.bin", tr.iteration());
                tr.save_checkpoint((run_dir / name).string());
                tr.save_checkpoint(latest.string());
            }
        }
        tr.save_checkpoint(latest.string());
        std::printf("[seed %llu] done: %lld env steps, outputs in %s\n",
                    static_cast<unsigned long long>(seed), tr.env_steps(),
                    run_dir.string().c_str());
    }
    return kOk;
}

struct EvalArgs {
    std::string checkpoint;
    std::string scene;
    int episodes = 5;
    int horizon = 1000;
    std::uint64_t seed = 0;
    std::string initial_agents = "0";  // comma list, 0 = scene target
    double idm_fraction = 0.0;
    int workers = 1;
    std::string traj_out;
};

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    size_t pos = 0;
    while (pos <= text.size()) {
        const size_t comma = std::min(text.find(',', pos), text.size());
        const std::string tok = text.substr(pos, comma - pos);
        size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument("bad integer list entry: " + tok);
        out.push_back(v);
        pos = comma + 1;
    }
    return out;
}

int cmd_eval(const EvalArgs& args) {
    const env::SceneSpec scene = resolve_scene(args.scene);
    const net::Checkpoint ck = net::Checkpoint::load(args.checkpoint);
    const net::MlpShape shape = ck.get_shape("shape_theta");
    const bool feed_phi = shape.input == env::Observation::kDim + 1;
    if (shape.input != env::Observation::kDim && !feed_phi) {
        throw std::invalid_argument("checkpoint policy expects " + std::to_string(shape.input) +
                                    " inputs; this build observes " +
                                    std::to_string(env::Observation::kDim));
    }
    net::ParamSet theta(shape);
    const std::vector<double>& blob = ck.blob("theta");
    if (static_cast<int>(blob.size()) != theta.size())
        throw std::invalid_argument("checkpoint policy blob does not match its shape");
    theta.flat() = blob;
    const net::Policy policy(shape);
    const double phi = ck.get_double("phi_mu", 0.0);

    const std::vector<int> sweep = parse_int_list(args.initial_agents);

    std::printf(
        "initial_agents,episodes,n_total,n_success,n_crash,n_out,success_rate,efficiency,"
        "safety\n");
    for (size_t i = 0; i < sweep.size(); ++i) {
        eval::EvalConfig ec;
        ec.n_episodes = args.episodes;
        ec.horizon = args.horizon;
        ec.seed = args.seed;
        ec.initial_agents = sweep[i];
        ec.idm_fraction = args.idm_fraction;
        ec.workers = args.workers;
        ec.record = !args.traj_out.empty();
        const eval::EvalResult res = eval::evaluate(scene, policy, theta, feed_phi, phi, ec);
        const eval::EpisodeMetrics& m = res.aggregate;
        std::printf("%d,%d,%d,%d,%d,%d,%.6f,%.6f,%d\n", sweep[i], args.episodes, m.n_total,
                    m.n_success, m.n_crash, m.n_out, m.success_rate(), m.efficiency(), m.n_crash);
        std::fflush(stdout);
        if (!args.traj_out.empty()) {
            fs::path p(args.traj_out);
            if (sweep.size() > 1) {
                fs::path stem = p.stem();
                stem += "_" + std::to_string(sweep[i]);
                stem += p.extension();
                p = p.parent_path() / stem;
            }
            eval::write_trajectories(res.points, p.string());
            std::fprintf(stderr, "wrote %zu trajectory points to %s\n", res.points.size(),
                         p.string().c_str());
        }
    }
    return kOk;
}

struct PlotArgs {
    std::vector<std::string> files;
    std::string out_prefix = "density";
    double cell = 0.5;
};

int cmd_plot(const PlotArgs& args) {
    std::vector<eval::TrajPoint> pts;
    for (const std::string& f : args.files) {
        if (!fs::exists(f)) throw ParseError(f, 0, "trajectory file not found");
        std::vector<eval::TrajPoint> part = eval::read_trajectories(f);
        pts.insert(pts.end(), part.begin(), part.end());
    }
    if (pts.empty())
        throw std::invalid_argument("no trajectory points in the input set");

    const eval::DensityGrid grid = eval::trajectory_density(pts, args.cell);
    eval::write_density_pgm(grid, args.out_prefix + ".pgm");
    eval::write_density_ppm(grid, args.out_prefix + ".ppm");
    eval::write_density_text(grid, args.out_prefix + ".txt");
    std::printf("%llu points over a %dx%d grid (%d spawn groups, %zu crash sites)\n",
                static_cast<unsigned long long>(grid.total), grid.w, grid.h, grid.groups,
                grid.crashes.size());
    std::printf("wrote %s.pgm, %s.ppm, %s.txt\n", args.out_prefix.c_str(),
                args.out_prefix.c_str(), args.out_prefix.c_str());
    return kOk;
}

int cmd_gradcheck(const std::string& fixture) {
    const std::vector<check::FixtureReport> reports = check::run_fixtures(fixture);
    bool all_pass = true;
    for (const check::FixtureReport& r : reports) {
        std::printf("%-14s %s  max_rel_err=%.3e  tolerance=%.0e  %s\n", r.name.c_str(),
                    r.pass ? "PASS" : "FAIL", r.max_rel_err, r.tolerance, r.detail.c_str());
        all_pass = all_pass && r.pass;
    }
    return all_pass ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-driven particle traffic learner"};
    app.require_subcommand(1);

    std::string kernels = "auto";
    app.add_option("--kernels", kernels, "math backend: auto, scalar or avx2")
        ->capture_default_str();

    TrainArgs train_args;
    train_args.out_dir = "";
    CLI::App* train = app.add_subcommand("train", "train one or more seeds from a config file");
    train->add_option("--config", train_args.config, "run configuration file")->required();
    train->add_option("--override", train_args.overrides,
                      "key=value settings applied after the file")
        ->take_all();
    train->add_option("--out-dir", train_args.out_dir,
                      "output root (default: config value, or COPO_OUT_DIR)");
    train->add_flag("--fresh", train_args.fresh, "ignore an existing checkpoint and start over");

    EvalArgs eval_args;
    eval_args.workers = std::stoi(env_or("COPO_WORKERS", "1"));
    CLI::App* ev = app.add_subcommand("eval", "run deterministic evaluation episodes");
    ev->add_option("checkpoint", eval_args.checkpoint, "trained checkpoint file")->required();
    ev->add_option("--scene", eval_args.scene, "scene file or bundled name")->required();
    ev->add_option("--episodes", eval_args.episodes, "episodes per setting")
        ->capture_default_str();
    ev->add_option("--horizon", eval_args.horizon, "steps per episode")->capture_default_str();
    ev->add_option("--seed", eval_args.seed, "evaluation seed")->capture_default_str();
    ev->add_option("--initial-agents", eval_args.initial_agents,
                   "comma list of population settings; 0 keeps the scene target")
        ->capture_default_str();
    ev->add_option("--idm-fraction", eval_args.idm_fraction,
                   "share of spawns driven by the car-following heuristic, in [0, 1)")
        ->capture_default_str();
    ev->add_option("--workers", eval_args.workers, "episode-level parallelism (COPO_WORKERS)")
        ->capture_default_str();
    ev->add_option("--traj", eval_args.traj_out, "write per-step positions to this CSV");

    PlotArgs plot_args;
    CLI::App* plot = app.add_subcommand("plot", "render trajectory CSVs into density images");
    plot->add_option("files", plot_args.files, "trajectory CSV files")->required();
    plot->add_option("--out", plot_args.out_prefix, "output path prefix")->capture_default_str();
    plot->add_option("--cell", plot_args.cell, "histogram cell size in meters")
        ->capture_default_str();

    std::string fixture = "all";
    CLI::App* gc = app.add_subcommand("gradcheck", "run the numeric oracles");
    gc->add_option("fixture", fixture, "mlp, ppo_loss, gae, neighborhood, lcf_bandit or all")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        kern::set_backend(kern::parse_backend(kernels));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsageError;
    }

    try {
        if (app.got_subcommand(train)) return cmd_train(train_args);
        if (app.got_subcommand(ev)) return cmd_eval(eval_args);
        if (app.got_subcommand(plot)) return cmd_plot(plot_args);
        if (app.got_subcommand(gc)) return cmd_gradcheck(fixture);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsageError;
    } catch (const env::SceneError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsageError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntimeError;
    }
    return kOk;
}
