#include "copo/eval/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "copo/env/simulator.hpp"
#include "copo/util/ini.hpp"
#include "copo/util/rng.hpp"

namespace copo::eval {
namespace {

int nearest_spawn_group(const env::SceneSpec& scene, const Vec2& p) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < scene.spawn_points.size(); ++i) {
        const double d = (scene.spawn_points[i].position - p).norm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

struct EpisodeScratch {
    std::map<int, std::vector<double>> obs;  // learned agents only
    std::map<int, bool> learned;
    std::map<int, int> group;
    int spawned = 0;
    int learned_count = 0;
};

EpisodeMetrics run_episode(const env::SceneSpec& scene, const net::Policy& policy,
                           const net::ParamSet& theta, bool feed_phi, double phi,
                           const EvalConfig& cfg, int episode, std::vector<TrajPoint>* pts) {
    env::SimConfig sc;
    sc.agent_count = cfg.initial_agents;
    env::Simulator sim(scene, sc);

    EpisodeScratch ep;
    EpisodeMetrics m;
    m.steps = cfg.horizon;

    auto admit = [&](int id, const env::Observation& obs) {
        ep.group[id] = nearest_spawn_group(scene, sim.state(id).position);
        ++ep.spawned;
        const bool learn =
            ep.learned_count < std::llround((1.0 - cfg.idm_fraction) * ep.spawned);
        ep.learned[id] = learn;
        if (learn) {
            ++ep.learned_count;
            ++m.n_total;
            ep.obs[id] = obs.data;
        }
        if (pts)
            pts->push_back({episode, sim.step_count(), id, ep.group[id],
                            sim.state(id).position.x, sim.state(id).position.y, false});
    };

    std::map<int, env::Observation> first = sim.reset(mix_seed(mix_seed(cfg.seed, streams::kEval), episode));
    for (const auto& [id, obs] : first) admit(id, obs);

    const int act_dim = policy.action_dim();
    std::vector<double> input(policy.mlp.shape().input);
    std::vector<double> mean(act_dim), log_std(act_dim);

    for (int t = 0; t < cfg.horizon; ++t) {
        std::map<int, env::KinematicAction> actions;
        for (int id : sim.active_ids()) {
            if (ep.learned.at(id)) {
                const std::vector<double>& o = ep.obs.at(id);
                std::copy(o.begin(), o.end(), input.begin());
                if (feed_phi) input.back() = phi / (0.5 * kPi);
                policy.head1(theta, input.data(), mean.data(), log_std.data());
                actions[id] = {mean[0], mean[1]};
            } else {
                actions[id] = idm_action(sim, id, cfg.idm);
            }
        }

        env::StepResult res = sim.step(actions);

        for (const auto& [id, out] : res.outcomes) {
            if (out.done) {
                if (ep.learned.at(id)) {
                    if (out.reason == env::EndReason::success) ++m.n_success;
                    else if (out.reason == env::EndReason::crash) ++m.n_crash;
                    else if (out.reason == env::EndReason::out_of_road) ++m.n_out;
                }
                if (pts)
                    pts->push_back({episode, sim.step_count(), id, ep.group.at(id),
                                    out.position.x, out.position.y,
                                    out.reason == env::EndReason::crash});
                ep.obs.erase(id);
            }
        }
        for (int id : res.spawned) admit(id, res.observations.at(id));
        for (auto& [id, obs] : res.observations) {
            if (ep.learned.at(id)) ep.obs[id] = obs.data;
            const bool fresh =
                std::find(res.spawned.begin(), res.spawned.end(), id) != res.spawned.end();
            if (pts && !fresh)
                pts->push_back({episode, sim.step_count(), id, ep.group.at(id),
                                sim.state(id).position.x, sim.state(id).position.y, false});
        }
    }
    return m;
}

}  // namespace

EvalResult evaluate(const env::SceneSpec& scene, const net::Policy& policy,
                    const net::ParamSet& theta, bool feed_phi, double phi,
                    const EvalConfig& cfg) {
    if (cfg.idm_fraction < 0.0 || cfg.idm_fraction >= 1.0)
        throw std::invalid_argument("idm_fraction must be in [0, 1)");
    if (cfg.n_episodes < 1) throw std::invalid_argument("n_episodes must be >= 1");
    const int want = env::Observation::kDim + (feed_phi ? 1 : 0);
    if (policy.mlp.shape().input != want)
        throw std::invalid_argument("policy input dimension " +
                                    std::to_string(policy.mlp.shape().input) +
                                    " does not match observation dimension " +
                                    std::to_string(want));

    EvalResult out;
    out.per_episode.resize(cfg.n_episodes);
    std::vector<std::vector<TrajPoint>> traj(cfg.n_episodes);

    const int workers = std::max(1, std::min(cfg.workers, cfg.n_episodes));
    std::atomic<int> next{0};
    std::mutex err_mu;
    std::exception_ptr first_error;

    auto body = [&]() {
        try {
            for (int e = next.fetch_add(1); e < cfg.n_episodes; e = next.fetch_add(1)) {
                out.per_episode[e] = run_episode(scene, policy, theta, feed_phi, phi, cfg, e,
                                                 cfg.record ? &traj[e] : nullptr);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(err_mu);
            if (!first_error) first_error = std::current_exception();
        }
    };

    if (workers == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    for (int e = 0; e < cfg.n_episodes; ++e) {
        out.aggregate += out.per_episode[e];
        out.points.insert(out.points.end(), traj[e].begin(), traj[e].end());
    }
    return out;
}

void write_trajectories(const std::vector<TrajPoint>& pts, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "episode,step,agent_id,spawn_group,x,y,crash\n";
    char buf[160];
    for (const TrajPoint& p : pts) {
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.6f,%.6f,%d\n", p.episode, p.step,
                      p.agent_id, p.spawn_group, p.x, p.y, p.crash ? 1 : 0);
        f << buf;
    }
}

std::vector<TrajPoint> read_trajectories(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::vector<TrajPoint> pts;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (lineno == 1 || line.empty()) continue;  // header
        TrajPoint p;
        int crash = 0;
        if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%lf,%lf,%d", &p.episode, &p.step, &p.agent_id,
                        &p.spawn_group, &p.x, &p.y, &crash) != 7)
            throw ParseError(path, lineno, "bad trajectory row: " + line);
        p.crash = crash != 0;
        pts.push_back(p);
    }
    return pts;
}

}  // namespace copo::eval
