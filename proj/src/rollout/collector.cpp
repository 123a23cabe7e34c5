#include "copo/rollout/collector.hpp"

#include <algorithm>
#include <cmath>

namespace copo::rollout {

Collector::Collector(env::SceneSpec scene, env::SimConfig sim_cfg, CollectorConfig cfg)
    : sim_(std::move(scene), sim_cfg),
      cfg_(cfg),
      act_rng_(mix_seed(cfg.base_seed, streams::kAction)),
      lcf_rng_(mix_seed(cfg.base_seed, streams::kLcf)) {}

void Collector::set_population(int n) { sim_.set_agent_count(n); }

void Collector::register_agent(int id, const env::Observation& obs, double mu, double sigma) {
    LiveAgent la;
    la.eps = lcf_rng_.normal();
    const double raw = mu + sigma * la.eps;
    la.phi = std::clamp(raw, -0.5 * kPi, 0.5 * kPi);
    la.clamped = la.phi != raw;
    la.obs = obs.data;
    la.slice.agent_id = id;
    live_.emplace(id, std::move(la));
}

void Collector::start_episode() {
    const auto obs = sim_.reset(mix_seed(mix_seed(cfg_.base_seed, streams::kEnv), episode_counter_));
    ++episode_counter_;
    tick_ = 0;
    episode_open_ = true;
    live_.clear();
    // mu/sigma are bound at collect() time; stash spawn draws until then.
    for (const auto& [id, ob] : obs) pending_initial_.emplace_back(id, ob);
}

std::vector<double> Collector::policy_input(const LiveAgent& la) const {
    if (!cfg_.feed_phi) return la.obs;
    std::vector<double> in = la.obs;
    in.push_back(la.phi / (0.5 * kPi));
    return in;
}

std::vector<double> Collector::critic_extra(
    int id, const std::map<int, std::vector<double>>& tick_actions) const {
    const AugmentSpec& aug = cfg_.augment;
    if (aug.mode == CriticAugment::none) return {};

    const int obs_dim = static_cast<int>(live_.at(id).obs.size());
    const Vec2 self_pos = sim_.state(id).position;

    if (aug.mode == CriticAugment::concat_k) {
        std::vector<std::pair<double, int>> by_dist;
        for (const auto& [oid, la] : live_) {
            if (oid == id) continue;
            by_dist.emplace_back((sim_.state(oid).position - self_pos).norm2(), oid);
        }
        std::sort(by_dist.begin(), by_dist.end());
        std::vector<double> extra(static_cast<size_t>(aug.k) * obs_dim, 0.0);
        for (int b = 0; b < aug.k && b < static_cast<int>(by_dist.size()); ++b) {
            const std::vector<double>& nb = live_.at(by_dist[b].second).obs;
            std::copy(nb.begin(), nb.end(), extra.begin() + static_cast<size_t>(b) * obs_dim);
        }
        return extra;
    }

    // mean-field variants: average obs (and actions) within the radius
    const std::vector<int> near = sim_.neighbors_within(id, aug.radius);
    const int act_dim = tick_actions.empty() ? 0 : static_cast<int>(tick_actions.begin()->second.size());
    const bool with_actions = aug.mode == CriticAugment::mean_field_cf;
    std::vector<double> extra(obs_dim + (with_actions ? act_dim : 0), 0.0);
    if (!near.empty()) {
        for (int oid : near) {
            const std::vector<double>& nb = live_.at(oid).obs;
            for (int d = 0; d < obs_dim; ++d) extra[d] += nb[d];
            if (with_actions && !tick_actions.empty()) {
                const std::vector<double>& na = tick_actions.at(oid);
                for (int d = 0; d < act_dim; ++d) extra[obs_dim + d] += na[d];
            }
        }
        const double inv = 1.0 / static_cast<double>(near.size());
        for (double& v : extra) v *= inv;
    }
    return extra;
}

void Collector::predict_values(const Nets& nets, const std::vector<double>& obs,
                               const std::vector<double>& extra, double* vi, double* vn,
                               double* vg) const {
    std::vector<double> in;
    in.reserve(obs.size() + extra.size());
    in.insert(in.end(), obs.begin(), obs.end());
    in.insert(in.end(), extra.begin(), extra.end());
    *vi = nets.value_i.value1(nets.eta, in.data());
    if (cfg_.need_value_n_g) {
        *vn = nets.value_n.value1(nets.psi, in.data());
        *vg = nets.value_g.value1(nets.omega, in.data());
    } else {
        *vn = 0.0;
        *vg = 0.0;
    }
}

void Collector::close_slice(LiveAgent& la, env::EndReason end, const Nets* bootstrap,
                            CollectedEpisode& out) {
    if (la.slice.steps.empty()) return;
    la.slice.end = end;
    if (end == env::EndReason::truncated && bootstrap) {
        // V(s_{t+1}) from the latest observation. For the action-augmented
        // critic the next-step neighbor actions do not exist yet; that
        // block stays zero.
        const std::map<int, std::vector<double>> no_actions;
        const std::vector<double> extra = critic_extra(la.slice.agent_id, no_actions);
        predict_values(*bootstrap, la.obs, extra, &la.slice.bootstrap_v_i,
                       &la.slice.bootstrap_v_n, &la.slice.bootstrap_v_g);
    }
    out.agents.push_back(std::move(la.slice));
    la.slice = AgentEpisode{};
    la.slice.agent_id = out.agents.back().agent_id;
}

std::vector<CollectedEpisode> Collector::collect(const Nets& nets, double lcf_mu,
                                                 double lcf_sigma, CollectStats& stats) {
    stats = CollectStats{};
    std::vector<CollectedEpisode> episodes;

    if (!episode_open_) start_episode();
    for (auto& [id, ob] : pending_initial_) register_agent(id, ob, lcf_mu, lcf_sigma);
    pending_initial_.clear();

    CollectedEpisode current;
    current.first_step = tick_;

    const int act_dim = nets.policy.action_dim();
    std::vector<double> mean(act_dim), log_std(act_dim), action(act_dim);

    while (stats.env_steps < cfg_.batch_env_steps) {
        if (tick_ >= cfg_.horizon) {
            // horizon end: close every live slice, retire the episode
            for (auto& [id, la] : live_) close_slice(la, env::EndReason::truncated, &nets, current);
            sim_.truncate_active();
            current.step_count = tick_ - current.first_step;
            if (!current.agents.empty()) episodes.push_back(std::move(current));
            ++stats.episodes_finished;
            start_episode();
            for (auto& [id, ob] : pending_initial_) register_agent(id, ob, lcf_mu, lcf_sigma);
            pending_initial_.clear();
            current = CollectedEpisode{};
            current.first_step = 0;
        }

        // pass 1: draw all actions in ascending id order
        std::map<int, std::vector<double>> tick_actions;
        for (auto& [id, la] : live_) {
            const std::vector<double> pin = policy_input(la);
            const double lp =
                nets.policy.sample1(nets.theta, pin.data(), act_rng_, action.data(), mean.data(),
                                    log_std.data());
            TransitionRecord rec;
            rec.agent_id = id;
            rec.step = tick_;
            rec.obs = la.obs;
            rec.action = action;
            rec.behavior_mean.assign(mean.begin(), mean.end());
            rec.behavior_log_std.assign(log_std.begin(), log_std.end());
            rec.log_prob_behavior = lp;
            rec.lcf_phi = la.phi;
            rec.lcf_eps = la.eps;
            rec.lcf_clamped = la.clamped;
            rec.position = sim_.state(id).position;
            la.slice.steps.push_back(std::move(rec));
            tick_actions.emplace(id, action);
        }

        // pass 2: critic features and value predictions off the same pre-step state
        for (auto& [id, la] : live_) {
            TransitionRecord& rec = la.slice.steps.back();
            rec.critic_extra = critic_extra(id, tick_actions);
            predict_values(nets, rec.obs, rec.critic_extra, &rec.v_i, &rec.v_n, &rec.v_g);
        }

        std::map<int, env::KinematicAction> commands;
        for (const auto& [id, a] : tick_actions) commands.emplace(id, env::KinematicAction{a[0], a[1]});
        const env::StepResult result = sim_.step(commands);

        for (const auto& [id, outcome] : result.outcomes) {
            LiveAgent& la = live_.at(id);
            TransitionRecord& rec = la.slice.steps.back();
            rec.r_individual = outcome.reward;
            rec.done = outcome.done;
            stats.reward_sum += outcome.reward;
            ++stats.sample_count;
            if (outcome.done) {
                ++stats.agents_done;
                if (outcome.reason == env::EndReason::success) ++stats.n_success;
                if (outcome.reason == env::EndReason::crash) ++stats.n_crash;
                if (outcome.reason == env::EndReason::out_of_road) ++stats.n_out;
                close_slice(la, outcome.reason, nullptr, current);
                live_.erase(id);
            }
        }
        for (int id : result.spawned) {
            register_agent(id, result.observations.at(id), lcf_mu, lcf_sigma);
        }
        for (const auto& [id, ob] : result.observations) live_.at(id).obs = ob.data;

        ++tick_;
        ++stats.env_steps;
    }

    // window edge: close open slices but keep the agents alive
    for (auto& [id, la] : live_) close_slice(la, env::EndReason::truncated, &nets, current);
    current.step_count = tick_ - current.first_step;
    if (!current.agents.empty()) episodes.push_back(std::move(current));
    return episodes;
}

}  // namespace copo::rollout
