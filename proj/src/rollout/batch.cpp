#include "copo/rollout/batch.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "copo/util/rng.hpp"

namespace copo::rollout {

namespace {

void standardize(std::vector<double>& col) {
    if (col.empty()) return;
    const double n = static_cast<double>(col.size());
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean);
    const double inv = 1.0 / (std::sqrt(var / n) + 1e-8);
    for (double& v : col) v = (v - mean) * inv;
}

}  // namespace

SampleBatch build_batch(const std::vector<CollectedEpisode>& episodes, bool normalize_adv,
                        std::uint64_t shuffle_seed) {
    SampleBatch b;
    for (const CollectedEpisode& ep : episodes) {
        for (const AgentEpisode& ag : ep.agents) b.count += static_cast<int>(ag.steps.size());
    }
    if (b.count == 0) throw std::invalid_argument("no transitions to batch");

    const TransitionRecord* probe = nullptr;
    for (const CollectedEpisode& ep : episodes) {
        for (const AgentEpisode& ag : ep.agents) {
            if (!ag.steps.empty()) {
                probe = &ag.steps.front();
                break;
            }
        }
        if (probe) break;
    }
    b.obs_dim = static_cast<int>(probe->obs.size());
    b.act_dim = static_cast<int>(probe->action.size());
    b.extra_dim = static_cast<int>(probe->critic_extra.size());

    b.obs.reserve(static_cast<size_t>(b.count) * b.obs_dim);
    b.action.reserve(static_cast<size_t>(b.count) * b.act_dim);
    for (const CollectedEpisode& ep : episodes) {
        for (const AgentEpisode& ag : ep.agents) {
            for (size_t t = 0; t < ag.steps.size(); ++t) {
                const TransitionRecord& rec = ag.steps[t];
                if (static_cast<int>(rec.obs.size()) != b.obs_dim ||
                    static_cast<int>(rec.critic_extra.size()) != b.extra_dim) {
                    throw std::invalid_argument("inconsistent record dimensions in batch");
                }
                b.obs.insert(b.obs.end(), rec.obs.begin(), rec.obs.end());
                b.extra.insert(b.extra.end(), rec.critic_extra.begin(), rec.critic_extra.end());
                b.action.insert(b.action.end(), rec.action.begin(), rec.action.end());
                b.behavior_mean.insert(b.behavior_mean.end(), rec.behavior_mean.begin(),
                                       rec.behavior_mean.end());
                b.behavior_log_std.insert(b.behavior_log_std.end(), rec.behavior_log_std.begin(),
                                          rec.behavior_log_std.end());
                b.log_prob_behavior.push_back(rec.log_prob_behavior);
                b.adv_i.push_back(ag.adv_i[t]);
                b.adv_n.push_back(ag.adv_n[t]);
                b.adv_g.push_back(ag.adv_g[t]);
                b.tgt_i.push_back(ag.tgt_i[t]);
                b.tgt_n.push_back(ag.tgt_n[t]);
                b.tgt_g.push_back(ag.tgt_g[t]);
                b.lcf_phi.push_back(rec.lcf_phi);
                b.lcf_eps.push_back(rec.lcf_eps);
                b.lcf_clamped.push_back(rec.lcf_clamped ? 1 : 0);
            }
        }
    }

    if (normalize_adv) {
        standardize(b.adv_i);
        standardize(b.adv_n);
        standardize(b.adv_g);
    }

    b.order.resize(b.count);
    std::iota(b.order.begin(), b.order.end(), 0);
    Rng rng(shuffle_seed);
    rng.shuffle(b.order);
    return b;
}

void write_batch_dump(const std::vector<CollectedEpisode>& episodes, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open batch dump for writing: " + path);
    out << "agent_id, step, x, y, r_individual, r_neighborhood, r_global, done, "
           "v_i, v_n, v_g, lcf_phi, lcf_eps, log_prob, action, obs\n";
    const auto join = [](const std::vector<double>& v) {
        std::string s;
        for (size_t i = 0; i < v.size(); ++i) {
            if (i) s += ';';
            s += std::to_string(v[i]);
        }
        return s;
    };
    for (const CollectedEpisode& ep : episodes) {
        for (const AgentEpisode& ag : ep.agents) {
            for (const TransitionRecord& rec : ag.steps) {
                out << rec.agent_id << ", " << rec.step << ", " << rec.position.x << ", "
                    << rec.position.y << ", " << rec.r_individual << ", " << rec.r_neighborhood
                    << ", " << rec.r_global << ", " << (rec.done ? 1 : 0) << ", " << rec.v_i
                    << ", " << rec.v_n << ", " << rec.v_g << ", " << rec.lcf_phi << ", "
                    << rec.lcf_eps << ", " << rec.log_prob_behavior << ", " << join(rec.action)
                    << ", " << join(rec.obs) << "\n";
            }
        }
    }
}

}  // namespace copo::rollout
