#include "copo/rollout/rewards.hpp"

#include <algorithm>
#include <map>

#include "copo/util/spatial_hash.hpp"

namespace copo::rollout {

namespace {

struct StepSlot {
    int agent_id;
    TransitionRecord* rec;
};

// Per-step view over all records, slots sorted by agent id so both the
// hash path and the brute path accumulate sums in the same order.
std::vector<std::vector<StepSlot>> step_table(CollectedEpisode& ep) {
    std::vector<std::vector<StepSlot>> table(ep.step_count);
    for (AgentEpisode& ag : ep.agents) {
        for (TransitionRecord& rec : ag.steps) {
            table[rec.step - ep.first_step].push_back({rec.agent_id, &rec});
        }
    }
    for (auto& slots : table) {
        std::sort(slots.begin(), slots.end(),
                  [](const StepSlot& a, const StepSlot& b) { return a.agent_id < b.agent_id; });
    }
    return table;
}

}  // namespace

void fill_neighborhood_rewards(CollectedEpisode& episode, double radius) {
    auto table = step_table(episode);
    std::vector<int> near;
    for (auto& slots : table) {
        SpatialHash hash(radius);
        std::map<int, const TransitionRecord*> by_id;
        for (const StepSlot& s : slots) {
            hash.insert(s.agent_id, s.rec->position);
            by_id[s.agent_id] = s.rec;
        }
        for (const StepSlot& s : slots) {
            hash.query_radius(s.rec->position, radius, near);
            double sum = 0.0;
            int count = 0;
            for (int id : near) {
                if (id == s.agent_id) continue;
                sum += by_id.at(id)->r_individual;
                ++count;
            }
            s.rec->r_neighborhood = count > 0 ? sum / count : 0.0;
        }
    }
}

void fill_neighborhood_rewards_brute(CollectedEpisode& episode, double radius) {
    auto table = step_table(episode);
    const double r2 = radius * radius;
    for (auto& slots : table) {
        for (const StepSlot& s : slots) {
            double sum = 0.0;
            int count = 0;
            for (const StepSlot& o : slots) {
                if (o.agent_id == s.agent_id) continue;
                if ((o.rec->position - s.rec->position).norm2() <= r2) {
                    sum += o.rec->r_individual;
                    ++count;
                }
            }
            s.rec->r_neighborhood = count > 0 ? sum / count : 0.0;
        }
    }
}

void fill_global_rewards(CollectedEpisode& episode) {
    auto table = step_table(episode);
    for (auto& slots : table) {
        if (slots.empty()) continue;
        double sum = 0.0;
        for (const StepSlot& s : slots) sum += s.rec->r_individual;
        const double mean = sum / static_cast<double>(slots.size());
        for (const StepSlot& s : slots) s.rec->r_global = mean;
    }
}

double sum_global_returns(const CollectedEpisode& episode) {
    double total = 0.0;
    for (const AgentEpisode& ag : episode.agents) {
        for (const TransitionRecord& rec : ag.steps) total += rec.r_global;
    }
    return total;
}

double sum_step_rewards(const CollectedEpisode& episode) {
    double total = 0.0;
    for (const AgentEpisode& ag : episode.agents) {
        for (const TransitionRecord& rec : ag.steps) total += rec.r_individual;
    }
    return total;
}

}  // namespace copo::rollout
