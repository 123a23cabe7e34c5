#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "copo/rollout/types.hpp"

namespace copo::rollout {

// Column-flattened training data. Row i of a matrix column lives at
// [i*dim, (i+1)*dim). `order` is the shuffled visiting sequence; epochs
// walk minibatches of it.
struct SampleBatch {
    int count = 0;
    int obs_dim = 0, act_dim = 0, extra_dim = 0;

    std::vector<double> obs, extra, action;
    std::vector<double> behavior_mean, behavior_log_std, log_prob_behavior;
    std::vector<double> adv_i, adv_n, adv_g;
    std::vector<double> tgt_i, tgt_n, tgt_g;
    std::vector<double> lcf_phi, lcf_eps;
    std::vector<std::uint8_t> lcf_clamped;
    std::vector<int> order;

    int minibatch_count(int mb_size) const {
        return mb_size > 0 ? (count + mb_size - 1) / mb_size : 0;
    }
    std::pair<const int*, int> minibatch(int m, int mb_size) const {
        const int begin = m * mb_size;
        const int len = std::min(mb_size, count - begin);
        return {order.data() + begin, len};
    }
};

// Flattens episodes in deterministic order, optionally standardizes each
// advantage column (mean 0, std 1), and writes a seeded shuffle into
// `order`. Throws on an empty episode set.
SampleBatch build_batch(const std::vector<CollectedEpisode>& episodes, bool normalize_adv,
                        std::uint64_t shuffle_seed);

// Line-delimited transition dump for offline inspection.
void write_batch_dump(const std::vector<CollectedEpisode>& episodes, const std::string& path);

}  // namespace copo::rollout
