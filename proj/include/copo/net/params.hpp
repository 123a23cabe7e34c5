#pragma once

#include <vector>

#include "copo/util/rng.hpp"

namespace copo::net {

// Dense-net layout: per layer a row-major weight matrix plus a bias
// vector; policy nets carry a trailing free log-std block of output size.
struct MlpShape {
    int input = 0;
    std::vector<int> hidden;
    int output = 0;
    bool with_log_std = false;

    int layer_count() const { return static_cast<int>(hidden.size()) + 1; }
    int rows(int layer) const {
        return layer < static_cast<int>(hidden.size()) ? hidden[layer] : output;
    }
    int cols(int layer) const { return layer == 0 ? input : hidden[layer - 1]; }
    int param_count() const {
        int n = 0;
        for (int l = 0; l < layer_count(); ++l) n += rows(l) * (cols(l) + 1);
        return n + (with_log_std ? output : 0);
    }
    bool operator==(const MlpShape&) const = default;
};

// One flat parameter vector with per-layer views into it. Keeping the
// storage flat makes optimizer steps, gradient dots and checkpoints
// trivial; the views keep layer math readable.
class ParamSet {
public:
    ParamSet() = default;
    explicit ParamSet(const MlpShape& shape);

    const MlpShape& shape() const { return shape_; }
    int size() const { return static_cast<int>(flat_.size()); }
    std::vector<double>& flat() { return flat_; }
    const std::vector<double>& flat() const { return flat_; }

    double* weights(int layer) { return flat_.data() + w_off_[layer]; }
    const double* weights(int layer) const { return flat_.data() + w_off_[layer]; }
    double* bias(int layer) { return flat_.data() + b_off_[layer]; }
    const double* bias(int layer) const { return flat_.data() + b_off_[layer]; }
    double* log_std() { return log_std_off_ < 0 ? nullptr : flat_.data() + log_std_off_; }
    const double* log_std() const {
        return log_std_off_ < 0 ? nullptr : flat_.data() + log_std_off_;
    }
    int log_std_offset() const { return log_std_off_; }

    void zero();
    bool all_finite() const;

    // Uniform fan-based init for the tanh stack; the last layer is scaled
    // down so fresh policies start near-deterministic around zero mean.
    void init(Rng& rng, double final_layer_scale = 1.0, double log_std_init = 0.0);

private:
    MlpShape shape_;
    std::vector<double> flat_;
    std::vector<int> w_off_, b_off_;
    int log_std_off_ = -1;
};

}  // namespace copo::net
