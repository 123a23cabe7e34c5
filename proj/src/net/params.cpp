#include "copo/net/params.hpp"

#include <cmath>

namespace copo::net {

ParamSet::ParamSet(const MlpShape& shape) : shape_(shape) {
    const int layers = shape_.layer_count();
    w_off_.resize(layers);
    b_off_.resize(layers);
    int off = 0;
    for (int l = 0; l < layers; ++l) {
        w_off_[l] = off;
        off += shape_.rows(l) * shape_.cols(l);
        b_off_[l] = off;
        off += shape_.rows(l);
    }
    if (shape_.with_log_std) {
        log_std_off_ = off;
        off += shape_.output;
    }
    flat_.assign(off, 0.0);
}

void ParamSet::zero() { std::fill(flat_.begin(), flat_.end(), 0.0); }

bool ParamSet::all_finite() const {
    for (double v : flat_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void ParamSet::init(Rng& rng, double final_layer_scale, double log_std_init) {
    const int layers = shape_.layer_count();
    for (int l = 0; l < layers; ++l) {
        const int r = shape_.rows(l), c = shape_.cols(l);
        const double bound = std::sqrt(6.0 / (r + c));
        const double scale = l == layers - 1 ? final_layer_scale : 1.0;
        double* w = weights(l);
        for (int i = 0; i < r * c; ++i) w[i] = scale * rng.uniform(-bound, bound);
        double* b = bias(l);
        for (int i = 0; i < r; ++i) b[i] = 0.0;
    }
    if (double* ls = log_std()) {
        for (int i = 0; i < shape_.output; ++i) ls[i] = log_std_init;
    }
}

}  // namespace copo::net
