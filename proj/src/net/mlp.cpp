#include "copo/net/mlp.hpp"

#include <algorithm>
#include <stdexcept>

#include "copo/kernels/kernels.hpp"

namespace copo::net {

void Mlp::forward(const ParamSet& p, const double* x, int batch, MlpCache& cache) const {
    if (p.shape() != shape_) throw std::invalid_argument("parameter shape mismatch");
    const kern::Kernels& k = kern::active();
    const int layers = shape_.layer_count();

    cache.batch = batch;
    cache.act.resize(layers);
    for (int l = 0; l < layers; ++l) {
        cache.act[l].assign(static_cast<size_t>(batch) * shape_.rows(l), 0.0);
    }

    for (int b = 0; b < batch; ++b) {
        const double* in = x + static_cast<size_t>(b) * shape_.input;
        for (int l = 0; l < layers; ++l) {
            const int r = shape_.rows(l), c = shape_.cols(l);
            double* out = cache.act[l].data() + static_cast<size_t>(b) * r;
            k.affine(p.weights(l), in, p.bias(l), out, r, c);
            if (l + 1 < layers) {
                for (int i = 0; i < r; ++i) out[i] = std::tanh(out[i]);
            }
            in = out;
        }
    }
}

void Mlp::forward1(const ParamSet& p, const double* x, double* y) const {
    thread_local MlpCache cache;
    forward(p, x, 1, cache);
    const auto& out = cache.act.back();
    std::copy(out.begin(), out.end(), y);
}

void Mlp::backward(const ParamSet& p, const double* x, int batch, const MlpCache& cache,
                   const double* dy, ParamSet& grad, double* dx) const {
    if (p.shape() != shape_ || grad.shape() != shape_) {
        throw std::invalid_argument("parameter shape mismatch");
    }
    if (cache.batch != batch) throw std::invalid_argument("stale forward cache");
    const kern::Kernels& k = kern::active();
    const int layers = shape_.layer_count();

    int max_width = shape_.input;
    for (int l = 0; l < layers; ++l) max_width = std::max(max_width, shape_.rows(l));
    std::vector<double> dz(max_width), da(max_width);

    for (int b = 0; b < batch; ++b) {
        const int out_dim = shape_.output;
        std::copy(dy + static_cast<size_t>(b) * out_dim,
                  dy + static_cast<size_t>(b + 1) * out_dim, dz.begin());

        for (int l = layers - 1; l >= 0; --l) {
            const int r = shape_.rows(l), c = shape_.cols(l);
            const double* below = l == 0 ? x + static_cast<size_t>(b) * shape_.input
                                         : cache.act[l - 1].data() + static_cast<size_t>(b) * c;
            k.ger_acc(grad.weights(l), dz.data(), below, r, c);
            k.axpy(1.0, dz.data(), grad.bias(l), r);

            if (l == 0 && !dx) break;
            double* sink = l == 0 ? dx + static_cast<size_t>(b) * c : da.data();
            std::fill(sink, sink + c, 0.0);
            k.matvec_t_acc(p.weights(l), dz.data(), sink, r, c);
            if (l > 0) {
                for (int i = 0; i < c; ++i) dz[i] = sink[i] * (1.0 - below[i] * below[i]);
            }
        }
    }
}

void Mlp::jvp(const ParamSet& p, const ParamSet& v, const double* x, int batch,
              const MlpCache& cache, std::vector<double>& y_dot) const {
    if (p.shape() != shape_ || v.shape() != shape_) {
        throw std::invalid_argument("parameter shape mismatch");
    }
    if (cache.batch != batch) throw std::invalid_argument("stale forward cache");
    const kern::Kernels& k = kern::active();
    const int layers = shape_.layer_count();

    int max_width = shape_.input;
    for (int l = 0; l < layers; ++l) max_width = std::max(max_width, shape_.rows(l));
    std::vector<double> a_dot(max_width), z_dot(max_width), tmp(max_width);

    y_dot.assign(static_cast<size_t>(batch) * shape_.output, 0.0);
    for (int b = 0; b < batch; ++b) {
        for (int l = 0; l < layers; ++l) {
            const int r = shape_.rows(l), c = shape_.cols(l);
            const double* below = l == 0 ? x + static_cast<size_t>(b) * shape_.input
                                         : cache.act[l - 1].data() + static_cast<size_t>(b) * c;
            // z_dot = dW·a + db + W·a_dot  (a_dot is zero for the input layer)
            k.affine(v.weights(l), below, v.bias(l), z_dot.data(), r, c);
            if (l > 0) {
                k.affine(p.weights(l), a_dot.data(), nullptr, tmp.data(), r, c);
                k.axpy(1.0, tmp.data(), z_dot.data(), r);
            }
            if (l + 1 < layers) {
                const double* a = cache.act[l].data() + static_cast<size_t>(b) * r;
                for (int i = 0; i < r; ++i) a_dot[i] = (1.0 - a[i] * a[i]) * z_dot[i];
            } else {
                std::copy(z_dot.begin(), z_dot.begin() + r,
                          y_dot.begin() + static_cast<size_t>(b) * r);
            }
        }
    }
}

}  // namespace copo::net
