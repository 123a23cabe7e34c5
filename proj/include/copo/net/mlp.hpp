#pragma once

#include <vector>

#include "copo/net/params.hpp"

namespace copo::net {

// Post-activation outputs of every layer for a batch forward pass.
// act[l] holds batch x rows(l) values; the last entry is the net output.
struct MlpCache {
    int batch = 0;
    std::vector<std::vector<double>> act;
};

// Batched dense net with tanh hidden layers and a linear output layer.
// Parameters live in a ParamSet; this class is stateless apart from the
// shape, so forward passes on shared params are safe across threads as
// long as each thread owns its cache.
class Mlp {
public:
    Mlp() = default;
    explicit Mlp(MlpShape shape) : shape_(std::move(shape)) {}

    const MlpShape& shape() const { return shape_; }

    // x: batch x input, row-major. Output rows live in cache.act.back().
    void forward(const ParamSet& p, const double* x, int batch, MlpCache& cache) const;
    void forward1(const ParamSet& p, const double* x, double* y) const;

    // Accumulates dL/dparams into grad given dy = dL/doutput (batch x
    // output). cache must come from forward(p, x, batch). When dx is
    // non-null, writes dL/dx (batch x input, overwritten).
    void backward(const ParamSet& p, const double* x, int batch, const MlpCache& cache,
                  const double* dy, ParamSet& grad, double* dx = nullptr) const;

    // Forward-mode directional derivative: y_dot = J_params(output) · v,
    // evaluated per sample against an existing forward cache. y_dot is
    // resized to batch x output. The log-std block of v (if any) does not
    // affect the mean output and is ignored here.
    void jvp(const ParamSet& p, const ParamSet& v, const double* x, int batch,
             const MlpCache& cache, std::vector<double>& y_dot) const;

private:
    MlpShape shape_;
};

}  // namespace copo::net
