#pragma once

namespace copo::eval {

// Population-level tallies over one or more episodes. n_total counts
// every tracked agent that spawned; agents still driving when the horizon
// hits stay in the denominator without succeeding or failing.
struct EpisodeMetrics {
    int n_total = 0;
    int n_success = 0;
    int n_crash = 0;
    int n_out = 0;
    long long steps = 0;

    int n_failure() const { return n_crash + n_out; }
    double success_rate() const {
        return n_total > 0 ? static_cast<double>(n_success) / n_total : 0.0;
    }
    double efficiency() const {
        return steps > 0 ? static_cast<double>(n_success - n_failure()) / steps : 0.0;
    }
    double safety() const { return static_cast<double>(n_crash); }

    EpisodeMetrics& operator+=(const EpisodeMetrics& o) {
        n_total += o.n_total;
        n_success += o.n_success;
        n_crash += o.n_crash;
        n_out += o.n_out;
        steps += o.steps;
        return *this;
    }
};

}  // namespace copo::eval
