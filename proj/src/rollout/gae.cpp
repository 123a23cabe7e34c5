#include "copo/rollout/gae.hpp"

namespace copo::rollout {

void compute_gae(const double* r, const double* v, int n, double v_last, double gamma,
                 double lambda, double* adv, double* target) {
    double next_adv = 0.0;
    double next_v = v_last;
    for (int t = n - 1; t >= 0; --t) {
        const double delta = r[t] + gamma * next_v - v[t];
        next_adv = delta + gamma * lambda * next_adv;
        adv[t] = next_adv;
        target[t] = next_adv + v[t];
        next_v = v[t];
    }
}

void fill_advantages(CollectedEpisode& episode, double gamma_in, double gamma_global,
                     double lambda) {
    for (AgentEpisode& ag : episode.agents) {
        const int n = static_cast<int>(ag.steps.size());
        std::vector<double> r(n), v(n);
        ag.adv_i.resize(n);
        ag.adv_n.resize(n);
        ag.adv_g.resize(n);
        ag.tgt_i.resize(n);
        ag.tgt_n.resize(n);
        ag.tgt_g.resize(n);
        const bool boot = ag.truncated();

        for (int t = 0; t < n; ++t) {
            r[t] = ag.steps[t].r_individual;
            v[t] = ag.steps[t].v_i;
        }
        compute_gae(r.data(), v.data(), n, boot ? ag.bootstrap_v_i : 0.0, gamma_in, lambda,
                    ag.adv_i.data(), ag.tgt_i.data());

        for (int t = 0; t < n; ++t) {
            r[t] = ag.steps[t].r_neighborhood;
            v[t] = ag.steps[t].v_n;
        }
        compute_gae(r.data(), v.data(), n, boot ? ag.bootstrap_v_n : 0.0, gamma_in, lambda,
                    ag.adv_n.data(), ag.tgt_n.data());

        for (int t = 0; t < n; ++t) {
            r[t] = ag.steps[t].r_global;
            v[t] = ag.steps[t].v_g;
        }
        compute_gae(r.data(), v.data(), n, boot ? ag.bootstrap_v_g : 0.0, gamma_global, lambda,
                    ag.adv_g.data(), ag.tgt_g.data());
    }
}

}  // namespace copo::rollout
