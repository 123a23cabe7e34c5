#include "copo/check/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "copo/net/gaussian.hpp"
#include "copo/net/mlp.hpp"
#include "copo/net/params.hpp"
#include "copo/net/policy.hpp"
#include "copo/rollout/batch.hpp"
#include "copo/rollout/gae.hpp"
#include "copo/rollout/rewards.hpp"
#include "copo/rollout/types.hpp"
#include "copo/trainer/lcf.hpp"
#include "copo/trainer/losses.hpp"
#include "copo/util/geom.hpp"
#include "copo/util/rng.hpp"

namespace copo::check {
namespace {

// max_i |a_i - f_i| scaled by the largest magnitude seen in either vector,
// so near-zero entries are judged against the overall gradient scale
// instead of exploding the quotient.
double rel_err(const std::vector<double>& analytic, const std::vector<double>& numeric) {
    double scale = 0.0;
    for (double x : analytic) scale = std::max(scale, std::fabs(x));
    for (double x : numeric) scale = std::max(scale, std::fabs(x));
    if (scale == 0.0) return 0.0;
    double worst = 0.0;
    for (size_t i = 0; i < analytic.size(); ++i)
        worst = std::max(worst, std::fabs(analytic[i] - numeric[i]));
    return worst / scale;
}

template <typename LossFn>
std::vector<double> central_fd(net::ParamSet& p, double h, LossFn loss) {
    std::vector<double> g(p.size());
    for (int i = 0; i < p.size(); ++i) {
        const double save = p.flat()[i];
        p.flat()[i] = save + h;
        const double up = loss();
        p.flat()[i] = save - h;
        const double dn = loss();
        p.flat()[i] = save;
        g[i] = (up - dn) / (2.0 * h);
    }
    return g;
}

std::string format_detail(const char* fmt, double a, double b, double c = 0.0, double d = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), fmt, a, b, c, d);
    return buf;
}

}  // namespace

FixtureReport check_mlp() {
    FixtureReport rep{"mlp", 0.0, 1e-5, false, ""};

    const net::MlpShape shape{3, {5, 4}, 2, true};
    net::Mlp mlp(shape);
    net::ParamSet p(shape);
    Rng rng(71);
    p.init(rng, 1.0, -0.2);

    const int batch = 4;
    std::vector<double> x(batch * shape.input), c(batch * shape.output);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    for (double& v : c) v = rng.uniform(-1.0, 1.0);

    // scalar probe L = sum c .* y so dL/dy = c
    net::MlpCache cache;
    mlp.forward(p, x.data(), batch, cache);
    net::ParamSet grad(shape);
    grad.zero();
    mlp.backward(p, x.data(), batch, cache, c.data(), grad);

    auto loss = [&]() {
        net::MlpCache cc;
        mlp.forward(p, x.data(), batch, cc);
        const std::vector<double>& y = cc.act.back();
        double s = 0.0;
        for (size_t i = 0; i < c.size(); ++i) s += c[i] * y[i];
        return s;
    };
    const std::vector<double> fd = central_fd(p, 1e-5, loss);
    const double err_back = rel_err(grad.flat(), fd);

    // forward mode against a directional difference quotient
    net::ParamSet dir(shape);
    for (double& v : dir.flat()) v = rng.uniform(-1.0, 1.0);
    std::vector<double> y_dot;
    mlp.jvp(p, dir, x.data(), batch, cache, y_dot);

    const double h = 1e-6;
    std::vector<double> y_up, y_dn;
    {
        net::ParamSet q = p;
        for (int i = 0; i < q.size(); ++i) q.flat()[i] += h * dir.flat()[i];
        net::MlpCache cc;
        mlp.forward(q, x.data(), batch, cc);
        y_up = cc.act.back();
        for (int i = 0; i < q.size(); ++i) q.flat()[i] = p.flat()[i] - h * dir.flat()[i];
        mlp.forward(q, x.data(), batch, cc);
        y_dn = cc.act.back();
    }
    std::vector<double> fd_dot(y_dot.size());
    for (size_t i = 0; i < fd_dot.size(); ++i) fd_dot[i] = (y_up[i] - y_dn[i]) / (2.0 * h);
    const double err_jvp = rel_err(y_dot, fd_dot);

    rep.max_rel_err = std::max(err_back, err_jvp);
    rep.pass = rep.max_rel_err < rep.tolerance;
    rep.detail = format_detail("backward %.3e, jvp %.3e", err_back, err_jvp);
    return rep;
}

FixtureReport check_ppo_loss() {
    FixtureReport rep{"ppo_loss", 0.0, 1e-5, false, ""};

    const int n = 24, obs_dim = 6, act_dim = 2, extra_dim = 3;
    const net::MlpShape pol_shape{obs_dim, {16, 16}, act_dim, true};
    const net::Policy policy(pol_shape);

    Rng rng(90210);
    net::ParamSet theta(pol_shape), theta_b(pol_shape);
    theta.init(rng, 1.0, -0.4);
    theta_b.init(rng, 1.0, -0.6);

    rollout::SampleBatch batch;
    batch.count = n;
    batch.obs_dim = obs_dim;
    batch.act_dim = act_dim;
    batch.extra_dim = extra_dim;
    batch.obs.resize(static_cast<size_t>(n) * obs_dim);
    batch.extra.resize(static_cast<size_t>(n) * extra_dim);
    batch.action.resize(static_cast<size_t>(n) * act_dim);
    batch.behavior_mean.resize(static_cast<size_t>(n) * act_dim);
    batch.behavior_log_std.resize(static_cast<size_t>(n) * act_dim);
    batch.log_prob_behavior.resize(n);
    batch.adv_i.resize(n);
    batch.tgt_i.resize(n);
    batch.lcf_phi.assign(n, 0.0);

    for (double& v : batch.obs) v = rng.uniform(-1.0, 1.0);
    for (double& v : batch.extra) v = rng.uniform(-1.0, 1.0);
    for (int k = 0; k < n; ++k) {
        double* m = batch.behavior_mean.data() + static_cast<size_t>(k) * act_dim;
        double* ls = batch.behavior_log_std.data() + static_cast<size_t>(k) * act_dim;
        double* a = batch.action.data() + static_cast<size_t>(k) * act_dim;
        policy.head1(theta_b, batch.obs.data() + static_cast<size_t>(k) * obs_dim, m, ls);
        for (int i = 0; i < act_dim; ++i) a[i] = m[i] + std::exp(ls[i]) * rng.normal();
        batch.log_prob_behavior[k] = net::gauss_log_prob(m, ls, a, act_dim);
        batch.adv_i[k] = rng.normal();
        batch.tgt_i[k] = rng.normal();
    }

    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;

    const double clip_eps = 0.2, kl_coeff = 1.0, entropy_coeff = 0.01;

    // how far every importance ratio sits from its active clip kink; the
    // finite-difference step below needs a smooth neighbourhood
    double kink_margin = 1e9;
    {
        std::vector<double> mean(act_dim), ls(act_dim);
        for (int k = 0; k < n; ++k) {
            policy.head1(theta, batch.obs.data() + static_cast<size_t>(k) * obs_dim, mean.data(),
                         ls.data());
            const double lp = net::gauss_log_prob(
                mean.data(), ls.data(), batch.action.data() + static_cast<size_t>(k) * act_dim,
                act_dim);
            const double ratio = std::exp(lp - batch.log_prob_behavior[k]);
            const double kink = batch.adv_i[k] > 0.0 ? 1.0 + clip_eps : 1.0 - clip_eps;
            kink_margin = std::min(kink_margin, std::fabs(ratio - kink));
        }
    }

    net::ParamSet grad(pol_shape);
    grad.zero();
    trainer::ppo_policy_loss(policy, theta, batch, idx.data(), n, batch.adv_i.data(), clip_eps, kl_coeff,
                    entropy_coeff, false, grad);
    auto policy_loss_value = [&]() {
        net::ParamSet g(pol_shape);
        g.zero();
        return trainer::ppo_policy_loss(policy, theta, batch, idx.data(), n, batch.adv_i.data(), clip_eps,
                               kl_coeff, entropy_coeff, false, g)
            .loss;
    };
    const std::vector<double> fd = central_fd(theta, 1e-5, policy_loss_value);
    const double err_policy = rel_err(grad.flat(), fd);

    // value head, with and without the appended critic features
    double err_value = 0.0;
    for (const bool with_extra : {false, true}) {
        const net::MlpShape vshape{obs_dim + (with_extra ? extra_dim : 0), {16, 16}, 1, false};
        const net::ValueNet vnet(vshape);
        net::ParamSet vp(vshape);
        vp.init(rng, 1.0, 0.0);
        net::ParamSet vgrad(vshape);
        vgrad.zero();
        trainer::value_loss(vnet, vp, batch, idx.data(), n, batch.tgt_i.data(), with_extra, vgrad);
        auto vloss = [&]() {
            net::ParamSet g(vshape);
            g.zero();
            return trainer::value_loss(vnet, vp, batch, idx.data(), n, batch.tgt_i.data(), with_extra, g);
        };
        err_value = std::max(err_value, rel_err(vgrad.flat(), central_fd(vp, 1e-5, vloss)));
    }

    // Clipped-branch law: once a sample's ratio is outside the window (and
    // the KL/entropy terms are off) its surrogate is a constant, so the
    // gradient must vanish identically, not merely approximately.
    bool clip_zero_exact = true;
    {
        rollout::SampleBatch one;
        one.count = 2;
        one.obs_dim = obs_dim;
        one.act_dim = act_dim;
        one.obs.assign(batch.obs.begin(), batch.obs.begin() + 2 * obs_dim);
        one.action.assign(batch.action.begin(), batch.action.begin() + 2 * act_dim);
        one.behavior_mean.assign(batch.behavior_mean.begin(),
                                 batch.behavior_mean.begin() + 2 * act_dim);
        one.behavior_log_std.assign(batch.behavior_log_std.begin(),
                                    batch.behavior_log_std.begin() + 2 * act_dim);
        one.log_prob_behavior.resize(2);
        one.adv_i = {1.0, -1.0};
        one.lcf_phi.assign(2, 0.0);

        std::vector<double> mean(act_dim), ls(act_dim);
        for (int k = 0; k < 2; ++k) {
            policy.head1(theta, one.obs.data() + static_cast<size_t>(k) * obs_dim, mean.data(),
                         ls.data());
            const double lp = net::gauss_log_prob(
                mean.data(), ls.data(), one.action.data() + static_cast<size_t>(k) * act_dim,
                act_dim);
            // force the ratio deep into the clipped region on both sides
            one.log_prob_behavior[k] = lp - std::log(k == 0 ? 2.0 : 0.3);
        }
        const int idx2[2] = {0, 1};
        net::ParamSet zg(pol_shape);
        zg.zero();
        const trainer::PolicyLossStats st =
            trainer::ppo_policy_loss(policy, theta, one, idx2, 2, one.adv_i.data(), clip_eps, 0.0, 0.0,
                            false, zg);
        for (double v : zg.flat())
            if (v != 0.0) clip_zero_exact = false;
        if (st.clip_frac != 1.0) clip_zero_exact = false;
    }

    rep.max_rel_err = std::max(err_policy, err_value);
    rep.pass = rep.max_rel_err < rep.tolerance && clip_zero_exact && kink_margin > 1e-3;
    rep.detail = format_detail("policy %.3e, value %.3e, clip margin %.2e", err_policy, err_value,
                               kink_margin) +
                 (clip_zero_exact ? ", clipped-branch grad exactly zero"
                                  : ", clipped-branch grad NONZERO");
    return rep;
}

FixtureReport check_gae() {
    FixtureReport rep{"gae", 0.0, 1e-12, false, ""};

    const double settings[3][2] = {{0.99, 0.95}, {1.0, 0.95}, {0.9, 0.5}};
    Rng rng(4242);
    double worst = 0.0;

    for (int ep = 0; ep < 100; ++ep) {
        const int n = 5 + rng.uniform_int(46);
        std::vector<double> r(n), v(n);
        for (double& x : r) x = rng.normal();
        for (double& x : v) x = rng.normal();
        const bool truncated = (ep % 2) == 1;
        const double v_last = truncated ? rng.normal() : 0.0;

        for (const double* gl : settings) {
            const double gamma = gl[0], lambda = gl[1];
            std::vector<double> adv(n), tgt(n);
            rollout::compute_gae(r.data(), v.data(), n, v_last, gamma, lambda, adv.data(),
                                 tgt.data());

            // direct second-order-cost evaluation of the same sums
            std::vector<double> adv_ref(n), tgt_ref(n);
            for (int t = 0; t < n; ++t) {
                double acc = 0.0, w = 1.0;
                for (int l = t; l < n; ++l) {
                    const double v_next = (l + 1 < n) ? v[l + 1] : v_last;
                    acc += w * (r[l] + gamma * v_next - v[l]);
                    w *= gamma * lambda;
                }
                adv_ref[t] = acc;
                tgt_ref[t] = acc + v[t];
            }
            worst = std::max(worst, rel_err(adv, adv_ref));
            worst = std::max(worst, rel_err(tgt, tgt_ref));
        }
    }

    rep.max_rel_err = worst;
    rep.pass = worst < rep.tolerance;
    rep.detail = format_detail("100 episodes x 3 (gamma, lambda) settings, worst %.3e", worst, 0.0);
    return rep;
}

FixtureReport check_neighborhood() {
    FixtureReport rep{"neighborhood", 0.0, 1e-12, false, ""};

    Rng rng(991);
    double worst = 0.0;
    bool bit_identical = true;

    for (int layout = 0; layout < 1000; ++layout) {
        const int k = 1 + rng.uniform_int(60);
        const int steps = 1 + rng.uniform_int(3);
        const double radius = rng.uniform(5.0, 15.0);

        rollout::CollectedEpisode ep;
        ep.first_step = 0;
        ep.step_count = steps;
        ep.agents.resize(k);
        for (int a = 0; a < k; ++a) {
            ep.agents[a].agent_id = a;
            ep.agents[a].steps.resize(steps);
            for (int t = 0; t < steps; ++t) {
                rollout::TransitionRecord& tr = ep.agents[a].steps[t];
                tr.agent_id = a;
                tr.step = t;
                tr.position = Vec2{rng.uniform(-40.0, 40.0), rng.uniform(-40.0, 40.0)};
                tr.r_individual = rng.normal();
            }
        }
        // coincident pair: zero distance must count as "within radius" in
        // both implementations
        if (k >= 2 && layout % 5 == 0) {
            for (int t = 0; t < steps; ++t)
                ep.agents[1].steps[t].position = ep.agents[0].steps[t].position;
        }

        rollout::CollectedEpisode ref = ep;
        rollout::fill_neighborhood_rewards(ep, radius);
        rollout::fill_neighborhood_rewards_brute(ref, radius);

        for (int a = 0; a < k; ++a) {
            for (int t = 0; t < steps; ++t) {
                const double x = ep.agents[a].steps[t].r_neighborhood;
                const double y = ref.agents[a].steps[t].r_neighborhood;
                if (x != y) bit_identical = false;
                worst = std::max(worst, std::fabs(x - y));
            }
        }
    }

    rep.max_rel_err = worst;
    rep.pass = worst <= rep.tolerance && bit_identical;
    rep.detail = std::string("1000 layouts, hash vs brute force ") +
                 (bit_identical ? "bit-identical" : format_detail("differ by %.3e", worst, 0.0));
    return rep;
}

FixtureReport check_lcf_bandit() {
    FixtureReport rep{"lcf_bandit", 0.0, 1e-3, false, ""};

    // Smallest interesting policy: 1 input, one 2-unit hidden layer,
    // scalar action, free log-std — 8 parameters. Two "agents" are told
    // apart by observation sign.
    const net::MlpShape shape{1, {2}, 1, true};
    const net::Policy policy(shape);
    net::ParamSet theta_old(shape);
    Rng rng(20270314);
    theta_old.init(rng, 1.0, -0.3);

    const int n = 40;
    rollout::SampleBatch batch;
    batch.count = n;
    batch.obs_dim = 1;
    batch.act_dim = 1;
    batch.obs.resize(n);
    batch.action.resize(n);
    batch.behavior_mean.resize(n);
    batch.behavior_log_std.resize(n);
    batch.log_prob_behavior.resize(n);
    batch.adv_i.resize(n);
    batch.adv_n.resize(n);
    batch.adv_g.resize(n);
    batch.lcf_phi.resize(n);
    batch.lcf_eps.resize(n);
    batch.lcf_clamped.assign(n, 0);

    const trainer::LcfDistribution dist{0.05, 0.12};

    for (int k = 0; k < n; ++k) {
        batch.obs[k] = (k % 2 == 0) ? 1.0 : -1.0;
        double mean = 0.0, ls = 0.0;
        policy.head1(theta_old, &batch.obs[k], &mean, &ls);
        const double noise = rng.normal();
        batch.action[k] = mean + std::exp(ls) * noise;
        batch.behavior_mean[k] = mean;
        batch.behavior_log_std[k] = ls;
        batch.log_prob_behavior[k] =
            net::gauss_log_prob(&mean, &ls, &batch.action[k], 1);
        // cooperation fixture: the neighbour is helped exactly when the
        // agent pushed its action above its own mean, so raising the
        // coordination angle must raise the population objective
        batch.adv_n[k] = noise;
        batch.adv_i[k] = 0.05 * rng.normal();
        batch.adv_g[k] = batch.adv_n[k] + 0.05 * rng.normal();
        // two draws land far outside the angle clamp: their pathwise
        // derivative is blocked and both sides must agree on that
        batch.lcf_eps[k] = (k == 0) ? 40.0 : (k == 1) ? -40.0 : rng.normal();
        const double raw = dist.mu + dist.sigma * batch.lcf_eps[k];
        batch.lcf_phi[k] = dist.sample(batch.lcf_eps[k]);
        batch.lcf_clamped[k] = (raw < -0.5 * kPi || raw > 0.5 * kPi) ? 1 : 0;
    }

    // exact one-step inner update: theta_new = theta_old +
    // alpha * grad of mean_k[log pi(a_k|o_k) * advC_k]
    const double alpha = 0.05;
    const double raw_ls = theta_old.log_std()[0];
    const double ls_old = net::clamp_log_std(raw_ls);

    auto inner_update = [&](const std::vector<double>& advc) {
        net::ParamSet g(shape);
        g.zero();
        net::MlpCache cache;
        policy.mlp.forward(theta_old, batch.obs.data(), n, cache);
        const std::vector<double>& mean = cache.act.back();
        std::vector<double> dmean(n, 0.0);
        double dls = 0.0;
        for (int k = 0; k < n; ++k) {
            net::gauss_log_prob_grad(&mean[k], &ls_old, &batch.action[k], 1, advc[k] / n,
                                     &dmean[k], &dls);
        }
        policy.mlp.backward(theta_old, batch.obs.data(), n, cache, dmean.data(), g);
        if (raw_ls >= net::kLogStdMin && raw_ls <= net::kLogStdMax) g.log_std()[0] += dls;

        net::ParamSet theta_new = theta_old;
        for (int i = 0; i < theta_new.size(); ++i) theta_new.flat()[i] += alpha * g.flat()[i];
        return theta_new;
    };

    auto surrogate_at = [&](double mu, double sigma) {
        trainer::LcfDistribution d{mu, sigma};
        std::vector<double> advc(n);
        for (int k = 0; k < n; ++k) {
            advc[k] = trainer::coordinated_advantage(batch.adv_i[k], batch.adv_n[k],
                                                     d.sample(batch.lcf_eps[k]));
        }
        const net::ParamSet theta_new = inner_update(advc);
        return trainer::lcf_prepare(policy, theta_old, theta_new, batch, 0.2, false).surrogate;
    };

    // analytic path: the same machinery the trainer runs
    std::vector<double> advc0(n);
    for (int k = 0; k < n; ++k)
        advc0[k] = trainer::coordinated_advantage(batch.adv_i[k], batch.adv_n[k],
                                                  batch.lcf_phi[k]);
    const net::ParamSet theta_new0 = inner_update(advc0);
    const trainer::LcfWorkspace ws =
        trainer::lcf_prepare(policy, theta_old, theta_new0, batch, 0.2, false);
    const trainer::LcfGradient g = trainer::lcf_gradient(ws, batch, dist);
    // with the exact one-step inner map the chain rule carries the inner
    // learning rate through as a plain factor
    const double an_mu = alpha * g.d_mu;
    const double an_sigma = alpha * g.d_sigma;

    const double h = 1e-4;
    const double fd_mu =
        (surrogate_at(dist.mu + h, dist.sigma) - surrogate_at(dist.mu - h, dist.sigma)) /
        (2.0 * h);
    const double fd_sigma =
        (surrogate_at(dist.mu, dist.sigma + h) - surrogate_at(dist.mu, dist.sigma - h)) /
        (2.0 * h);

    rep.max_rel_err = rel_err({an_mu, an_sigma}, {fd_mu, fd_sigma});
    const bool sign_ok = fd_mu > 0.0 && an_mu > 0.0;
    rep.pass = rep.max_rel_err < rep.tolerance && sign_ok;
    rep.detail = format_detail("d_mu %.6e (fd %.6e), d_sigma %.6e (fd %.6e)", an_mu, fd_mu,
                               an_sigma, fd_sigma) +
                 (sign_ok ? "; cooperation pushes mu up" : "; WRONG SIGN on mu");
    return rep;
}

std::vector<FixtureReport> run_fixtures(const std::string& name) {
    if (name == "mlp") return {check_mlp()};
    if (name == "ppo_loss") return {check_ppo_loss()};
    if (name == "gae") return {check_gae()};
    if (name == "neighborhood") return {check_neighborhood()};
    if (name == "lcf_bandit") return {check_lcf_bandit()};
    if (name == "all") {
        return {check_mlp(), check_ppo_loss(), check_gae(), check_neighborhood(),
                check_lcf_bandit()};
    }
    throw std::invalid_argument("unknown gradcheck fixture: " + name);
}

}  // namespace copo::check
