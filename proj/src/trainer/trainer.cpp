#include "copo/trainer/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "copo/net/checkpoint.hpp"
#include "copo/rollout/batch.hpp"
#include "copo/rollout/gae.hpp"
#include "copo/rollout/rewards.hpp"
#include "copo/trainer/losses.hpp"

namespace copo::trainer {
namespace {

rollout::AugmentSpec make_augment(const RunConfig& cfg) {
    rollout::AugmentSpec a;
    a.k = cfg.mfpo_k;
    a.radius = cfg.mfpo_radius;
    switch (cfg.algorithm) {
        case Algorithm::mfpo_concat: a.mode = rollout::CriticAugment::concat_k; break;
        case Algorithm::mfpo_mean: a.mode = rollout::CriticAugment::mean_field; break;
        case Algorithm::mfpo_mean_cf: a.mode = rollout::CriticAugment::mean_field_cf; break;
        default: a.mode = rollout::CriticAugment::none; break;
    }
    return a;
}

rollout::CollectorConfig make_collector_cfg(const RunConfig& cfg, const rollout::AugmentSpec& a,
                                            std::uint64_t seed) {
    rollout::CollectorConfig c;
    c.horizon = cfg.horizon;
    c.batch_env_steps = cfg.batch_env_steps;
    c.augment = a;
    c.feed_phi = cfg.feed_phi_to_policy;
    c.need_value_n_g = cfg.algorithm == Algorithm::copo;
    c.base_seed = seed;
    return c;
}

env::SimConfig make_sim_cfg(const RunConfig& cfg) {
    env::SimConfig s;
    s.agent_count = cfg.agent_count;
    return s;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

int curriculum_population(int iteration, int total_iterations, int target) {
    if (total_iterations <= 0 || iteration >= total_iterations) return target;
    if (iteration < 0) iteration = 0;
    const int phase = 4 * iteration / total_iterations;  // 0..3
    return (target * (phase + 1) + 3) / 4;               // ceil(target*(phase+1)/4)
}

std::string IterationStats::csv_header() {
    return "iteration,env_steps,success_rate,efficiency,safety,mean_kl,clip_frac,phi_mu,"
           "phi_sigma,policy_loss,value_i_loss,value_n_loss,value_g_loss,lcf_objective,"
           "mean_step_reward,samples";
}

std::string IterationStats::csv_row() const {
    std::ostringstream s;
    s << iteration << ',' << env_steps << ',' << fmt(success_rate) << ',' << fmt(efficiency)
      << ',' << fmt(safety) << ',' << fmt(mean_kl) << ',' << fmt(clip_frac) << ','
      << fmt(phi_mu) << ',' << fmt(phi_sigma) << ',' << fmt(policy_loss) << ','
      << fmt(value_loss_i) << ',' << fmt(value_loss_n) << ',' << fmt(value_loss_g) << ','
      << fmt(lcf_objective) << ',' << fmt(mean_step_reward) << ',' << samples;
    return s.str();
}

Trainer::Trainer(env::SceneSpec scene, const RunConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      seed_(seed),
      augment_(make_augment(cfg)),
      scene_target_(cfg.agent_count > 0 ? cfg.agent_count : scene.target_agent_count),
      collector_(std::move(scene), make_sim_cfg(cfg), make_collector_cfg(cfg, augment_, seed)) {
    const int obs_dim = env::Observation::kDim;
    const int act_dim = 2;
    const int extra = augment_.extra_dim(obs_dim, act_dim);

    net::MlpShape pol{obs_dim + (cfg.feed_phi_to_policy ? 1 : 0), cfg.hidden, act_dim, true};
    net::MlpShape vi{obs_dim + extra, cfg.hidden, 1, false};
    net::MlpShape vplain{obs_dim, cfg.hidden, 1, false};

    nets_.policy = net::Policy(pol);
    nets_.value_i = net::ValueNet(vi);
    nets_.value_n = net::ValueNet(vplain);
    nets_.value_g = net::ValueNet(vplain);

    nets_.theta = net::ParamSet(pol);
    nets_.eta = net::ParamSet(vi);
    nets_.psi = net::ParamSet(vplain);
    nets_.omega = net::ParamSet(vplain);

    Rng init_rng(mix_seed(seed, streams::kInit));
    nets_.theta.init(init_rng, 0.01, cfg.log_std_init);
    nets_.eta.init(init_rng);
    nets_.psi.init(init_rng);
    nets_.omega.init(init_rng);

    opt_theta_ = net::Adam(nets_.theta.size(), cfg.lr);
    opt_eta_ = net::Adam(nets_.eta.size(), cfg.lr);
    opt_psi_ = net::Adam(nets_.psi.size(), cfg.lr);
    opt_omega_ = net::Adam(nets_.omega.size(), cfg.lr);

    lcf_.mu = cfg.lcf_init_mean;
    lcf_.sigma = cfg.lcf_init_std;
}

int Trainer::total_iterations() const {
    const long long b = cfg_.batch_env_steps;
    return static_cast<int>((cfg_.max_env_steps + b - 1) / b);
}

IterationStats Trainer::train_iteration() {
    try {
        const net::ParamSet theta_old = nets_.theta;  // behavior snapshot

        if (cfg_.algorithm == Algorithm::curriculum)
            collector_.set_population(
                curriculum_population(iter_, total_iterations(), scene_target_));

        rollout::CollectStats cs;
        std::vector<rollout::CollectedEpisode> episodes =
            collector_.collect(nets_, lcf_.mu, lcf_.sigma, cs);

        for (auto& ep : episodes) {
            rollout::fill_neighborhood_rewards(ep, cfg_.neighbor_radius);
            rollout::fill_global_rewards(ep);
            rollout::fill_advantages(ep, cfg_.gamma, cfg_.gamma_global, cfg_.gae_lambda);
        }

        const std::uint64_t shuffle_base = mix_seed(seed_, streams::kShuffle);
        const std::uint64_t iter_base =
            static_cast<std::uint64_t>(iter_) * static_cast<std::uint64_t>(cfg_.kp_epochs);
        rollout::SampleBatch batch = rollout::build_batch(episodes, cfg_.advantage_norm,
                                                          mix_seed(shuffle_base, iter_base));

        // policy advantage column: coordinated mix for copo, individual
        // stream for everything else
        const double* adv = batch.adv_i.data();
        std::vector<double> adv_c;
        if (cfg_.algorithm == Algorithm::copo) {
            adv_c.resize(batch.count);
            for (int i = 0; i < batch.count; ++i)
                adv_c[i] = coordinated_advantage(batch.adv_i[i], batch.adv_n[i], batch.lcf_phi[i]);
            adv = adv_c.data();
        }

        const bool with_extra = augment_.mode != rollout::CriticAugment::none;
        const bool train_ng = cfg_.algorithm == Algorithm::copo;

        net::ParamSet g_theta(nets_.theta.shape());
        net::ParamSet g_eta(nets_.eta.shape());
        net::ParamSet g_psi(nets_.psi.shape());
        net::ParamSet g_omega(nets_.omega.shape());

        IterationStats out;
        int updates = 0;
        const int mbs = batch.minibatch_count(cfg_.minibatch);
        for (int epoch = 0; epoch < cfg_.kp_epochs; ++epoch) {
            if (epoch > 0) {
                std::iota(batch.order.begin(), batch.order.end(), 0);
                Rng perm(mix_seed(shuffle_base, iter_base + epoch));
                perm.shuffle(batch.order);
            }
            for (int m = 0; m < mbs; ++m) {
                auto [idx, n] = batch.minibatch(m, cfg_.minibatch);
                if (n <= 0) continue;

                g_theta.zero();
                PolicyLossStats ps = ppo_policy_loss(
                    nets_.policy, nets_.theta, batch, idx, n, adv, cfg_.clip_eps, cfg_.kl_coeff,
                    cfg_.entropy_coeff, cfg_.feed_phi_to_policy, g_theta);
                if (!opt_theta_.step(nets_.theta.flat(), g_theta.flat()))
                    std::fprintf(stderr, "warning: skipped non-finite policy gradient\n");

                g_eta.zero();
                const double li = value_loss(nets_.value_i, nets_.eta, batch, idx, n,
                                             batch.tgt_i.data(), with_extra, g_eta);
                if (!opt_eta_.step(nets_.eta.flat(), g_eta.flat()))
                    std::fprintf(stderr, "warning: skipped non-finite value gradient\n");

                double ln = 0.0, lg = 0.0;
                if (train_ng) {
                    g_psi.zero();
                    ln = value_loss(nets_.value_n, nets_.psi, batch, idx, n, batch.tgt_n.data(),
                                    false, g_psi);
                    if (!opt_psi_.step(nets_.psi.flat(), g_psi.flat()))
                        std::fprintf(stderr, "warning: skipped non-finite value gradient\n");
                    g_omega.zero();
                    lg = value_loss(nets_.value_g, nets_.omega, batch, idx, n, batch.tgt_g.data(),
                                    false, g_omega);
                    if (!opt_omega_.step(nets_.omega.flat(), g_omega.flat()))
                        std::fprintf(stderr, "warning: skipped non-finite value gradient\n");
                }

                out.policy_loss += ps.loss;
                out.mean_kl += ps.mean_kl;
                out.clip_frac += ps.clip_frac;
                out.value_loss_i += li;
                out.value_loss_n += ln;
                out.value_loss_g += lg;
                ++updates;
            }
        }
        if (updates > 0) {
            out.policy_loss /= updates;
            out.mean_kl /= updates;
            out.clip_frac /= updates;
            out.value_loss_i /= updates;
            out.value_loss_n /= updates;
            out.value_loss_g /= updates;
        }

        if (cfg_.algorithm == Algorithm::copo && cfg_.lcf_update) {
            LcfWorkspace ws = lcf_prepare(nets_.policy, theta_old, nets_.theta, batch,
                                          cfg_.clip_eps, cfg_.feed_phi_to_policy);
            out.lcf_objective = ws.surrogate;
            lcf_ascend(lcf_, ws, batch, cfg_.kphi_epochs, cfg_.lcf_lr);
        }

        env_steps_ += cs.env_steps;
        ++iter_;

        out.iteration = iter_;
        out.env_steps = env_steps_;
        out.success_rate = cs.agents_done > 0
                               ? static_cast<double>(cs.n_success) / cs.agents_done
                               : 0.0;
        out.efficiency = cs.env_steps > 0
                             ? static_cast<double>(cs.n_success - (cs.n_crash + cs.n_out)) /
                                   cs.env_steps
                             : 0.0;
        out.safety = cs.n_crash;
        out.phi_mu = lcf_.mu;
        out.phi_sigma = lcf_.sigma;
        out.mean_step_reward =
            cs.sample_count > 0 ? cs.reward_sum / cs.sample_count : 0.0;
        out.samples = batch.count;
        return out;
    } catch (const std::exception& e) {
        throw std::runtime_error("iteration " + std::to_string(iter_ + 1) + ": " + e.what());
    }
}

void Trainer::save_checkpoint(const std::string& path) const {
    net::Checkpoint ck;
    ck.meta["algorithm"] = algorithm_name(cfg_.algorithm);
    ck.put_int("iteration", iter_);
    ck.put_int("env_steps", env_steps_);
    ck.put_int("episodes_started", static_cast<long long>(collector_.episodes_started()));
    ck.put_double("phi_mu", lcf_.mu);
    ck.put_double("phi_sigma", lcf_.sigma);
    ck.put_shape("shape_theta", nets_.theta.shape());
    ck.put_shape("shape_eta", nets_.eta.shape());
    ck.put_shape("shape_psi", nets_.psi.shape());
    ck.put_shape("shape_omega", nets_.omega.shape());
    ck.blobs["theta"] = nets_.theta.flat();
    ck.blobs["eta"] = nets_.eta.flat();
    ck.blobs["psi"] = nets_.psi.flat();
    ck.blobs["omega"] = nets_.omega.flat();
    ck.blobs["adam_theta"] = opt_theta_.serialize();
    ck.blobs["adam_eta"] = opt_eta_.serialize();
    ck.blobs["adam_psi"] = opt_psi_.serialize();
    ck.blobs["adam_omega"] = opt_omega_.serialize();
    ck.save(path);
}

void Trainer::load_checkpoint(const std::string& path) {
    net::Checkpoint ck = net::Checkpoint::load(path);
    auto check_shape = [&](const char* key, const net::MlpShape& want) {
        if (!(ck.get_shape(key) == want))
            throw std::runtime_error(path + ": " + key + " does not match this configuration");
    };
    check_shape("shape_theta", nets_.theta.shape());
    check_shape("shape_eta", nets_.eta.shape());
    check_shape("shape_psi", nets_.psi.shape());
    check_shape("shape_omega", nets_.omega.shape());

    auto restore_params = [&](const char* key, net::ParamSet& p) {
        const std::vector<double>& b = ck.blob(key);
        if (static_cast<int>(b.size()) != p.size())
            throw std::runtime_error(path + ": blob " + key + " has wrong length");
        p.flat() = b;
    };
    restore_params("theta", nets_.theta);
    restore_params("eta", nets_.eta);
    restore_params("psi", nets_.psi);
    restore_params("omega", nets_.omega);
    opt_theta_.restore(ck.blob("adam_theta"));
    opt_eta_.restore(ck.blob("adam_eta"));
    opt_psi_.restore(ck.blob("adam_psi"));
    opt_omega_.restore(ck.blob("adam_omega"));

    iter_ = static_cast<int>(ck.get_int("iteration", 0));
    env_steps_ = ck.get_int("env_steps", 0);
    lcf_.mu = ck.get_double("phi_mu", cfg_.lcf_init_mean);
    lcf_.sigma = ck.get_double("phi_sigma", cfg_.lcf_init_std);
    collector_.set_episode_counter(
        static_cast<std::uint64_t>(ck.get_int("episodes_started", 0)));
}

}  // namespace copo::trainer
