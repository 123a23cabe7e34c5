#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "copo/env/scene.hpp"
#include "copo/net/gaussian.hpp"
#include "copo/net/params.hpp"
#include "copo/net/policy.hpp"
#include "copo/trainer/config.hpp"
#include "copo/trainer/lcf.hpp"
#include "copo/trainer/losses.hpp"
#include "copo/trainer/trainer.hpp"
#include "copo/util/ini.hpp"
#include "copo/util/rng.hpp"

using namespace copo;
using namespace copo::trainer;

TEST_SUITE("config") {

TEST_CASE("serialize and parse are inverses") {
    RunConfig c;
    c.scene = "scenes/roundabout.ini";
    c.algorithm = Algorithm::mfpo_mean_cf;
    c.clip_eps = 0.15;
    c.lr = 0.00123456789;
    c.kp_epochs = 7;
    c.hidden = {48, 32, 16};
    c.lcf_update = false;
    c.feed_phi_to_policy = true;
    c.seeds = {3, 17, 400};
    c.max_env_steps = 987654321;
    c.gamma_global = 0.5;

    const std::string text = c.serialize();
    const RunConfig back = RunConfig::parse(text, "rt");
    CHECK(back.serialize() == text);
    CHECK(back.algorithm == Algorithm::mfpo_mean_cf);
    CHECK(back.hidden == std::vector<int>{48, 32, 16});
    CHECK(back.seeds == std::vector<std::uint64_t>{3, 17, 400});
    CHECK(back.lr == 0.00123456789);

    // defaults survive the round trip too
    const RunConfig d;
    CHECK(RunConfig::parse(d.serialize(), "rt").serialize() == d.serialize());
}

TEST_CASE("overrides land after the file") {
    const RunConfig c = RunConfig::parse("lr = 0.001\nhorizon = 500\n", "inline",
                                         {"lr=0.5", "hidden=8"});
    CHECK(c.lr == 0.5);
    CHECK(c.horizon == 500);
    CHECK(c.hidden == std::vector<int>{8});

    CHECK_THROWS_AS(RunConfig::parse("", "x", {"no_equals_here"}), ParseError);
}

TEST_CASE("unknown keys and sections fail loudly") {
    CHECK_THROWS_AS(RunConfig::parse("bogus_knob = 1\n", "cfg"), ParseError);
    CHECK_THROWS_AS(RunConfig::parse("[section]\nlr = 1\n", "cfg"), ParseError);
    CHECK_THROWS_AS(RunConfig::parse("lr = fast\n", "cfg"), ParseError);
    CHECK_THROWS_AS(RunConfig::parse("seeds = -1\n", "cfg"), ParseError);
    CHECK_THROWS_AS(RunConfig::parse_file("no/such/file.cfg"), ParseError);

    try {
        RunConfig::parse("lr = 0.1\nbogus_knob = 1\n", "cfg");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("bogus_knob") != std::string::npos);
        CHECK(e.line() == 2);
    }
}

TEST_CASE("validation rejects out-of-range values") {
    auto expect_reject = [](const std::string& line, const char* needle) {
        try {
            RunConfig::parse(line, "cfg");
            FAIL_CHECK("accepted: " << line);
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_reject("clip_eps = 0\n", "clip_eps");
    expect_reject("clip_eps = 1\n", "clip_eps");
    expect_reject("gamma = 1.5\n", "gamma");
    expect_reject("workers = 0\n", "workers");
    expect_reject("kp_epochs = 0\n", "kp_epochs");
    expect_reject("hidden = 0\n", "hidden");
    expect_reject("horizon = 0\n", "horizon");
    expect_reject("lcf_init_std = -0.1\n", "lcf_init_std");
    expect_reject("neighbor_radius = 0\n", "neighbor_radius");
}

TEST_CASE("algorithm names round trip") {
    for (Algorithm a : {Algorithm::ipo, Algorithm::mfpo_concat, Algorithm::mfpo_mean,
                        Algorithm::mfpo_mean_cf, Algorithm::copo, Algorithm::curriculum}) {
        CHECK(parse_algorithm(algorithm_name(a)) == a);
    }
    CHECK_THROWS_AS(parse_algorithm("sarsa"), std::invalid_argument);
}

}  // TEST_SUITE("config")

TEST_SUITE("curriculum") {

TEST_CASE("population grows through four phases to the target") {
    // total 100, target 40: quarters are 10/20/30/40
    CHECK(curriculum_population(0, 100, 40) == 10);
    CHECK(curriculum_population(24, 100, 40) == 10);
    CHECK(curriculum_population(25, 100, 40) == 20);
    CHECK(curriculum_population(50, 100, 40) == 30);
    CHECK(curriculum_population(75, 100, 40) == 40);
    CHECK(curriculum_population(99, 100, 40) == 40);
    CHECK(curriculum_population(100, 100, 40) == 40);  // past the end
    CHECK(curriculum_population(0, 0, 40) == 40);      // degenerate schedule

    // rounding is upward: target 5 gives 2/3/4/5
    CHECK(curriculum_population(0, 4, 5) == 2);
    CHECK(curriculum_population(1, 4, 5) == 3);
    CHECK(curriculum_population(2, 4, 5) == 4);
    CHECK(curriculum_population(3, 4, 5) == 5);
}

TEST_CASE("schedule is monotone and bounded") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const int total = rng.uniform_int(1, 60);
        const int target = rng.uniform_int(1, 30);
        int prev = 0;
        for (int it = 0; it < total; ++it) {
            const int n = curriculum_population(it, total, target);
            CHECK(n >= prev);
            CHECK(n >= (target + 3) / 4);
            CHECK(n <= target);
            prev = n;
        }
        CHECK(curriculum_population(total - 1, total, target) == target);
    }
}

}  // TEST_SUITE("curriculum")

namespace {

// A small policy with a batch whose behavior distribution came from a
// nearby (not identical) set of parameters, so ratios and KL are active.
struct LossFixture {
    net::Policy policy{net::MlpShape{3, {4}, 2, true}};
    net::ParamSet theta{policy.mlp.shape()};
    rollout::SampleBatch batch;

    explicit LossFixture(int count, std::uint64_t seed, double drift = 0.05) {
        Rng rng(seed);
        net::ParamSet behavior(policy.mlp.shape());
        behavior.init(rng, 1.0, -0.4);
        theta = behavior;
        for (double& w : theta.flat()) w += drift * rng.normal();

        batch.count = count;
        batch.obs_dim = 3;
        batch.act_dim = 2;
        batch.extra_dim = 2;
        double mean[2], ls[2], act[2];
        for (int k = 0; k < count; ++k) {
            const double obs[3] = {rng.normal(), rng.normal(), rng.normal()};
            const double lp = policy.sample1(behavior, obs, rng, act, mean, ls);
            batch.obs.insert(batch.obs.end(), obs, obs + 3);
            batch.extra.push_back(rng.normal());
            batch.extra.push_back(rng.normal());
            batch.action.insert(batch.action.end(), act, act + 2);
            batch.behavior_mean.insert(batch.behavior_mean.end(), mean, mean + 2);
            batch.behavior_log_std.insert(batch.behavior_log_std.end(), ls, ls + 2);
            batch.log_prob_behavior.push_back(lp);
            batch.adv_i.push_back(rng.normal());
            batch.adv_n.push_back(rng.normal());
            batch.adv_g.push_back(rng.normal());
            batch.tgt_i.push_back(rng.normal());
            batch.tgt_n.push_back(rng.normal());
            batch.tgt_g.push_back(rng.normal());
            batch.lcf_eps.push_back(rng.normal());
            batch.lcf_phi.push_back(0.2 + 0.25 * batch.lcf_eps.back());
            batch.lcf_clamped.push_back(0);
            batch.order.push_back(k);
        }
    }

    double ratio_of_row(int r) const {
        double mean[2], ls[2];
        const std::vector<double> obs(batch.obs.begin() + r * 3, batch.obs.begin() + r * 3 + 3);
        policy.head1(theta, obs.data(), mean, ls);
        const double lp = net::gauss_log_prob(mean, ls, batch.action.data() + r * 2, 2);
        return std::exp(lp - batch.log_prob_behavior[r]);
    }
};

}  // namespace

TEST_SUITE("losses") {

TEST_CASE("policy loss gradient agrees with finite differences") {
    LossFixture fx(6, 2024);
    const double clip = 0.2, kl = 0.7, ent = 0.3;

    // the fixture must not sit on the clip boundary, or FD is meaningless
    for (int r = 0; r < fx.batch.count; ++r) {
        const double ratio = fx.ratio_of_row(r);
        REQUIRE(std::abs(ratio - (1.0 - clip)) > 1e-3);
        REQUIRE(std::abs(ratio - (1.0 + clip)) > 1e-3);
    }

    net::ParamSet grad(fx.theta.shape());
    grad.zero();
    const PolicyLossStats stats =
        ppo_policy_loss(fx.policy, fx.theta, fx.batch, fx.batch.order.data(), fx.batch.count,
                        fx.batch.adv_i.data(), clip, kl, ent, false, grad);
    CHECK(stats.loss == doctest::Approx(-stats.surrogate + kl * stats.mean_kl - ent * stats.entropy)
                            .epsilon(1e-14));

    auto loss_at = [&](const net::ParamSet& p) {
        net::ParamSet scratch(p.shape());
        scratch.zero();
        return ppo_policy_loss(fx.policy, p, fx.batch, fx.batch.order.data(), fx.batch.count,
                               fx.batch.adv_i.data(), clip, kl, ent, false, scratch)
            .loss;
    };
    net::ParamSet probe = fx.theta;
    const double h = 1e-6;
    for (int i = 0; i < fx.theta.size(); i += 3) {
        probe.flat()[i] = fx.theta.flat()[i] + h;
        const double up = loss_at(probe);
        probe.flat()[i] = fx.theta.flat()[i] - h;
        const double dn = loss_at(probe);
        probe.flat()[i] = fx.theta.flat()[i];
        CHECK(grad.flat()[i] == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-5));
    }
}

TEST_CASE("saturated ratios contribute exactly zero gradient") {
    LossFixture fx(2, 99, 0.0);  // behavior == current
    // shift the stored behavior log-probs so both rows land on the clip:
    // row 0 at ratio 2 with positive advantage, row 1 at ratio 1/2 with
    // negative advantage. Both pick the clipped (constant) branch.
    fx.batch.log_prob_behavior[0] -= std::log(2.0);
    fx.batch.adv_i[0] = 1.5;
    fx.batch.log_prob_behavior[1] += std::log(2.0);
    fx.batch.adv_i[1] = -0.75;

    net::ParamSet grad(fx.theta.shape());
    grad.zero();
    const PolicyLossStats stats =
        ppo_policy_loss(fx.policy, fx.theta, fx.batch, fx.batch.order.data(), 2,
                        fx.batch.adv_i.data(), 0.2, 0.0, 0.0, false, grad);

    CHECK(stats.clip_frac == 1.0);
    CHECK(stats.surrogate == doctest::Approx(0.5 * (1.2 * 1.5 + 0.8 * -0.75)).epsilon(1e-12));
    for (int i = 0; i < grad.size(); ++i) {
        CHECK(grad.flat()[i] == 0.0);  // exact: the clip is a hard stop
    }
}

TEST_CASE("log-std entries pinned by the clamp get zero gradient") {
    LossFixture fx(4, 7);
    fx.theta.log_std()[0] = -7.0;  // below the -5 floor

    net::ParamSet grad(fx.theta.shape());
    grad.zero();
    ppo_policy_loss(fx.policy, fx.theta, fx.batch, fx.batch.order.data(), fx.batch.count,
                    fx.batch.adv_i.data(), 0.2, 1.0, 0.5, false, grad);
    CHECK(grad.log_std()[0] == 0.0);
    CHECK(grad.log_std()[1] != 0.0);

    double mean[2], ls[2];
    fx.policy.head1(fx.theta, fx.batch.obs.data(), mean, ls);
    CHECK(ls[0] == -5.0);
}

TEST_CASE("value loss is half the mean squared error") {
    LossFixture fx(5, 31);
    net::ValueNet vnet(net::MlpShape{3, {4}, 1, false});
    Rng rng(5);
    net::ParamSet p(vnet.mlp.shape());
    p.init(rng);

    net::ParamSet grad(p.shape());
    grad.zero();
    const double loss = value_loss(vnet, p, fx.batch, fx.batch.order.data(), fx.batch.count,
                                   fx.batch.tgt_i.data(), false, grad);

    double want = 0.0;
    for (int r = 0; r < fx.batch.count; ++r) {
        const double v = vnet.value1(p, fx.batch.obs.data() + r * 3);
        want += 0.5 * (v - fx.batch.tgt_i[r]) * (v - fx.batch.tgt_i[r]);
    }
    want /= fx.batch.count;
    CHECK(loss == doctest::Approx(want).epsilon(1e-13));

    auto loss_at = [&](const net::ParamSet& q) {
        net::ParamSet scratch(q.shape());
        scratch.zero();
        return value_loss(vnet, q, fx.batch, fx.batch.order.data(), fx.batch.count,
                          fx.batch.tgt_i.data(), false, scratch);
    };
    net::ParamSet probe = p;
    const double h = 1e-6;
    for (int i = 0; i < p.size(); i += 2) {
        probe.flat()[i] = p.flat()[i] + h;
        const double up = loss_at(probe);
        probe.flat()[i] = p.flat()[i] - h;
        const double dn = loss_at(probe);
        probe.flat()[i] = p.flat()[i];
        CHECK(grad.flat()[i] == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-5));
    }
}

TEST_CASE("row gathering appends phi and the critic extra block") {
    LossFixture fx(3, 41);
    std::vector<double> x;
    gather_policy_rows(fx.batch, fx.batch.order.data(), 3, true, x);
    REQUIRE(static_cast<int>(x.size()) == 3 * 4);
    for (int k = 0; k < 3; ++k) {
        for (int d = 0; d < 3; ++d) CHECK(x[k * 4 + d] == fx.batch.obs[k * 3 + d]);
        CHECK(x[k * 4 + 3] == fx.batch.lcf_phi[k] / (0.5 * kPi));
    }

    gather_value_rows(fx.batch, fx.batch.order.data(), 3, true, x);
    REQUIRE(static_cast<int>(x.size()) == 3 * 5);
    for (int k = 0; k < 3; ++k) {
        for (int d = 0; d < 3; ++d) CHECK(x[k * 5 + d] == fx.batch.obs[k * 3 + d]);
        for (int d = 0; d < 2; ++d) CHECK(x[k * 5 + 3 + d] == fx.batch.extra[k * 2 + d]);
    }

    // the extra block actually reaches the value net
    net::ValueNet vnet(net::MlpShape{5, {4}, 1, false});
    Rng rng(6);
    net::ParamSet p(vnet.mlp.shape());
    p.init(rng);
    net::ParamSet g1(p.shape()), g2(p.shape());
    g1.zero();
    g2.zero();
    const double before = value_loss(vnet, p, fx.batch, fx.batch.order.data(), 3,
                                     fx.batch.tgt_i.data(), true, g1);
    fx.batch.extra[0] += 1.0;
    const double after = value_loss(vnet, p, fx.batch, fx.batch.order.data(), 3,
                                    fx.batch.tgt_i.data(), true, g2);
    CHECK(before != after);
}

}  // TEST_SUITE("losses")

TEST_SUITE("lcf") {

TEST_CASE("coordinated advantage blends the two streams by angle") {
    CHECK(coordinated_advantage(3.0, -2.0, 0.0) == 3.0);                    // selfish
    CHECK(coordinated_advantage(3.0, -2.0, 0.5 * kPi) ==
          doctest::Approx(-2.0).epsilon(1e-12));                            // fully social
    CHECK(coordinated_advantage(1.0, 1.0, -0.25 * kPi) ==
          doctest::Approx(0.0).epsilon(1e-12));                             // hostile cancels
    const double s = std::sqrt(0.5);
    CHECK(coordinated_advantage(2.0, 4.0, 0.25 * kPi) == doctest::Approx(2 * s + 4 * s));
}

TEST_CASE("distribution clamps sigma and draws") {
    LcfDistribution d;
    d.mu = 2.0;
    d.sigma = 5.0;
    d.clamp();
    CHECK(d.mu == 0.5 * kPi);
    CHECK(d.sigma == 1.0);
    d.sigma = 0.0;
    d.clamp();
    CHECK(d.sigma == LcfDistribution::kSigmaMin);

    LcfDistribution n{0.0, 0.5};
    CHECK(n.sample(0.4) == 0.2);
    CHECK(n.sample(100.0) == 0.5 * kPi);
    CHECK(n.sample(-100.0) == -0.5 * kPi);
}

namespace {

rollout::SampleBatch lcf_batch(Rng& rng, int count, double eps_lo, double eps_hi) {
    rollout::SampleBatch b;
    b.count = count;
    b.obs_dim = 1;
    b.act_dim = 1;
    for (int k = 0; k < count; ++k) {
        b.adv_i.push_back(rng.normal());
        b.adv_n.push_back(rng.normal());
        b.lcf_eps.push_back(rng.uniform(eps_lo, eps_hi));
        b.lcf_phi.push_back(0.0);
        b.lcf_clamped.push_back(0);
    }
    return b;
}

double lcf_objective(const LcfWorkspace& ws, const rollout::SampleBatch& b,
                     const LcfDistribution& d) {
    double j = 0.0;
    for (int r = 0; r < b.count; ++r) {
        const double phi = d.sample(b.lcf_eps[r]);
        j += ws.p[r] * coordinated_advantage(b.adv_i[r], b.adv_n[r], phi);
    }
    return j / b.count;
}

}  // namespace

TEST_CASE("gradient of the mixing angle matches finite differences") {
    Rng rng(404);
    rollout::SampleBatch b = lcf_batch(rng, 60, -2.0, 2.0);
    LcfWorkspace ws;
    for (int k = 0; k < b.count; ++k) ws.p.push_back(rng.normal());

    LcfDistribution d{0.2, 0.25};  // raw angles stay strictly inside ±pi/2
    const LcfGradient g = lcf_gradient(ws, b, d);

    const double h = 1e-6;
    LcfDistribution dp = d, dm = d;
    dp.mu += h;
    dm.mu -= h;
    const double fd_mu = (lcf_objective(ws, b, dp) - lcf_objective(ws, b, dm)) / (2 * h);
    CHECK(g.d_mu == doctest::Approx(fd_mu).epsilon(1e-6));

    dp = d;
    dm = d;
    dp.sigma += h;
    dm.sigma -= h;
    const double fd_sigma = (lcf_objective(ws, b, dp) - lcf_objective(ws, b, dm)) / (2 * h);
    CHECK(g.d_sigma == doctest::Approx(fd_sigma).epsilon(1e-6));
}

TEST_CASE("clamped draws freeze but still count in the mean") {
    rollout::SampleBatch b;
    b.count = 2;
    b.adv_i = {1.5, 2.0};
    b.adv_n = {-0.5, 1.0};
    b.lcf_eps = {0.5, 50.0};  // second draw blows far past the clamp
    b.lcf_phi = {0.0, 0.0};
    b.lcf_clamped = {0, 1};
    LcfWorkspace ws;
    ws.p = {0.8, 0.3};

    const LcfDistribution d{0.1, 0.2};
    const double raw0 = 0.1 + 0.2 * 0.5;
    const double c0 = -std::sin(raw0) * 1.5 + std::cos(raw0) * -0.5;
    const LcfGradient g = lcf_gradient(ws, b, d);
    CHECK(g.d_mu == doctest::Approx(0.8 * c0 / 2.0).epsilon(1e-14));  // denominator is 2, not 1
    CHECK(g.d_sigma == doctest::Approx(0.8 * c0 * 0.5 / 2.0).epsilon(1e-14));
}

TEST_CASE("ascent steps follow the gradient and respect the clamps") {
    Rng rng(11);
    rollout::SampleBatch b = lcf_batch(rng, 40, -1.5, 1.5);
    LcfWorkspace ws;
    for (int k = 0; k < b.count; ++k) ws.p.push_back(rng.normal());

    LcfDistribution d{0.1, 0.3};
    LcfDistribution manual = d;
    const double lr = 1e-3;
    for (int s = 0; s < 3; ++s) {
        const LcfGradient g = lcf_gradient(ws, b, manual);
        manual.mu += lr * g.d_mu;
        manual.sigma += lr * g.d_sigma;
        manual.clamp();
    }
    LcfDistribution stepped = d;
    lcf_ascend(stepped, ws, b, 3, lr);
    CHECK(stepped.mu == manual.mu);
    CHECK(stepped.sigma == manual.sigma);

    // an absurd learning rate cannot push the state outside its box
    LcfDistribution wild = d;
    lcf_ascend(wild, ws, b, 5, 1e9);
    CHECK(wild.mu >= -0.5 * kPi);
    CHECK(wild.mu <= 0.5 * kPi);
    CHECK(wild.sigma >= LcfDistribution::kSigmaMin);
    CHECK(wild.sigma <= LcfDistribution::kSigmaMax);

    // a zero workspace moves nothing
    LcfWorkspace idle;
    idle.p.assign(b.count, 0.0);
    LcfDistribution still = d;
    lcf_ascend(still, idle, b, 4, 0.5);
    CHECK(still.mu == d.mu);
    CHECK(still.sigma == d.sigma);
}

}  // TEST_SUITE("lcf")

TEST_SUITE("trainer") {

namespace {

const char* kCorridorScene =
    "name = corridor\n"
    "target_agent_count = 2\n"
    "[lane]\n"
    "id = road\n"
    "width = 7\n"
    "centerline = 0,0; 120,0\n"
    "[spawn]\n"
    "position = 3,0\n"
    "heading = 0\n"
    "lane = road\n"
    "[spawn]\n"
    "position = 30,0\n"
    "heading = 0\n"
    "lane = road\n"
    "[destination]\n"
    "center = 114,0\n"
    "radius = 6\n";

env::SceneSpec corridor() {
    env::SceneSpec s = env::parse_scene(kCorridorScene, "inline");
    env::validate_scene(s, 1.8);
    return s;
}

RunConfig small_cfg(Algorithm algo) {
    RunConfig c;
    c.algorithm = algo;
    c.hidden = {16};
    c.batch_env_steps = 256;
    c.minibatch = 128;
    c.horizon = 100;
    c.max_env_steps = 768;
    c.kp_epochs = 2;
    c.kphi_epochs = 2;
    return c;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("one seed, one trajectory") {
    const RunConfig cfg = small_cfg(Algorithm::copo);
    Trainer a(corridor(), cfg, 5);
    Trainer b(corridor(), cfg, 5);
    for (int it = 0; it < 3; ++it) {
        const IterationStats sa = a.train_iteration();
        const IterationStats sb = b.train_iteration();
        CHECK(sa.csv_row() == sb.csv_row());
    }
    CHECK(max_abs_diff(a.nets().theta.flat(), b.nets().theta.flat()) == 0.0);
    CHECK(a.lcf().mu == b.lcf().mu);
}

TEST_CASE("zeroed coordination angle reduces to the independent learner") {
    RunConfig copo_cfg = small_cfg(Algorithm::copo);
    copo_cfg.lcf_init_mean = 0.0;
    copo_cfg.lcf_init_std = 0.0;
    copo_cfg.lcf_update = false;
    const RunConfig ipo_cfg = small_cfg(Algorithm::ipo);

    Trainer co(corridor(), copo_cfg, 9);
    Trainer ip(corridor(), ipo_cfg, 9);
    for (int it = 0; it < 3; ++it) {
        co.train_iteration();
        ip.train_iteration();
        CHECK(max_abs_diff(co.nets().theta.flat(), ip.nets().theta.flat()) < 1e-9);
        CHECK(max_abs_diff(co.nets().eta.flat(), ip.nets().eta.flat()) < 1e-9);
    }
}

TEST_CASE("the independent learner never touches the coordination angle") {
    RunConfig cfg = small_cfg(Algorithm::ipo);
    cfg.lcf_init_mean = 0.25;
    cfg.lcf_init_std = 0.15;
    Trainer t(corridor(), cfg, 3);
    for (int it = 0; it < 3; ++it) {
        const IterationStats s = t.train_iteration();
        CHECK(s.phi_mu == 0.25);
        CHECK(s.phi_sigma == 0.15);
    }
    CHECK(t.lcf().mu == 0.25);
    CHECK(t.lcf().sigma == 0.15);
}

TEST_CASE("the value net actually fits its targets") {
    RunConfig cfg = small_cfg(Algorithm::ipo);
    cfg.batch_env_steps = 512;
    cfg.max_env_steps = 512 * 6;
    cfg.kp_epochs = 5;
    Trainer t(corridor(), cfg, 1);
    std::vector<IterationStats> stats;
    while (!t.finished()) stats.push_back(t.train_iteration());
    REQUIRE(stats.size() == 6);
    CHECK(stats.back().value_loss_i < stats.front().value_loss_i);
}

TEST_CASE("checkpoints restore training state exactly") {
    const RunConfig cfg = small_cfg(Algorithm::copo);
    Trainer t(corridor(), cfg, 13);
    t.train_iteration();
    t.train_iteration();
    const std::string path = "trainer_ckpt_test.bin";
    t.save_checkpoint(path);

    Trainer r(corridor(), cfg, 13);
    r.load_checkpoint(path);
    CHECK(r.iteration() == t.iteration());
    CHECK(r.env_steps() == t.env_steps());
    CHECK(max_abs_diff(r.nets().theta.flat(), t.nets().theta.flat()) == 0.0);
    CHECK(max_abs_diff(r.nets().omega.flat(), t.nets().omega.flat()) == 0.0);
    CHECK(r.lcf().mu == t.lcf().mu);
    CHECK(r.lcf().sigma == t.lcf().sigma);
    r.train_iteration();  // resumes without complaint
    CHECK(r.iteration() == 3);

    RunConfig other = cfg;
    other.hidden = {8};
    Trainer wrong(corridor(), other, 13);
    CHECK_THROWS_AS(wrong.load_checkpoint(path), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("growing-population baseline widens its batches") {
    RunConfig cfg = small_cfg(Algorithm::curriculum);
    cfg.batch_env_steps = 256;
    cfg.max_env_steps = 256 * 4;  // four iterations, one per phase
    Trainer t(corridor(), cfg, 21);
    std::vector<int> samples;
    while (!t.finished()) samples.push_back(t.train_iteration().samples);
    REQUIRE(samples.size() == 4);
    // phase 1 runs half the cars of phase 4
    CHECK(samples.front() < samples.back());
    CHECK(samples.back() > static_cast<int>(1.5 * samples.front()));
}

}  // TEST_SUITE("trainer")
