#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "copo/net/adam.hpp"
#include "copo/net/checkpoint.hpp"
#include "copo/net/gaussian.hpp"
#include "copo/net/mlp.hpp"
#include "copo/net/params.hpp"
#include "copo/net/policy.hpp"
#include "copo/util/rng.hpp"

using namespace copo;
using namespace copo::net;

TEST_SUITE("mlp") {

TEST_CASE("forward matches a pocket-calculator run") {
    MlpShape shape{2, {2}, 1, false};
    ParamSet p(shape);
    double* w0 = p.weights(0);
    w0[0] = 0.3; w0[1] = -0.7;   // unit 0
    w0[2] = 1.1; w0[3] = 0.4;    // unit 1
    p.bias(0)[0] = 0.1;
    p.bias(0)[1] = -0.2;
    double* w1 = p.weights(1);
    w1[0] = 0.5; w1[1] = -0.25;
    p.bias(1)[0] = 0.05;

    Mlp net(shape);
    const double x[2] = {0.8, -0.6};
    double y = 0.0;
    net.forward1(p, x, &y);

    const double h0 = std::tanh(0.3 * 0.8 - 0.7 * -0.6 + 0.1);
    const double h1 = std::tanh(1.1 * 0.8 + 0.4 * -0.6 - 0.2);
    CHECK(y == doctest::Approx(0.5 * h0 - 0.25 * h1 + 0.05).epsilon(1e-15));

    // batch forward agrees with three single calls
    const double xs[6] = {0.8, -0.6, 0.0, 0.0, -1.0, 2.0};
    MlpCache cache;
    net.forward(p, xs, 3, cache);
    for (int k = 0; k < 3; ++k) {
        double yk = 0.0;
        net.forward1(p, xs + 2 * k, &yk);
        CHECK(cache.act.back()[k] == yk);
    }
}

TEST_CASE("forward is pure") {
    MlpShape shape{3, {4}, 2, true};
    ParamSet p(shape);
    Rng rng(5);
    p.init(rng);
    const std::vector<double> before = p.flat();

    Mlp net(shape);
    const double x[3] = {0.2, -0.4, 0.9};
    double y1[2], y2[2];
    net.forward1(p, x, y1);
    net.forward1(p, x, y2);
    CHECK(y1[0] == y2[0]);
    CHECK(y1[1] == y2[1]);
    CHECK(p.flat() == before);
}

TEST_CASE("backward and jvp agree with finite differences") {
    MlpShape shape{4, {6, 5}, 3, false};
    Mlp net(shape);
    Rng rng(17);
    ParamSet p(shape);
    p.init(rng);

    const int batch = 3;
    std::vector<double> x(batch * 4), c(batch * 3);
    for (double& v : x) v = rng.normal();
    for (double& v : c) v = rng.normal();

    // probe loss L = sum_k c_k . y_k
    auto loss_at = [&](const ParamSet& q) {
        MlpCache cache;
        net.forward(q, x.data(), batch, cache);
        double L = 0.0;
        for (size_t i = 0; i < c.size(); ++i) L += c[i] * cache.act.back()[i];
        return L;
    };

    MlpCache cache;
    net.forward(p, x.data(), batch, cache);
    ParamSet grad(shape);
    grad.zero();
    std::vector<double> dx(batch * 4);
    net.backward(p, x.data(), batch, cache, c.data(), grad, dx.data());

    ParamSet probe = p;
    const double h = 1e-6;
    for (int i = 0; i < p.size(); i += 7) {  // sampled coordinates
        probe.flat()[i] = p.flat()[i] + h;
        const double up = loss_at(probe);
        probe.flat()[i] = p.flat()[i] - h;
        const double dn = loss_at(probe);
        probe.flat()[i] = p.flat()[i];
        const double fd = (up - dn) / (2.0 * h);
        CHECK(grad.flat()[i] == doctest::Approx(fd).epsilon(1e-5));
    }

    // input gradient via FD on x
    for (size_t i = 0; i < x.size(); i += 3) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = loss_at(p);
        x[i] = keep - h;
        const double dn = loss_at(p);
        x[i] = keep;
        CHECK(dx[i] == doctest::Approx((up - dn) / (2.0 * h)).epsilon(1e-5));
    }

    // directional derivative along a random direction
    ParamSet v(shape);
    for (double& z : v.flat()) z = rng.normal();
    std::vector<double> y_dot;
    net.jvp(p, v, x.data(), batch, cache, y_dot);

    ParamSet plus = p, minus = p;
    for (int i = 0; i < p.size(); ++i) {
        plus.flat()[i] += h * v.flat()[i];
        minus.flat()[i] -= h * v.flat()[i];
    }
    MlpCache cp, cm;
    net.forward(plus, x.data(), batch, cp);
    net.forward(minus, x.data(), batch, cm);
    for (size_t i = 0; i < y_dot.size(); ++i) {
        const double fd = (cp.act.back()[i] - cm.act.back()[i]) / (2.0 * h);
        CHECK(y_dot[i] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("parameter views tile the flat vector exactly") {
    MlpShape shape{3, {4, 2}, 2, true};
    ParamSet p(shape);
    CHECK(p.size() == shape.param_count());

    int written = 0;
    for (int l = 0; l < shape.layer_count(); ++l) {
        const int r = shape.rows(l), c = shape.cols(l);
        for (int i = 0; i < r * c; ++i, ++written) p.weights(l)[i] = written;
        for (int i = 0; i < r; ++i, ++written) p.bias(l)[i] = written;
    }
    for (int i = 0; i < shape.output; ++i, ++written) p.log_std()[i] = written;
    REQUIRE(written == p.size());

    // every slot hit exactly once, in layout order
    for (int i = 0; i < p.size(); ++i) CHECK(p.flat()[i] == static_cast<double>(i));
}

TEST_CASE("init is seed-deterministic and scales the head") {
    MlpShape shape{4, {8}, 2, true};
    ParamSet a(shape), b(shape), c(shape);
    Rng r1(31), r2(31), r3(31);
    a.init(r1, 1.0, -0.5);
    b.init(r2, 1.0, -0.5);
    CHECK(a.flat() == b.flat());
    c.init(r3, 0.01, -0.5);

    for (int i = 0; i < 8 * 4; ++i) CHECK(c.weights(0)[i] == a.weights(0)[i]);
    for (int i = 0; i < 2 * 8; ++i) {
        CHECK(c.weights(1)[i] == doctest::Approx(0.01 * a.weights(1)[i]).epsilon(1e-14));
    }
    for (int i = 0; i < 2; ++i) {
        CHECK(a.log_std()[i] == -0.5);
        CHECK(a.bias(0)[i] == 0.0);
    }
    CHECK(a.all_finite());
    a.flat()[3] = std::nan("");
    CHECK_FALSE(a.all_finite());
}

}  // TEST_SUITE("mlp")

TEST_SUITE("gaussian") {

TEST_CASE("log density matches the textbook form") {
    const double m[2] = {0.5, -1.0};
    const double ls[2] = {0.2, -0.7};
    const double a[2] = {0.1, -0.4};
    double want = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double sd = std::exp(ls[i]);
        want += -0.5 * std::log(2.0 * kPi) - std::log(sd) -
                (a[i] - m[i]) * (a[i] - m[i]) / (2.0 * sd * sd);
    }
    CHECK(gauss_log_prob(m, ls, a, 2) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("kl is zero at equality and matches sampling") {
    const double mp[2] = {0.3, -0.2};
    const double lsp[2] = {0.1, -0.5};
    CHECK(gauss_kl(mp, lsp, mp, lsp, 2) == doctest::Approx(0.0));

    const double mq[2] = {-0.1, 0.4};
    const double lsq[2] = {0.3, -0.2};
    const double closed = gauss_kl(mp, lsp, mq, lsq, 2);
    CHECK(closed > 0.0);

    Rng rng(1234);
    double acc = 0.0;
    const int n = 400000;
    double x[2];
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < 2; ++i) x[i] = mp[i] + std::exp(lsp[i]) * rng.normal();
        acc += gauss_log_prob(mp, lsp, x, 2) - gauss_log_prob(mq, lsq, x, 2);
    }
    CHECK(acc / n == doctest::Approx(closed).epsilon(0.02));
}

TEST_CASE("gradients agree with finite differences") {
    const double m[3] = {0.5, -1.0, 0.0};
    const double ls[3] = {0.2, -0.7, 0.4};
    const double a[3] = {0.1, -0.4, 1.2};
    const double h = 1e-6;

    double dm[3] = {0, 0, 0}, dls[3] = {0, 0, 0};
    gauss_log_prob_grad(m, ls, a, 3, 2.0, dm, dls);  // scale folded in
    for (int i = 0; i < 3; ++i) {
        double mp[3] = {m[0], m[1], m[2]}, mm[3] = {m[0], m[1], m[2]};
        mp[i] += h;
        mm[i] -= h;
        const double fd = (gauss_log_prob(mp, ls, a, 3) - gauss_log_prob(mm, ls, a, 3)) / (2 * h);
        CHECK(dm[i] == doctest::Approx(2.0 * fd).epsilon(1e-6));

        double lp[3] = {ls[0], ls[1], ls[2]}, lm[3] = {ls[0], ls[1], ls[2]};
        lp[i] += h;
        lm[i] -= h;
        const double fdl = (gauss_log_prob(m, lp, a, 3) - gauss_log_prob(m, lm, a, 3)) / (2 * h);
        CHECK(dls[i] == doctest::Approx(2.0 * fdl).epsilon(1e-6));
    }

    // jvp = grad . direction
    const double m_dot[3] = {0.3, -0.2, 0.9};
    const double ls_dot[3] = {-0.4, 0.6, 0.1};
    double gm[3] = {0, 0, 0}, gls[3] = {0, 0, 0};
    gauss_log_prob_grad(m, ls, a, 3, 1.0, gm, gls);
    double want = 0.0;
    for (int i = 0; i < 3; ++i) want += gm[i] * m_dot[i] + gls[i] * ls_dot[i];
    CHECK(gauss_log_prob_jvp(m, ls, a, 3, m_dot, ls_dot) == doctest::Approx(want).epsilon(1e-12));

    // KL gradient w.r.t. the second distribution
    const double mq[3] = {-0.1, 0.4, 0.2};
    const double lsq[3] = {0.3, -0.2, -0.1};
    double dmq[3] = {0, 0, 0}, dlsq[3] = {0, 0, 0};
    gauss_kl_grad_q(m, ls, mq, lsq, 3, 1.0, dmq, dlsq);
    for (int i = 0; i < 3; ++i) {
        double qp[3] = {mq[0], mq[1], mq[2]}, qm[3] = {mq[0], mq[1], mq[2]};
        qp[i] += h;
        qm[i] -= h;
        CHECK(dmq[i] == doctest::Approx((gauss_kl(m, ls, qp, lsq, 3) -
                                         gauss_kl(m, ls, qm, lsq, 3)) /
                                        (2 * h))
                            .epsilon(1e-6));
        double sp[3] = {lsq[0], lsq[1], lsq[2]}, sm[3] = {lsq[0], lsq[1], lsq[2]};
        sp[i] += h;
        sm[i] -= h;
        CHECK(dlsq[i] == doctest::Approx((gauss_kl(m, ls, mq, sp, 3) -
                                          gauss_kl(m, ls, mq, sm, 3)) /
                                         (2 * h))
                             .epsilon(1e-6));
    }
}

TEST_CASE("entropy of a diagonal gaussian") {
    const double ls[2] = {0.0, std::log(2.0)};
    // 0.5 log(2 pi e sigma^2) per dimension
    const double want = 0.5 * std::log(2.0 * kPi * std::exp(1.0)) +
                        0.5 * std::log(2.0 * kPi * std::exp(1.0) * 4.0);
    CHECK(gauss_entropy(ls, 2) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("policy head clamps the log-std block") {
    CHECK(clamp_log_std(-9.0) == kLogStdMin);
    CHECK(clamp_log_std(4.0) == kLogStdMax);
    CHECK(clamp_log_std(0.5) == 0.5);

    MlpShape shape{3, {4}, 2, true};
    Policy pol(shape);
    ParamSet p(shape);
    Rng rng(6);
    p.init(rng);
    p.log_std()[0] = -20.0;
    p.log_std()[1] = 1.0;
    const double obs[3] = {0.1, 0.2, 0.3};
    double mean[2], ls[2];
    pol.head1(p, obs, mean, ls);
    CHECK(ls[0] == -5.0);
    CHECK(ls[1] == 1.0);

    // sampled action reproduces its own log prob
    Rng draw(77);
    double act[2];
    const double lp = pol.sample1(p, obs, draw, act, mean, ls);
    CHECK(lp == doctest::Approx(gauss_log_prob(mean, ls, act, 2)).epsilon(1e-14));
}

}  // TEST_SUITE("gaussian")

TEST_SUITE("adam") {

TEST_CASE("first step has a closed form") {
    const double lr = 0.05;
    Adam opt(3, lr);
    std::vector<double> p{1.0, -2.0, 0.5};
    const std::vector<double> g{3.0, -0.4, 0.0};
    REQUIRE(opt.step(p, g));
    CHECK(opt.steps_taken() == 1);
    // bias correction makes m_hat = g and v_hat = g^2 on step one
    CHECK(p[0] == doctest::Approx(1.0 - lr * 3.0 / (3.0 + 1e-8)).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(-2.0 + lr * 0.4 / (0.4 + 1e-8)).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx(0.5).epsilon(1e-12));  // zero gradient, zero move
}

TEST_CASE("non-finite gradients are rejected atomically") {
    Adam opt(2, 0.1);
    std::vector<double> p{1.0, 2.0};
    std::vector<double> g{0.5, std::nan("")};
    CHECK_FALSE(opt.step(p, g));
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 2.0);
    CHECK(opt.steps_taken() == 0);

    std::vector<double> wrong_size{0.1};
    CHECK_THROWS_AS(opt.step(p, wrong_size), std::invalid_argument);
}

TEST_CASE("serialize and restore continue the same trajectory") {
    Adam a(4, 0.01);
    std::vector<double> pa{0.1, 0.2, 0.3, 0.4};
    Rng rng(8);
    std::vector<double> g(4);
    for (int t = 0; t < 5; ++t) {
        for (double& x : g) x = rng.normal();
        a.step(pa, g);
    }
    Adam b(4, 0.01);
    b.restore(a.serialize());
    std::vector<double> pb = pa;
    for (double& x : g) x = rng.normal();
    std::vector<double> g2 = g;
    a.step(pa, g);
    b.step(pb, g2);
    CHECK(pa == pb);

    std::vector<double> bad(3, 0.0);
    CHECK_THROWS(b.restore(bad));
}

}  // TEST_SUITE("adam")

TEST_SUITE("checkpoint") {

TEST_CASE("round trip through disk") {
    Checkpoint out;
    out.meta["algorithm"] = "copo";
    out.meta["note"] = "spaces and = signs survive";
    out.put_int("iteration", 42);
    out.put_double("phi_mu", 0.125);
    MlpShape shape{81, {256, 256}, 2, true};
    out.put_shape("shape_theta", shape);
    out.blobs["theta"] = {1.0 / 3.0, -2.5e-17, 4e300, 0.0};

    const std::string path = "ckpt_roundtrip_test.bin";
    out.save(path);
    Checkpoint in = Checkpoint::load(path);
    std::remove(path.c_str());

    CHECK(in.meta.at("algorithm") == "copo");
    CHECK(in.meta.at("note") == "spaces and = signs survive");
    CHECK(in.get_int("iteration", -1) == 42);
    CHECK(in.get_int("missing", -7) == -7);
    CHECK(in.get_double("phi_mu", 0.0) == 0.125);
    CHECK(in.get_shape("shape_theta") == shape);
    CHECK(in.blob("theta") == out.blobs.at("theta"));  // bit-exact doubles
    CHECK_THROWS(in.blob("no_such"));
    CHECK_THROWS(in.get_shape("no_such"));
}

TEST_CASE("garbage files are refused") {
    const std::string path = "ckpt_garbage_test.bin";
    {
        FILE* f = std::fopen(path.c_str(), "wb");
        REQUIRE(f);
        std::fputs("this is not a checkpoint", f);
        std::fclose(f);
    }
    CHECK_THROWS(Checkpoint::load(path));
    std::remove(path.c_str());
    CHECK_THROWS(Checkpoint::load("definitely_missing_file.bin"));
}

}  // TEST_SUITE("checkpoint")
