#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "copo/kernels/kernels.hpp"
#include "copo/util/rng.hpp"

using namespace copo;

namespace {

std::vector<double> random_vec(Rng& rng, int n, double scale = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = scale * rng.normal();
    return v;
}

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 1e-300;
    for (size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::max(std::abs(a[i]), std::abs(b[i])));
    }
    return num / den;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar kernels against naive loops") {
    Rng rng(11);
    const int rows = 5, cols = 7;
    const auto w = random_vec(rng, rows * cols);
    const auto x = random_vec(rng, cols);
    const auto b = random_vec(rng, rows);
    const kern::Kernels& k = kern::scalar_kernels();

    std::vector<double> y(rows);
    k.affine(w.data(), x.data(), b.data(), y.data(), rows, cols);
    for (int r = 0; r < rows; ++r) {
        double want = b[r];
        for (int c = 0; c < cols; ++c) want += w[r * cols + c] * x[c];
        CHECK(y[r] == doctest::Approx(want).epsilon(1e-14));
    }
    // nullptr bias means plain matvec
    k.affine(w.data(), x.data(), nullptr, y.data(), rows, cols);
    for (int r = 0; r < rows; ++r) {
        double want = 0.0;
        for (int c = 0; c < cols; ++c) want += w[r * cols + c] * x[c];
        CHECK(y[r] == doctest::Approx(want).epsilon(1e-14));
    }

    const auto dy = random_vec(rng, rows);
    std::vector<double> dx(cols, 0.5);  // accumulates on top
    k.matvec_t_acc(w.data(), dy.data(), dx.data(), rows, cols);
    for (int c = 0; c < cols; ++c) {
        double want = 0.5;
        for (int r = 0; r < rows; ++r) want += w[r * cols + c] * dy[r];
        CHECK(dx[c] == doctest::Approx(want).epsilon(1e-14));
    }

    std::vector<double> dw(rows * cols, -1.0);
    k.ger_acc(dw.data(), dy.data(), x.data(), rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            CHECK(dw[r * cols + c] == doctest::Approx(-1.0 + dy[r] * x[c]).epsilon(1e-14));
        }
    }

    auto yy = random_vec(rng, cols);
    const auto xx = random_vec(rng, cols);
    const std::vector<double> before = yy;
    k.axpy(0.75, xx.data(), yy.data(), cols);
    for (int i = 0; i < cols; ++i) {
        CHECK(yy[i] == doctest::Approx(before[i] + 0.75 * xx[i]).epsilon(1e-14));
    }

    double want_dot = 0.0;
    for (int i = 0; i < cols; ++i) want_dot += xx[i] * before[i];
    CHECK(k.dot(xx.data(), before.data(), cols) == doctest::Approx(want_dot).epsilon(1e-13));
}

TEST_CASE("avx2 backend matches scalar on awkward sizes") {
    if (!kern::avx2_available()) {
        MESSAGE("avx2 not available on this host; equivalence not exercised");
        return;
    }
    const kern::Kernels& s = kern::scalar_kernels();
    const kern::Kernels& v = kern::avx2_kernels();
    CHECK(std::string(v.name) == "avx2");

    Rng rng(20);
    // sizes straddle the vector width so remainder lanes get exercised
    const int sizes[] = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 100, 257};
    for (int rows : sizes) {
        for (int cols : {1, 3, 4, 5, 8, 13, 64, 129}) {
            const auto w = random_vec(rng, rows * cols);
            const auto x = random_vec(rng, cols);
            const auto b = random_vec(rng, rows);

            std::vector<double> ys(rows), yv(rows);
            s.affine(w.data(), x.data(), b.data(), ys.data(), rows, cols);
            v.affine(w.data(), x.data(), b.data(), yv.data(), rows, cols);
            CHECK(rel_diff(ys, yv) < 1e-13);

            const auto dy = random_vec(rng, rows);
            std::vector<double> dxs(cols, 0.25), dxv(cols, 0.25);
            s.matvec_t_acc(w.data(), dy.data(), dxs.data(), rows, cols);
            v.matvec_t_acc(w.data(), dy.data(), dxv.data(), rows, cols);
            CHECK(rel_diff(dxs, dxv) < 1e-13);

            std::vector<double> dws(rows * cols, 0.1), dwv(rows * cols, 0.1);
            s.ger_acc(dws.data(), dy.data(), x.data(), rows, cols);
            v.ger_acc(dwv.data(), dy.data(), x.data(), rows, cols);
            CHECK(rel_diff(dws, dwv) < 1e-13);
        }
    }
    for (int n : sizes) {
        const auto x = random_vec(rng, n);
        std::vector<double> ys = random_vec(rng, n), yv = ys;
        s.axpy(-1.3, x.data(), ys.data(), n);
        v.axpy(-1.3, x.data(), yv.data(), n);
        CHECK(rel_diff(ys, yv) < 1e-13);

        const auto a = random_vec(rng, n);
        const double ds = s.dot(a.data(), x.data(), n);
        const double dv = v.dot(a.data(), x.data(), n);
        const double scale = std::max({std::abs(ds), std::abs(dv), 1e-12});
        CHECK(std::abs(ds - dv) / scale < 1e-12);
    }
}

TEST_CASE("parse_backend and selection") {
    CHECK(kern::parse_backend("scalar") == kern::Backend::scalar);
    CHECK(kern::parse_backend("avx2") == kern::Backend::avx2);
    CHECK(kern::parse_backend("auto") == kern::Backend::auto_detect);
    CHECK_THROWS_AS(kern::parse_backend("sse9"), std::invalid_argument);

    kern::set_backend(kern::Backend::scalar);
    CHECK(std::string(kern::active().name) == "scalar");
    kern::set_backend(kern::Backend::auto_detect);
    if (kern::avx2_available()) {
        CHECK(std::string(kern::active().name) == "avx2");
    } else {
        CHECK(std::string(kern::active().name) == "scalar");
    }
}

}  // TEST_SUITE("kernels")
