#include <doctest.h>

#include <cmath>

#include "revar/diagnostics.hpp"
#include "revar/errors.hpp"
#include "revar/kolmogorov.hpp"

using namespace revar;

namespace {

// Axis-pooled structure function estimate D(k*dx) for k = 1..max_sep.
Eigen::VectorXd structure_function(const Eigen::MatrixXd& screen, int max_sep) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(max_sep);
    Eigen::VectorXd count = Eigen::VectorXd::Zero(max_sep);
    const int n = static_cast<int>(screen.rows());
    for (int k = 1; k <= max_sep; ++k) {
        for (int y = 0; y < n; ++y)
            for (int x = 0; x + k < n; ++x) {
                const double dh = screen(y, x + k) - screen(y, x);
                const double dv = screen(x, y) - screen(x + k, y);
                acc[k - 1] += dh * dh + dv * dv;
                count[k - 1] += 2.0;
            }
    }
    return acc.cwiseQuotient(count);
}

}  // namespace

TEST_CASE("screens are deterministic per seed and zero-mean") {
    TurbulenceParams params;
    params.r0 = 0.1;
    params.n = 32;
    params.dx = 0.02;
    const Eigen::MatrixXd a = generate_screen(params, 5);
    const Eigen::MatrixXd b = generate_screen(params, 5);
    CHECK(a == b);
    CHECK(generate_screen(params, 6) != a);

    const double rms = std::sqrt(a.squaredNorm() / a.size());
    CHECK(std::abs(a.mean()) < 1e-10 * rms);
}

TEST_CASE("doubling r0 rescales the same screen by 2^(-5/6)") {
    TurbulenceParams params;
    params.r0 = 0.08;
    params.n = 32;
    params.dx = 0.02;
    const Eigen::MatrixXd a = generate_screen(params, 9);
    params.r0 = 0.16;
    const Eigen::MatrixXd b = generate_screen(params, 9);
    const double factor = std::pow(2.0, -5.0 / 6.0);
    CHECK((b - factor * a).cwiseAbs().maxCoeff() < 1e-12 * a.cwiseAbs().maxCoeff());
}

TEST_CASE("ensemble structure function follows 6.88 (r/r0)^(5/3)") {
    TurbulenceParams params;
    params.r0 = 0.1;
    params.n = 64;
    params.dx = 0.02;
    const int n_screens = 100;
    const int max_sep = params.n / 8;

    Eigen::VectorXd d = Eigen::VectorXd::Zero(max_sep);
    for (int s = 0; s < n_screens; ++s)
        d += structure_function(generate_screen(params, 1000 + s), max_sep);
    d /= n_screens;

    for (int k = 4; k <= max_sep; ++k) {
        const double r = k * params.dx;
        const double theory = 6.88 * std::pow(r / params.r0, 5.0 / 3.0);
        CHECK(d[k - 1] == doctest::Approx(theory).epsilon(0.20));
    }
}

TEST_CASE("two seed ensembles agree in distribution") {
    TurbulenceParams params;
    params.r0 = 0.12;
    params.n = 32;
    params.dx = 0.02;
    const int max_sep = 4;
    Eigen::VectorXd d1 = Eigen::VectorXd::Zero(max_sep);
    Eigen::VectorXd d2 = Eigen::VectorXd::Zero(max_sep);
    for (int s = 0; s < 100; ++s) {
        d1 += structure_function(generate_screen(params, 2000 + s), max_sep);
        d2 += structure_function(generate_screen(params, 7000 + s), max_sep);
    }
    for (int k = 0; k < max_sep; ++k)
        CHECK(d1[k] == doctest::Approx(d2[k]).epsilon(0.15));
}

TEST_CASE("parameter validation") {
    TurbulenceParams params;
    params.n = 48;  // not a power of two
    CHECK_THROWS_AS(generate_screen(params, 1), ValidationError);
    params.n = 8;  // too small
    CHECK_THROWS_AS(generate_screen(params, 1), ValidationError);
    params.n = 32;
    params.r0 = -1.0;
    CHECK_THROWS_AS(generate_screen(params, 1), ValidationError);
    params.r0 = 0.1;
    params.inner_scale = 0.5;
    params.outer_scale = 0.1;  // outer below inner
    CHECK_THROWS_AS(generate_screen(params, 1), ValidationError);
}

TEST_CASE("frozen flow at zero velocity repeats one frame") {
    TurbulenceParams params;
    params.r0 = 0.1;
    params.n = 16;
    params.dx = 0.02;
    const WavefrontSeries s = frozen_flow_series(params, 0.0, 1e-3, 5, 3);
    for (int t = 1; t < 5; ++t)
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) CHECK(s.at(t, y, x) == s.at(0, y, x));
}

TEST_CASE("integer-pixel shifts translate frames exactly") {
    TurbulenceParams params;
    params.r0 = 0.1;
    params.n = 16;
    params.dx = 0.02;
    // velocity * dt / dx = 2 pixels per frame, exactly.
    const WavefrontSeries s = frozen_flow_series(params, 40.0, 1e-3, 4, 4);
    for (int t = 1; t < 4; ++t)
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 14; ++x)
                CHECK(s.at(t, y, x) == doctest::Approx(s.at(t - 1, y, x + 2)).epsilon(1e-12));
}

TEST_CASE("frozen-flow pixel TPSD has the advected Kolmogorov slope") {
    TurbulenceParams params;
    params.r0 = 0.05;
    params.n = 32;
    params.dx = 0.01;
    const double dt = 1e-3;
    const double velocity = 2.0;  // 0.2 px per frame
    const WavefrontSeries s = frozen_flow_series(params, velocity, dt, 8192, 11);

    Eigen::VectorXd sig(8192);
    for (int t = 0; t < 8192; ++t) sig[t] = s.at(t, 8, 8);
    WelchParams welch;
    welch.segment_len = 1024;
    const TpsdCurve c = welch_psd(sig, dt, welch);

    // Fit the log-log slope over a mid band; expect about -8/3.
    const double f_lo = 8 * c.df;
    const double f_hi = 0.12 / dt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (Eigen::Index j = 0; j < c.freqs.size(); ++j) {
        if (c.freqs[j] < f_lo || c.freqs[j] > f_hi || c.power[j] <= 0.0) continue;
        const double lx = std::log(c.freqs[j]);
        const double ly = std::log(c.power[j]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-8.0 / 3.0).epsilon(0.25));
}

TEST_CASE("frozen flow validates its arguments") {
    TurbulenceParams params;
    params.n = 16;
    CHECK_THROWS_AS(frozen_flow_series(params, -1.0, 1e-3, 4, 1), ValidationError);
    CHECK_THROWS_AS(frozen_flow_series(params, 1.0, 0.0, 4, 1), ValidationError);
    CHECK_THROWS_AS(frozen_flow_series(params, 1e9, 1.0, 1000000, 1), ValidationError);
}
