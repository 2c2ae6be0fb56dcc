#include "revar/demo.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "revar/errors.hpp"
#include "revar/preprocess.hpp"
#include "revar/synthesis.hpp"

namespace revar {

namespace {

constexpr double kPi = 3.14159265358979323846;

GridGeometry demo_geometry(const DemoParams& params) {
    GridGeometry geom;
    geom.height = params.height;
    geom.width = params.width;
    geom.dt = params.dt;
    geom.dx = params.dx;
    geom.mask.assign(static_cast<std::size_t>(params.height) * params.width, 1);
    if (params.circular_mask) {
        const double cy = 0.5 * (params.height - 1);
        const double cx = 0.5 * (params.width - 1);
        const double radius = 0.48 * std::min(params.height, params.width);
        for (int y = 0; y < params.height; ++y)
            for (int x = 0; x < params.width; ++x)
                geom.mask[static_cast<std::size_t>(y) * params.width + x] =
                    std::hypot(y - cy, x - cx) <= radius ? 1 : 0;
    }
    return geom;
}

// Smooth separable harmonics over the aperture, ordered by total order.
double raw_mode(int mode, double xn, double yn) {
    static const int orders[][2] = {{1, 1}, {2, 0}, {0, 2}, {2, 1}, {1, 2}, {2, 2},
                                    {3, 0}, {0, 3}, {3, 1}, {1, 3}, {3, 2}, {2, 3},
                                    {3, 3}, {4, 0}, {0, 4}, {4, 1}, {1, 4}, {4, 2}};
    const int i = orders[mode % 18][0];
    const int j = orders[mode % 18][1];
    const int wrap = mode / 18;
    const double extra = 1.0 + 0.25 * wrap;
    return std::cos(0.5 * kPi * i * xn * extra + 0.3 * mode) *
           std::cos(0.5 * kPi * j * yn * extra + 0.7 * mode);
}

}  // namespace

WavefrontSeries make_demo_series(const DemoParams& params) {
    if (params.n_modes < 1) throw ValidationError("demo: need at least one mode");
    if (params.n_frames < 8) throw ValidationError("demo: need at least 8 frames");

    const GridGeometry geom = demo_geometry(params);
    std::vector<PixelCoord> coords;
    for (int y = 0; y < geom.height; ++y)
        for (int x = 0; x < geom.width; ++x)
            if (geom.in_mask(y, x)) coords.push_back({y, x});
    const auto n_px = static_cast<Eigen::Index>(coords.size());
    if (n_px < static_cast<Eigen::Index>(3) * params.n_modes)
        throw ValidationError("demo: aperture too small for the requested mode count");

    // Spatial patterns, with tip/tilt/piston projected out and the rest
    // orthonormalized so the planted process is TTP-free and exactly
    // rank n_modes.
    Eigen::MatrixXd ttp(n_px, 3);
    Eigen::MatrixXd modes(n_px, params.n_modes);
    for (Eigen::Index i = 0; i < n_px; ++i) {
        const double xn = 2.0 * coords[i].x / (geom.width - 1) - 1.0;
        const double yn = 2.0 * coords[i].y / (geom.height - 1) - 1.0;
        ttp(i, 0) = 1.0;
        ttp(i, 1) = xn;
        ttp(i, 2) = yn;
        for (int k = 0; k < params.n_modes; ++k) modes(i, k) = raw_mode(k, xn, yn);
    }
    const Eigen::MatrixXd q_ttp =
        Eigen::HouseholderQR<Eigen::MatrixXd>(ttp).householderQ() *
        Eigen::MatrixXd::Identity(n_px, 3);
    modes -= q_ttp * (q_ttp.transpose() * modes);
    for (int k = 0; k < params.n_modes; ++k) {
        for (int j = 0; j < k; ++j)
            modes.col(k) -= modes.col(j).dot(modes.col(k)) * modes.col(j);
        const double norm = modes.col(k).norm();
        if (norm < 1e-8)
            throw NumericError("demo: spatial mode " + std::to_string(k) + " degenerate");
        modes.col(k) /= norm;
    }

    // Mode dynamics: two slow AR(1) modes, then AR(2) resonators with
    // log-spaced peak frequencies and moderate pole radii.
    const int n_modes = params.n_modes;
    const int burn = 2000;
    const int total = params.n_frames + burn;
    Eigen::MatrixXd noise = generate_noise(n_modes, total, params.seed);

    // Cross-correlate innovations between neighboring modes.
    if (n_modes > 1) {
        const double beta = 0.3;
        Eigen::MatrixXd mixed(n_modes, total);
        for (int k = 0; k < n_modes; ++k)
            mixed.row(k) = std::sqrt(1.0 - beta * beta) * noise.row(k) +
                           beta * noise.row((k + 1) % n_modes);
        noise = mixed;
    }

    // Mode variances in m^2; per-pixel mean square is sum(v_k) / P.
    Eigen::VectorXd weights(n_modes);
    for (int k = 0; k < n_modes; ++k) weights[k] = std::pow(k + 1.0, -1.2);
    weights *= params.rms * params.rms * static_cast<double>(n_px) / weights.sum();

    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(n_modes, total);
    for (int k = 0; k < n_modes; ++k) {
        double phi1, phi2;
        if (k < 2) {
            const double a = 0.97 - 0.03 * k;
            phi1 = a;
            phi2 = 0.0;
        } else {
            const double frac = n_modes > 3 ? static_cast<double>(k - 2) / (n_modes - 3) : 0.0;
            const double f_rel = 0.015 * std::pow(0.11 / 0.015, frac);
            const double rho = 0.80 + 0.10 * ((k * 3) % 5) / 4.0;
            phi1 = 2.0 * rho * std::cos(2.0 * kPi * f_rel);
            phi2 = -rho * rho;
        }
        // Stationary-variance formula for AR(2) (AR(1) when phi2 = 0).
        const double var_gain =
            (1.0 - phi2) / ((1.0 + phi2) * ((1.0 - phi2) * (1.0 - phi2) - phi1 * phi1));
        const double sigma = std::sqrt(weights[k] / var_gain);

        double prev1 = 0.0, prev2 = 0.0;
        for (int t = 0; t < total; ++t) {
            const double v = phi1 * prev1 + phi2 * prev2 + sigma * noise(k, t);
            coeffs(k, t) = v;
            prev2 = prev1;
            prev1 = v;
        }
    }

    const Eigen::MatrixXd data = modes * coeffs.rightCols(params.n_frames);
    WavefrontSeries out = devectorize(data, geom);
    out.label = "demo";
    return out;
}

}  // namespace revar
