#include "revar/kolmogorov.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "fft_util.hpp"
#include "revar/errors.hpp"

namespace revar {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Phase PSD in cyclic spatial frequency [1/m]: 0.023 r0^-5/3 with outer
// and inner scale rolloffs. This normalization reproduces the Kolmogorov
// structure function 6.88 (r/r0)^(5/3).
double phase_psd(double f2, const TurbulenceParams& params) {
    const double f0 = std::isinf(params.outer_scale) ? 0.0 : 1.0 / params.outer_scale;
    double psd =
        0.023 * std::pow(params.r0, -5.0 / 3.0) * std::pow(f2 + f0 * f0, -11.0 / 6.0);
    if (params.inner_scale > 0.0) {
        const double fm = 5.92 / (2.0 * kPi * params.inner_scale);
        psd *= std::exp(-f2 / (fm * fm));
    }
    return psd;
}

// Mean PSD over a spectral cell. Near the origin the PSD varies by orders
// of magnitude within one cell, so midpoint weights badly under-represent
// low frequencies; cell averaging restores the integrated power.
double cell_mean_psd(double fx, double fy, double wx, double wy,
                     const TurbulenceParams& params) {
    constexpr int sub = 32;
    double acc = 0.0;
    for (int a = 0; a < sub; ++a) {
        const double gx = fx + ((a + 0.5) / sub - 0.5) * wx;
        for (int b = 0; b < sub; ++b) {
            const double gy = fy + ((b + 0.5) / sub - 0.5) * wy;
            acc += phase_psd(gx * gx + gy * gy, params);
        }
    }
    return acc / (sub * sub);
}

class GaussStream {
public:
    explicit GaussStream(std::uint64_t seed) : rng_(seed) {}
    void pair(double& a, double& b) {
        const double two_pow_53 = 9007199254740992.0;
        const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) / two_pow_53;
        const double u2 = static_cast<double>(rng_() >> 11) / two_pow_53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        a = radius * std::cos(2.0 * kPi * u2);
        b = radius * std::sin(2.0 * kPi * u2);
    }

private:
    std::mt19937_64 rng_;
};

// Rectangular screen used by both the public square generator and the
// elongated frozen-flow screen. Bins within two cells of the origin and
// all subharmonic bins carry cell-integrated weights.
Eigen::MatrixXd screen_rect(int rows, int cols, double dx, const TurbulenceParams& params,
                            std::uint64_t seed) {
    const double df_y = 1.0 / (rows * dx);
    const double df_x = 1.0 / (cols * dx);
    GaussStream gauss(seed);

    std::vector<std::complex<double>> grid(static_cast<std::size_t>(rows) * cols);
    for (int ky = 0; ky < rows; ++ky) {
        const int sy = ky <= rows / 2 ? ky : ky - rows;
        const double fy = sy * df_y;
        for (int kx = 0; kx < cols; ++kx) {
            const int sx = kx <= cols / 2 ? kx : kx - cols;
            const double fx = sx * df_x;
            double g1, g2;
            gauss.pair(g1, g2);
            const std::size_t idx = static_cast<std::size_t>(ky) * cols + kx;
            if (ky == 0 && kx == 0) {
                grid[idx] = 0.0;
                continue;
            }
            const double psd = (std::abs(sx) <= 2 && std::abs(sy) <= 2)
                                   ? cell_mean_psd(fx, fy, df_x, df_y, params)
                                   : phase_psd(fx * fx + fy * fy, params);
            const double amp = std::sqrt(psd * df_x * df_y);
            grid[idx] = std::complex<double>(g1 * amp, g2 * amp);
        }
    }

    detail::ComplexIfft2d ifft(rows, cols);
    ifft.execute(grid.data());

    Eigen::MatrixXd screen(rows, cols);
    for (int y = 0; y < rows; ++y)
        for (int x = 0; x < cols; ++x)
            screen(y, x) = grid[static_cast<std::size_t>(y) * cols + x].real();

    // Subharmonic levels: 3x3 refinements of the central spectral cell,
    // added as explicit plane waves.
    std::vector<std::complex<double>> col_phase(cols), row_phase(rows);
    double lf_x = df_x, lf_y = df_y;
    for (int level = 0; level < params.subharmonic_levels; ++level) {
        lf_x /= 3.0;
        lf_y /= 3.0;
        for (int i = -1; i <= 1; ++i) {
            for (int j = -1; j <= 1; ++j) {
                if (i == 0 && j == 0) continue;
                double g1, g2;
                gauss.pair(g1, g2);
                const double psd = cell_mean_psd(i * lf_x, j * lf_y, lf_x, lf_y, params);
                const double amp = std::sqrt(psd * lf_x * lf_y);
                const std::complex<double> coeff(g1 * amp, g2 * amp);
                for (int x = 0; x < cols; ++x)
                    col_phase[x] =
                        std::exp(std::complex<double>(0.0, 2.0 * kPi * i * lf_x * x * dx));
                for (int y = 0; y < rows; ++y)
                    row_phase[y] =
                        std::exp(std::complex<double>(0.0, 2.0 * kPi * j * lf_y * y * dx));
                for (int y = 0; y < rows; ++y) {
                    const std::complex<double> row_coeff = coeff * row_phase[y];
                    for (int x = 0; x < cols; ++x)
                        screen(y, x) += (row_coeff * col_phase[x]).real();
                }
            }
        }
    }

    screen.array() -= screen.mean();
    return screen;
}

}  // namespace

void validate_turbulence(const TurbulenceParams& params) {
    if (!(params.r0 > 0.0)) throw ValidationError("turbulence: r0 must be > 0");
    if (!(params.dx > 0.0)) throw ValidationError("turbulence: dx must be > 0");
    if (!(params.inner_scale >= 0.0))
        throw ValidationError("turbulence: inner scale must be >= 0");
    if (!(params.outer_scale > params.inner_scale))
        throw ValidationError("turbulence: outer scale must exceed inner scale");
    if (params.n < 16 || (params.n & (params.n - 1)) != 0)
        throw ValidationError("turbulence: grid size must be a power of two >= 16");
    if (params.subharmonic_levels < 0 || params.subharmonic_levels > 8)
        throw ValidationError("turbulence: subharmonic levels must be in [0, 8]");
}

Eigen::MatrixXd generate_screen(const TurbulenceParams& params, std::uint64_t seed) {
    validate_turbulence(params);
    return screen_rect(params.n, params.n, params.dx, params, seed);
}

WavefrontSeries frozen_flow_series(const TurbulenceParams& params, double velocity, double dt,
                                   int n_frames, std::uint64_t seed, double wavelength) {
    validate_turbulence(params);
    if (velocity < 0.0) throw ValidationError("frozen_flow: velocity must be >= 0");
    if (!(dt > 0.0)) throw ValidationError("frozen_flow: dt must be > 0");
    if (n_frames < 1) throw ValidationError("frozen_flow: need at least one frame");
    if (!(wavelength > 0.0)) throw ValidationError("frozen_flow: wavelength must be > 0");

    const double shift_per_frame = velocity * dt / params.dx;
    const double max_shift = shift_per_frame * (n_frames - 1);
    const std::int64_t cols =
        params.n + static_cast<std::int64_t>(std::ceil(max_shift)) + 1;
    if (cols > (1LL << 26) / params.n)
        throw ValidationError("frozen_flow: translation exceeds screen width (" +
                              std::to_string(cols) + " columns needed)");

    const Eigen::MatrixXd screen =
        screen_rect(params.n, static_cast<int>(cols), params.dx, params, seed);
    const double phase_to_opd = wavelength / (2.0 * kPi);

    GridGeometry geom;
    geom.height = params.n;
    geom.width = params.n;
    geom.mask.assign(static_cast<std::size_t>(params.n) * params.n, 1);
    geom.dt = dt;
    geom.dx = params.dx;

    WavefrontSeries out = make_zero_series(geom, n_frames);
    for (int t = 0; t < n_frames; ++t) {
        const double shift = shift_per_frame * t;
        const auto x0 = static_cast<Eigen::Index>(std::floor(shift));
        const double frac = shift - static_cast<double>(x0);
        for (int y = 0; y < params.n; ++y) {
            for (int x = 0; x < params.n; ++x) {
                const double v = (1.0 - frac) * screen(y, x0 + x) +
                                 frac * screen(y, x0 + x + 1);
                out.at(t, y, x) = v * phase_to_opd;
            }
        }
    }
    out.label = "kolmogorov frozen flow";
    return out;
}

}  // namespace revar
