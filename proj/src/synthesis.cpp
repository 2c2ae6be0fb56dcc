#include "revar/synthesis.hpp"

#include <cmath>
#include <complex>
#include <iostream>
#include <random>
#include <vector>

#include "fft_util.hpp"
#include "revar/errors.hpp"
#include "revar/preprocess.hpp"
#include "revar/rewhiten.hpp"
#include "revar/var.hpp"
#include "revar/whitening.hpp"

namespace revar {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

int synthesis_burn_in(int order) { return std::max(10 * order, 200); }

Eigen::MatrixXd generate_noise(int rows, std::int64_t cols, std::uint64_t seed) {
    if (rows < 1 || cols < 1)
        throw ValidationError("generate_noise: dimensions must be >= 1");

    Eigen::MatrixXd out(rows, cols);
    std::mt19937_64 rng(seed);
    const double two_pow_53 = 9007199254740992.0;  // 2^53
    double* data = out.data();
    const std::int64_t total = static_cast<std::int64_t>(rows) * cols;
    std::int64_t i = 0;
    while (i < total) {
        // Box-Muller; u1 in (0, 1], u2 in [0, 1).
        const double u1 = (static_cast<double>(rng() >> 11) + 1.0) / two_pow_53;
        const double u2 = static_cast<double>(rng() >> 11) / two_pow_53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * kPi * u2;
        data[i++] = radius * std::cos(angle);
        if (i < total) data[i++] = radius * std::sin(angle);
    }
    return out;
}

LongRangeFilterBank fit_mode_spectra(const Eigen::MatrixXd& coeffs_series, int k_modes,
                                     double dt, const WelchParams& params) {
    if (k_modes < 0 || k_modes > coeffs_series.rows())
        throw ValidationError("fit_mode_spectra: k_modes must be in [0, r]");
    LongRangeFilterBank bank;
    if (k_modes == 0) return bank;

    for (int k = 0; k < k_modes; ++k) {
        const TpsdCurve c = welch_psd(coeffs_series.row(k).transpose(), dt, params);
        if (k == 0) {
            bank.freqs = c.freqs;
            bank.amps.resize(c.freqs.size(), k_modes);
        }
        // Boxcar smoothing over 1/6 decade in log frequency.
        const double half_ratio = std::pow(10.0, 1.0 / 12.0);
        for (Eigen::Index j = 0; j < c.freqs.size(); ++j) {
            const double lo = c.freqs[j] / half_ratio;
            const double hi = c.freqs[j] * half_ratio;
            double acc = 0.0;
            int count = 0;
            for (Eigen::Index m = 0; m < c.freqs.size(); ++m) {
                if (c.freqs[m] < lo) continue;
                if (c.freqs[m] > hi) break;
                acc += c.power[m];
                ++count;
            }
            bank.amps(j, k) = std::sqrt(acc / count);
        }
    }
    return bank;
}

LongRangeFilterBank resample_bank(const LongRangeFilterBank& bank, std::int64_t n_target,
                                  double dt) {
    if (bank.empty()) return bank;
    if (n_target < 2) throw ValidationError("resample_bank: target length must be >= 2");

    const std::int64_t n_bins = n_target / 2;
    const Eigen::Index n_src = bank.freqs.size();
    LongRangeFilterBank out;
    out.freqs.resize(n_bins);
    out.amps.resize(n_bins, bank.k_modes());
    // Both grids are increasing, so one cursor brackets every target bin.
    Eigen::Index hi = 1;
    for (std::int64_t j = 1; j <= n_bins; ++j) {
        const double f = static_cast<double>(j) / (static_cast<double>(n_target) * dt);
        out.freqs[j - 1] = f;
        if (f <= bank.freqs[0]) {
            out.amps.row(j - 1) = bank.amps.row(0);
            continue;
        }
        if (f >= bank.freqs[n_src - 1]) {
            out.amps.row(j - 1) = bank.amps.row(n_src - 1);
            continue;
        }
        while (bank.freqs[hi] < f) ++hi;
        const Eigen::Index lo = hi - 1;
        const double w = (std::log(f) - std::log(bank.freqs[lo])) /
                         (std::log(bank.freqs[hi]) - std::log(bank.freqs[lo]));
        for (int k = 0; k < bank.k_modes(); ++k) {
            const double a = bank.amps(lo, k);
            const double b = bank.amps(hi, k);
            out.amps(j - 1, k) = (a > 0.0 && b > 0.0)
                                     ? std::exp((1.0 - w) * std::log(a) + w * std::log(b))
                                     : (1.0 - w) * a + w * b;
        }
    }
    return out;
}

LongRangeFilterBank fit_longrange(const Eigen::MatrixXd& coeffs_series, int k_modes,
                                  std::int64_t n_target, double dt,
                                  const WelchParams& params) {
    return resample_bank(fit_mode_spectra(coeffs_series, k_modes, dt, params), n_target, dt);
}

void apply_longrange(const LongRangeFilterBank& bank, Eigen::MatrixXd& coeffs_series,
                     double dt) {
    if (bank.empty()) return;
    const Eigen::Index n = coeffs_series.cols();
    const Eigen::Index n_bins = n / 2;
    if (bank.freqs.size() != n_bins)
        throw ValidationError("apply_longrange: grid mismatch (bank has " +
                              std::to_string(bank.freqs.size()) + " bins, series needs " +
                              std::to_string(n_bins) + ")");
    for (Eigen::Index j = 0; j < n_bins; ++j) {
        const double expect = static_cast<double>(j + 1) / (static_cast<double>(n) * dt);
        if (std::abs(bank.freqs[j] - expect) > 1e-9 * expect)
            throw ValidationError("apply_longrange: grid mismatch at bin " + std::to_string(j));
    }
    if (bank.k_modes() > coeffs_series.rows())
        throw ValidationError("apply_longrange: bank has more modes than the series");

    detail::RealFft fft(static_cast<int>(n));
    std::vector<std::complex<double>> spec(static_cast<std::size_t>(fft.bins()));
    Eigen::VectorXd x(n);
    for (int k = 0; k < bank.k_modes(); ++k) {
        x = coeffs_series.row(k).transpose();
        const double mean_before = x.mean();
        const double var_before = (x.array() - mean_before).square().sum() / n;

        fft.forward(x.data(), spec.data());
        for (Eigen::Index j = 1; j <= n_bins; ++j) {
            const double target = bank.amps(j - 1, k);
            const double mag = std::abs(spec[static_cast<std::size_t>(j)]);
            if (mag > 0.0)
                spec[static_cast<std::size_t>(j)] *= target / mag;
            else
                spec[static_cast<std::size_t>(j)] = target;
        }
        fft.inverse(spec.data(), x.data());

        // Exact variance restoration about the (untouched) mean.
        const double mean_after = x.mean();
        const double var_after = (x.array() - mean_after).square().sum() / n;
        if (var_after > 0.0 && var_before > 0.0) {
            const double gain = std::sqrt(var_before / var_after);
            x = (x.array() - mean_after) * gain + mean_after;
        }
        coeffs_series.row(k) = x.transpose();
    }
}

Eigen::MatrixXd synthesize_modes(const ReVarModel& model, const SynthesisRequest& req) {
    validate_model(model);
    if (req.n_steps < 1) throw ValidationError("synthesize: n_steps must be >= 1");

    const StabilityReport rep = is_stable(model.var);
    if (!rep.stable)
        throw NumericError("synthesize: model is unstable (spectral radius " +
                           std::to_string(rep.spectral_radius) +
                           "); refit with stabilization");

    const int rank = model.rank();
    const int order = model.var.order();
    const int burn = synthesis_burn_in(order);

    const Eigen::MatrixXd white =
        generate_noise(rank, req.n_steps + burn, req.seed);
    const Eigen::MatrixXd innov = colorize(model.rewhiten, white);
    Eigen::MatrixXd coeffs =
        simulate(model.var, innov, Eigen::MatrixXd::Zero(rank, order),
                 static_cast<int>(req.n_steps));

    if (req.apply_longrange && !model.longrange.empty()) {
        if (req.n_steps < 8) {
            std::cerr << "revar: series of " << req.n_steps
                      << " frames is too short for the long-range correction; skipped\n";
        } else {
            const LongRangeFilterBank bank =
                resample_bank(model.longrange, req.n_steps, model.geom.dt);
            apply_longrange(bank, coeffs, model.geom.dt);
        }
    }
    return coeffs;
}

WavefrontSeries synthesize(const ReVarModel& model, const SynthesisRequest& req) {
    const Eigen::MatrixXd coeffs = synthesize_modes(model, req);
    const Eigen::MatrixXd pixels = unwhiten(model.whitening, coeffs);
    WavefrontSeries out = devectorize(pixels, model.geom);
    out.label = "synth(model=" + model.label + ", seed=" + std::to_string(req.seed) +
                ", steps=" + std::to_string(req.n_steps) +
                (req.apply_longrange ? "" : ", longrange=off") + ")";
    return out;
}

}  // namespace revar
