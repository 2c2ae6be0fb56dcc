#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "revar/diagnostics.hpp"
#include "revar/model.hpp"
#include "revar/series.hpp"

namespace revar {

struct SynthesisRequest {
    std::int64_t n_steps = 1;
    std::uint64_t seed = 0;
    bool apply_longrange = true;
};

/// i.i.d. standard normal samples, r x n. Deterministic for a fixed seed
/// (64-bit Mersenne Twister + Box-Muller, filled column by column).
Eigen::MatrixXd generate_noise(int rows, std::int64_t cols, std::uint64_t seed);

/// Smoothed per-mode amplitude targets from the training coefficient
/// series: Welch TPSD of each of the leading k_modes rows, boxcar-smoothed
/// over 1/6 decade in log frequency, stored on the Welch grid. k_modes = 0
/// yields an empty bank.
LongRangeFilterBank fit_mode_spectra(const Eigen::MatrixXd& coeffs_series, int k_modes,
                                     double dt, const WelchParams& params);

/// Interpolate a bank onto the one-sided FFT grid of an n_target-sample
/// series (log-log, flat beyond the stored support).
LongRangeFilterBank resample_bank(const LongRangeFilterBank& bank, std::int64_t n_target,
                                  double dt);

/// fit_mode_spectra followed by resample_bank: the target amplitude
/// spectra on the FFT grid of length n_target.
LongRangeFilterBank fit_longrange(const Eigen::MatrixXd& coeffs_series, int k_modes,
                                  std::int64_t n_target, double dt, const WelchParams& params);

/// Replace the amplitude spectrum of each corrected mode with the bank
/// target, preserving phases and restoring the mode's pre-correction
/// variance. The bank grid must match the FFT grid of the series
/// ("grid mismatch" otherwise). Uncorrected modes pass through unchanged.
void apply_longrange(const LongRangeFilterBank& bank, Eigen::MatrixXd& coeffs_series,
                     double dt);

/// Coefficient-space synthesis: seeded noise -> colorize -> VAR recursion
/// with burn-in -> optional long-range correction. Returns r x n_steps.
Eigen::MatrixXd synthesize_modes(const ReVarModel& model, const SynthesisRequest& req);

/// Full pipeline ending in unwhiten + devectorize. Output geometry is the
/// model geometry; the label records the seed and model provenance.
WavefrontSeries synthesize(const ReVarModel& model, const SynthesisRequest& req);

/// Burn-in used by synthesize ahead of the kept samples.
int synthesis_burn_in(int order);

}  // namespace revar
