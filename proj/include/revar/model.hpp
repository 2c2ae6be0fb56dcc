#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "revar/rewhiten.hpp"
#include "revar/series.hpp"
#include "revar/var.hpp"
#include "revar/whitening.hpp"

namespace revar {

/// Per-mode target amplitude spectra for the long-range temporal
/// correction. `amps` column k is the target amplitude of whitened mode k
/// sampled at `freqs` (Hz, one-sided, DC excluded). A fitted model stores
/// the bank on its training Welch grid; apply_longrange expects a bank
/// resampled onto the FFT grid of the series being corrected.
struct LongRangeFilterBank {
    Eigen::VectorXd freqs;  ///< strictly increasing, > 0
    Eigen::MatrixXd amps;   ///< freqs.size() x k_modes, non-negative

    int k_modes() const { return static_cast<int>(amps.cols()); }
    bool empty() const { return amps.cols() == 0 || freqs.size() == 0; }
};

/// Fit provenance carried inside the model file.
struct ModelMetadata {
    std::int64_t train_frames = 0;
    std::uint64_t seed = 0;          ///< provenance passthrough, 0 = unset
    double energy_threshold = 0.0;
    int var_order = 0;
    int k_modes = 0;
    double shrink_rho = 1.0;         ///< 1.0 = no stabilization applied
    double spectral_radius = 0.0;
    std::string config;              ///< effective config echo
};

/// Everything needed to synthesize: the whitening transform, the VAR
/// dynamics, the residual re-whitening, the grid geometry, and the optional
/// long-range spectra.
struct ReVarModel {
    WhiteningModel whitening;
    VarModel var;
    RewhitenModel rewhiten;
    GridGeometry geom;
    LongRangeFilterBank longrange;  ///< may be empty
    ModelMetadata meta;
    std::string label;

    int rank() const { return whitening.rank(); }
};

/// Cross-checks all stored dimensions (whitening rank = VAR dim = rewhiten
/// dim, mu length = mask count, bank width <= rank). Throws ValidationError
/// with message "inconsistent rank" on any mismatch.
void validate_model(const ReVarModel& model);

}  // namespace revar
