#pragma once

#include <cstdint>
#include <string>

#include "revar/diagnostics.hpp"
#include "revar/model.hpp"
#include "revar/series.hpp"

namespace revar {

struct FitOptions {
    double energy_threshold = 0.999;
    int var_order = 3;      ///< <= 0 selects the order by BIC over 1..10
    int k_modes = -1;       ///< corrected modes; -1 = min(rank, 10)
    bool remove_ttp = true;
    bool transpose = false;
    WelchParams welch;      ///< grid for the long-range spectra
    std::uint64_t seed = 0; ///< provenance passthrough into metadata
    std::string config_echo;
};

/// Summary printed by the CLI after fitting.
struct FitReport {
    int rank = 0;
    int order = 0;
    double spectral_radius = 0.0;
    double shrink_rho = 1.0;
    double whiteness_cov_dev = 0.0;  ///< max |cov(W) - I|
    double whiteness_lag1 = 0.0;     ///< max |lag-1 cross-correlation of W|
    int k_modes = 0;
    double retained_energy = 0.0;    ///< fraction of spatial variance kept
};

/// Full analysis chain: conditioning, spatial PCA, VAR fit (stabilized if
/// needed), residual re-whitening, and the long-range spectra of the
/// leading modes.
ReVarModel fit_revar(const WavefrontSeries& train, const FitOptions& options,
                     FitReport* report = nullptr);

}  // namespace revar
