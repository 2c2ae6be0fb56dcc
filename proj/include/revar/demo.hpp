#pragma once

#include <cstdint>

#include "revar/series.hpp"

namespace revar {

/// Parameters of the bundled synthetic training set: a planted VAR(2)
/// process over smooth orthonormal spatial modes on a circular aperture.
/// Mode dynamics mix slow AR(1) drifts with AR(2) resonators of spread
/// frequencies; innovations are cross-correlated between modes.
struct DemoParams {
    int height = 32;
    int width = 32;
    int n_frames = 8192;
    int n_modes = 10;
    std::uint64_t seed = 1;
    double dt = 5e-5;    ///< 20 kHz sampling
    double dx = 5e-4;    ///< 0.5 mm pitch
    double rms = 1e-7;   ///< per-pixel OPD rms [m]
    bool circular_mask = true;
};

WavefrontSeries make_demo_series(const DemoParams& params);

}  // namespace revar
