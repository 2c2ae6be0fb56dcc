#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace revar {

/// Fixed spatial grid shared by all frames of a series and by a trained
/// model: pixel dimensions, aperture mask, sample interval and pixel pitch.
struct GridGeometry {
    int height = 0;              ///< rows (y)
    int width = 0;               ///< columns (x)
    std::vector<std::uint8_t> mask;  ///< height*width, row-major, 1 = in aperture
    double dt = 0.0;             ///< sample interval [s]
    double dx = 0.0;             ///< pixel pitch [m]

    bool in_mask(int y, int x) const {
        return mask[static_cast<std::size_t>(y) * width + x] != 0;
    }
    std::size_t pixel_count() const { return mask.size(); }
    std::size_t mask_count() const;
};

/// Time series of optical-path-difference frames on a fixed masked grid.
/// Values are meters. Out-of-mask pixels hold 0 and are excluded from all
/// statistics. Frames are stored flat in (t, y, x) row-major order.
struct WavefrontSeries {
    GridGeometry geom;
    int frame_count = 0;
    std::vector<double> values;  ///< frame_count * height * width
    std::string label;
    std::string meta;  ///< free-form provenance (effective config echo)

    double& at(int t, int y, int x) {
        return values[(static_cast<std::size_t>(t) * geom.height + y) * geom.width + x];
    }
    double at(int t, int y, int x) const {
        return values[(static_cast<std::size_t>(t) * geom.height + y) * geom.width + x];
    }

    /// Read-only view of one frame as a height x width matrix.
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
    frame(int t) const {
        return {values.data() + static_cast<std::size_t>(t) * geom.height * geom.width,
                geom.height, geom.width};
    }
};

/// Deflection-angle series theta_x = d(OPD)/dx, radians. Shares the series
/// layout; the mask marks only pixels where the gradient stencil is valid.
using DeflectionSeries = WavefrontSeries;

/// Free-stream conditions used for Strouhal scaling of spectra.
struct FlowConditions {
    double u_inf = 1.0;  ///< free-stream velocity [m/s]
    double delta = 1.0;  ///< boundary-layer thickness [m]
};

/// Construct a series of zero frames over the given geometry.
WavefrontSeries make_zero_series(const GridGeometry& geom, int frame_count);

/// Full validation of all series invariants (dims, mask sentinel, finiteness).
/// Throws ValidationError naming the offending field or pixel.
void validate_series(const WavefrontSeries& s);

void validate_flow(const FlowConditions& flow);

}  // namespace revar
