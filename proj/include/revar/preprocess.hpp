#pragma once

#include <Eigen/Dense>
#include <vector>

#include "revar/series.hpp"

namespace revar {

struct PixelCoord {
    int y = 0;
    int x = 0;
    bool operator==(const PixelCoord&) const = default;
};

/// Masked frames stacked as columns: P in-mask pixels x T frames.
/// index_map[i] is the (y, x) grid coordinate of row i, in row-major
/// scan order.
struct PixelMatrix {
    Eigen::MatrixXd data;
    std::vector<PixelCoord> index_map;
};

/// Stack in-mask pixels of every frame into a P x T matrix.
/// Throws ValidationError when the mask has no pixels.
PixelMatrix vectorize(const WavefrontSeries& series);

/// Exact inverse of vectorize on in-mask pixels; out-of-mask pixels are 0.
WavefrontSeries devectorize(const Eigen::MatrixXd& data, const GridGeometry& geom);

/// Remove per-frame tip, tilt and piston: each frame is replaced by its
/// residual after least-squares projection onto span{1, x, y} over the
/// in-mask pixels. Throws ValidationError for a degenerate mask
/// ("TTP basis singular": fewer than 4 pixels or all collinear).
WavefrontSeries remove_ttp(const WavefrontSeries& series);

/// Stream-wise deflection angle theta_x = d(OPD)/dx by central differences.
/// The output mask keeps only pixels whose full three-point stencil is
/// in-mask. Requires width >= 3.
DeflectionSeries deflection_x(const WavefrontSeries& series);

/// Swap the grid axes of a series (used when the stream-wise direction of
/// the input data is the row axis).
WavefrontSeries transpose_series(const WavefrontSeries& series);

}  // namespace revar
