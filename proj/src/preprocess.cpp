#include "revar/preprocess.hpp"

#include <string>

#include "revar/errors.hpp"

namespace revar {

PixelMatrix vectorize(const WavefrontSeries& series) {
    PixelMatrix out;
    for (int y = 0; y < series.geom.height; ++y)
        for (int x = 0; x < series.geom.width; ++x)
            if (series.geom.in_mask(y, x)) out.index_map.push_back({y, x});

    const auto n_mask = static_cast<Eigen::Index>(out.index_map.size());
    if (n_mask == 0) throw ValidationError("vectorize: mask has no pixels");

    out.data.resize(n_mask, series.frame_count);
    for (int t = 0; t < series.frame_count; ++t)
        for (Eigen::Index i = 0; i < n_mask; ++i)
            out.data(i, t) = series.at(t, out.index_map[i].y, out.index_map[i].x);
    return out;
}

WavefrontSeries devectorize(const Eigen::MatrixXd& data, const GridGeometry& geom) {
    const std::size_t n_mask = geom.mask_count();
    if (static_cast<std::size_t>(data.rows()) != n_mask)
        throw ValidationError("devectorize: row count " + std::to_string(data.rows()) +
                              " does not match mask pixel count " + std::to_string(n_mask));

    WavefrontSeries s = make_zero_series(geom, static_cast<int>(data.cols()));
    for (int t = 0; t < s.frame_count; ++t) {
        Eigen::Index i = 0;
        for (int y = 0; y < geom.height; ++y)
            for (int x = 0; x < geom.width; ++x)
                if (geom.in_mask(y, x)) s.at(t, y, x) = data(i++, t);
    }
    return s;
}

WavefrontSeries remove_ttp(const WavefrontSeries& series) {
    PixelMatrix px = vectorize(series);
    const auto n_mask = static_cast<Eigen::Index>(px.index_map.size());
    if (n_mask < 4) throw ValidationError("remove_ttp: TTP basis singular (mask < 4 pixels)");

    Eigen::MatrixXd basis(n_mask, 3);
    for (Eigen::Index i = 0; i < n_mask; ++i) {
        basis(i, 0) = 1.0;
        basis(i, 1) = px.index_map[i].x;
        basis(i, 2) = px.index_map[i].y;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
    if (qr.rank() < 3)
        throw ValidationError("remove_ttp: TTP basis singular (mask pixels collinear)");

    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n_mask, 3);
    px.data -= q * (q.transpose() * px.data);

    WavefrontSeries out = devectorize(px.data, series.geom);
    out.label = series.label;
    out.meta = series.meta;
    return out;
}

DeflectionSeries deflection_x(const WavefrontSeries& series) {
    if (series.geom.width < 3)
        throw ValidationError("deflection_x: width must be >= 3 for the central stencil");

    GridGeometry geom = series.geom;
    for (int y = 0; y < geom.height; ++y) {
        for (int x = 0; x < geom.width; ++x) {
            const bool ok = x >= 1 && x + 1 < geom.width && series.geom.in_mask(y, x) &&
                            series.geom.in_mask(y, x - 1) && series.geom.in_mask(y, x + 1);
            geom.mask[static_cast<std::size_t>(y) * geom.width + x] = ok ? 1 : 0;
        }
    }

    DeflectionSeries out = make_zero_series(geom, series.frame_count);
    const double inv_2dx = 1.0 / (2.0 * series.geom.dx);
    for (int t = 0; t < series.frame_count; ++t)
        for (int y = 0; y < geom.height; ++y)
            for (int x = 1; x + 1 < geom.width; ++x)
                if (geom.in_mask(y, x))
                    out.at(t, y, x) = (series.at(t, y, x + 1) - series.at(t, y, x - 1)) * inv_2dx;

    out.label = series.label;
    out.meta = series.meta;
    return out;
}

WavefrontSeries transpose_series(const WavefrontSeries& series) {
    GridGeometry geom = series.geom;
    geom.height = series.geom.width;
    geom.width = series.geom.height;
    for (int y = 0; y < geom.height; ++y)
        for (int x = 0; x < geom.width; ++x)
            geom.mask[static_cast<std::size_t>(y) * geom.width + x] =
                series.geom.mask[static_cast<std::size_t>(x) * series.geom.width + y];

    WavefrontSeries out = make_zero_series(geom, series.frame_count);
    for (int t = 0; t < series.frame_count; ++t)
        for (int y = 0; y < geom.height; ++y)
            for (int x = 0; x < geom.width; ++x)
                out.at(t, y, x) = series.at(t, x, y);
    out.label = series.label;
    out.meta = series.meta;
    return out;
}

}  // namespace revar
