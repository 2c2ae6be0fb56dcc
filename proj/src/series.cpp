#include "revar/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "revar/errors.hpp"

namespace revar {

namespace {

std::string pixel_name(int t, int y, int x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "(t=%d, y=%d, x=%d)", t, y, x);
    return buf;
}

}  // namespace

std::size_t GridGeometry::mask_count() const {
    return static_cast<std::size_t>(
        std::count_if(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; }));
}

WavefrontSeries make_zero_series(const GridGeometry& geom, int frame_count) {
    WavefrontSeries s;
    s.geom = geom;
    s.frame_count = frame_count;
    s.values.assign(static_cast<std::size_t>(frame_count) * geom.height * geom.width, 0.0);
    return s;
}

void validate_series(const WavefrontSeries& s) {
    if (s.frame_count < 1)
        throw ValidationError("series: frame count must be >= 1, got " +
                              std::to_string(s.frame_count));
    if (s.geom.height < 2 || s.geom.width < 2)
        throw ValidationError("series: grid must be at least 2x2, got " +
                              std::to_string(s.geom.height) + "x" + std::to_string(s.geom.width));
    if (!(s.geom.dt > 0.0)) throw ValidationError("series: dt must be > 0");
    if (!(s.geom.dx > 0.0)) throw ValidationError("series: dx must be > 0");

    const std::size_t n_px = static_cast<std::size_t>(s.geom.height) * s.geom.width;
    if (s.geom.mask.size() != n_px)
        throw ValidationError("series: mask size " + std::to_string(s.geom.mask.size()) +
                              " does not match grid " + std::to_string(n_px));
    if (s.values.size() != n_px * s.frame_count)
        throw ValidationError("series: value buffer size " + std::to_string(s.values.size()) +
                              " does not match T*H*W = " + std::to_string(n_px * s.frame_count));

    for (int t = 0; t < s.frame_count; ++t) {
        for (int y = 0; y < s.geom.height; ++y) {
            for (int x = 0; x < s.geom.width; ++x) {
                const double v = s.at(t, y, x);
                if (s.geom.in_mask(y, x)) {
                    if (!std::isfinite(v))
                        throw ValidationError("series: non-finite in-mask value at " +
                                              pixel_name(t, y, x));
                } else if (v != 0.0) {
                    throw ValidationError("series: out-of-mask pixel not zero at " +
                                          pixel_name(t, y, x));
                }
            }
        }
    }
}

void validate_flow(const FlowConditions& flow) {
    if (!(flow.u_inf > 0.0)) throw ValidationError("flow: u_inf must be > 0");
    if (!(flow.delta > 0.0)) throw ValidationError("flow: delta must be > 0");
}

}  // namespace revar
