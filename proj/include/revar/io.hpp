#pragma once

#include <string>

#include "revar/model.hpp"
#include "revar/series.hpp"

namespace revar {

/// Container format version written by save_series / save_model.
inline constexpr int kFormatVersion = 1;

/// Load a wavefront series container. Throws IoError for a malformed
/// container (bad magic, unknown version, payload size mismatch, broken
/// header field) and ValidationError when the decoded content violates a
/// series invariant.
WavefrontSeries load_series(const std::string& path);

/// Write the series container: magic line, text header with declared block
/// offsets, raw little-endian float64 frames in (t, y, x) order, then the
/// mask as one byte per pixel. Round-trips bit-exactly through load_series.
void save_series(const WavefrontSeries& series, const std::string& path);

ReVarModel load_model(const std::string& path);
void save_model(const ReVarModel& model, const std::string& path);

/// One-line human summary (dims, dt/dx, label for a series; rank, order,
/// spectral radius for a model). Rejects unknown magic.
std::string describe_file(const std::string& path);

}  // namespace revar
