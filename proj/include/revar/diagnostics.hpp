#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "revar/series.hpp"

namespace revar {

/// One-sided temporal power spectral density. The grid starts at df (the
/// DC bin is excluded) and power integrates to the signal variance.
struct TpsdCurve {
    Eigen::VectorXd freqs;  ///< Hz, strictly increasing, freqs[0] == df
    Eigen::VectorXd power;  ///< X^2 * s, non-negative
    double df = 0.0;
};

/// Strouhal-scaled view of a TpsdCurve: st = f * delta / u_inf and the
/// pre-multiplied power st * S_X(f) used for visual integration on a
/// log-frequency axis.
struct StrouhalCurve {
    Eigen::VectorXd st;
    Eigen::VectorXd premultiplied;
};

struct WelchParams {
    int segment_len = 0;   ///< 0 = auto: 2^floor(log2(T/8)), at least 64
    double overlap = 0.5;  ///< fraction of segment_len, in [0, 1)
};

/// Result of comparing two TPSD curves on the reference grid.
struct MatchReport {
    double integrated_error = 0.0;   ///< relative integral of |premultiplied diff| in d(ln f)
    double power_error = 0.0;        ///< relative total-power difference
    double max_band_log10 = 0.0;     ///< max |log10 ratio| over 1/3-decade bands
    int band_count = 0;
    double f_lo = 0.0;               ///< compared range
    double f_hi = 0.0;
};

struct LabeledCurve {
    std::string label;
    TpsdCurve curve;
    FlowConditions flow;
};

/// Welch PSD estimate: Hann window, per-segment mean removal, one-sided
/// density with window-power normalization so that sum(power)*df matches
/// the signal variance. Throws ValidationError when the signal is shorter
/// than one segment or the segment is shorter than 8 samples.
TpsdCurve welch_psd(const Eigen::VectorXd& signal, double dt, const WelchParams& params);

/// Average of the per-pixel Welch TPSDs over all in-mask pixels.
TpsdCurve aggregate_tpsd(const WavefrontSeries& series, const WelchParams& params);

StrouhalCurve strouhal_premultiply(const TpsdCurve& curve, const FlowConditions& flow);

/// Compare two curves over their overlapping support, optionally clamped
/// to [f_lo, f_hi]. The test curve is resampled onto the reference grid by
/// log-log interpolation. Throws ValidationError on disjoint supports.
MatchReport compare_tpsd(const TpsdCurve& ref, const TpsdCurve& test, double f_lo = 0.0,
                         double f_hi = std::numeric_limits<double>::infinity());

/// Write curves as aligned text columns (f, St, S_X, St*S_X per curve)
/// with a comment header; parseable by parse_plotdata to 12+ significant
/// digits. `meta` is echoed as a comment line when non-empty.
void export_plotdata(const std::vector<LabeledCurve>& curves, const std::string& path,
                     const std::string& meta = "");

std::vector<LabeledCurve> parse_plotdata(const std::string& path);

}  // namespace revar
