#include "revar/diagnostics.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fft_util.hpp"
#include "revar/errors.hpp"

namespace revar {

namespace {

constexpr double kPi = 3.14159265358979323846;

int auto_segment_len(Eigen::Index n_samples) {
    int seg = 64;
    while (2LL * seg <= n_samples / 8) seg *= 2;
    return seg;
}

int resolve_segment(Eigen::Index n_samples, const WelchParams& params) {
    const int seg = params.segment_len > 0 ? params.segment_len : auto_segment_len(n_samples);
    if (seg < 8)
        throw ValidationError("welch_psd: segment length must be >= 8, got " +
                              std::to_string(seg));
    if (n_samples < seg)
        throw ValidationError("welch_psd: signal too short (" + std::to_string(n_samples) +
                              " samples < segment " + std::to_string(seg) + ")");
    if (!(params.overlap >= 0.0) || params.overlap >= 1.0)
        throw ValidationError("welch_psd: overlap fraction must be in [0, 1)");
    return seg;
}

// Shared by welch_psd and aggregate_tpsd so the aperture average reuses
// one FFT plan across pixels.
class WelchEngine {
public:
    WelchEngine(Eigen::Index n_samples, double dt, const WelchParams& params)
        : seg_(resolve_segment(n_samples, params)),
          dt_(dt),
          hop_(std::max<Eigen::Index>(
              1, static_cast<Eigen::Index>(std::lround(seg_ * (1.0 - params.overlap))))),
          fft_(seg_),
          window_(seg_),
          buf_(seg_),
          spec_(static_cast<std::size_t>(seg_) / 2 + 1) {
        for (int i = 0; i < seg_; ++i)
            window_[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / seg_));
        window_power_ = window_.squaredNorm();
    }

    int bins() const { return seg_ / 2; }
    double df() const { return 1.0 / (seg_ * dt_); }

    Eigen::VectorXd estimate(const Eigen::VectorXd& signal) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(bins());
        const double scale = dt_ / window_power_;
        int count = 0;
        for (Eigen::Index start = 0; start + seg_ <= signal.size(); start += hop_) {
            const auto chunk = signal.segment(start, seg_);
            buf_ = (chunk.array() - chunk.mean()) * window_.array();
            fft_.forward(buf_.data(), spec_.data());
            for (int j = 1; j <= bins(); ++j) {
                double p = std::norm(spec_[static_cast<std::size_t>(j)]) * scale;
                if (!(seg_ % 2 == 0 && j == bins())) p *= 2.0;  // one-sided, Nyquist single
                acc[j - 1] += p;
            }
            ++count;
        }
        return acc / count;
    }

private:
    int seg_;
    double dt_;
    Eigen::Index hop_;
    detail::RealFft fft_;
    Eigen::VectorXd window_;
    double window_power_ = 0.0;
    Eigen::VectorXd buf_;
    std::vector<std::complex<double>> spec_;
};

TpsdCurve make_curve(const WelchEngine& engine, Eigen::VectorXd power) {
    TpsdCurve c;
    c.df = engine.df();
    c.power = std::move(power);
    c.freqs.resize(c.power.size());
    for (Eigen::Index j = 0; j < c.freqs.size(); ++j) c.freqs[j] = (j + 1) * c.df;
    return c;
}

}  // namespace

TpsdCurve welch_psd(const Eigen::VectorXd& signal, double dt, const WelchParams& params) {
    if (!(dt > 0.0)) throw ValidationError("welch_psd: dt must be > 0");
    WelchEngine engine(signal.size(), dt, params);
    return make_curve(engine, engine.estimate(signal));
}

TpsdCurve aggregate_tpsd(const WavefrontSeries& series, const WelchParams& params) {
    const std::size_t n_mask = series.geom.mask_count();
    if (n_mask == 0) throw ValidationError("aggregate_tpsd: mask has no pixels");

    WelchEngine engine(series.frame_count, series.geom.dt, params);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(engine.bins());
    Eigen::VectorXd signal(series.frame_count);
    for (int y = 0; y < series.geom.height; ++y) {
        for (int x = 0; x < series.geom.width; ++x) {
            if (!series.geom.in_mask(y, x)) continue;
            for (int t = 0; t < series.frame_count; ++t) signal[t] = series.at(t, y, x);
            sum += engine.estimate(signal);
        }
    }
    return make_curve(engine, sum / static_cast<double>(n_mask));
}

StrouhalCurve strouhal_premultiply(const TpsdCurve& curve, const FlowConditions& flow) {
    validate_flow(flow);
    StrouhalCurve out;
    out.st = curve.freqs * (flow.delta / flow.u_inf);
    out.premultiplied = out.st.cwiseProduct(curve.power);
    return out;
}

namespace {

bool same_grid(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) return false;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-12 * std::max(a[i], b[i])) return false;
    return true;
}

// Log-log linear interpolation with flat extrapolation; zero power values
// are floored for the log and restored afterwards.
double interp_loglog(const Eigen::VectorXd& f, const Eigen::VectorXd& s, double fq) {
    const Eigen::Index n = f.size();
    if (fq <= f[0]) return s[0];
    if (fq >= f[n - 1]) return s[n - 1];
    Eigen::Index hi = 1;
    while (f[hi] < fq) ++hi;
    const Eigen::Index lo = hi - 1;
    if (s[lo] <= 0.0 || s[hi] <= 0.0) {
        // Fall back to linear interpolation where a log is undefined.
        const double w = (fq - f[lo]) / (f[hi] - f[lo]);
        return (1.0 - w) * s[lo] + w * s[hi];
    }
    const double w = (std::log(fq) - std::log(f[lo])) / (std::log(f[hi]) - std::log(f[lo]));
    return std::exp((1.0 - w) * std::log(s[lo]) + w * std::log(s[hi]));
}

double rel_or_zero(double num, double den) {
    if (num == 0.0) return 0.0;
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    return num / den;
}

}  // namespace

MatchReport compare_tpsd(const TpsdCurve& ref, const TpsdCurve& test, double f_lo, double f_hi) {
    if (ref.freqs.size() == 0 || test.freqs.size() == 0)
        throw ValidationError("compare_tpsd: empty curve");

    const double lo = std::max({ref.freqs[0], test.freqs[0], f_lo});
    const double hi = std::min({ref.freqs[ref.freqs.size() - 1],
                                test.freqs[test.freqs.size() - 1], f_hi});
    if (!(lo <= hi)) throw ValidationError("compare_tpsd: disjoint supports");

    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < ref.freqs.size(); ++i)
        if (ref.freqs[i] >= lo && ref.freqs[i] <= hi) idx.push_back(i);
    if (idx.empty()) throw ValidationError("compare_tpsd: disjoint supports");

    const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXd f(n), s_ref(n), s_test(n);
    const bool shared = same_grid(ref.freqs, test.freqs);
    for (Eigen::Index k = 0; k < n; ++k) {
        f[k] = ref.freqs[idx[k]];
        s_ref[k] = ref.power[idx[k]];
        s_test[k] = shared ? test.power[idx[k]]
                           : interp_loglog(test.freqs, test.power, f[k]);
    }

    MatchReport rep;
    rep.f_lo = f[0];
    rep.f_hi = f[n - 1];

    // (a) integrated |premultiplied difference| in log-frequency measure.
    const Eigen::VectorXd pm_ref = f.cwiseProduct(s_ref);
    const Eigen::VectorXd pm_diff = (f.cwiseProduct(s_test) - pm_ref).cwiseAbs();
    if (n == 1) {
        rep.integrated_error = rel_or_zero(pm_diff[0], pm_ref[0]);
        rep.power_error = rel_or_zero(std::abs(s_test[0] - s_ref[0]), s_ref[0]);
    } else {
        double num = 0.0, den = 0.0, pow_ref = 0.0, pow_test = 0.0;
        for (Eigen::Index k = 0; k + 1 < n; ++k) {
            const double du = std::log(f[k + 1]) - std::log(f[k]);
            num += 0.5 * (pm_diff[k] + pm_diff[k + 1]) * du;
            den += 0.5 * (pm_ref[k] + pm_ref[k + 1]) * du;
            const double dfreq = f[k + 1] - f[k];
            pow_ref += 0.5 * (s_ref[k] + s_ref[k + 1]) * dfreq;
            pow_test += 0.5 * (s_test[k] + s_test[k + 1]) * dfreq;
        }
        rep.integrated_error = rel_or_zero(num, den);
        rep.power_error = rel_or_zero(std::abs(pow_test - pow_ref), pow_ref);
    }

    // (c) band-wise log ratio over 1/3-decade bands.
    const double band_w = 1.0 / 3.0;
    const int k0 = static_cast<int>(std::floor(std::log10(f[0]) / band_w));
    double band_ref = 0.0, band_test = 0.0;
    int band = k0;
    double max_log = 0.0;
    int bands = 0;
    auto flush_band = [&]() {
        if (band_ref == 0.0 && band_test == 0.0) return;
        ++bands;
        if (band_ref > 0.0 && band_test > 0.0)
            max_log = std::max(max_log, std::abs(std::log10(band_test / band_ref)));
        else
            max_log = std::numeric_limits<double>::infinity();
    };
    for (Eigen::Index k = 0; k < n; ++k) {
        const int b = static_cast<int>(std::floor(std::log10(f[k]) / band_w));
        if (b != band) {
            flush_band();
            band = b;
            band_ref = band_test = 0.0;
        }
        band_ref += s_ref[k];
        band_test += s_test[k];
    }
    flush_band();
    rep.max_band_log10 = max_log;
    rep.band_count = bands;
    return rep;
}

void export_plotdata(const std::vector<LabeledCurve>& curves, const std::string& path,
                     const std::string& meta) {
    if (curves.empty()) throw ValidationError("export_plotdata: no curves");

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError(path + ": cannot open for writing");

    out << "# tpsd curves:" << curves.size() << "\n";
    out << "# columns per curve: f_hz st s_x premult\n";
    if (!meta.empty()) out << "# config: " << meta << "\n";
    Eigen::Index rows = 0;
    char buf[128];
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const auto& c = curves[i];
        std::snprintf(buf, sizeof(buf), "%.17g", c.flow.u_inf);
        out << "# curve " << i << ": label=\"" << c.label << "\" points="
            << c.curve.freqs.size() << " u_inf=" << buf;
        std::snprintf(buf, sizeof(buf), "%.17g", c.flow.delta);
        out << " delta=" << buf << "\n";
        rows = std::max(rows, c.curve.freqs.size());
    }
    for (Eigen::Index rrow = 0; rrow < rows; ++rrow) {
        for (std::size_t i = 0; i < curves.size(); ++i) {
            const auto& c = curves[i];
            if (i > 0) out << "  ";
            if (rrow < c.curve.freqs.size()) {
                const double f = c.curve.freqs[rrow];
                const double s = c.curve.power[rrow];
                const double st = f * c.flow.delta / c.flow.u_inf;
                std::snprintf(buf, sizeof(buf), "%.15g %.15g %.15g %.15g", f, st, s, st * s);
                out << buf;
            } else {
                out << "nan nan nan nan";
            }
        }
        out << "\n";
    }
    if (!out) throw IoError(path + ": write failed");
}

std::vector<LabeledCurve> parse_plotdata(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open");

    std::vector<LabeledCurve> curves;
    std::vector<std::vector<double>> freq_cols, power_cols;
    std::string line;
    std::size_t n_curves = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# tpsd curves:", 0) == 0) {
                n_curves = static_cast<std::size_t>(std::stol(line.substr(14)));
                curves.resize(n_curves);
                freq_cols.resize(n_curves);
                power_cols.resize(n_curves);
            } else if (line.rfind("# curve ", 0) == 0) {
                const auto q1 = line.find('"');
                const auto q2 = line.find('"', q1 + 1);
                const std::size_t ci = static_cast<std::size_t>(std::stol(line.substr(8)));
                if (ci >= curves.size()) throw IoError(path + ": bad curve index in header");
                curves[ci].label = line.substr(q1 + 1, q2 - q1 - 1);
                const auto upos = line.find("u_inf=");
                const auto dpos = line.find("delta=");
                if (upos != std::string::npos)
                    curves[ci].flow.u_inf = std::strtod(line.c_str() + upos + 6, nullptr);
                if (dpos != std::string::npos)
                    curves[ci].flow.delta = std::strtod(line.c_str() + dpos + 6, nullptr);
            }
            continue;
        }
        if (n_curves == 0) throw IoError(path + ": data before header");
        // strtod-based split: stream extraction rejects the nan padding.
        const char* cursor = line.c_str();
        for (std::size_t i = 0; i < n_curves; ++i) {
            double vals[4];
            for (double& v : vals) {
                char* end = nullptr;
                v = std::strtod(cursor, &end);
                if (end == cursor) throw IoError(path + ": short data row");
                cursor = end;
            }
            if (std::isfinite(vals[0])) {
                freq_cols[i].push_back(vals[0]);
                power_cols[i].push_back(vals[2]);
            }
        }
    }
    if (n_curves == 0) throw IoError(path + ": not a tpsd plot-data file");

    for (std::size_t i = 0; i < n_curves; ++i) {
        auto& c = curves[i].curve;
        c.freqs = Eigen::Map<Eigen::VectorXd>(freq_cols[i].data(),
                                              static_cast<Eigen::Index>(freq_cols[i].size()));
        c.power = Eigen::Map<Eigen::VectorXd>(power_cols[i].data(),
                                              static_cast<Eigen::Index>(power_cols[i].size()));
        if (c.freqs.size() == 0) throw IoError(path + ": curve " + std::to_string(i) + " empty");
        c.df = c.freqs.size() > 1 ? c.freqs[1] - c.freqs[0] : c.freqs[0];
    }
    return curves;
}

}  // namespace revar
