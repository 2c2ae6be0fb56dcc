// revar: fit a generative wavefront model to a measured OPD series,
// synthesize arbitrarily long series from it, and compare spectra.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <string>

#include "revar/demo.hpp"
#include "revar/diagnostics.hpp"
#include "revar/errors.hpp"
#include "revar/fit.hpp"
#include "revar/io.hpp"
#include "revar/kolmogorov.hpp"
#include "revar/preprocess.hpp"
#include "revar/synthesis.hpp"

namespace {

using revar::FlowConditions;
using revar::WelchParams;

template <typename Fn>
int run_guarded(Fn&& fn) {
    try {
        fn();
        return 0;
    } catch (const revar::IoError& e) {
        std::cerr << "revar: io error: " << e.what() << "\n";
        return 2;
    } catch (const revar::ValidationError& e) {
        std::cerr << "revar: validation error: " << e.what() << "\n";
        return 3;
    } catch (const revar::NumericError& e) {
        std::cerr << "revar: numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "revar: error: " << e.what() << "\n";
        return 1;
    }
}

// Flat key=value config: unknown keys are rejected, values for options
// already given on the command line are ignored (flags win).
void apply_config_file(CLI::App* cmd, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw revar::IoError(path + ": cannot open config file");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw revar::ValidationError(path + ":" + std::to_string(lineno) +
                                         ": expected key=value");
        auto trim = [](const std::string& s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        for (char& c : key)
            if (c == '_') c = '-';
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr)
            throw revar::ValidationError(path + ":" + std::to_string(lineno) +
                                         ": unknown config key '" + key + "'");
        if (opt->count() > 0) continue;
        opt->add_result(value);
        opt->run_callback();
    }
}

struct FitArgs {
    std::string train_path;
    std::string out_path;
    double energy_threshold = 0.999;
    std::string order = "3";
    int k_modes = -1;
    bool remove_ttp = true;
    bool transpose = false;
    int welch_segment = 0;
    double welch_overlap = 0.5;
    std::uint64_t seed = 0;
};

int parse_order(const std::string& order) {
    if (order == "auto") return 0;
    try {
        const int p = std::stoi(order);
        if (p >= 1) return p;
    } catch (const std::exception&) {
    }
    throw revar::ValidationError("fit: order must be a positive integer or 'auto', got '" +
                                 order + "'");
}

int cmd_fit(const FitArgs& args) {
    return run_guarded([&] {
        if (args.train_path.empty()) throw revar::ValidationError("fit: --train is required");
        if (args.out_path.empty()) throw revar::ValidationError("fit: --out is required");
        revar::FitOptions opt;
        opt.energy_threshold = args.energy_threshold;
        opt.var_order = parse_order(args.order);
        opt.k_modes = args.k_modes;
        opt.remove_ttp = args.remove_ttp;
        opt.transpose = args.transpose;
        opt.welch.segment_len = args.welch_segment;
        opt.welch.overlap = args.welch_overlap;
        opt.seed = args.seed;

        char echo[512];
        std::snprintf(echo, sizeof(echo),
                      "cmd=fit train=%s energy_threshold=%.17g order=%s k_modes=%d "
                      "remove_ttp=%d transpose=%d welch_segment=%d welch_overlap=%.17g "
                      "seed=%llu",
                      args.train_path.c_str(), args.energy_threshold, args.order.c_str(),
                      args.k_modes, args.remove_ttp ? 1 : 0, args.transpose ? 1 : 0,
                      args.welch_segment, args.welch_overlap,
                      static_cast<unsigned long long>(args.seed));
        opt.config_echo = echo;

        const revar::WavefrontSeries train = revar::load_series(args.train_path);
        revar::FitReport report;
        const revar::ReVarModel model = revar::fit_revar(train, opt, &report);
        revar::save_model(model, args.out_path);

        std::printf("fit: %s -> %s\n", args.train_path.c_str(), args.out_path.c_str());
        std::printf("  rank r            %d  (%.4f%% energy)\n", report.rank,
                    100.0 * report.retained_energy);
        std::printf("  VAR order p       %d%s\n", report.order,
                    opt.var_order == 0 ? "  (BIC)" : "");
        std::printf("  spectral radius   %.6f%s\n", report.spectral_radius,
                    report.shrink_rho < 1.0 ? "  (stabilized)" : "  (stable)");
        std::printf("  whiteness         |cov-I|max %.4f, lag-1 max %.4f\n",
                    report.whiteness_cov_dev, report.whiteness_lag1);
        std::printf("  long-range bank   %d modes x %d bins\n", report.k_modes,
                    static_cast<int>(model.longrange.freqs.size()));
    });
}

struct SynthArgs {
    std::string model_path;
    std::string out_path;
    std::int64_t steps = 0;
    std::uint64_t seed = 0;
    bool no_longrange = false;
};

int cmd_synth(const SynthArgs& args) {
    return run_guarded([&] {
        if (args.model_path.empty()) throw revar::ValidationError("synth: --model is required");
        if (args.out_path.empty()) throw revar::ValidationError("synth: --out is required");
        if (args.steps < 1) throw revar::ValidationError("synth: --steps must be >= 1");
        const revar::ReVarModel model = revar::load_model(args.model_path);
        revar::SynthesisRequest req;
        req.n_steps = args.steps;
        req.seed = args.seed;
        req.apply_longrange = !args.no_longrange;

        revar::WavefrontSeries out = revar::synthesize(model, req);
        char echo[384];
        std::snprintf(echo, sizeof(echo), "cmd=synth model=%s steps=%lld seed=%llu longrange=%d",
                      args.model_path.c_str(), static_cast<long long>(args.steps),
                      static_cast<unsigned long long>(args.seed), args.no_longrange ? 0 : 1);
        out.meta = echo;
        revar::save_series(out, args.out_path);
        std::printf("synth: %lld frames -> %s\n", static_cast<long long>(args.steps),
                    args.out_path.c_str());
    });
}

struct TpsdArgs {
    std::string in_path;
    std::string out_path;
    std::string quantity = "opd";
    double u_inf = 1.0;
    double delta = 1.0;
    int welch_segment = 0;
    double welch_overlap = 0.5;
};

int cmd_tpsd(const TpsdArgs& args) {
    return run_guarded([&] {
        if (args.in_path.empty()) throw revar::ValidationError("tpsd: --in is required");
        if (args.out_path.empty()) throw revar::ValidationError("tpsd: --out is required");
        if (args.quantity != "opd" && args.quantity != "theta_x")
            throw revar::ValidationError("tpsd: quantity must be 'opd' or 'theta_x'");

        revar::WavefrontSeries series = revar::load_series(args.in_path);
        if (args.quantity == "theta_x") series = revar::deflection_x(series);

        WelchParams welch;
        welch.segment_len = args.welch_segment;
        welch.overlap = args.welch_overlap;
        const revar::TpsdCurve curve = revar::aggregate_tpsd(series, welch);

        revar::LabeledCurve labeled;
        labeled.label = series.label + " " + args.quantity;
        labeled.curve = curve;
        labeled.flow = FlowConditions{args.u_inf, args.delta};

        char echo[384];
        std::snprintf(echo, sizeof(echo),
                      "cmd=tpsd in=%s quantity=%s u_inf=%.17g delta=%.17g welch_segment=%d "
                      "welch_overlap=%.17g",
                      args.in_path.c_str(), args.quantity.c_str(), args.u_inf, args.delta,
                      args.welch_segment, args.welch_overlap);
        revar::export_plotdata({labeled}, args.out_path, echo);
        std::printf("tpsd: %s (%s) -> %s, %d bins, df=%g Hz\n", args.in_path.c_str(),
                    args.quantity.c_str(), args.out_path.c_str(),
                    static_cast<int>(curve.freqs.size()), curve.df);
    });
}

struct CompareArgs {
    std::string ref_path;
    std::string test_path;
    std::string json_path;
    double f_lo = 0.0;
    double f_hi = std::numeric_limits<double>::infinity();
};

int cmd_compare(const CompareArgs& args) {
    return run_guarded([&] {
        if (args.ref_path.empty() || args.test_path.empty())
            throw revar::ValidationError("compare: --ref and --test are required");
        const auto ref_curves = revar::parse_plotdata(args.ref_path);
        const auto test_curves = revar::parse_plotdata(args.test_path);
        const revar::MatchReport rep = revar::compare_tpsd(
            ref_curves.front().curve, test_curves.front().curve, args.f_lo, args.f_hi);

        std::printf("compare: ref=%s test=%s\n", args.ref_path.c_str(), args.test_path.c_str());
        std::printf("  range             %.6g .. %.6g Hz (%d third-decade bands)\n", rep.f_lo,
                    rep.f_hi, rep.band_count);
        std::printf("  integrated error  %.6g  (premultiplied, log-frequency measure)\n",
                    rep.integrated_error);
        std::printf("  power error       %.6g\n", rep.power_error);
        std::printf("  band log10 ratio  %.6g max\n", rep.max_band_log10);

        if (!args.json_path.empty()) {
            nlohmann::json j{{"ref", args.ref_path},
                             {"test", args.test_path},
                             {"f_lo", rep.f_lo},
                             {"f_hi", rep.f_hi},
                             {"band_count", rep.band_count},
                             {"integrated_error", rep.integrated_error},
                             {"power_error", rep.power_error},
                             {"max_band_log10", rep.max_band_log10}};
            std::ofstream out(args.json_path, std::ios::trunc);
            if (!out) throw revar::IoError(args.json_path + ": cannot open for writing");
            out << j.dump(2) << "\n";
        }
    });
}

struct KolmoArgs {
    double r0 = 0.1;
    double outer_scale = 0.0;  // <= 0 means infinite
    double inner_scale = 0.0;
    int n = 64;
    double dx = 0.01;
    double velocity = 0.0;
    double dt = 1e-3;
    int steps = 1;
    std::uint64_t seed = 0;
    double wavelength = 532e-9;
    std::string out_path;
};

int cmd_kolmo(const KolmoArgs& args) {
    return run_guarded([&] {
        if (args.out_path.empty()) throw revar::ValidationError("kolmo: --out is required");
        revar::TurbulenceParams params;
        params.r0 = args.r0;
        params.outer_scale = args.outer_scale > 0.0
                                 ? args.outer_scale
                                 : std::numeric_limits<double>::infinity();
        params.inner_scale = args.inner_scale;
        params.n = args.n;
        params.dx = args.dx;

        revar::WavefrontSeries series = revar::frozen_flow_series(
            params, args.velocity, args.dt, args.steps, args.seed, args.wavelength);
        char echo[384];
        std::snprintf(echo, sizeof(echo),
                      "cmd=kolmo r0=%.17g L0=%.17g l0=%.17g n=%d dx=%.17g velocity=%.17g "
                      "dt=%.17g steps=%d seed=%llu wavelength=%.17g",
                      args.r0, args.outer_scale, args.inner_scale, args.n, args.dx,
                      args.velocity, args.dt, args.steps,
                      static_cast<unsigned long long>(args.seed), args.wavelength);
        series.meta = echo;
        revar::save_series(series, args.out_path);
        std::printf("kolmo: %d frame(s) of %dx%d -> %s\n", args.steps, args.n, args.n,
                    args.out_path.c_str());
    });
}

struct DemoArgs {
    std::string out_path;
    int frames = 8192;
    int height = 32;
    int width = 32;
    int modes = 10;
    std::uint64_t seed = 1;
    double dt = 5e-5;
    double dx = 5e-4;
    double rms = 1e-7;
    bool full_mask = false;
};

int cmd_demo(const DemoArgs& args) {
    return run_guarded([&] {
        if (args.out_path.empty()) throw revar::ValidationError("demo: --out is required");
        revar::DemoParams params;
        params.height = args.height;
        params.width = args.width;
        params.n_frames = args.frames;
        params.n_modes = args.modes;
        params.seed = args.seed;
        params.dt = args.dt;
        params.dx = args.dx;
        params.rms = args.rms;
        params.circular_mask = !args.full_mask;

        revar::WavefrontSeries series = revar::make_demo_series(params);
        char echo[384];
        std::snprintf(echo, sizeof(echo),
                      "cmd=demo frames=%d height=%d width=%d modes=%d seed=%llu dt=%.17g "
                      "dx=%.17g rms=%.17g full_mask=%d",
                      args.frames, args.height, args.width, args.modes,
                      static_cast<unsigned long long>(args.seed), args.dt, args.dx, args.rms,
                      args.full_mask ? 1 : 0);
        series.meta = echo;
        revar::save_series(series, args.out_path);
        std::printf("demo: %d frames of %dx%d (%zu mask px) -> %s\n", args.frames, args.height,
                    args.width, series.geom.mask_count(), args.out_path.c_str());
    });
}

int cmd_info(const std::string& path) {
    return run_guarded([&] { std::printf("%s\n", revar::describe_file(path).c_str()); });
}

}  // namespace

int main(int argc, char** argv) try {
    CLI::App app{"revar: data-driven wavefront time-series modeling and synthesis"};
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "fit a model to a wavefront series");
    fit->add_option("--train", fit_args.train_path, "training series (.wfs)");
    fit->add_option("--out", fit_args.out_path, "output model (.rvm)");
    fit->add_option("--energy-threshold", fit_args.energy_threshold,
                    "retained spatial energy fraction in (0,1]")
        ->capture_default_str();
    fit->add_option("--order", fit_args.order, "VAR order p, or 'auto' for BIC selection")
        ->capture_default_str();
    fit->add_option("--k-modes", fit_args.k_modes,
                    "modes receiving the long-range correction, -1 = min(r, 10)")
        ->capture_default_str();
    fit->add_flag("--remove-ttp,!--no-remove-ttp", fit_args.remove_ttp,
                  "remove tip/tilt/piston before fitting (default on)");
    fit->add_flag("--transpose", fit_args.transpose,
                  "swap grid axes so stream-wise is +x");
    fit->add_option("--welch-segment", fit_args.welch_segment,
                    "Welch segment length, 0 = auto")
        ->capture_default_str();
    fit->add_option("--welch-overlap", fit_args.welch_overlap, "Welch overlap fraction")
        ->capture_default_str();
    fit->add_option("--seed", fit_args.seed, "provenance seed recorded in metadata")
        ->capture_default_str();

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "synthesize frames from a fitted model");
    synth->add_option("--model", synth_args.model_path, "model file (.rvm)");
    synth->add_option("--steps", synth_args.steps, "number of frames to generate");
    synth->add_option("--seed", synth_args.seed, "noise seed")->capture_default_str();
    synth->add_option("--out", synth_args.out_path, "output series (.wfs)");
    synth->add_flag("--no-longrange", synth_args.no_longrange,
                    "skip the long-range spectral correction");

    TpsdArgs tpsd_args;
    auto* tpsd = app.add_subcommand("tpsd", "aperture-averaged temporal PSD of a series");
    tpsd->add_option("--in", tpsd_args.in_path, "input series (.wfs)");
    tpsd->add_option("--out", tpsd_args.out_path, "output plot-data text file");
    tpsd->add_option("--quantity", tpsd_args.quantity, "opd or theta_x")
        ->capture_default_str();
    tpsd->add_option("--u-inf", tpsd_args.u_inf, "free-stream velocity [m/s]")
        ->capture_default_str();
    tpsd->add_option("--delta", tpsd_args.delta, "boundary-layer thickness [m]")
        ->capture_default_str();
    tpsd->add_option("--welch-segment", tpsd_args.welch_segment, "segment length, 0 = auto")
        ->capture_default_str();
    tpsd->add_option("--welch-overlap", tpsd_args.welch_overlap, "overlap fraction")
        ->capture_default_str();

    CompareArgs compare_args;
    auto* compare = app.add_subcommand("compare", "compare two TPSD plot-data files");
    compare->add_option("--ref", compare_args.ref_path, "reference plot-data file");
    compare->add_option("--test", compare_args.test_path, "test plot-data file");
    compare->add_option("--json", compare_args.json_path, "write the report as JSON");
    compare->add_option("--f-lo", compare_args.f_lo, "lower frequency clamp [Hz]")
        ->capture_default_str();
    compare->add_option("--f-hi", compare_args.f_hi, "upper frequency clamp [Hz]");

    KolmoArgs kolmo_args;
    auto* kolmo = app.add_subcommand("kolmo", "Kolmogorov/von Karman phase-screen baseline");
    kolmo->add_option("--r0", kolmo_args.r0, "Fried parameter [m]")->capture_default_str();
    kolmo->add_option("--L0", kolmo_args.outer_scale, "outer scale [m], <= 0 for infinite")
        ->capture_default_str();
    kolmo->add_option("--l0", kolmo_args.inner_scale, "inner scale [m]")->capture_default_str();
    kolmo->add_option("--n", kolmo_args.n, "grid size (power of two >= 16)")
        ->capture_default_str();
    kolmo->add_option("--dx", kolmo_args.dx, "grid spacing [m]")->capture_default_str();
    kolmo->add_option("--velocity", kolmo_args.velocity, "frozen-flow speed [m/s]")
        ->capture_default_str();
    kolmo->add_option("--dt", kolmo_args.dt, "frame interval [s]")->capture_default_str();
    kolmo->add_option("--steps", kolmo_args.steps, "number of frames")->capture_default_str();
    kolmo->add_option("--seed", kolmo_args.seed, "noise seed")->capture_default_str();
    kolmo->add_option("--wavelength", kolmo_args.wavelength, "phase-to-OPD wavelength [m]")
        ->capture_default_str();
    kolmo->add_option("--out", kolmo_args.out_path, "output series (.wfs)");

    DemoArgs demo_args;
    auto* demo = app.add_subcommand("demo", "generate the bundled synthetic training set");
    demo->add_option("--out", demo_args.out_path, "output series (.wfs)");
    demo->add_option("--frames", demo_args.frames, "frame count")->capture_default_str();
    demo->add_option("--height", demo_args.height, "grid rows")->capture_default_str();
    demo->add_option("--width", demo_args.width, "grid columns")->capture_default_str();
    demo->add_option("--modes", demo_args.modes, "planted spatial modes")->capture_default_str();
    demo->add_option("--seed", demo_args.seed, "noise seed")->capture_default_str();
    demo->add_option("--dt", demo_args.dt, "sample interval [s]")->capture_default_str();
    demo->add_option("--dx", demo_args.dx, "pixel pitch [m]")->capture_default_str();
    demo->add_option("--rms", demo_args.rms, "per-pixel OPD rms [m]")->capture_default_str();
    demo->add_flag("--full-mask", demo_args.full_mask, "rectangular instead of circular mask");

    std::string info_path;
    auto* info = app.add_subcommand("info", "describe a series or model file");
    info->add_option("path", info_path, "file to describe")->required();

    std::map<CLI::App*, std::string> config_paths;
    for (CLI::App* sub : {fit, synth, tpsd, compare, kolmo, demo})
        sub->add_option("--config", config_paths[sub],
                        "flat key=value config file; command-line flags override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }

    for (auto& [sub, path] : config_paths) {
        if (sub->parsed() && !path.empty()) {
            const int rc = run_guarded([&] { apply_config_file(sub, path); });
            if (rc != 0) return rc;
        }
    }

    if (fit->parsed()) return cmd_fit(fit_args);
    if (synth->parsed()) return cmd_synth(synth_args);
    if (tpsd->parsed()) return cmd_tpsd(tpsd_args);
    if (compare->parsed()) return cmd_compare(compare_args);
    if (kolmo->parsed()) return cmd_kolmo(kolmo_args);
    if (demo->parsed()) return cmd_demo(demo_args);
    if (info->parsed()) return cmd_info(info_path);
    return 3;
} catch (const std::exception& e) {
    std::cerr << "revar: error: " << e.what() << "\n";
    return 1;
}
